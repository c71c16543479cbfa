// Copyright 2026 The Ketsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ketsim/sparse.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace ketsim {

namespace {
bool is_pow2(uint64_t x) { return x != 0 && (x & (x - 1)) == 0; }
}  // namespace

int SparseMatrix::qubits() const {
    return dim_ == 0 ? 0 : std::countr_zero(dim_);
}

SparseMatrix SparseMatrix::identity(uint64_t dim) {
    std::vector<Entry> e;
    e.reserve(dim);
    for (uint64_t i = 0; i < dim; i++) e.push_back({i, i, Amp(1, 0)});
    return from_entries(dim, std::move(e));
}

SparseMatrix SparseMatrix::from_entries(uint64_t dim, std::vector<Entry> entries) {
    if (!is_pow2(dim)) throw InvalidArgument("matrix dimension must be a power of two");
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m;
    m.dim_ = dim;
    m.rowStart_.assign(dim + 1, 0);
    m.col_.reserve(entries.size());
    m.val_.reserve(entries.size());
    uint64_t prevRow = ~0ull, prevCol = ~0ull;
    for (const Entry& e : entries) {
        if (e.row >= dim || e.col >= dim) throw InvalidArgument("matrix entry out of range");
        if (e.row == prevRow && e.col == prevCol)
            throw InvalidArgument("duplicate matrix entry at (" + std::to_string(e.row) + "," +
                                  std::to_string(e.col) + ")");
        if (e.val == Amp(0, 0)) { prevRow = e.row; prevCol = e.col; continue; }
        prevRow = e.row;
        prevCol = e.col;
        m.rowStart_[e.row + 1]++;
        m.col_.push_back(e.col);
        m.val_.push_back(e.val);
    }
    for (uint64_t r = 0; r < dim; r++) m.rowStart_[r + 1] += m.rowStart_[r];
    return m;
}

SparseMatrix SparseMatrix::from_dense(uint64_t dim, std::span<const Amp> rowMajor) {
    if (rowMajor.size() != dim * dim) throw InvalidArgument("dense size mismatch");
    std::vector<Entry> e;
    for (uint64_t r = 0; r < dim; r++)
        for (uint64_t c = 0; c < dim; c++)
            if (rowMajor[r * dim + c] != Amp(0, 0)) e.push_back({r, c, rowMajor[r * dim + c]});
    return from_entries(dim, std::move(e));
}

Amp SparseMatrix::entry(uint64_t row, uint64_t col) const {
    for (uint64_t i = rowStart_[row]; i < rowStart_[row + 1]; i++)
        if (col_[i] == col) return val_[i];
    return Amp(0, 0);
}

void SparseMatrix::to_dense(std::vector<Amp>& out) const {
    out.assign(dim_ * dim_, Amp(0, 0));
    for (uint64_t r = 0; r < dim_; r++)
        for (uint64_t i = rowStart_[r]; i < rowStart_[r + 1]; i++) out[r * dim_ + col_[i]] = val_[i];
}

std::vector<SparseMatrix::Entry> SparseMatrix::entries() const {
    std::vector<Entry> out;
    out.reserve(nnz());
    for (uint64_t r = 0; r < dim_; r++)
        for (uint64_t i = rowStart_[r]; i < rowStart_[r + 1]; i++) out.push_back({r, col_[i], val_[i]});
    return out;
}

std::span<const uint64_t> SparseMatrix::row_cols(uint64_t row) const {
    return {col_.data() + rowStart_[row], col_.data() + rowStart_[row + 1]};
}

std::span<const Amp> SparseMatrix::row_vals(uint64_t row) const {
    return {val_.data() + rowStart_[row], val_.data() + rowStart_[row + 1]};
}

bool SparseMatrix::is_diagonal() const {
    for (uint64_t r = 0; r < dim_; r++)
        for (uint64_t i = rowStart_[r]; i < rowStart_[r + 1]; i++)
            if (col_[i] != r) return false;
    return true;
}

bool SparseMatrix::is_generalized_permutation() const {
    if (nnz() != dim_) return false;
    std::vector<bool> seen(dim_, false);
    for (uint64_t r = 0; r < dim_; r++) {
        if (rowStart_[r + 1] - rowStart_[r] != 1) return false;
        uint64_t c = col_[rowStart_[r]];
        if (seen[c]) return false;
        seen[c] = true;
    }
    return true;
}

SparseMatrix SparseMatrix::adjoint() const {
    std::vector<Entry> e;
    e.reserve(nnz());
    for (uint64_t r = 0; r < dim_; r++)
        for (uint64_t i = rowStart_[r]; i < rowStart_[r + 1]; i++)
            e.push_back({col_[i], r, std::conj(val_[i])});
    return from_entries(dim_, std::move(e));
}

std::optional<SparseMatrix> SparseMatrix::multiply(const SparseMatrix& rhs, uint64_t nnzCap) const {
    if (dim_ != rhs.dim_) throw InvalidArgument("matrix dimension mismatch in multiply");
    std::vector<Entry> out;
    std::vector<Amp> acc(dim_, Amp(0, 0));
    std::vector<uint64_t> touched;
    touched.reserve(64);
    for (uint64_t r = 0; r < dim_; r++) {
        touched.clear();
        for (uint64_t i = rowStart_[r]; i < rowStart_[r + 1]; i++) {
            uint64_t k = col_[i];
            Amp va = val_[i];
            for (uint64_t j = rhs.rowStart_[k]; j < rhs.rowStart_[k + 1]; j++) {
                uint64_t c = rhs.col_[j];
                if (acc[c] == Amp(0, 0)) touched.push_back(c);
                acc[c] += va * rhs.val_[j];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (uint64_t c : touched) {
            if (acc[c] != Amp(0, 0)) out.push_back({r, c, acc[c]});
            acc[c] = Amp(0, 0);
        }
        if (nnzCap != 0 && out.size() > nnzCap) return std::nullopt;
    }
    return from_entries(dim_, std::move(out));
}

std::vector<Amp> SparseMatrix::apply(std::span<const Amp> v) const {
    if (v.size() != dim_) throw InvalidArgument("vector size mismatch");
    std::vector<Amp> out(dim_, Amp(0, 0));
    for (uint64_t r = 0; r < dim_; r++) {
        Amp s(0, 0);
        for (uint64_t i = rowStart_[r]; i < rowStart_[r + 1]; i++) s += val_[i] * v[col_[i]];
        out[r] = s;
    }
    return out;
}

SparseMatrix SparseMatrix::embed(std::span<const int> positions, int spanQubits) const {
    int k = qubits();
    if (static_cast<int>(positions.size()) != k) throw InvalidArgument("embed: position count mismatch");
    uint64_t spanDim = 1ull << spanQubits;
    // Bit index (from LSB) of gate qubit i within the span.
    std::vector<int> bit(k);
    uint64_t targetMask = 0;
    for (int i = 0; i < k; i++) {
        if (positions[i] < 0 || positions[i] >= spanQubits) throw InvalidArgument("embed: position out of range");
        bit[i] = spanQubits - 1 - positions[i];
        targetMask |= 1ull << bit[i];
    }
    // Context values are the non-target bits.
    std::vector<int> ctxBits;
    for (int b = 0; b < spanQubits; b++)
        if (!(targetMask >> b & 1)) ctxBits.push_back(b);
    uint64_t nCtx = 1ull << ctxBits.size();

    auto scatter = [&](uint64_t gateIndex) {
        uint64_t out = 0;
        for (int i = 0; i < k; i++)
            if (gateIndex >> (k - 1 - i) & 1) out |= 1ull << bit[i];
        return out;
    };
    std::vector<Entry> out;
    out.reserve(nnz() * nCtx);
    for (uint64_t r = 0; r < dim_; r++) {
        uint64_t rs = scatter(r);
        for (uint64_t i = rowStart_[r]; i < rowStart_[r + 1]; i++) {
            uint64_t cs = scatter(col_[i]);
            for (uint64_t ctx = 0; ctx < nCtx; ctx++) {
                uint64_t spread = 0;
                for (size_t b = 0; b < ctxBits.size(); b++)
                    if (ctx >> b & 1) spread |= 1ull << ctxBits[b];
                out.push_back({rs | spread, cs | spread, val_[i]});
            }
        }
    }
    (void)spanDim;
    return from_entries(spanDim, std::move(out));
}

double SparseMatrix::unitarity_defect() const {
    auto prod = adjoint().multiply(*this);
    double worst = 0;
    // Walk the dense support of U'U - I.
    std::vector<bool> diagSeen(dim_, false);
    const SparseMatrix& p = *prod;
    for (uint64_t r = 0; r < dim_; r++) {
        for (uint64_t i = p.rowStart_[r]; i < p.rowStart_[r + 1]; i++) {
            Amp v = p.val_[i];
            if (p.col_[i] == r) {
                diagSeen[r] = true;
                v -= Amp(1, 0);
            }
            worst = std::max(worst, std::abs(v));
        }
    }
    for (uint64_t r = 0; r < dim_; r++)
        if (!diagSeen[r]) worst = std::max(worst, 1.0);
    return worst;
}

double SparseMatrix::unitarity_defect_sampled(Prng& rng, int samples) const {
    double worst = 0;
    SparseMatrix adj = adjoint();
    for (int s = 0; s < samples; s++) {
        std::vector<Amp> x(dim_);
        double norm2 = 0;
        for (auto& a : x) {
            a = Amp(rng.next_double() - 0.5, rng.next_double() - 0.5);
            norm2 += std::norm(a);
        }
        double inv = 1.0 / std::sqrt(norm2);
        for (auto& a : x) a *= inv;
        std::vector<Amp> ux = apply(x);
        std::vector<Amp> back = adj.apply(ux);
        for (uint64_t i = 0; i < dim_; i++) worst = std::max(worst, std::abs(back[i] - x[i]));
    }
    return worst;
}

bool SparseMatrix::approx_equal(const SparseMatrix& other, double tol) const {
    if (dim_ != other.dim_) return false;
    return max_abs_diff(*this, other, false) <= tol;
}

bool SparseMatrix::bit_equal(const SparseMatrix& other) const {
    return dim_ == other.dim_ && rowStart_ == other.rowStart_ && col_ == other.col_ &&
           std::memcmp(val_.data(), other.val_.data(), val_.size() * sizeof(Amp)) == 0;
}

double SparseMatrix::max_abs_diff(const SparseMatrix& a, const SparseMatrix& b, bool phaseFree) {
    if (a.dim_ != b.dim_) return 1e300;
    Amp phase(1, 0);
    if (phaseFree) {
        // Align phases on the largest entry of a.
        uint64_t br = 0, bc = 0;
        double best = -1;
        for (uint64_t r = 0; r < a.dim_; r++)
            for (uint64_t i = a.rowStart_[r]; i < a.rowStart_[r + 1]; i++)
                if (std::abs(a.val_[i]) > best) { best = std::abs(a.val_[i]); br = r; bc = a.col_[i]; }
        Amp va = a.entry(br, bc), vb = b.entry(br, bc);
        if (std::abs(vb) > 1e-300) phase = (va / vb) / std::abs(va / vb);
    }
    double worst = 0;
    auto walk = [&](const SparseMatrix& x, const SparseMatrix& y, bool flip) {
        for (uint64_t r = 0; r < x.dim_; r++)
            for (uint64_t i = x.rowStart_[r]; i < x.rowStart_[r + 1]; i++) {
                Amp xv = x.val_[i];
                Amp yv = y.entry(r, x.col_[i]);
                Amp d = flip ? (yv * phase - xv) : (xv - yv * phase);
                worst = std::max(worst, std::abs(d));
            }
    };
    walk(a, b, false);
    walk(b, a, true);  // catches entries present only in b
    return worst;
}

SparseMatrix reunitarize(const SparseMatrix& u) {
    if (u.dim() > 4096) throw TooLarge("reunitarize limited to dim <= 4096");
    double defect = u.unitarity_defect();
    if (defect <= 1e-12) return u;
    if (defect >= 0.01) throw NonUnitaryGate("matrix too far from unitary to repair");
    uint64_t n = u.dim();
    std::vector<Amp> m;
    u.to_dense(m);
    // Modified Gram-Schmidt over columns.
    for (uint64_t j = 0; j < n; j++) {
        for (uint64_t i = 0; i < j; i++) {
            Amp dot(0, 0);
            for (uint64_t r = 0; r < n; r++) dot += std::conj(m[r * n + i]) * m[r * n + j];
            for (uint64_t r = 0; r < n; r++) m[r * n + j] -= dot * m[r * n + i];
        }
        double norm2 = 0;
        for (uint64_t r = 0; r < n; r++) norm2 += std::norm(m[r * n + j]);
        if (norm2 < 1e-20) throw NonUnitaryGate("rank-deficient matrix in reunitarize");
        double inv = 1.0 / std::sqrt(norm2);
        for (uint64_t r = 0; r < n; r++) m[r * n + j] *= inv;
    }
    return SparseMatrix::from_dense(n, m);
}

}  // namespace ketsim
