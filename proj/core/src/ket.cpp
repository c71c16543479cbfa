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

#include "ketsim/ket.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <thread>

namespace ketsim {

namespace {

std::atomic<unsigned> g_threads{0};

unsigned resolved_threads() {
    unsigned t = g_threads.load(std::memory_order_relaxed);
    if (t == 0) {
        t = std::thread::hardware_concurrency();
        if (t == 0) t = 1;
    }
    return t;
}

/// Run fn over [0, n) in contiguous chunks. Chunking is independent of the
/// thread count so that any parallel split writes exactly what the serial
/// loop would.
template <typename F>
void parallel_for(uint64_t n, uint64_t grain, F&& fn) {
    unsigned workers = resolved_threads();
    if (workers <= 1 || n < 2 * grain) {
        fn(0, n);
        return;
    }
    uint64_t chunks = std::min<uint64_t>(workers, (n + grain - 1) / grain);
    uint64_t step = (n + chunks - 1) / chunks;
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    for (uint64_t c = 0; c < chunks; c++) {
        uint64_t lo = c * step, hi = std::min(n, lo + step);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] { fn(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

/// Deterministic sum of squared magnitudes: fixed 64k chunks accumulated in
/// order regardless of threading.
double norm2_of(const std::vector<Amp>& v) {
    constexpr uint64_t kChunk = 1ull << 16;
    uint64_t chunks = (v.size() + kChunk - 1) / kChunk;
    std::vector<double> partial(chunks, 0.0);
    parallel_for(chunks, 1, [&](uint64_t lo, uint64_t hi) {
        for (uint64_t c = lo; c < hi; c++) {
            double s = 0;
            uint64_t e = std::min<uint64_t>(v.size(), (c + 1) * kChunk);
            for (uint64_t i = c * kChunk; i < e; i++) s += std::norm(v[i]);
            partial[c] = s;
        }
    });
    double total = 0;
    for (double p : partial) total += p;
    return total;
}

constexpr double kDetTol = 1e-12;  // deterministic-outcome threshold

}  // namespace

void set_engine_threads(unsigned n) { g_threads.store(n, std::memory_order_relaxed); }
unsigned engine_threads() { return resolved_threads(); }

Ket::Ket(uint32_t n, uint64_t seed) : n_(n), rng_(seed) {
    if (n == 0) throw InvalidArgument("Ket needs at least one qubit");
    groups_.resize(n);
    groupOf_.resize(n);
    posOf_.resize(n);
    bits_.assign(n, Bit::Unknown);
    for (uint32_t i = 0; i < n; i++) {
        groups_[i].members = {i};
        groups_[i].amps = {Amp(1, 0), Amp(0, 0)};
        groupOf_[i] = i;
        posOf_[i] = 0;
    }
}

void Ket::check_wire(WireId w) const {
    if (w >= n_) throw InvalidWire("wire " + std::to_string(w) + " out of range (n=" + std::to_string(n_) + ")");
}

uint64_t Ket::total_amplitudes() const {
    uint64_t total = 0;
    for (const auto& g : groups_) total += g.amps.size();
    return total;
}

uint32_t Ket::group_count() const {
    uint32_t c = 0;
    for (const auto& g : groups_) c += !g.members.empty();
    return c;
}

uint32_t Ket::group_size(WireId w) const {
    check_wire(w);
    return static_cast<uint32_t>(groups_[groupOf_[w]].members.size());
}

Bit Ket::bit(WireId w) const {
    check_wire(w);
    return bits_[w];
}

void Ket::set_bit(WireId w, Bit b) {
    check_wire(w);
    bits_[w] = b;
}

uint32_t Ket::fresh_group_slot() {
    if (!freeSlots_.empty()) {
        uint32_t s = freeSlots_.back();
        freeSlots_.pop_back();
        return s;
    }
    groups_.emplace_back();
    return static_cast<uint32_t>(groups_.size() - 1);
}

uint32_t Ket::merge_groups_for(std::span<const WireId> wires) {
    std::vector<uint32_t> order;  // distinct groups in first-encounter order
    for (WireId w : wires) {
        uint32_t g = groupOf_[w];
        if (std::find(order.begin(), order.end(), g) == order.end()) order.push_back(g);
    }
    if (order.size() == 1) return order[0];

    uint64_t mergedSize = 1;
    uint32_t mergedQubits = 0;
    for (uint32_t g : order) {
        mergedSize *= groups_[g].amps.size();
        mergedQubits += groups_[g].members.size();
    }
    if (mergedSize > ampBudget_)
        throw TooLarge("entangling would need " + std::to_string(mergedSize) +
                       " amplitudes, over the budget of " + std::to_string(ampBudget_));

    Group merged;
    merged.members.reserve(mergedQubits);
    merged.amps = {Amp(1, 0)};
    for (uint32_t g : order) {
        Group& src = groups_[g];
        // Tensor: existing amplitudes become the most significant block.
        std::vector<Amp> next(merged.amps.size() * src.amps.size());
        uint64_t inner = src.amps.size();
        parallel_for(merged.amps.size(), 1ull << 12, [&](uint64_t lo, uint64_t hi) {
            for (uint64_t i = lo; i < hi; i++) {
                Amp a = merged.amps[i];
                if (a == Amp(0, 0)) continue;
                for (uint64_t j = 0; j < inner; j++) next[i * inner + j] = a * src.amps[j];
            }
        });
        merged.amps = std::move(next);
        merged.members.insert(merged.members.end(), src.members.begin(), src.members.end());
        src.members.clear();
        src.amps.clear();
        src.amps.shrink_to_fit();
        if (g != order[0]) freeSlots_.push_back(g);
    }
    uint32_t slot = order[0];
    groups_[slot] = std::move(merged);
    for (uint32_t p = 0; p < groups_[slot].members.size(); p++) {
        groupOf_[groups_[slot].members[p]] = slot;
        posOf_[groups_[slot].members[p]] = p;
    }
    stats_.max_entangled = std::max<uint32_t>(stats_.max_entangled, groups_[slot].members.size());
    return slot;
}

void Ket::permute_targets_to_top(uint32_t gi, std::span<const WireId> wires) {
    Group& g = groups_[gi];
    uint32_t m = static_cast<uint32_t>(g.members.size());
    std::vector<WireId> newOrder(wires.begin(), wires.end());
    for (WireId w : g.members)
        if (std::find(wires.begin(), wires.end(), w) == wires.end()) newOrder.push_back(w);

    // newBit -> oldBit (LSB-numbered bit positions).
    std::vector<int> src(m);
    bool already = true;
    for (uint32_t p = 0; p < m; p++) {
        uint32_t oldPos = posOf_[newOrder[p]];
        src[m - 1 - p] = m - 1 - oldPos;
        if (newOrder[p] != g.members[p]) already = false;
    }
    if (already) return;

    std::vector<Amp> out(g.amps.size());
    parallel_for(g.amps.size(), 1ull << 14, [&](uint64_t lo, uint64_t hi) {
        for (uint64_t i = lo; i < hi; i++) {
            uint64_t o = 0;
            for (uint32_t b = 0; b < m; b++)
                if (i >> b & 1) o |= 1ull << src[b];
            out[i] = g.amps[o];
        }
    });
    g.amps = std::move(out);
    g.members = std::move(newOrder);
    for (uint32_t p = 0; p < m; p++) posOf_[g.members[p]] = p;
    stats_.state_permuted++;
}

void Ket::apply_diagonal(Group& g, const SparseMatrix& u, const std::vector<int>& bits) {
    int k = static_cast<int>(bits.size());
    std::vector<Amp> diag(u.dim());
    for (uint64_t r = 0; r < u.dim(); r++) diag[r] = u.entry(r, r);
    parallel_for(g.amps.size(), 1ull << 14, [&](uint64_t lo, uint64_t hi) {
        for (uint64_t i = lo; i < hi; i++) {
            uint64_t gi = 0;
            for (int b = 0; b < k; b++)
                if (i >> bits[b] & 1) gi |= 1ull << (k - 1 - b);
            g.amps[i] *= diag[gi];
        }
    });
}

void Ket::apply_permutation(Group& g, const SparseMatrix& u, const std::vector<int>& bits) {
    int k = static_cast<int>(bits.size());
    // row -> (source col, phase)
    std::vector<uint64_t> srcCol(u.dim());
    std::vector<Amp> phase(u.dim());
    for (uint64_t r = 0; r < u.dim(); r++) {
        srcCol[r] = u.row_cols(r)[0];
        phase[r] = u.row_vals(r)[0];
    }
    uint64_t keep = ~0ull;
    for (int b : bits) keep &= ~(1ull << b);
    std::vector<Amp> out(g.amps.size());
    parallel_for(g.amps.size(), 1ull << 14, [&](uint64_t lo, uint64_t hi) {
        for (uint64_t i = lo; i < hi; i++) {
            uint64_t row = 0;
            for (int b = 0; b < k; b++)
                if (i >> bits[b] & 1) row |= 1ull << (k - 1 - b);
            uint64_t col = srcCol[row];
            uint64_t j = i & keep;
            for (int b = 0; b < k; b++)
                if (col >> (k - 1 - b) & 1) j |= 1ull << bits[b];
            out[i] = phase[row] * g.amps[j];
        }
    });
    g.amps = std::move(out);
}

void Ket::apply_small_dense(Group& g, const SparseMatrix& u, const std::vector<int>& bits) {
    int k = static_cast<int>(bits.size());
    uint64_t d = u.dim();
    std::vector<Amp> dense;
    u.to_dense(dense);
    uint64_t mask = 0;
    for (int b : bits) mask |= 1ull << b;
    // Iterate base indices with all target bits clear and rotate the small
    // dense block in place.
    uint64_t total = g.amps.size() >> k;
    parallel_for(total, 1ull << 12, [&](uint64_t lo, uint64_t hi) {
        std::vector<uint64_t> idx(d);
        std::vector<Amp> in(d), outv(d);
        for (uint64_t t = lo; t < hi; t++) {
            // Spread t over the non-target bit positions.
            uint64_t base = 0, rest = t;
            for (uint64_t b = 0; b < 64 && rest; b++) {
                if (mask >> b & 1) continue;
                if (1ull << b >= g.amps.size()) break;
                base |= (rest & 1) << b;
                rest >>= 1;
            }
            for (uint64_t gi = 0; gi < d; gi++) {
                uint64_t off = base;
                for (int b = 0; b < k; b++)
                    if (gi >> (k - 1 - b) & 1) off |= 1ull << bits[b];
                idx[gi] = off;
                in[gi] = g.amps[off];
            }
            for (uint64_t r = 0; r < d; r++) {
                Amp s(0, 0);
                for (uint64_t c = 0; c < d; c++) s += dense[r * d + c] * in[c];
                outv[r] = s;
            }
            for (uint64_t gi = 0; gi < d; gi++) g.amps[idx[gi]] = outv[gi];
        }
    });
}

void Ket::apply_block_top(Group& g, const SparseMatrix& u) {
    // Targets occupy the most significant positions: the state is a
    // (2^k) x (2^(m-k)) column-major-ish matrix with stride = column count.
    uint64_t d = u.dim();
    uint64_t cols = g.amps.size() / d;
    parallel_for(cols, 1, [&](uint64_t lo, uint64_t hi) {
        std::vector<Amp> scratch(d);
        for (uint64_t s = lo; s < hi; s++) {
            for (uint64_t r = 0; r < d; r++) {
                Amp acc(0, 0);
                auto cs = u.row_cols(r);
                auto vs = u.row_vals(r);
                for (size_t i = 0; i < cs.size(); i++) acc += vs[i] * g.amps[cs[i] * cols + s];
                scratch[r] = acc;
            }
            for (uint64_t r = 0; r < d; r++) g.amps[r * cols + s] = scratch[r];
        }
    });
}

void Ket::apply(const SparseMatrix& u, std::span<const WireId> wires) {
    int k = u.qubits();
    if (u.dim() == 0 || (1ull << k) != u.dim()) throw InvalidArgument("bad gate dimension");
    if (static_cast<int>(wires.size()) != k)
        throw InvalidArgument("gate spans " + std::to_string(k) + " qubits, got " +
                              std::to_string(wires.size()) + " wires");
    for (size_t i = 0; i < wires.size(); i++) {
        check_wire(wires[i]);
        for (size_t j = i + 1; j < wires.size(); j++)
            if (wires[i] == wires[j]) throw InvalidArgument("duplicate wire in gate application");
    }

    uint32_t gi = merge_groups_for(wires);
    Group& g = groups_[gi];
    uint32_t m = static_cast<uint32_t>(g.members.size());

    // LSB-numbered bit position of each target within the group index,
    // following gate wire order (wires[0] = gate MSB).
    std::vector<int> bits(k);
    for (int i = 0; i < k; i++) bits[i] = static_cast<int>(m - 1 - posOf_[wires[i]]);

    if (u.is_diagonal()) {
        apply_diagonal(g, u, bits);
        stats_.none_permuted++;
    } else if (u.is_generalized_permutation()) {
        apply_permutation(g, u, bits);
        stats_.none_permuted++;
    } else if (k <= 2) {
        apply_small_dense(g, u, bits);
        stats_.none_permuted++;
    } else {
        bool atTop = true;
        for (int i = 0; i < k; i++)
            if (posOf_[wires[i]] != static_cast<uint32_t>(i)) atTop = false;
        if (atTop) {
            stats_.none_permuted++;
        } else {
            permute_targets_to_top(gi, wires);
        }
        apply_block_top(groups_[gi], u);
    }
    for (WireId w : wires) bits_[w] = Bit::Unknown;
}

Bit Ket::measure(WireId wire) {
    check_wire(wire);
    uint32_t gi = groupOf_[wire];
    Group& g = groups_[gi];
    uint32_t m = static_cast<uint32_t>(g.members.size());
    int bitPos = static_cast<int>(m - 1 - posOf_[wire]);

    double p1 = 0;
    {
        constexpr uint64_t kChunk = 1ull << 16;
        uint64_t chunks = (g.amps.size() + kChunk - 1) / kChunk;
        std::vector<double> partial(chunks, 0.0);
        parallel_for(chunks, 1, [&](uint64_t lo, uint64_t hi) {
            for (uint64_t c = lo; c < hi; c++) {
                double s = 0;
                uint64_t e = std::min<uint64_t>(g.amps.size(), (c + 1) * kChunk);
                for (uint64_t i = c * kChunk; i < e; i++)
                    if (i >> bitPos & 1) s += std::norm(g.amps[i]);
                partial[c] = s;
            }
        });
        for (double p : partial) p1 += p;
    }

    int outcome;
    if (p1 < kDetTol) {
        outcome = 0;
    } else if (p1 > 1.0 - kDetTol) {
        outcome = 1;
    } else {
        outcome = rng_.next_double() < p1 ? 1 : 0;
    }
    double prob = outcome ? p1 : 1.0 - p1;
    factor_out(gi, wire, outcome, 1.0 / std::sqrt(prob));
    bits_[wire] = outcome ? Bit::One : Bit::Zero;
    return bits_[wire];
}

void Ket::factor_out(uint32_t gi, WireId wire, int outcome, double renorm) {
    Group& g = groups_[gi];
    uint32_t m = static_cast<uint32_t>(g.members.size());
    uint32_t pos = posOf_[wire];
    int bitPos = static_cast<int>(m - 1 - pos);

    if (m == 1) {
        g.amps[outcome] = Amp(1, 0);
        g.amps[1 - outcome] = Amp(0, 0);
        return;
    }

    std::vector<Amp> rest(g.amps.size() / 2);
    uint64_t low = (1ull << bitPos) - 1;
    parallel_for(rest.size(), 1ull << 14, [&](uint64_t lo, uint64_t hi) {
        for (uint64_t j = lo; j < hi; j++) {
            uint64_t idx = ((j & ~low) << 1) | (static_cast<uint64_t>(outcome) << bitPos) | (j & low);
            rest[j] = g.amps[idx] * renorm;
        }
    });
    g.members.erase(g.members.begin() + pos);
    g.amps = std::move(rest);
    for (uint32_t p = 0; p < g.members.size(); p++) posOf_[g.members[p]] = p;

    uint32_t slot = fresh_group_slot();
    groups_[slot].members = {wire};
    groups_[slot].amps = {outcome ? Amp(0, 0) : Amp(1, 0), outcome ? Amp(1, 0) : Amp(0, 0)};
    groupOf_[wire] = slot;
    posOf_[wire] = 0;
}

void Ket::reset(WireId wire, Bit target) {
    if (target == Bit::Unknown) throw InvalidArgument("reset target must be Zero or One");
    Bit got = measure(wire);
    if (got != target) {
        // Flip in place; the wire is a singleton after measurement.
        Group& g = groups_[groupOf_[wire]];
        std::swap(g.amps[0], g.amps[1]);
    }
    bits_[wire] = target;
}

Bit Ket::measure_pauli(char basis, std::span<const WireId> wires) {
    if (wires.empty()) throw InvalidArgument("empty Pauli string");
    if (basis != 'Z' && basis != 'X') throw InvalidArgument("basis must be 'Z' or 'X'");
    for (WireId w : wires) check_wire(w);

    // Conjugate X strings to Z strings with Hadamards.
    static const double s = std::sqrt(0.5);
    static const SparseMatrix h = SparseMatrix::from_entries(
        2, {{0, 0, Amp(s, 0)}, {0, 1, Amp(s, 0)}, {1, 0, Amp(s, 0)}, {1, 1, Amp(-s, 0)}});
    if (basis == 'X')
        for (WireId w : wires) apply(h, std::span<const WireId>(&w, 1));

    uint32_t gi = merge_groups_for(wires);
    Group& g = groups_[gi];
    uint32_t m = static_cast<uint32_t>(g.members.size());
    uint64_t mask = 0;
    for (WireId w : wires) mask |= 1ull << (m - 1 - posOf_[w]);

    double pOdd = 0;
    for (uint64_t i = 0; i < g.amps.size(); i++)
        if (std::popcount(i & mask) & 1) pOdd += std::norm(g.amps[i]);

    int outcome;
    if (pOdd < kDetTol)
        outcome = 0;
    else if (pOdd > 1.0 - kDetTol)
        outcome = 1;
    else
        outcome = rng_.next_double() < pOdd ? 1 : 0;
    double renorm = 1.0 / std::sqrt(outcome ? pOdd : 1.0 - pOdd);
    for (uint64_t i = 0; i < g.amps.size(); i++) {
        if ((std::popcount(i & mask) & 1) == outcome)
            g.amps[i] *= renorm;
        else
            g.amps[i] = Amp(0, 0);
    }
    for (WireId w : wires) bits_[w] = Bit::Unknown;
    if (basis == 'X')
        for (WireId w : wires) apply(h, std::span<const WireId>(&w, 1));
    return outcome ? Bit::One : Bit::Zero;
}

std::vector<Amp> Ket::state_vector(std::span<const WireId> order) const {
    if (order.empty()) throw InvalidArgument("empty qubit order");
    for (WireId w : order) check_wire(w);
    if (order.size() > 26) throw TooLarge("state_vector limited to 2^26 amplitudes");

    std::vector<uint32_t> gs;
    for (WireId w : order) {
        uint32_t g = groupOf_[w];
        if (std::find(gs.begin(), gs.end(), g) == gs.end()) gs.push_back(g);
    }
    uint64_t qubits = 0;
    for (uint32_t g : gs) qubits += groups_[g].members.size();
    if (qubits != order.size())
        throw InvalidArgument("order must cover whole entanglement groups");

    // Tensor groups in first-encounter order, then permute to the request.
    std::vector<Amp> v = {Amp(1, 0)};
    std::vector<WireId> layout;
    for (uint32_t g : gs) {
        const Group& src = groups_[g];
        std::vector<Amp> next(v.size() * src.amps.size());
        for (uint64_t i = 0; i < v.size(); i++) {
            if (v[i] == Amp(0, 0)) continue;
            for (uint64_t j = 0; j < src.amps.size(); j++) next[i * src.amps.size() + j] = v[i] * src.amps[j];
        }
        v = std::move(next);
        layout.insert(layout.end(), src.members.begin(), src.members.end());
    }

    uint32_t m = static_cast<uint32_t>(order.size());
    std::vector<int> src(m);
    bool idperm = true;
    for (uint32_t p = 0; p < m; p++) {
        auto it = std::find(layout.begin(), layout.end(), order[p]);
        if (it == layout.end()) throw InvalidArgument("order wire missing from layout");
        uint32_t oldPos = static_cast<uint32_t>(it - layout.begin());
        src[m - 1 - p] = static_cast<int>(m - 1 - oldPos);
        if (oldPos != p) idperm = false;
    }
    if (idperm) return v;
    std::vector<Amp> out(v.size());
    for (uint64_t i = 0; i < v.size(); i++) {
        uint64_t o = 0;
        for (uint32_t b = 0; b < m; b++)
            if (i >> b & 1) o |= 1ull << src[b];
        out[i] = v[o];
    }
    return out;
}

void Ket::assert_unentangled(std::span<const WireId> wires, bool verify) {
    for (WireId w : wires) check_wire(w);
    // Process group by group.
    std::vector<uint32_t> gs;
    for (WireId w : wires) {
        uint32_t g = groupOf_[w];
        if (std::find(gs.begin(), gs.end(), g) == gs.end()) gs.push_back(g);
    }
    for (uint32_t gi : gs) {
        std::vector<WireId> targets;
        for (WireId w : wires)
            if (groupOf_[w] == gi) targets.push_back(w);
        Group& g = groups_[gi];
        if (targets.size() == g.members.size()) continue;  // nothing to split

        permute_targets_to_top(gi, targets);
        Group& gg = groups_[gi];
        uint64_t rows = 1ull << targets.size();
        uint64_t cols = gg.amps.size() / rows;

        // Pivot-based rank-1 factorization candidate.
        uint64_t pr = 0, pc = 0;
        double best = -1;
        for (uint64_t r = 0; r < rows; r++)
            for (uint64_t c = 0; c < cols; c++) {
                double a = std::abs(gg.amps[r * cols + c]);
                if (a > best) { best = a; pr = r; pc = c; }
            }
        std::vector<Amp> u(rows), w(cols);
        for (uint64_t r = 0; r < rows; r++) u[r] = gg.amps[r * cols + pc];
        Amp pivot = gg.amps[pr * cols + pc];
        for (uint64_t c = 0; c < cols; c++) w[c] = gg.amps[pr * cols + c] / pivot;

        if (verify) {
            double worst = 0;
            for (uint64_t r = 0; r < rows; r++)
                for (uint64_t c = 0; c < cols; c++)
                    worst = std::max(worst, std::abs(gg.amps[r * cols + c] - u[r] * w[c]));
            if (worst > 1e-8)
                throw AssertionFailed("qubits are entangled across the declared cut (residual " +
                                      std::to_string(worst) + ")");
        }

        double un = std::sqrt(norm2_of(u)), wn = std::sqrt(norm2_of(w));
        for (auto& a : u) a /= un;
        for (auto& a : w) a /= wn;

        Group left, right;
        left.members.assign(gg.members.begin(), gg.members.begin() + targets.size());
        left.amps = std::move(u);
        right.members.assign(gg.members.begin() + targets.size(), gg.members.end());
        right.amps = std::move(w);

        uint32_t slot = fresh_group_slot();
        groups_[gi] = std::move(left);
        groups_[slot] = std::move(right);
        for (uint32_t p = 0; p < groups_[gi].members.size(); p++) {
            groupOf_[groups_[gi].members[p]] = gi;
            posOf_[groups_[gi].members[p]] = p;
        }
        for (uint32_t p = 0; p < groups_[slot].members.size(); p++) {
            groupOf_[groups_[slot].members[p]] = slot;
            posOf_[groups_[slot].members[p]] = p;
        }
    }
}

}  // namespace ketsim
