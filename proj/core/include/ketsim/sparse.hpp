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

#ifndef KETSIM_SPARSE_HPP
#define KETSIM_SPARSE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ketsim/types.hpp"

namespace ketsim {

/// Square sparse complex matrix in CSR form. Dimensions are powers of two;
/// gates, grown gates and embeddings all live here.
class SparseMatrix {
   public:
    struct Entry {
        uint64_t row;
        uint64_t col;
        Amp val;
    };

    SparseMatrix() = default;

    static SparseMatrix identity(uint64_t dim);
    /// Build from an entry list. Throws InvalidArgument on duplicate (row,col)
    /// pairs, out-of-range indices or a non-power-of-two dimension.
    static SparseMatrix from_entries(uint64_t dim, std::vector<Entry> entries);
    static SparseMatrix from_dense(uint64_t dim, std::span<const Amp> rowMajor);

    uint64_t dim() const { return dim_; }
    uint64_t nnz() const { return col_.size(); }
    int qubits() const;  // log2(dim)

    bool empty() const { return dim_ == 0; }

    /// Slow random access; intended for tests and small matrices.
    Amp entry(uint64_t row, uint64_t col) const;
    void to_dense(std::vector<Amp>& out) const;
    std::vector<Entry> entries() const;

    // Row access for kernels.
    std::span<const uint64_t> row_cols(uint64_t row) const;
    std::span<const Amp> row_vals(uint64_t row) const;

    bool is_diagonal() const;
    /// One nonzero per row and per column (a phased permutation).
    bool is_generalized_permutation() const;

    SparseMatrix adjoint() const;
    /// this * rhs. If nnzCap is nonzero and the product would exceed it,
    /// returns nullopt instead of allocating.
    std::optional<SparseMatrix> multiply(const SparseMatrix& rhs, uint64_t nnzCap = 0) const;

    std::vector<Amp> apply(std::span<const Amp> v) const;

    /// Embed this k-qubit matrix into a space of spanQubits qubits, with the
    /// gate's qubit i (MSB-first) sitting at bit position positions[i]
    /// (also MSB-first within the span).
    SparseMatrix embed(std::span<const int> positions, int spanQubits) const;

    /// max |U'U - I| computed exactly. Quadratic in nnz; use the sampled
    /// variant for large matrices.
    double unitarity_defect() const;
    double unitarity_defect_sampled(Prng& rng, int samples = 8) const;

    bool approx_equal(const SparseMatrix& other, double tol) const;
    bool bit_equal(const SparseMatrix& other) const;

    /// Max |entry| difference treating both as dense; tolerates one global
    /// phase when phaseFree is set.
    static double max_abs_diff(const SparseMatrix& a, const SparseMatrix& b, bool phaseFree = false);

   private:
    uint64_t dim_ = 0;
    std::vector<uint64_t> rowStart_;  // size dim_+1
    std::vector<uint64_t> col_;
    std::vector<Amp> val_;
};

/// Nearest orthonormalization by modified Gram-Schmidt on columns.
/// Input must satisfy maxdefect < 0.01 (else NonUnitaryGate); output defect
/// is <= 1e-12. Inputs already within 1e-12 are returned unchanged.
SparseMatrix reunitarize(const SparseMatrix& u);

}  // namespace ketsim

#endif
