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

#ifndef KETSIM_KET_HPP
#define KETSIM_KET_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "ketsim/sparse.hpp"
#include "ketsim/types.hpp"

namespace ketsim {

/// Quantum state over n qubits with factored storage: qubits are grouped
/// into entanglement groups, each holding a dense amplitude vector over its
/// members only. A fully unentangled register costs 2n amplitudes instead
/// of 2^n. Gates merge groups; measurement splits the touched qubit back
/// out into a singleton group.
///
/// Bit ordering: within a group, member position 0 is the MOST significant
/// bit of the amplitude index. state_vector(order) follows the same rule
/// for its output (order[0] = MSB).
///
/// A Ket is single-owner: one logical thread mutates it at a time. Internal
/// kernels may fan out across worker threads over disjoint slices; results
/// are bit-identical to single-threaded execution.
class Ket {
   public:
    struct Stats {
        uint32_t max_entangled = 1;   // peak group size in qubits
        uint64_t gates_permuted = 0;  // kept for log parity; this engine never permutes gates
        uint64_t state_permuted = 0;
        uint64_t none_permuted = 0;
    };

    /// n singleton groups, all |0>, all bits Unknown. Throws InvalidArgument
    /// when n == 0.
    Ket(uint32_t n, uint64_t seed);

    uint32_t size() const { return n_; }

    /// Apply a unitary to the given wires (wires[0] = gate's most significant
    /// qubit). Groups containing any wire are merged first. Norm is preserved
    /// to 1e-10.
    void apply(const SparseMatrix& u, std::span<const WireId> wires);

    /// Projective measurement in the computational basis. The measured qubit
    /// is factored out into its own singleton group, halving the group's
    /// amplitude storage.
    Bit measure(WireId wire);

    /// Measure-and-steer to a known basis state. target must not be Unknown.
    void reset(WireId wire, Bit target);

    /// Nondestructive joint Pauli measurement of Z or X strings: samples the
    /// +-1 outcome, projects onto the eigenspace and renormalizes. basis is
    /// 'Z' or 'X'. Returns Bit::Zero for +1, Bit::One for -1.
    Bit measure_pauli(char basis, std::span<const WireId> wires);

    Bit bit(WireId wire) const;
    void set_bit(WireId wire, Bit b);

    /// Expand the tensor product of the groups covering `order` into one
    /// dense vector with order[0] as MSB. Every group touched must be fully
    /// covered by `order`. Guarded at 2^26 amplitudes.
    std::vector<Amp> state_vector(std::span<const WireId> order) const;

    /// Declare (verify=false) or verify-then-apply (verify=true) that the
    /// given wires are unentangled from the rest of their groups, splitting
    /// the storage accordingly. Verification tests Schmidt rank 1 within
    /// 1e-8 and throws AssertionFailed (state unchanged) when it fails.
    void assert_unentangled(std::span<const WireId> wires, bool verify);

    const Stats& stats() const { return stats_; }
    Prng& rng() { return rng_; }

    /// Total amplitudes currently allocated across all groups.
    uint64_t total_amplitudes() const;
    uint32_t group_count() const;
    uint32_t group_size(WireId wire) const;  // qubits in the wire's group

    /// Refuse group merges that would exceed this many amplitudes.
    void set_amplitude_budget(uint64_t amps) { ampBudget_ = amps; }
    uint64_t amplitude_budget() const { return ampBudget_; }

   private:
    struct Group {
        std::vector<WireId> members;  // position 0 = MSB
        std::vector<Amp> amps;        // size 2^members.size(), empty slot when retired
    };

    void check_wire(WireId w) const;
    uint32_t merge_groups_for(std::span<const WireId> wires);
    void permute_targets_to_top(uint32_t g, std::span<const WireId> wires);
    void factor_out(uint32_t g, WireId wire, int outcome, double renorm);
    uint32_t fresh_group_slot();

    void apply_diagonal(Group& g, const SparseMatrix& u, const std::vector<int>& bits);
    void apply_permutation(Group& g, const SparseMatrix& u, const std::vector<int>& bits);
    void apply_small_dense(Group& g, const SparseMatrix& u, const std::vector<int>& bits);
    void apply_block_top(Group& g, const SparseMatrix& u);

    uint32_t n_ = 0;
    std::vector<Group> groups_;
    std::vector<uint32_t> freeSlots_;
    std::vector<uint32_t> groupOf_;
    std::vector<uint32_t> posOf_;
    std::vector<Bit> bits_;
    Prng rng_;
    Stats stats_;
    uint64_t ampBudget_ = 1ull << 28;
};

/// Worker threads used by engine kernels (1 disables threading). Global so
/// tests can pin it; defaults to the hardware concurrency.
void set_engine_threads(unsigned n);
unsigned engine_threads();

}  // namespace ketsim

#endif
