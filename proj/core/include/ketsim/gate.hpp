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

#ifndef KETSIM_GATE_HPP
#define KETSIM_GATE_HPP

#include <memory>
#include <string>
#include <vector>

#include "ketsim/sparse.hpp"
#include "ketsim/types.hpp"

namespace ketsim {

class Circuit;
class Gate;
using GatePtr = std::shared_ptr<const Gate>;

/// A gate definition. Immutable after construction and freely shared across
/// threads. Equality for caching purposes is by name (which encodes the
/// parameters), never by matrix contents.
class Gate {
   public:
    enum class Kind {
        Unitary,        // sparse matrix
        Measure,        // computational-basis collapse
        Reset,          // measure + steer to a basis state
        BinaryControl,  // inner gate applied iff a classical bit is One
        Label,          // renderer annotation, no simulator effect
        Wrapped,        // reusable sub-circuit
        Decode,         // classical nearest-codeword decode (7 wires)
    };

    static GatePtr make_unitary(std::string name, std::string desc, SparseMatrix m);
    static GatePtr make_measure();
    static GatePtr make_reset(Bit target);
    static GatePtr make_binary_control(GatePtr inner);
    static GatePtr make_label(std::string text, bool rightSide);
    static GatePtr make_wrapped(std::string name, std::shared_ptr<const Circuit> body, uint32_t arity);
    static GatePtr make_decode(std::string name, std::vector<uint8_t> codewords, uint32_t arity);

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    const std::string& desc() const { return desc_; }
    uint32_t arity() const { return arity_; }

    bool is_unitary() const { return kind_ == Kind::Unitary; }
    const SparseMatrix& matrix() const;

    Bit reset_target() const;
    const GatePtr& inner() const;
    const std::string& label_text() const { return labelText_; }
    bool label_right() const { return labelRight_; }
    const std::shared_ptr<const Circuit>& body() const;
    const std::vector<uint8_t>& codewords() const { return codewords_; }

   private:
    Gate() = default;
    Kind kind_ = Kind::Unitary;
    std::string name_;
    std::string desc_;
    uint32_t arity_ = 1;
    SparseMatrix matrix_;
    Bit resetTarget_ = Bit::Zero;
    GatePtr inner_;
    std::string labelText_;
    bool labelRight_ = false;
    std::shared_ptr<const Circuit> body_;
    std::vector<uint8_t> codewords_;
};

/// Library lookup by name: I, X, Y, Z, H, S, S' (alias Sdg), T, T' (alias
/// Tdg), CNOT, CZ, SWAP, CSWAP, CCNOT, M, Reset0, Reset1. Results are
/// cached and shared. Unknown names throw UnknownGate.
GatePtr standard_gate(const std::string& name);

/// diag(1, e^{2 pi i / 2^k}), named "R<k>". 1 <= k <= 63.
GatePtr rotation(int k);
/// diag(1, e^{-2 pi i / 2^k}), named "R<k>'".
GatePtr rotation_adj(int k);

/// Conjugate transpose. Self-adjoint gates come back unchanged; otherwise
/// the name gains (or loses) a trailing '. Throws NonUnitaryGate for
/// non-unitary kinds.
GatePtr adjoint(const GatePtr& g);

/// Add one control as the new first wire: matrix I ⊕ U. Composable.
GatePtr control(const GatePtr& g);

struct CacheStats {
    uint64_t hits;
    uint64_t misses;
};
CacheStats gate_cache_stats();
void reset_gate_cache_stats();

}  // namespace ketsim

#endif
