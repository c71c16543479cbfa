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

#include "ketsim/gate.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include "ketsim/circuit.hpp"

namespace ketsim {

namespace {

std::mutex g_cacheMutex;
std::unordered_map<std::string, GatePtr>& cache() {
    static std::unordered_map<std::string, GatePtr> c;
    return c;
}
std::atomic<uint64_t> g_hits{0}, g_misses{0};

GatePtr cached(const std::string& key, GatePtr (*build)(const std::string&)) {
    {
        std::lock_guard<std::mutex> lk(g_cacheMutex);
        auto it = cache().find(key);
        if (it != cache().end()) {
            g_hits.fetch_add(1, std::memory_order_relaxed);
            return it->second;
        }
    }
    g_misses.fetch_add(1, std::memory_order_relaxed);
    GatePtr g = build(key);
    std::lock_guard<std::mutex> lk(g_cacheMutex);
    auto [it, inserted] = cache().emplace(key, g);
    return it->second;
}

SparseMatrix mat2(Amp a, Amp b, Amp c, Amp d) {
    std::vector<SparseMatrix::Entry> e;
    if (a != Amp(0, 0)) e.push_back({0, 0, a});
    if (b != Amp(0, 0)) e.push_back({0, 1, b});
    if (c != Amp(0, 0)) e.push_back({1, 0, c});
    if (d != Amp(0, 0)) e.push_back({1, 1, d});
    return SparseMatrix::from_entries(2, std::move(e));
}

GatePtr build_unitary(const std::string& name, const std::string& desc, SparseMatrix m) {
    return Gate::make_unitary(name, desc, std::move(m));
}

GatePtr build_standard(const std::string& name) {
    const double s = std::sqrt(0.5);
    if (name == "I") return build_unitary("I", "Identity", mat2(1, 0, 0, 1));
    if (name == "X") return build_unitary("X", "Pauli X flip", mat2(0, 1, 1, 0));
    if (name == "Y") return build_unitary("Y", "Pauli Y flip", mat2(0, Amp(0, -1), Amp(0, 1), 0));
    if (name == "Z") return build_unitary("Z", "Pauli Z flip", mat2(1, 0, 0, -1));
    if (name == "H") return build_unitary("H", "Hadamard", mat2(s, s, s, -s));
    if (name == "S") return build_unitary("S", "Phase gate", mat2(1, 0, 0, Amp(0, 1)));
    if (name == "S'") return build_unitary("S'", "Phase gate inverse", mat2(1, 0, 0, Amp(0, -1)));
    if (name == "T") return build_unitary("T", "PI/8 gate", mat2(1, 0, 0, Amp(s, s)));
    if (name == "T'") return build_unitary("T'", "PI/8 gate inverse", mat2(1, 0, 0, Amp(s, -s)));
    if (name == "CNOT")
        return build_unitary("CNOT", "Controlled NOT",
                             SparseMatrix::from_entries(4, {{0, 0, 1}, {1, 1, 1}, {2, 3, 1}, {3, 2, 1}}));
    if (name == "CZ")
        return build_unitary("CZ", "Controlled Z",
                             SparseMatrix::from_entries(4, {{0, 0, 1}, {1, 1, 1}, {2, 2, 1}, {3, 3, -1}}));
    if (name == "SWAP")
        return build_unitary("SWAP", "Swap qubits",
                             SparseMatrix::from_entries(4, {{0, 0, 1}, {1, 2, 1}, {2, 1, 1}, {3, 3, 1}}));
    if (name == "CSWAP") return control(standard_gate("SWAP"));
    if (name == "CCNOT") return control(standard_gate("CNOT"));
    if (name == "M") return Gate::make_measure();
    if (name == "Reset0") return Gate::make_reset(Bit::Zero);
    if (name == "Reset1") return Gate::make_reset(Bit::One);
    throw UnknownGate("no gate named '" + name + "'");
}

}  // namespace

const SparseMatrix& Gate::matrix() const {
    if (kind_ != Kind::Unitary) throw NonUnitaryGate("gate '" + name_ + "' has no matrix");
    return matrix_;
}

Bit Gate::reset_target() const {
    if (kind_ != Kind::Reset) throw InvalidArgument("gate '" + name_ + "' is not a Reset");
    return resetTarget_;
}

const GatePtr& Gate::inner() const {
    if (kind_ != Kind::BinaryControl) throw InvalidArgument("gate '" + name_ + "' has no inner gate");
    return inner_;
}

const std::shared_ptr<const Circuit>& Gate::body() const {
    if (kind_ != Kind::Wrapped) throw InvalidArgument("gate '" + name_ + "' has no body");
    return body_;
}

GatePtr Gate::make_unitary(std::string name, std::string desc, SparseMatrix m) {
    if (m.dim() < 2) throw InvalidArgument("unitary gate needs dim >= 2");
    if (m.unitarity_defect() > 1e-10)
        throw NonUnitaryGate("matrix for gate '" + name + "' is not unitary");
    auto g = std::shared_ptr<Gate>(new Gate());
    g->kind_ = Kind::Unitary;
    g->name_ = std::move(name);
    g->desc_ = std::move(desc);
    g->arity_ = static_cast<uint32_t>(m.qubits());
    g->matrix_ = std::move(m);
    return g;
}

GatePtr Gate::make_measure() {
    auto g = std::shared_ptr<Gate>(new Gate());
    g->kind_ = Kind::Measure;
    g->name_ = "M";
    g->desc_ = "Collapse State";
    g->arity_ = 1;
    return g;
}

GatePtr Gate::make_reset(Bit target) {
    if (target == Bit::Unknown) throw InvalidArgument("reset target must be Zero or One");
    auto g = std::shared_ptr<Gate>(new Gate());
    g->kind_ = Kind::Reset;
    g->name_ = target == Bit::Zero ? "Reset0" : "Reset1";
    g->desc_ = target == Bit::Zero ? "Set Zero" : "Set One";
    g->arity_ = 1;
    g->resetTarget_ = target;
    return g;
}

GatePtr Gate::make_binary_control(GatePtr inner) {
    if (!inner) throw InvalidArgument("binary control needs an inner gate");
    auto g = std::shared_ptr<Gate>(new Gate());
    g->kind_ = Kind::BinaryControl;
    g->name_ = "BC-" + inner->name();
    g->desc_ = "BitControl";
    g->arity_ = inner->arity() + 1;  // control wire first
    g->inner_ = std::move(inner);
    return g;
}

GatePtr Gate::make_label(std::string text, bool rightSide) {
    auto g = std::shared_ptr<Gate>(new Gate());
    g->kind_ = Kind::Label;
    g->name_ = rightSide ? "LabelR" : "LabelL";
    g->desc_ = "Label";
    g->arity_ = 1;
    g->labelText_ = std::move(text);
    g->labelRight_ = rightSide;
    return g;
}

GatePtr Gate::make_wrapped(std::string name, std::shared_ptr<const Circuit> body, uint32_t arity) {
    auto g = std::shared_ptr<Gate>(new Gate());
    g->kind_ = Kind::Wrapped;
    g->name_ = std::move(name);
    g->desc_ = "wrapped circuit";
    g->arity_ = arity;
    g->body_ = std::move(body);
    return g;
}

GatePtr Gate::make_decode(std::string name, std::vector<uint8_t> codewords, uint32_t arity) {
    auto g = std::shared_ptr<Gate>(new Gate());
    g->kind_ = Kind::Decode;
    g->name_ = std::move(name);
    g->desc_ = "classical decode";
    g->arity_ = arity;
    g->codewords_ = std::move(codewords);
    return g;
}

GatePtr standard_gate(const std::string& name) {
    std::string key = name;
    if (key == "Sdg") key = "S'";
    if (key == "Tdg") key = "T'";
    return cached(key, build_standard);
}

static GatePtr build_rotation(const std::string& key) {
    bool adj = key.back() == '\'';
    int k = std::stoi(key.substr(1, key.size() - (adj ? 2 : 1)));
    double phi = std::ldexp(2.0 * std::numbers::pi, -k);
    double phiR = std::cos(phi);
    double phiI = std::sin(phi);
    if (adj) phiI = -phiI;
    return Gate::make_unitary(key, adj ? "2pi/2^" + std::to_string(k) + " rotation inverse"
                                       : "2pi/2^" + std::to_string(k) + " rotation",
                              mat2(1, 0, 0, Amp(phiR, phiI)));
}

GatePtr rotation(int k) {
    if (k < 1 || k > 63) throw InvalidArgument("rotation parameter must be in [1, 63]");
    return cached("R" + std::to_string(k), build_rotation);
}

GatePtr rotation_adj(int k) {
    if (k < 1 || k > 63) throw InvalidArgument("rotation parameter must be in [1, 63]");
    return cached("R" + std::to_string(k) + "'", build_rotation);
}

GatePtr adjoint(const GatePtr& g) {
    if (!g || !g->is_unitary())
        throw NonUnitaryGate("Adj requires its operation to be Unitary");
    SparseMatrix adj = g->matrix().adjoint();
    if (SparseMatrix::max_abs_diff(adj, g->matrix()) <= 1e-15) return g;  // self-adjoint
    std::string name = g->name();
    std::string desc;
    if (!name.empty() && name.back() == '\'') {
        name.pop_back();
        desc = g->desc();
        const std::string suffix = " inverse";
        if (desc.size() > suffix.size() && desc.compare(desc.size() - suffix.size(), suffix.size(), suffix) == 0)
            desc.resize(desc.size() - suffix.size());
    } else {
        name += '\'';
        desc = g->desc() + " inverse";
    }
    {
        std::lock_guard<std::mutex> lk(g_cacheMutex);
        auto it = cache().find(name);
        if (it != cache().end() && SparseMatrix::max_abs_diff(it->second->matrix(), adj) <= 1e-15) {
            g_hits.fetch_add(1, std::memory_order_relaxed);
            return it->second;
        }
    }
    return Gate::make_unitary(name, desc, std::move(adj));
}

GatePtr control(const GatePtr& g) {
    if (!g || !g->is_unitary()) throw NonUnitaryGate("AddControl requires a Unitary gate");
    uint64_t d = g->matrix().dim();
    std::vector<SparseMatrix::Entry> e;
    for (uint64_t i = 0; i < d; i++) e.push_back({i, i, Amp(1, 0)});
    for (const auto& en : g->matrix().entries()) e.push_back({d + en.row, d + en.col, en.val});
    std::string name = "C" + g->name();
    if (g->name() == "NOT") name = "CNOT";
    return Gate::make_unitary(name, "Controlled " + g->name(),
                              SparseMatrix::from_entries(2 * d, std::move(e)));
}

CacheStats gate_cache_stats() {
    return {g_hits.load(std::memory_order_relaxed), g_misses.load(std::memory_order_relaxed)};
}

void reset_gate_cache_stats() {
    g_hits.store(0, std::memory_order_relaxed);
    g_misses.store(0, std::memory_order_relaxed);
}

}  // namespace ketsim
