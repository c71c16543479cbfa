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

#ifndef KETSIM_TYPES_HPP
#define KETSIM_TYPES_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ketsim {

using Amp = std::complex<double>;
using WireId = uint32_t;

/// Classical value of a qubit. Unknown means the qubit has not been
/// measured (or has been re-entangled) since the last collapse.
enum class Bit : uint8_t { Zero = 0, One = 1, Unknown = 2 };

inline const char* to_string(Bit b) {
    switch (b) {
        case Bit::Zero: return "Zero";
        case Bit::One: return "One";
        default: return "Unknown";
    }
}

// Error hierarchy. Each type corresponds to one failure class surfaced by
// the public API; all derive from SimError so callers can catch broadly.
struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidArgument : SimError { using SimError::SimError; };
struct InvalidWire : SimError { using SimError::SimError; };
struct NonUnitaryGate : SimError { using SimError::SimError; };
struct UnknownGate : SimError { using SimError::SimError; };
struct UnsupportedGate : SimError { using SimError::SimError; };
struct UnmeasuredControl : SimError { using SimError::SimError; };
struct UnmeasuredQubit : SimError { using SimError::SimError; };
struct NotReversible : SimError { using SimError::SimError; };
struct AssertionFailed : SimError { using SimError::SimError; };
struct TooLarge : SimError { using SimError::SimError; };
struct InvalidWrap : SimError { using SimError::SimError; };
struct ParseError : SimError { using SimError::SimError; };
struct IoError : SimError { using SimError::SimError; };

/// Counter-based splittable PRNG (splitmix64 core). Deterministic across
/// platforms, which the replay guarantees depend on; child streams derived
/// with split() are independent of the parent's future output.
class Prng {
   public:
    explicit Prng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) built from the top 53 bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound).
    uint64_t next_below(uint64_t bound) {
        // Rejection sampling keeps the distribution exact.
        uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    /// Derive an independent child stream.
    Prng split() { return Prng(next_u64() ^ 0xd1b54a32d192ed03ULL); }

   private:
    uint64_t state_;
};

}  // namespace ketsim

#endif
