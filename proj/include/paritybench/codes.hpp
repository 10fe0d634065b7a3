// Copyright 2026 The paritybench Authors
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

#pragma once

#include "paritybench/qcore.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace paritybench {

/// One +1/-1 entry per stabilizer.
using Syndrome = std::vector<int>;

/// A one-logical-qubit stabilizer code.
struct StabilizerCode {
    std::string name;
    std::size_t n = 0;
    std::vector<PauliLabel> stabilizers;
    StateVector logical_zero;
    StateVector logical_one;
    /// Lookup decoder; only the bit-flip code carries one.
    std::optional<std::map<Syndrome, PauliLabel>> syndrome_table;

    Eigen::Index dim() const { return Eigen::Index{1} << n; }

    /// |0><0| + |1><1| on the code space.
    OperatorMatrix code_projector() const { return projector(logical_zero) + projector(logical_one); }

    /// Logical basis vector 0 or 1.
    const StateVector &logical(int bit) const { return bit == 0 ? logical_zero : logical_one; }
};

namespace detail {

inline StateVector basis_state(std::size_t n, std::size_t index) {
    StateVector v = StateVector::Zero(Eigen::Index{1} << n);
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return v;
}

inline std::size_t bits_index(const std::string &bits) { return std::stoul(bits, nullptr, 2); }

}  // namespace detail

inline StabilizerCode bit_flip_code() {
    StabilizerCode code;
    code.name = "bit_flip";
    code.n = 3;
    code.stabilizers = {PauliLabel("ZZI"), PauliLabel("IZZ")};
    code.logical_zero = detail::basis_state(3, 0b000);
    code.logical_one = detail::basis_state(3, 0b111);
    code.syndrome_table = std::map<Syndrome, PauliLabel>{
        {{+1, +1}, PauliLabel("III")},
        {{-1, +1}, PauliLabel("XII")},
        {{-1, -1}, PauliLabel("IXI")},
        {{+1, -1}, PauliLabel("IIX")},
    };
    return code;
}

/// Four-qubit amplitude-damping code. S3 = XXXX is part of the code but is never
/// measured continuously.
inline StabilizerCode relaxation_code() {
    using detail::basis_state;
    using detail::bits_index;
    const double r = 1.0 / std::sqrt(2.0);
    StabilizerCode code;
    code.name = "relaxation";
    code.n = 4;
    code.stabilizers = {PauliLabel("ZZII"), PauliLabel("IIZZ"), PauliLabel("XXXX")};
    code.logical_zero = r * (basis_state(4, bits_index("0000")) + basis_state(4, bits_index("1111")));
    code.logical_one = r * (basis_state(4, bits_index("0011")) + basis_state(4, bits_index("1100")));
    return code;
}

/// A bare qubit viewed as a trivial code; used for the unencoded baseline.
inline StabilizerCode unencoded_qubit() {
    StabilizerCode code;
    code.name = "unencoded";
    code.n = 1;
    code.logical_zero = detail::basis_state(1, 0);
    code.logical_one = detail::basis_state(1, 1);
    return code;
}

inline StabilizerCode code_by_name(const std::string &name) {
    if (name == "bit_flip") return bit_flip_code();
    if (name == "relaxation") return relaxation_code();
    if (name == "unencoded") return unencoded_qubit();
    throw std::invalid_argument("unknown code \"" + name + "\" (expected bit_flip or relaxation)");
}

/// The tau-eigenstate of logical sigma in {X, Y, Z}.
inline StateVector encoded_eigenstate(const StabilizerCode &code, char sigma, int tau) {
    if (tau != 1 && tau != -1) {
        throw std::invalid_argument("encoded_eigenstate: tau must be +1 or -1");
    }
    const double r = 1.0 / std::sqrt(2.0);
    const Complex i(0.0, 1.0);
    switch (sigma) {
        case 'Z': return tau > 0 ? code.logical_zero : code.logical_one;
        case 'X': return r * (code.logical_zero + static_cast<double>(tau) * code.logical_one);
        case 'Y': return r * (code.logical_zero + (static_cast<double>(tau) * i) * code.logical_one);
        default: throw std::invalid_argument("encoded_eigenstate: sigma must be X, Y or Z");
    }
}

/// (|0>|0>_R + |1>|1>_R)/sqrt(2) with the reference as the last factor.
inline StateVector reference_entangled_state(const StabilizerCode &code) {
    StateVector ref0 = StateVector::Zero(2);
    StateVector ref1 = StateVector::Zero(2);
    ref0(0) = 1.0;
    ref1(1) = 1.0;
    return (kron(code.logical_zero, ref0) + kron(code.logical_one, ref1)) / std::sqrt(2.0);
}

inline Syndrome syndrome_of(const StabilizerCode &code, const PauliLabel &error) {
    if (error.size() != code.n) {
        throw std::invalid_argument("syndrome_of: error length does not match the code");
    }
    Syndrome s;
    s.reserve(code.stabilizers.size());
    for (const auto &stab : code.stabilizers) {
        s.push_back(stab.commutes_with(error) ? +1 : -1);
    }
    return s;
}

/// Syndrome restricted to the first `count` stabilizers.
inline Syndrome syndrome_of(const StabilizerCode &code, const PauliLabel &error, std::size_t count) {
    Syndrome s = syndrome_of(code, error);
    s.resize(std::min(count, s.size()));
    return s;
}

}  // namespace paritybench
