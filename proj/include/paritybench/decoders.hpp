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

// Hard-decision decoding of integrated parity currents.

#include "paritybench/codes.hpp"
#include "paritybench/qcore.hpp"
#include "paritybench/sme.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace paritybench {

struct SyndromeEstimate {
    Syndrome signs;
    std::vector<double> integrated_values;
};

/// Time window [t0, t1] in seconds.
struct TimeWindow {
    double t0 = 0.0;
    double t1 = 0.0;
};

/// Mean of each current over the samples of steps [k0, k1); ties map to +1.
inline SyndromeEstimate integrate_currents(const std::vector<std::vector<double>> &currents, std::size_t k0,
                                           std::size_t k1) {
    if (k1 <= k0) throw std::invalid_argument("integrate_currents: empty window");
    SyndromeEstimate s;
    for (const auto &c : currents) {
        if (k1 > c.size()) throw std::invalid_argument("integrate_currents: window exceeds the record");
        double sum = 0.0;
        for (std::size_t k = k0; k < k1; ++k) sum += c[k];
        const double mean = sum / static_cast<double>(k1 - k0);
        s.integrated_values.push_back(mean);
        s.signs.push_back(mean >= 0.0 ? +1 : -1);
    }
    return s;
}

inline SyndromeEstimate integrate_currents(const TrajectoryRecord &rec, const TimeWindow &window) {
    if (!(window.t1 > window.t0) || window.t0 < 0.0) throw std::invalid_argument("integrate_currents: empty window");
    const auto k0 = static_cast<std::size_t>(std::llround(window.t0 / rec.dt));
    const auto k1 = static_cast<std::size_t>(std::llround(window.t1 / rec.dt));
    if (k1 > rec.steps) throw std::invalid_argument("integrate_currents: window exceeds the record duration");
    return integrate_currents(rec.currents, k0, k1);
}

/// Full-record window.
inline TimeWindow full_window(const TrajectoryRecord &rec) { return {0.0, rec.dt * static_cast<double>(rec.steps)}; }

inline PauliLabel textbook_correct(const StabilizerCode &code, const SyndromeEstimate &s) {
    if (!code.syndrome_table) {
        throw std::invalid_argument("textbook_correct: code " + code.name + " has no syndrome table");
    }
    const auto it = code.syndrome_table->find(s.signs);
    if (it == code.syndrome_table->end()) throw std::invalid_argument("textbook_correct: syndrome length mismatch");
    return it->second;
}

struct TextbookOutcome {
    PauliLabel correction;
    /// <phi| (C (x) I) omega (C (x) I) |phi>
    double f_e = 0.0;
    /// Weight of the corrected state inside the code space.
    double p_code = 0.0;
    /// (d f_e + p_code) / (d + 1)
    double fbar = 0.0;
};

/// Applies `correction` to the system factor of `omega` (system (x) reference).
inline TextbookOutcome apply_correction(const OperatorMatrix &omega, const StabilizerCode &code,
                                        const PauliLabel &correction) {
    if (omega.rows() != 2 * code.dim()) throw std::invalid_argument("apply_correction: dimension mismatch");
    const OperatorMatrix c = kron(pauli(correction), OperatorMatrix::Identity(2, 2));
    const OperatorMatrix corrected = c * omega * c.adjoint();
    const StateVector phi = reference_entangled_state(code);
    const OperatorMatrix p = kron(code.code_projector(), OperatorMatrix::Identity(2, 2));
    TextbookOutcome out;
    out.correction = correction;
    out.f_e = (phi.adjoint() * corrected * phi)(0, 0).real();
    out.p_code = (p * corrected).trace().real();
    out.fbar = (2.0 * out.f_e + out.p_code) / 3.0;
    return out;
}

inline TextbookOutcome textbook_outcome(const TrajectoryRecord &rec, const StabilizerCode &code,
                                        const TimeWindow &window) {
    return apply_correction(rec.final_state, code, textbook_correct(code, integrate_currents(rec, window)));
}

/// Entanglement fidelity after the lookup correction; no optimization involved.
inline double textbook_fidelity(const TrajectoryRecord &rec, const StabilizerCode &code, const TimeWindow &window) {
    return textbook_outcome(rec, code, window).f_e;
}

}  // namespace paritybench
