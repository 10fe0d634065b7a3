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

// Dispersive readout layer: stationary pointer-state amplitudes of a driven
// resonator and their reduction to the two effective rates used by the
// stochastic master equation.

#include "paritybench/qcore.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace paritybench {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Circuit-QED parameters. All frequencies are angular (rad/s).
struct CqedParams {
    double chi = 0.0;
    double kappa = 1.0;
    double epsilon_m = 0.0;
    double omega_r = 0.0;
    double omega_m = 0.0;
    double eta = 1.0;
    double g_over_delta = 0.1;

    void validate() const {
        if (!(kappa > 0.0)) throw std::invalid_argument("CqedParams: kappa must be positive");
        if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("CqedParams: eta must lie in [0, 1]");
        if (!std::isfinite(chi)) throw std::invalid_argument("CqedParams: chi must be finite");
    }
};

/// Rates handed to the SME (1/s).
struct EffectiveRates {
    double gamma_meas = 0.0;
    double gamma_deph_odd = 0.0;
};

namespace detail {

inline Complex pointer_amplitude(const CqedParams &p, double shift) {
    const Complex denom(p.omega_r + shift - p.omega_m, -p.kappa / 2.0);
    if (std::abs(denom) == 0.0) {
        throw std::invalid_argument("coherent amplitude: zero denominator");
    }
    return -p.epsilon_m / denom;
}

}  // namespace detail

/// alpha_sigma = -eps / (omega_r + (-1)^sigma chi - omega_m - i kappa / 2).
inline Complex coherent_amplitude(const CqedParams &p, int sigma) {
    if (sigma != 0 && sigma != 1) {
        throw std::invalid_argument("coherent_amplitude: sigma must be 0 or 1");
    }
    return detail::pointer_amplitude(p, sigma == 0 ? p.chi : -p.chi);
}

/// Two qubits in one resonator; `state` is the two-bit index with the first
/// qubit as the high bit (00, 01, 10, 11).
inline Complex two_qubit_amplitude(const CqedParams &p, double chi1, double chi2, int state) {
    if (state < 0 || state > 3) {
        throw std::invalid_argument("two_qubit_amplitude: state must be in 0..3");
    }
    const double s1 = (state & 2) ? -1.0 : 1.0;
    const double s2 = (state & 1) ? -1.0 : 1.0;
    return detail::pointer_amplitude(p, s1 * chi1 + s2 * chi2);
}

inline std::array<Complex, 4> two_qubit_amplitudes(const CqedParams &p, double chi1, double chi2) {
    return {two_qubit_amplitude(p, chi1, chi2, 0), two_qubit_amplitude(p, chi1, chi2, 1),
            two_qubit_amplitude(p, chi1, chi2, 2), two_qubit_amplitude(p, chi1, chi2, 3)};
}

/// Steady-state distinguishability rates kappa |delta alpha|^2 / 2.
///
/// Requires the even-parity pointer states to coincide; the measurement rate
/// uses the mean of the two odd amplitudes, and the residual odd splitting
/// becomes dephasing inside the odd subspace.
inline EffectiveRates derive_effective_rates(const CqedParams &p, double chi1, double chi2) {
    p.validate();
    const auto a = two_qubit_amplitudes(p, chi1, chi2);
    const double scale = std::max({std::abs(a[0]), std::abs(a[3]), 1e-300});
    if (std::abs(a[0] - a[3]) > 1e-9 * scale) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "derive_effective_rates: even-parity amplitudes do not coincide; alpha_00=" << a[0]
            << " alpha_01=" << a[1] << " alpha_10=" << a[2] << " alpha_11=" << a[3];
        throw std::invalid_argument(msg.str());
    }
    const Complex even = 0.5 * (a[0] + a[3]);
    const Complex odd_mean = 0.5 * (a[1] + a[2]);
    EffectiveRates r;
    r.gamma_meas = p.kappa * std::norm(even - odd_mean) / 2.0;
    r.gamma_deph_odd = p.kappa * std::norm(a[1] - a[2]) / 2.0;
    return r;
}

/// Critical photon number (Delta / 2g)^2 = 1 / (4 lambda^2).
inline double critical_photon_number(const CqedParams &p) { return 1.0 / (4.0 * p.g_over_delta * p.g_over_delta); }

/// Returns a message when the largest pointer-state photon number exceeds a
/// tenth of the critical photon number.
inline std::optional<std::string> photon_number_warning(const CqedParams &p, double chi1, double chi2) {
    const auto a = two_qubit_amplitudes(p, chi1, chi2);
    double nmax = 0.0;
    for (const auto &x : a) nmax = std::max(nmax, std::norm(x));
    const double limit = critical_photon_number(p) / 10.0;
    if (nmax > limit) {
        std::ostringstream msg;
        msg << "mean photon number " << nmax << " exceeds n_crit/10 = " << limit;
        return msg.str();
    }
    return std::nullopt;
}

}  // namespace paritybench
