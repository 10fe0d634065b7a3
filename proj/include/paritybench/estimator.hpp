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

// Processing half of delayed tomography and the Monte Carlo fidelity estimator.
//
// Expanding Omega_E in the Pauli basis B_k (x) sigma gives
//
//   Tr(Omega_E B_k (x) sigma) = 1/2 Tr[B_k E(sigma_L^T)]
//
// with sigma_L the encoded sigma. Since Y^T = -Y, writing sigma_L^T through its
// eigenstates gives the weight w = s_sigma tau with s_Y = -1 and s_X = s_Z = +1;
// for sigma = I the two logical basis states both enter with w = +1. Sampling
// (k, sigma, tau, nu) with probability Tr[P_k^nu E(Psi)] / (2 4^(n+1)) then gives
//
//   F_e = E[ 2^(n+1) w nu Tr(Omega_{R^dag} B_k (x) sigma) ],
//
// and each term is bounded by 4^n in magnitude.

#include "paritybench/codes.hpp"
#include "paritybench/estimator_acquire.hpp"
#include "paritybench/parallel.hpp"
#include "paritybench/qcore.hpp"
#include "paritybench/recovery.hpp"
#include "paritybench/sme.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace paritybench {

/// Mean with its standard error.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t count = 0;
};

inline Estimate mean_and_stderr(const std::vector<double> &xs) {
    if (xs.empty()) throw std::invalid_argument("mean_and_stderr: no samples");
    Estimate e;
    e.count = xs.size();
    e.value = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - e.value) * (x - e.value);
        e.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return e;
}

/// Sign s_sigma picked up by the transpose on the reference side.
inline int transpose_sign(char sigma) { return sigma == 'Y' ? -1 : 1; }

inline int shot_weight(char sigma, int tau) { return sigma == 'I' ? 1 : transpose_sign(sigma) * tau; }

/// <phi| (R (x) I)(B (x) sigma) |phi> = Tr(Omega_{R^dag} B (x) sigma) from the
/// reduced recovery variable Z[(r,a),(s,b)] = <r_L|R(|a><b|)|s_L>.
inline Complex adjoint_expectation(const OperatorMatrix &z, const OperatorMatrix &b, const OperatorMatrix &sigma) {
    const Eigen::Index d = b.rows();
    if (z.rows() != 2 * d || sigma.rows() != 2) throw std::invalid_argument("adjoint_expectation: dimension mismatch");
    Complex total = 0.0;
    for (int r = 0; r < 2; ++r)
        for (int s = 0; s < 2; ++s) {
            if (sigma(r, s) == Complex(0.0)) continue;
            // <r|R(B)|s> = sum_ab Z[(r,a),(s,b)] B_ab
            const Complex rb = z.block(r * d, s * d, d, d).cwiseProduct(b).sum();
            total += rb * sigma(r, s);
        }
    return 0.5 * total;
}

/// The Monte Carlo term 2^(n+1) w nu Tr(Omega_{R^dag} B_k (x) sigma).
inline double shot_term(const ShotRecord &shot, const OperatorMatrix &reduced_recovery, std::size_t n) {
    const Complex t = adjoint_expectation(reduced_recovery, pauli(shot.k), single_qubit_pauli(shot.sigma));
    return std::ldexp(1.0, static_cast<int>(n + 1)) * shot_weight(shot.sigma, shot.tau) * shot.nu * t.real();
}

/// Average of shot terms: (estimate, stderr).
inline Estimate estimate_average_fe(const std::vector<double> &terms) {
    if (terms.size() < 2) throw std::invalid_argument("estimate_average_fe: need at least 2 shots");
    return mean_and_stderr(terms);
}

/// Post-hoc processing of a lab shot: filter the recorded currents from the
/// reference-entangled state, solve for the optimal recovery, evaluate the term.
struct ProcessedShot {
    double term = 0.0;
    double f_e = 0.0;
};

inline ProcessedShot process_shot(const ShotRecord &shot, const StabilizerCode &code, const NoiseModel &model,
                                  const MeasurementSetup &setup, const SdpOptions &opt = {}) {
    const SmeIntegrator filter(code.n, model, setup, true);
    SmeRun run;
    run.dt = shot.trajectory.dt;
    run.steps = shot.trajectory.steps;
    run.keep_currents = false;
    const TrajectoryRecord conditional = filter.replay(reference_entangled_state(code), run, shot.trajectory.currents);
    const SdpSolution sol = solve_reduced_recovery(conditional.final_state, code, opt);
    return {shot_term(shot, sol.z, code.n), sol.primal};
}

/// Acquisition followed immediately by processing.
inline ProcessedShot sample_shot(const AcquisitionSpec &spec, std::uint64_t seed, const SdpOptions &opt = {}) {
    return process_shot(acquire_shot(spec, seed), spec.code, spec.model, spec.setup, opt);
}

inline std::vector<ProcessedShot> process_shots(const std::vector<ShotRecord> &shots, const StabilizerCode &code,
                                                const NoiseModel &model, const MeasurementSetup &setup,
                                                std::size_t threads = 0, const SdpOptions &opt = {}) {
    return parallel_map<ProcessedShot>(shots.size(), threads, [&](std::size_t i) {
        return process_shot(shots[i], code, model, setup, opt);
    });
}

inline Estimate estimate_average_fe(const std::vector<ProcessedShot> &shots) {
    std::vector<double> terms;
    terms.reserve(shots.size());
    for (const auto &s : shots) terms.push_back(s.term);
    return estimate_average_fe(terms);
}

/// Ground truth: mean optimal F_e over records carrying reference-entangled states.
inline Estimate direct_average_fe(const std::vector<TrajectoryRecord> &ensemble, const StabilizerCode &code,
                                  std::size_t threads = 0, const SdpOptions &opt = {}) {
    if (ensemble.empty()) throw std::invalid_argument("direct_average_fe: empty ensemble");
    const auto fe = parallel_map<double>(ensemble.size(), threads, [&](std::size_t i) {
        return solve_reduced_recovery(ensemble[i].final_state, code, opt).primal;
    });
    return mean_and_stderr(fe);
}

/// Exact enumeration over (k, sigma, tau, nu) for a fixed channel and recovery:
/// sum of Pr(k, sigma, tau, nu) times the Monte Carlo term. Also returns the
/// total probability, which must be 1.
struct EnumerationResult {
    double f_e = 0.0;
    double total_probability = 0.0;
};

inline EnumerationResult enumerate_estimator(const StabilizerCode &code, const KrausChannel &channel,
                                             const OperatorMatrix &reduced_recovery) {
    const std::size_t n = code.n;
    const std::uint64_t labels = std::uint64_t{1} << (2 * n);
    const double norm = 2.0 * std::ldexp(1.0, static_cast<int>(2 * (n + 1)));
    EnumerationResult res;
    for (char sigma : kSigmaLetters) {
        for (int flip = 0; flip < 2; ++flip) {
            const int tau = sigma == 'I' ? 1 : (flip == 0 ? 1 : -1);
            const int coin = sigma == 'I' ? flip : 0;
            const OperatorMatrix out = apply_kraus(channel, projector(shot_input_state(code, sigma, tau, coin)));
            for (std::uint64_t idx = 0; idx < labels; ++idx) {
                ShotRecord shot;
                shot.sigma = sigma;
                shot.tau = tau;
                shot.coin = coin;
                shot.k = PauliLabel::from_index(n, idx);
                const double expect = shot.k.is_identity() ? 1.0 : expectation(out, pauli(shot.k)).real();
                const double trace = out.trace().real();
                for (int nu : {1, -1}) {
                    const double born = shot.k.is_identity() ? (nu == 1 ? trace : 0.0) : 0.5 * (trace + nu * expect);
                    const double pr = born / norm;
                    res.total_probability += pr;
                    if (pr == 0.0) continue;
                    shot.nu = nu;
                    res.f_e += pr * shot_term(shot, reduced_recovery, n);
                }
            }
        }
    }
    return res;
}

/// Fixed-channel Monte Carlo estimate with M sampled shots.
inline Estimate sample_fixed_channel(const StabilizerCode &code, const KrausChannel &channel,
                                     const OperatorMatrix &reduced_recovery, std::size_t shots,
                                     std::uint64_t master_seed, std::size_t threads = 0) {
    const auto terms = parallel_map<double>(shots, threads, [&](std::size_t l) {
        return shot_term(acquire_fixed_channel_shot(code, channel, derive_seed(master_seed, l)), reduced_recovery,
                         code.n);
    });
    return estimate_average_fe(terms);
}

/// (E (x) I)(Phi) for a fixed n-qubit channel.
inline OperatorMatrix channel_choi_state(const StabilizerCode &code, const KrausChannel &channel) {
    const StateVector phi = reference_entangled_state(code);
    OperatorMatrix omega = OperatorMatrix::Zero(2 * code.dim(), 2 * code.dim());
    for (const auto &k : channel) {
        const OperatorMatrix kk = kron(k, OperatorMatrix::Identity(2, 2));
        omega += kk * phi * phi.adjoint() * kk.adjoint();
    }
    return omega;
}

}  // namespace paritybench
