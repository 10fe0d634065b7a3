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

// Laboratory half of delayed tomography: prepare a random encoded Pauli
// eigenstate, let it evolve under noise and continuous parity measurement,
// then measure a random n-qubit Pauli. Nothing in this header knows about
// recoveries; processing lives in estimator.hpp.

#include "paritybench/codes.hpp"
#include "paritybench/parallel.hpp"
#include "paritybench/qcore.hpp"
#include "paritybench/sme.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace paritybench {

/// One laboratory shot.
struct ShotRecord {
    std::uint64_t seed = 0;
    /// 'I', 'X', 'Y' or 'Z'.
    char sigma = 'I';
    /// +1 or -1; for sigma = 'I' the preparation coin is in `coin` and tau is +1.
    int tau = 1;
    /// Preparation coin for sigma = 'I': 0 prepares |0_L>, 1 prepares |1_L>.
    int coin = 0;
    PauliLabel k;
    int nu = 1;
    /// Currents and lab state; empty for fixed-channel shots.
    TrajectoryRecord trajectory;
};

inline constexpr std::array<char, 4> kSigmaLetters{'I', 'X', 'Y', 'Z'};

/// Input state of a shot: the tau eigenstate of logical sigma, or the coin-selected
/// logical basis state when sigma is the identity.
inline StateVector shot_input_state(const StabilizerCode &code, char sigma, int tau, int coin) {
    if (sigma == 'I') return code.logical(coin);
    return encoded_eigenstate(code, sigma, tau);
}

/// Born draw of the eigenvalue of pauli(k) on `rho` (+1 for the identity).
template <typename Rng>
int measure_pauli(const OperatorMatrix &rho, const PauliLabel &k, Rng &rng) {
    if (k.is_identity()) return 1;
    const double expect = expectation(rho, pauli(k)).real();
    const double p_plus = std::clamp(0.5 * (1.0 + expect), 0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < p_plus ? 1 : -1;
}

namespace detail {

/// Draws sigma, tau (or the coin) and k for one shot.
template <typename Rng>
void draw_settings(ShotRecord &shot, std::size_t n, Rng &rng) {
    std::uniform_int_distribution<int> four(0, 3);
    std::uniform_int_distribution<int> two(0, 1);
    shot.sigma = kSigmaLetters[static_cast<std::size_t>(four(rng))];
    const int flip = two(rng);
    if (shot.sigma == 'I') {
        shot.tau = 1;
        shot.coin = flip;
    } else {
        shot.tau = flip == 0 ? 1 : -1;
        shot.coin = 0;
    }
    std::uniform_int_distribution<std::uint64_t> label(0, (std::uint64_t{1} << (2 * n)) - 1);
    shot.k = PauliLabel::from_index(n, label(rng));
}

}  // namespace detail

/// Lab protocol for the continuously measured system: the state is the bare
/// n-qubit register, no reference qubit.
struct AcquisitionSpec {
    StabilizerCode code;
    NoiseModel model;
    MeasurementSetup setup;
    double T = 0.0;
    double dt = 0.0;
};

inline ShotRecord acquire_shot(const AcquisitionSpec &spec, const SmeIntegrator &integrator, std::uint64_t seed) {
    ShotRecord shot;
    shot.seed = seed;
    std::mt19937_64 rng(seed);
    detail::draw_settings(shot, spec.code.n, rng);
    SmeRun run;
    run.dt = spec.dt;
    run.steps = detail::step_count(spec.T, spec.dt);
    const StateVector psi = shot_input_state(spec.code, shot.sigma, shot.tau, shot.coin);
    shot.trajectory = integrator.run(psi, run, splitmix64(seed));
    shot.nu = measure_pauli(shot.trajectory.final_state, shot.k, rng);
    return shot;
}

inline ShotRecord acquire_shot(const AcquisitionSpec &spec, std::uint64_t seed) {
    const SmeIntegrator integrator(spec.code.n, spec.model, spec.setup, false);
    return acquire_shot(spec, integrator, seed);
}

/// Shot l uses seed derive_seed(master_seed, l).
inline std::vector<ShotRecord> acquire_shots(const AcquisitionSpec &spec, std::size_t count,
                                             std::uint64_t master_seed, std::size_t threads = 0) {
    if (count == 0) throw std::invalid_argument("acquire_shots: count must be at least 1");
    const SmeIntegrator integrator(spec.code.n, spec.model, spec.setup, false);
    return parallel_map<ShotRecord>(count, threads, [&](std::size_t l) {
        return acquire_shot(spec, integrator, derive_seed(master_seed, l));
    });
}

/// Kraus operators of a fixed n-qubit channel.
using KrausChannel = std::vector<OperatorMatrix>;

inline OperatorMatrix apply_kraus(const KrausChannel &channel, const OperatorMatrix &rho) {
    OperatorMatrix out = OperatorMatrix::Zero(rho.rows(), rho.cols());
    for (const auto &k : channel) out += k * rho * k.adjoint();
    return out;
}

/// Shot through a fixed channel (no measurement record).
inline ShotRecord acquire_fixed_channel_shot(const StabilizerCode &code, const KrausChannel &channel,
                                             std::uint64_t seed) {
    ShotRecord shot;
    shot.seed = seed;
    std::mt19937_64 rng(seed);
    detail::draw_settings(shot, code.n, rng);
    const StateVector psi = shot_input_state(code, shot.sigma, shot.tau, shot.coin);
    shot.nu = measure_pauli(apply_kraus(channel, projector(psi)), shot.k, rng);
    return shot;
}

}  // namespace paritybench
