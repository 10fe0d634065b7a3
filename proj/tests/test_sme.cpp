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

#include "test_util.hpp"

#include <gtest/gtest.h>

namespace {

using namespace pbtest;

constexpr double kGammaX = kTwoPi * 5e6;

MeasurementSetup default_setup(const StabilizerCode &code, double eta) {
    CqedParams p;
    p.kappa = kTwoPi * 50e6;
    p.epsilon_m = kTwoPi * 40e6;
    const double chi = kTwoPi * 120e6;
    const auto r = derive_effective_rates(p, chi, -chi);
    return MeasurementSetup::parity_stabilizers(code, r.gamma_meas, r.gamma_deph_odd, eta);
}

NoiseModel bit_flip_noise() {
    NoiseModel m;
    m.gamma_x = kGammaX;
    return m;
}

StateVector ket0() {
    StateVector v = StateVector::Zero(2);
    v(0) = 1.0;
    return v;
}

TEST(NoiseModel, ValidationAndWarning) {
    NoiseModel m;
    m.gamma_x = -1.0;
    EXPECT_THROW(m.validate(), std::invalid_argument);
    m.gamma_x = 1.0;
    m.gamma_1 = 1.0;
    EXPECT_NO_THROW(m.validate());
    EXPECT_TRUE(m.warning().has_value());
}

TEST(MeasurementSetup, Validation) {
    MeasurementSetup s;
    s.operators = {PauliLabel("ZXI")};
    EXPECT_THROW(s.validate(3), std::invalid_argument);
    s.operators = {PauliLabel("ZZZ")};
    EXPECT_THROW(s.validate(3), std::invalid_argument);
    s.operators = {PauliLabel("ZZI")};
    s.eta = 1.5;
    EXPECT_THROW(s.validate(3), std::invalid_argument);
    const auto r = MeasurementSetup::parity_stabilizers(relaxation_code(), 1.0, 0.1, 1.0);
    ASSERT_EQ(r.operators.size(), 2u);
    EXPECT_EQ(r.operators[0].str(), "ZZII");
    EXPECT_EQ(r.operators[1].str(), "IIZZ");
}

TEST(LindbladStep, ZeroGeneratorIsIdentity) {
    std::mt19937_64 rng(1);
    const OperatorMatrix rho = random_density(8, rng);
    EXPECT_TRUE(near(lindblad_step(rho, 3, NoiseModel{}, nullptr, 1e-9), rho, 1e-14));
}

TEST(LindbladStep, RejectsNonDensity) {
    OperatorMatrix bad = OperatorMatrix::Identity(2, 2);
    EXPECT_THROW(lindblad_step(bad, 1, NoiseModel{}, nullptr, 1e-9), std::invalid_argument);
}

TEST(Unconditional, BitFlipClosedForm) {
    const double T = 40e-9;
    const OperatorMatrix rho = integrate_unconditional(ket0(), 1, bit_flip_noise(), nullptr, T, T / 1e4);
    const double e = std::exp(-2 * kGammaX * T);
    EXPECT_NEAR(rho(0, 0).real() / ((1 + e) / 2) - 1, 0.0, 1e-4);
    EXPECT_NEAR(rho(1, 1).real() / ((1 - e) / 2) - 1, 0.0, 1e-4);
}

TEST(Unconditional, AmplitudeDampingClosedForm) {
    NoiseModel m;
    m.gamma_1 = kTwoPi * 5e6;
    const double T = 30e-9;
    StateVector one = StateVector::Zero(2);
    one(1) = 1.0;
    const OperatorMatrix rho = integrate_unconditional(one, 1, m, nullptr, T, T / 1e4);
    EXPECT_NEAR(rho(1, 1).real() / std::exp(-m.gamma_1 * T) - 1, 0.0, 1e-4);
}

TEST(Unconditional, ZeroTimeAndTrace) {
    const auto code = bit_flip_code();
    const StateVector phi = reference_entangled_state(code);
    EXPECT_TRUE(near(integrate_unconditional(phi, 3, bit_flip_noise(), nullptr, 0.0, 1e-11), projector(phi), 0));
    const OperatorMatrix out = integrate_unconditional(phi, 3, bit_flip_noise(), nullptr, 10e-9, 1e-11);
    EXPECT_NEAR(out.trace().real(), 1.0, 1e-8);
    EXPECT_THROW(integrate_unconditional(phi, 3, bit_flip_noise(), nullptr, 1e-9, 0.3e-9), std::invalid_argument);
}

TEST(Unconditional, BitFlipCodeMatchesPauliMixture) {
    const auto code = bit_flip_code();
    const double T = 20e-9;
    const OperatorMatrix out =
        integrate_unconditional(reference_entangled_state(code), 3, bit_flip_noise(), nullptr, T, T / 4000);
    const double p = (1 - std::exp(-2 * kGammaX * T)) / 2;
    EXPECT_TRUE(near(out, pauli_mixture_omega(code, iid_x_terms(3, p)), 1e-4));
}

TEST(Sme, StabilityGuard) {
    const auto code = bit_flip_code();
    const auto setup = default_setup(code, 1.0);
    const double dt = 0.2 / setup.gamma_meas;
    EXPECT_THROW(integrate_sme(reference_entangled_state(code), 3, bit_flip_noise(), setup, 10 * dt, dt, 1),
                 std::invalid_argument);
}

TEST(Sme, NoNoiseNoMeasurementIsIdentity) {
    const auto code = bit_flip_code();
    const StateVector phi = reference_entangled_state(code);
    const auto rec = integrate_sme(phi, 3, NoiseModel{}, MeasurementSetup{}, 1e-9, 1e-11, 5);
    EXPECT_TRUE(near(rec.final_state, projector(phi), 1e-14));
    EXPECT_TRUE(rec.currents.empty());
}

TEST(Sme, QndParityEigenstate) {
    const auto code = bit_flip_code();
    auto setup = default_setup(code, 1.0);
    StateVector s000 = StateVector::Zero(8);
    s000(0) = 1.0;
    const double dt = 1e-11;
    const std::size_t steps = 2000;
    const SmeIntegrator integ(3, NoiseModel{}, setup, false);
    SmeRun run;
    run.dt = dt;
    run.steps = steps;
    run.snapshot_steps = {500, 1000, 1500, 2000};
    const auto rec = integ.run(s000, run, 42);
    for (const auto &snap : rec.snapshots)
        for (const auto &op : setup.operators) EXPECT_NEAR(expectation(snap, pauli(op)).real(), 1.0, 1e-8);
    const double sigma = 1.0 / (2.0 * std::sqrt(setup.gamma_meas * dt));
    for (const auto &c : rec.currents) {
        const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(steps);
        EXPECT_NEAR(mean, 1.0, 4.0 * sigma / std::sqrt(static_cast<double>(steps)));
    }
}

TEST(Sme, PositivityAndTraceAtDefaultRates) {
    const auto code = bit_flip_code();
    const SmeIntegrator integ(3, bit_flip_noise(), default_setup(code, 1.0), true);
    SmeRun run;
    run.dt = 0.05e-9;
    run.steps = 400;
    for (std::size_t k = 20; k <= 400; k += 20) run.snapshot_steps.push_back(k);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto rec = integ.run(reference_entangled_state(code), run, seed);
        for (const auto &s : rec.snapshots) {
            EXPECT_GE(min_eigenvalue(s), -1e-6);
            EXPECT_NEAR(s.trace().real(), 1.0, 1e-12);
        }
    }
}

TEST(Sme, EtaZeroReducesToUnconditional) {
    const auto code = bit_flip_code();
    const auto setup = default_setup(code, 0.0);
    const StateVector phi = reference_entangled_state(code);
    const double T = 4e-9, dt = 0.02e-9;
    const OperatorMatrix uncond = integrate_unconditional(phi, 3, bit_flip_noise(), &setup, T, dt);
    const auto rec = integrate_sme(phi, 3, bit_flip_noise(), setup, T, dt, 9);
    EXPECT_TRUE(rec.raw_innovation);
    EXPECT_TRUE(near(rec.final_state, uncond, 1e-12));
    // raw innovation samples have variance 1/dt
    double ss = 0.0;
    for (double x : rec.currents[0]) ss += x * x;
    EXPECT_NEAR(ss / static_cast<double>(rec.steps) * dt, 1.0, 0.25);
}

// Per-trajectory linear functionals average to their unconditional value.
TEST(Sme, EnsembleMeanIsUnconditionalAtFullEfficiency) {
    const auto code = bit_flip_code();
    const auto setup = default_setup(code, 1.0);
    const StateVector phi = reference_entangled_state(code);
    const double T = 3e-9, dt = 0.02e-9;
    const OperatorMatrix uncond = integrate_unconditional(phi, 3, bit_flip_noise(), &setup, T, dt);
    EnsembleSpec spec{code, bit_flip_noise(), setup, T, dt};
    spec.keep_currents = false;
    const auto ens = run_ensemble(spec, 800, 77, 0);
    const std::vector<OperatorMatrix> observables{
        projector(phi), kron(pauli(PauliLabel("ZZI")), OperatorMatrix::Identity(2, 2)),
        kron(pauli(PauliLabel("XXX")), pauli(PauliLabel("X"))), kron(pauli(PauliLabel("IXI")), OperatorMatrix::Identity(2, 2))};
    for (const auto &o : observables) {
        std::vector<double> xs;
        for (const auto &r : ens) xs.push_back(expectation(r.final_state, o).real());
        const Estimate e = mean_and_stderr(xs);
        EXPECT_NEAR(e.value, expectation(uncond, o).real(), 4 * e.std_error + 1e-12);
    }
}

TEST(Sme, ReplayReproducesRun) {
    const auto code = bit_flip_code();
    const SmeIntegrator integ(3, bit_flip_noise(), default_setup(code, 0.7), true);
    SmeRun run;
    run.dt = 0.05e-9;
    run.steps = 200;
    const auto rec = integ.run(reference_entangled_state(code), run, 123);
    const auto again = integ.replay(reference_entangled_state(code), run, rec.currents);
    EXPECT_TRUE(near(again.final_state, rec.final_state, 1e-10));
}

TEST(Ensemble, DeterministicAndThreadIndependent) {
    const auto code = bit_flip_code();
    EnsembleSpec spec{code, bit_flip_noise(), default_setup(code, 1.0), 1e-9, 0.05e-9};
    const auto a = run_ensemble(spec, 6, 2026, 1);
    const auto b = run_ensemble(spec, 6, 2026, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].seed, derive_seed(2026, i));
        EXPECT_EQ(a[i].currents, b[i].currents);
        EXPECT_TRUE(a[i].final_state == b[i].final_state);
    }
    const auto one = run_ensemble(spec, 1, 2026, 1);
    const auto direct = integrate_sme(reference_entangled_state(code), 3, spec.model, spec.setup, spec.T, spec.dt,
                                      derive_seed(2026, 0));
    EXPECT_EQ(one[0].currents, direct.currents);
    EXPECT_TRUE(one[0].final_state == direct.final_state);
    EXPECT_THROW(run_ensemble(spec, 0, 1), std::invalid_argument);
}

// Halving dt moves the ensemble-mean optimal fidelity by less than its standard error.
TEST(Sme, WeakConvergenceInStepSize) {
    const auto code = bit_flip_code();
    std::vector<double> means;
    double se = 0.0;
    for (double dt : {0.02e-9, 0.01e-9}) {
        EnsembleSpec spec{code, bit_flip_noise(), default_setup(code, 1.0), 4e-9, dt};
        spec.keep_currents = false;
        const auto ens = run_ensemble(spec, 1000, 5, 0);
        const Estimate e = direct_average_fe(ens, code, 0);
        means.push_back(e.value);
        se = std::max(se, e.std_error);
    }
    EXPECT_LT(std::abs(means[0] - means[1]), se);
}

}  // namespace
