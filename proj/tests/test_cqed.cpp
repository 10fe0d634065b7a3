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

CqedParams pointer_setting() {
    CqedParams p;
    p.kappa = 1.0;
    p.epsilon_m = 0.5;
    p.chi = 1.5;
    return p;
}

TEST(CoherentAmplitude, ResonantSubstitution) {
    const CqedParams p = pointer_setting();
    const Complex expect = -p.epsilon_m / Complex(p.chi, -p.kappa / 2);
    EXPECT_NEAR(std::abs(coherent_amplitude(p, 0) - expect), 0.0, 1e-15);
    EXPECT_THROW(coherent_amplitude(p, 2), std::invalid_argument);
}

TEST(CoherentAmplitude, ChiSignSwapsStates) {
    CqedParams p = pointer_setting();
    p.omega_r = 0.3;
    CqedParams q = p;
    q.chi = -p.chi;
    EXPECT_EQ(coherent_amplitude(p, 0), coherent_amplitude(q, 1));
    EXPECT_EQ(coherent_amplitude(p, 1), coherent_amplitude(q, 0));
    p.chi = 0.0;
    EXPECT_EQ(coherent_amplitude(p, 0), coherent_amplitude(p, 1));
}

TEST(CoherentAmplitude, ZeroDenominatorRejected) {
    CqedParams p;
    p.kappa = 1.0;
    p.validate();
    p.kappa = 0.0;
    p.epsilon_m = 1.0;
    EXPECT_THROW(coherent_amplitude(p, 0), std::invalid_argument);
}

TEST(TwoQubitAmplitudes, EvenParityOverlay) {
    const CqedParams p = pointer_setting();
    const auto a = two_qubit_amplitudes(p, 1.5, -1.5);
    EXPECT_NEAR(std::abs(a[0] - a[3]), 0.0, 1e-15);
    const double odd_gap = std::abs(a[1] - a[2]);
    EXPECT_GT(odd_gap, 0.0);
    EXPECT_LT(odd_gap, std::abs(a[0] - a[1]));
    const auto z = two_qubit_amplitudes(p, 0.0, 0.0);
    for (int s = 1; s < 4; ++s) EXPECT_EQ(z[0], z[static_cast<std::size_t>(s)]);
}

TEST(EffectiveRates, Limits) {
    CqedParams p = pointer_setting();
    const auto none = derive_effective_rates(p, 0.0, 0.0);
    EXPECT_EQ(none.gamma_meas, 0.0);
    EXPECT_EQ(none.gamma_deph_odd, 0.0);
    const auto r = derive_effective_rates(p, 1.5, -1.5);
    EXPECT_GT(r.gamma_meas, 0.0);
    EXPECT_GT(r.gamma_deph_odd, 0.0);
    p.epsilon_m *= 2.0;
    const auto r2 = derive_effective_rates(p, 1.5, -1.5);
    EXPECT_NEAR(r2.gamma_meas / r.gamma_meas, 4.0, 1e-12);
    EXPECT_NEAR(r2.gamma_deph_odd / r.gamma_deph_odd, 4.0, 1e-12);
}

TEST(EffectiveRates, MatchesFormula) {
    const CqedParams p = pointer_setting();
    const auto a = two_qubit_amplitudes(p, 1.5, -1.5);
    const auto r = derive_effective_rates(p, 1.5, -1.5);
    EXPECT_NEAR(r.gamma_meas, p.kappa * std::norm(a[0] - 0.5 * (a[1] + a[2])) / 2, 1e-15);
    EXPECT_NEAR(r.gamma_deph_odd, p.kappa * std::norm(a[1] - a[2]) / 2, 1e-15);
}

TEST(EffectiveRates, RejectsUnequalEvenAmplitudes) {
    try {
        derive_effective_rates(pointer_setting(), 1.5, 1.0);
        FAIL() << "expected rejection";
    } catch (const std::invalid_argument &e) {
        EXPECT_NE(std::string(e.what()).find("alpha_01"), std::string::npos);
    }
}

TEST(EffectiveRates, MirrorSymmetry) {
    CqedParams p = pointer_setting();
    p.omega_r = 0.2;
    CqedParams q = p;
    q.omega_r = -p.omega_r;
    const auto r1 = derive_effective_rates(p, 1.5, -1.5);
    const auto r2 = derive_effective_rates(q, -1.5, 1.5);
    EXPECT_NEAR(r1.gamma_meas, r2.gamma_meas, 1e-14);
    EXPECT_NEAR(r1.gamma_deph_odd, r2.gamma_deph_odd, 1e-14);
}

TEST(PhotonGuard, WarnsAboveTenthCritical) {
    CqedParams p = pointer_setting();
    p.g_over_delta = 0.01;  // n_crit = 2500
    EXPECT_FALSE(photon_number_warning(p, 1.5, -1.5).has_value());
    p.epsilon_m = 100.0;
    EXPECT_TRUE(photon_number_warning(p, 1.5, -1.5).has_value());
}

TEST(EffectiveRates, DefaultSettingClosedForm) {
    CqedParams p;
    p.kappa = kTwoPi * 50e6;
    p.epsilon_m = kTwoPi * 40e6;
    const double chi = kTwoPi * 120e6;
    const auto r = derive_effective_rates(p, chi, -chi);
    // resonant drive: alpha_even = -eps / (-i kappa / 2), alpha_odd = -eps / (+-2 chi - i kappa / 2)
    const Complex ik(0.0, p.kappa / 2);
    const Complex even = -p.epsilon_m / (-ik);
    const Complex a01 = -p.epsilon_m / (2 * chi - ik), a10 = -p.epsilon_m / (-2 * chi - ik);
    EXPECT_NEAR(r.gamma_meas, p.kappa * std::norm(even - 0.5 * (a01 + a10)) / 2, 1e-6 * r.gamma_meas);
    EXPECT_NEAR(r.gamma_deph_odd, p.kappa * std::norm(a01 - a10) / 2, 1e-6 * r.gamma_deph_odd);
    EXPECT_NEAR(r.gamma_meas, 3.935e8, 0.001e8);
}

}  // namespace
