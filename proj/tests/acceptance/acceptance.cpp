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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include "paritybench/paritybench.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace paritybench;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

OperatorMatrix pauli_mixture(const StabilizerCode &code, double p) {
    const StateVector phi = reference_entangled_state(code);
    OperatorMatrix omega = OperatorMatrix::Zero(phi.size(), phi.size());
    for (unsigned mask = 0; mask < (1u << code.n); ++mask) {
        std::string s(code.n, 'I');
        double prob = 1.0;
        for (std::size_t q = 0; q < code.n; ++q) {
            const bool flip = (mask >> q) & 1u;
            if (flip) s[q] = 'X';
            prob *= flip ? p : 1.0 - p;
        }
        const OperatorMatrix e = kron(pauli(PauliLabel(s)), OperatorMatrix::Identity(2, 2));
        omega += prob * e * phi * phi.adjoint() * e.adjoint();
    }
    return omega;
}

double discrete_law(double p) { return std::pow(1 - p, 3) + 3 * p * (1 - p) * (1 - p); }

ExperimentConfig default_config() {
    ExperimentConfig c;
    c.code = "bit_flip";
    c.noise.gamma_x = kTwoPi * 5e6;
    c.cqed.chi = kTwoPi * 120e6;
    c.cqed.kappa = kTwoPi * 50e6;
    c.cqed.epsilon_m = kTwoPi * 40e6;
    c.eta = 1.0;
    c.dt_ns = 0.02;
    c.trajectories = 2000;
    c.seed = 2026;
    c.sdp_tol = 1e-7;
    return c;
}

Outcome criterion1() {
    const auto t0 = Clock::now();
    const auto code = bit_flip_code();
    double worst = 0.0;
    for (double p : {0.05, 0.1, 0.2}) {
        double f = 0.0;
        for (unsigned mask = 0; mask < 8; ++mask) {
            std::string s(3, 'I');
            double prob = 1.0;
            for (std::size_t q = 0; q < 3; ++q) {
                const bool flip = (mask >> q) & 1u;
                if (flip) s[q] = 'X';
                prob *= flip ? p : 1.0 - p;
            }
            const PauliLabel error(s);
            const OperatorMatrix e = kron(pauli(error), OperatorMatrix::Identity(2, 2));
            const StateVector phi = reference_entangled_state(code);
            const OperatorMatrix omega = e * phi * phi.adjoint() * e.adjoint();
            SyndromeEstimate syn;
            syn.signs = syndrome_of(code, error);
            f += prob * apply_correction(omega, code, textbook_correct(code, syn)).f_e;
        }
        worst = std::max(worst, std::abs(f - discrete_law(p)));
    }
    const double wall = seconds_since(t0);
    return {worst <= 1e-12 && wall < 1.0, fmt("max |F - (1-p)^3 - 3p(1-p)^2| = %.2e, %.3f s", worst, wall)};
}

Outcome criterion2() {
    const auto t0 = Clock::now();
    const auto code = bit_flip_code();
    const OperatorMatrix omega = pauli_mixture(code, 0.1);
    SdpOptions opt;
    opt.tol = 1e-7;
    const RecoveryResult res = solve_optimal_recovery(omega, code, opt);
    const double residual = std::max(std::max(0.0, -min_eigenvalue(res.reduced)),
                                     std::max(res.choi.tp_defect, std::max(0.0, -min_eigenvalue(res.choi.matrix))));

    const std::vector<PauliLabel> fixes{PauliLabel("III"), PauliLabel("XII"), PauliLabel("IXI"), PauliLabel("IIX")};
    const std::vector<Syndrome> syndromes{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
    const OperatorMatrix s1 = pauli(PauliLabel("ZZI")), s2 = pauli(PauliLabel("IZZ"));
    const OperatorMatrix id = OperatorMatrix::Identity(8, 8);
    double best = 0.0;
    for (int choice = 0; choice < 256; ++choice) {
        std::vector<OperatorMatrix> ks;
        for (std::size_t s = 0; s < 4; ++s) {
            const OperatorMatrix proj = 0.25 * (id + syndromes[s][0] * s1) * (id + syndromes[s][1] * s2);
            ks.push_back(pauli(fixes[static_cast<std::size_t>((choice >> (2 * s)) & 3)]) * proj);
        }
        best = std::max(best, entanglement_fidelity(choi_from_kraus(ks), omega, code));
    }
    const double wall = seconds_since(t0);
    const bool ok = std::abs(res.f_e - 0.972) <= 1e-5 && std::abs(res.f_e - best) <= 1e-5 && residual <= 1e-6 &&
                    wall < 10.0;
    return {ok, fmt("F_e = %.9f, lookup search = %.9f, feasibility residual = %.1e, %.2f s", res.f_e, best, residual,
                    wall)};
}

Outcome criterion3() {
    StateVector zero = StateVector::Zero(2), one = StateVector::Zero(2);
    zero(0) = 1.0;
    one(1) = 1.0;
    NoiseModel flip;
    flip.gamma_x = kTwoPi * 5e6;
    NoiseModel damp;
    damp.gamma_1 = kTwoPi * 5e6;
    const double T = 50e-9;
    const OperatorMatrix a = integrate_unconditional(zero, 1, flip, nullptr, T, T / 1e4);
    const OperatorMatrix b = integrate_unconditional(one, 1, damp, nullptr, T, T / 1e4);
    const double e = std::exp(-2 * flip.gamma_x * T);
    const double r1 = std::abs(a(0, 0).real() / ((1 + e) / 2) - 1);
    const double r2 = std::abs(a(1, 1).real() / ((1 - e) / 2) - 1);
    const double r3 = std::abs(b(1, 1).real() / std::exp(-damp.gamma_1 * T) - 1);
    const double worst = std::max({r1, r2, r3});
    return {worst <= 1e-4, fmt("max relative error %.2e (bit flip %.2e/%.2e, damping %.2e)", worst, r1, r2, r3)};
}

Outcome criterion4() {
    ExperimentConfig c = default_config();
    const auto code = c.stabilizer_code();
    const MeasurementSetup setup = c.setup(0.0);
    const double T = 10e-9, dt = c.dt();
    EnsembleSpec spec{code, c.noise, setup, T, dt};
    spec.keep_currents = false;
    const auto ens = run_ensemble(spec, 1000, 404, 0);
    const OperatorMatrix uncond = integrate_unconditional(reference_entangled_state(code), 3, c.noise, &setup, T, dt);
    const Eigen::Index d = uncond.rows();
    OperatorMatrix mean = OperatorMatrix::Zero(d, d);
    for (const auto &r : ens) mean += r.final_state;
    mean /= static_cast<double>(ens.size());
    double var = 0.0;
    for (const auto &r : ens) var += (r.final_state - mean).squaredNorm();
    const double n = static_cast<double>(ens.size());
    const double se = std::sqrt(var / (n - 1) / n);
    const double td = trace_distance(mean, uncond);
    const double bound = std::max(3 * se, 1e-10);
    return {td <= bound, fmt("trace distance %.2e, 3 x stderr %.2e (floor 1e-10), 1000 trajectories", td, 3 * se)};
}

Outcome criterion5() {
    double worst = 0.0;
    for (const auto &code : {bit_flip_code(), relaxation_code()}) {
        for (std::uint64_t seed : {501u, 502u, 503u}) {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> g(0.0, 1.0);
            KrausChannel ks;
            OperatorMatrix s = OperatorMatrix::Zero(code.dim(), code.dim());
            for (int i = 0; i < 3; ++i) {
                OperatorMatrix k(code.dim(), code.dim());
                for (Eigen::Index x = 0; x < k.size(); ++x) k.data()[x] = Complex(g(rng), g(rng));
                ks.push_back(k);
                s += k.adjoint() * k;
            }
            Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(s);
            const OperatorMatrix inv = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                                       es.eigenvectors().adjoint();
            for (auto &k : ks) k = k * inv;
            const OperatorMatrix omega = channel_choi_state(code, ks);
            const SdpSolution sol = solve_reduced_recovery(omega, code);
            const double exact = entanglement_fidelity(choi_from_reduced(sol.z, code), omega, code);
            const EnumerationResult en = enumerate_estimator(code, ks, sol.z);
            worst = std::max({worst, std::abs(en.f_e - exact), std::abs(en.total_probability - 1.0)});
        }
    }
    const auto code = bit_flip_code();
    const KrausChannel ch{std::sqrt(0.9) * OperatorMatrix::Identity(8, 8),
                          std::sqrt(0.1) * pauli(PauliLabel("IXI"))};
    const OperatorMatrix z = reduced_from_kraus({OperatorMatrix::Identity(8, 8)}, code);
    const double truth = entanglement_fidelity(choi_from_reduced(z, code), channel_choi_state(code, ch), code);
    const Estimate e = sample_fixed_channel(code, ch, z, 100000, 505, 0);
    const double dev = std::abs(e.value - truth);
    return {worst <= 1e-9 && dev <= 3 * e.std_error,
            fmt("enumeration error %.1e over 6 channels; sampled %.5f +- %.5f vs %.5f (M = 1e5)", worst, e.value,
                e.std_error, truth)};
}

Outcome criterion6() {
    ExperimentConfig c = default_config();
    c.dt_ns = 0.001;
    c.t_max_ns = 0.001;
    c.grid_ns = {0.001};
    c.trajectories = 2000;
    ConditionalOptions o;
    o.textbook = true;
    const ConditionalSamples s = sample_conditional(c, 1.0, c.grid_ns, o);
    std::vector<double> fe, fbar;
    for (std::size_t l = 0; l < s.textbook_f_e.size(); ++l) {
        fe.push_back(s.textbook_f_e[l][0]);
        fbar.push_back(s.textbook_fbar[l][0]);
    }
    const Estimate a = mean_and_stderr(fe), b = mean_and_stderr(fbar);
    const bool ok = std::abs(a.value - 0.25) <= 0.05 && std::abs(b.value - 0.25) <= 0.05;
    return {ok, fmt("t = 0.001 ns: textbook F_e = %.4f +- %.4f, fbar = %.4f +- %.4f (2000 trajectories)", a.value,
                    a.std_error, b.value, b.std_error)};
}

Outcome criterion7() {
    ExperimentConfig c = default_config();
    c.t_max_ns = 40;
    c.grid_ns = {0.5, 1, 2, 3, 4, 6, 8, 10, 15, 20, 25, 30, 40};
    c.validate();
    const auto code = c.stabilizer_code();
    const DeterministicCurve f1 = run_curve_f1(c, false);
    const DeterministicCurve f1m = run_curve_f1(c, true);
    const UnencodedCurves u = run_curve_unencoded(c);
    ConditionalOptions o;
    o.textbook = true;
    o.control_recoveries = &f1m.recoveries;
    const ConditionalSamples s = sample_conditional(c, 1.0, c.grid_ns, o);
    const Curve f2 = curve_from_samples(s);
    const Curve tb = textbook_curve_from_samples(s);
    const Curve diff = difference_from_samples(s, f1.f_e, f1m.f_e);
    const std::size_t G = c.grid_ns.size();

    bool encoded_above = true;
    for (std::size_t g = 0; g < G; ++g) {
        const double unenc = std::max(u.optimal[g].fbar, u.bare[g].fbar);
        if (!(f2[g].fbar - 3 * f2[g].stderr_value > unenc)) encoded_above = false;
        if (!(f1.curve[g].fbar > unenc)) encoded_above = false;
    }

    // interior maximum: some interior point beats both ends at 3 sigma
    std::size_t peak = 0;
    for (std::size_t g = 1; g < G; ++g)
        if (tb[g].fbar > tb[peak].fbar) peak = g;
    auto separated = [&](std::size_t i, std::size_t j) {
        return tb[i].fbar - tb[j].fbar > 3 * std::hypot(tb[i].stderr_value, tb[j].stderr_value);
    };
    const bool interior = peak > 0 && peak + 1 < G && separated(peak, 0) && separated(peak, G - 1);

    // textbook below optimal, paired per trajectory
    bool below = true;
    for (std::size_t g = 0; g < G; ++g) {
        std::vector<double> gap;
        for (std::size_t l = 0; l < s.f_e.size(); ++l)
            gap.push_back(average_fidelity(s.f_e[l][g]) - s.textbook_fbar[l][g]);
        const Estimate e = mean_and_stderr(gap);
        if (!(e.value > 3 * e.std_error)) below = false;
    }

    // crossover: F2 - F1 significantly negative early and significantly positive later
    double t_neg = -1, t_pos = -1;
    for (std::size_t g = 0; g < G; ++g) {
        if (t_neg < 0 && diff[g].fbar < -3 * diff[g].stderr_value) t_neg = diff[g].x;
        if (t_neg >= 0 && diff[g].fbar > 3 * diff[g].stderr_value) {
            t_pos = diff[g].x;
            break;
        }
    }
    const bool crossover = t_neg >= 0 && t_pos > t_neg;
    double t_cross = -1;
    for (std::size_t g = 1; g < G; ++g)
        if (diff[g - 1].fbar < 0 && diff[g].fbar >= 0) {
            t_cross = diff[g - 1].x + (diff[g].x - diff[g - 1].x) * (-diff[g - 1].fbar) / (diff[g].fbar - diff[g - 1].fbar);
            break;
        }
    return {encoded_above && interior && below && crossover,
            fmt("encoded above unencoded: %s; textbook peak at %g ns (%.4f), interior: %s; textbook below optimal: %s; "
                "F2-F1 < 0 at %g ns, > 0 at %g ns, crossing near %.1f ns",
                encoded_above ? "yes" : "no", tb[peak].x, tb[peak].fbar, interior ? "yes" : "no", below ? "yes" : "no",
                t_neg, t_pos, t_cross)};
}

Outcome criterion8() {
    ExperimentConfig c = default_config();
    c.code = "relaxation";
    c.noise = NoiseModel{};
    c.noise.gamma_1 = kTwoPi * 5e6;
    c.dt_ns = 0.05;
    c.t_max_ns = 40;
    c.grid_ns = {2, 5, 10, 20, 40};
    c.trajectories = 40;
    c.sdp_tol = 1e-6;
    c.validate();
    const DeterministicCurve f1 = run_curve_f1(c, false);
    double worst = 1e9;
    double worst_eta = 0, worst_t = 0;
    for (double eta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const Curve f2 = curve_from_samples(sample_conditional(c, eta, c.grid_ns));
        for (std::size_t g = 0; g < f2.size(); ++g) {
            const double margin = f2[g].fbar + 3 * f2[g].stderr_value + 2 * c.sdp_tol - f1.curve[g].fbar;
            if (margin < worst) {
                worst = margin;
                worst_eta = eta;
                worst_t = f2[g].x;
            }
        }
    }
    return {worst >= 0.0, fmt("min(F2 + 3 sigma + tol - F1) = %.2e at eta = %g, t = %g ns (40 trajectories)", worst,
                              worst_eta, worst_t)};
}

std::string read_file(const std::filesystem::path &p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Outcome criterion9() {
    ExperimentConfig c = default_config();
    c.t_max_ns = 6;
    c.dt_ns = 0.05;
    c.grid_ns = {0, 1, 2, 4, 6};
    c.trajectories = 24;
    const auto base = std::filesystem::temp_directory_path() / "paritybench_acceptance_c9";
    std::filesystem::remove_all(base);
    std::vector<std::filesystem::path> dirs;
    for (std::size_t threads : {1u, 1u, 2u, 4u}) {
        c.threads = threads;
        c.out = (base / ("run" + std::to_string(dirs.size()))).string();
        write_bench(c);
        dirs.emplace_back(c.out);
    }
    const std::vector<std::string> files{"f2.csv", "f1.csv", "f1_meas.csv", "unencoded_optimal.csv",
                                         "unencoded_bare.csv", "f2_minus_f1.csv", "textbook.csv"};
    bool same = true;
    for (const auto &f : files) {
        const std::string ref = read_file(dirs[0] / f);
        if (ref.empty()) same = false;
        for (std::size_t i = 1; i < dirs.size(); ++i)
            if (read_file(dirs[i] / f) != ref) same = false;
    }
    std::filesystem::remove_all(base);
    return {same, fmt("%zu CSV files compared over 4 runs (threads 1, 1, 2, 4)", files.size())};
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
    int failures = 0;
    for (const auto &[id, fn] : criteria) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << "  ["
                  << fmt("%.1f s", seconds_since(t0)) << "]" << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
