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

// Experiment configuration and the benchmark curves.
//
// Config files are "key = value" lines; '#' starts a comment. Frequencies are
// given in Hz through *_over_2pi keys, times in ns, direct rate overrides in
// 1/s. See configs/ for complete examples.

#include "paritybench/codes.hpp"
#include "paritybench/cqed.hpp"
#include "paritybench/decoders.hpp"
#include "paritybench/estimator.hpp"
#include "paritybench/parallel.hpp"
#include "paritybench/qcore.hpp"
#include "paritybench/recovery.hpp"
#include "paritybench/sme.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace paritybench {

#ifndef PARITYBENCH_VERSION
#define PARITYBENCH_VERSION "0.0.0"
#endif

inline constexpr const char *kVersion = PARITYBENCH_VERSION;

struct ExperimentConfig {
    std::string code = "bit_flip";
    /// Angular rates (rad/s).
    NoiseModel noise;
    /// Angular frequencies; eta here is ignored in favour of `eta` below.
    CqedParams cqed;
    std::optional<double> chi1;
    std::optional<double> chi2;
    /// Direct overrides of the derived rates (1/s).
    std::optional<double> gamma_meas;
    std::optional<double> gamma_deph_odd;
    double eta = 1.0;
    double t_max_ns = 50.0;
    double dt_ns = 0.05;
    /// Sampling times; built from grid_step_ns when not listed.
    std::vector<double> grid_ns;
    double grid_step_ns = 2.0;
    std::size_t trajectories = 200;
    std::uint64_t seed = 1;
    std::size_t threads = 0;
    std::string out = "out";
    std::vector<double> etas{0.0, 0.25, 0.5, 0.75, 1.0};
    double t_star_ns = 48.0;
    double sdp_tol = 1e-6;
    /// Trailing textbook integration window; 0 integrates the full record.
    double textbook_window_ns = 0.0;

    double dt() const { return dt_ns * 1e-9; }

    std::size_t steps_at(double t_ns) const {
        if (t_ns < 0.0) throw std::invalid_argument("config: negative time " + std::to_string(t_ns));
        return detail::step_count(t_ns * 1e-9, dt());
    }

    std::vector<double> grid() const {
        if (!grid_ns.empty()) return grid_ns;
        std::vector<double> g;
        const auto count = static_cast<std::size_t>(std::floor(t_max_ns / grid_step_ns + 1e-9));
        for (std::size_t i = 0; i <= count; ++i) g.push_back(static_cast<double>(i) * grid_step_ns);
        return g;
    }

    std::vector<std::size_t> grid_steps() const {
        std::vector<std::size_t> s;
        for (double t : grid()) s.push_back(steps_at(t));
        return s;
    }

    StabilizerCode stabilizer_code() const { return code_by_name(code); }

    EffectiveRates rates() const {
        EffectiveRates r;
        const bool have_cqed = cqed.chi != 0.0 || chi1.has_value();
        if (have_cqed) {
            const double c1 = chi1.value_or(cqed.chi);
            const double c2 = chi2.value_or(-c1);
            r = derive_effective_rates(cqed, c1, c2);
        }
        if (gamma_meas) r.gamma_meas = *gamma_meas;
        if (gamma_deph_odd) r.gamma_deph_odd = *gamma_deph_odd;
        return r;
    }

    MeasurementSetup setup(double eta_value) const {
        const EffectiveRates r = rates();
        return MeasurementSetup::parity_stabilizers(stabilizer_code(), r.gamma_meas, r.gamma_deph_odd, eta_value);
    }

    MeasurementSetup setup() const { return setup(eta); }

    SdpOptions sdp_options() const {
        SdpOptions o;
        o.tol = sdp_tol;
        return o;
    }

    /// Checks every precondition the drivers rely on; throws on the first violation.
    void validate() const {
        const StabilizerCode c = stabilizer_code();
        noise.validate();
        cqed.validate();
        if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("config: eta must lie in [0, 1]");
        for (double e : etas)
            if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("config: etas must lie in [0, 1]");
        if (!(dt_ns > 0.0)) throw std::invalid_argument("config: dt_ns must be positive");
        if (!(t_max_ns >= 0.0)) throw std::invalid_argument("config: t_max_ns must be nonnegative");
        if (grid_ns.empty() && !(grid_step_ns > 0.0)) throw std::invalid_argument("config: grid_step_ns must be positive");
        if (trajectories < 2) throw std::invalid_argument("config: trajectories must be at least 2");
        if (!(sdp_tol > 0.0)) throw std::invalid_argument("config: sdp_tol must be positive");
        if (textbook_window_ns < 0.0) throw std::invalid_argument("config: textbook_window_ns must be nonnegative");
        const auto g = grid();
        if (g.empty()) throw std::invalid_argument("config: empty time grid");
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (i > 0 && !(g[i] > g[i - 1])) throw std::invalid_argument("config: grid must be strictly increasing");
            if (g[i] > t_max_ns * (1.0 + 1e-12)) throw std::invalid_argument("config: grid exceeds t_max_ns");
            (void)steps_at(g[i]);
        }
        (void)steps_at(t_star_ns);
        if (textbook_window_ns > 0.0) (void)steps_at(textbook_window_ns);
        const MeasurementSetup s = setup();
        s.validate(c.n);
        if (dt() * s.gamma_meas > 0.1 + 1e-12) {
            throw std::invalid_argument("config: dt * gamma_meas exceeds 0.1; lower dt_ns");
        }
    }
};

namespace detail {

inline std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string &key, const std::string &v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception &) {
        throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
    }
    if (pos != v.size() || !std::isfinite(x)) {
        throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
    }
    return x;
}

inline std::uint64_t parse_u64(const std::string &key, const std::string &v) {
    std::size_t pos = 0;
    unsigned long long x = 0;
    try {
        if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
        x = std::stoull(v, &pos);
    } catch (const std::exception &) {
        throw std::invalid_argument("config: " + key + " expects a nonnegative integer, got '" + v + "'");
    }
    if (pos != v.size()) throw std::invalid_argument("config: " + key + " expects a nonnegative integer, got '" + v + "'");
    return x;
}

inline std::vector<double> parse_list(const std::string &key, const std::string &v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    return out;
}

}  // namespace detail

/// Sets one key. Unknown keys are rejected.
inline void set_config_value(ExperimentConfig &c, const std::string &key, const std::string &value) {
    using detail::parse_double;
    const auto hz = [&] { return kTwoPi * parse_double(key, value); };
    if (key == "code") c.code = value;
    else if (key == "gamma_x_over_2pi") c.noise.gamma_x = hz();
    else if (key == "gamma_1_over_2pi") c.noise.gamma_1 = hz();
    else if (key == "gamma_phi_over_2pi") c.noise.gamma_phi = hz();
    else if (key == "chi_over_2pi") c.cqed.chi = hz();
    else if (key == "chi1_over_2pi") c.chi1 = hz();
    else if (key == "chi2_over_2pi") c.chi2 = hz();
    else if (key == "kappa_over_2pi") c.cqed.kappa = hz();
    else if (key == "epsilon_m_over_2pi") c.cqed.epsilon_m = hz();
    else if (key == "omega_r_over_2pi") c.cqed.omega_r = hz();
    else if (key == "omega_m_over_2pi") c.cqed.omega_m = hz();
    else if (key == "g_over_delta") c.cqed.g_over_delta = parse_double(key, value);
    else if (key == "gamma_meas") c.gamma_meas = parse_double(key, value);
    else if (key == "gamma_deph_odd") c.gamma_deph_odd = parse_double(key, value);
    else if (key == "eta") c.eta = parse_double(key, value);
    else if (key == "t_max_ns") c.t_max_ns = parse_double(key, value);
    else if (key == "dt_ns") c.dt_ns = parse_double(key, value);
    else if (key == "grid_ns") c.grid_ns = detail::parse_list(key, value);
    else if (key == "grid_step_ns") c.grid_step_ns = parse_double(key, value);
    else if (key == "trajectories") c.trajectories = detail::parse_u64(key, value);
    else if (key == "seed") c.seed = detail::parse_u64(key, value);
    else if (key == "threads") c.threads = detail::parse_u64(key, value);
    else if (key == "out") c.out = value;
    else if (key == "etas") c.etas = detail::parse_list(key, value);
    else if (key == "t_star_ns") c.t_star_ns = parse_double(key, value);
    else if (key == "sdp_tol") c.sdp_tol = parse_double(key, value);
    else if (key == "textbook_window_ns") c.textbook_window_ns = parse_double(key, value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

inline ExperimentConfig parse_config(std::istream &is) {
    ExperimentConfig c;
    std::map<std::string, std::size_t> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (const auto it = seen.find(key); it != seen.end()) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": duplicate key '" + key +
                                        "' (first on line " + std::to_string(it->second) + ")");
        }
        seen[key] = lineno;
        try {
            set_config_value(c, key, value);
        } catch (const std::invalid_argument &e) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return c;
}

inline ExperimentConfig load_config(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config " + path);
    return parse_config(is);
}

inline nlohmann::json config_to_json(const ExperimentConfig &c) {
    nlohmann::json j;
    j["code"] = c.code;
    j["gamma_x"] = c.noise.gamma_x;
    j["gamma_1"] = c.noise.gamma_1;
    j["gamma_phi"] = c.noise.gamma_phi;
    j["chi"] = c.cqed.chi;
    j["chi1"] = c.chi1 ? nlohmann::json(*c.chi1) : nlohmann::json();
    j["chi2"] = c.chi2 ? nlohmann::json(*c.chi2) : nlohmann::json();
    j["kappa"] = c.cqed.kappa;
    j["epsilon_m"] = c.cqed.epsilon_m;
    j["omega_r"] = c.cqed.omega_r;
    j["omega_m"] = c.cqed.omega_m;
    j["g_over_delta"] = c.cqed.g_over_delta;
    j["gamma_meas_override"] = c.gamma_meas ? nlohmann::json(*c.gamma_meas) : nlohmann::json();
    j["gamma_deph_odd_override"] = c.gamma_deph_odd ? nlohmann::json(*c.gamma_deph_odd) : nlohmann::json();
    j["eta"] = c.eta;
    j["t_max_ns"] = c.t_max_ns;
    j["dt_ns"] = c.dt_ns;
    j["grid_ns"] = c.grid();
    j["trajectories"] = c.trajectories;
    j["seed"] = c.seed;
    j["etas"] = c.etas;
    j["t_star_ns"] = c.t_star_ns;
    j["sdp_tol"] = c.sdp_tol;
    j["textbook_window_ns"] = c.textbook_window_ns;
    return j;
}

/// FNV-1a over the canonical JSON form of the physics-relevant settings.
inline std::uint64_t config_hash(const ExperimentConfig &c) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : config_to_json(c).dump()) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

// ---------------------------------------------------------------------------
// Curves.

struct CurvePoint {
    /// Grid time (ns) or efficiency, depending on the table.
    double x = 0.0;
    double fbar = 0.0;
    double stderr_value = 0.0;
    std::size_t n_traj = 0;
};

using Curve = std::vector<CurvePoint>;

/// Per-trajectory values at each grid time.
struct ConditionalSamples {
    std::vector<double> times_ns;
    /// [trajectory][grid]
    std::vector<std::vector<double>> f_e;
    /// Textbook average fidelity; NaN at t = 0.
    std::vector<std::vector<double>> textbook_fbar;
    std::vector<std::vector<double>> textbook_f_e;
    /// Re Tr(Z_ref Q_J) for a fixed reference recovery per grid time.
    std::vector<std::vector<double>> control;
};

struct ConditionalOptions {
    bool textbook = false;
    /// Reduced recovery variables, one per grid time, used for `control`.
    const std::vector<OperatorMatrix> *control_recoveries = nullptr;
};

/// One conditional record per trajectory, analysed at every grid time.
inline ConditionalSamples sample_conditional(const ExperimentConfig &cfg, double eta,
                                             const std::vector<double> &times_ns,
                                             const ConditionalOptions &opt = {}) {
    const StabilizerCode code = cfg.stabilizer_code();
    if (opt.textbook && !code.syndrome_table) {
        throw std::invalid_argument("textbook curve requires the bit_flip code");
    }
    const SmeIntegrator integrator(code.n, cfg.noise, cfg.setup(eta), true);
    const StateVector phi = reference_entangled_state(code);
    std::vector<std::size_t> steps;
    for (double t : times_ns) steps.push_back(cfg.steps_at(t));
    SmeRun run;
    run.dt = cfg.dt();
    run.steps = steps.empty() ? 0 : steps.back();
    run.snapshot_steps = steps;
    run.keep_currents = opt.textbook;
    const std::size_t window = cfg.textbook_window_ns > 0.0 ? cfg.steps_at(cfg.textbook_window_ns) : 0;
    const SdpOptions sdp = cfg.sdp_options();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    struct Row {
        std::vector<double> f_e, tb_fbar, tb_f_e, control;
    };
    const auto rows = parallel_map<Row>(cfg.trajectories, cfg.threads, [&](std::size_t l) {
        const std::uint64_t seed = derive_seed(cfg.seed, l);
        try {
            const TrajectoryRecord rec = integrator.run(phi, run, seed);
            Row row;
            SdpWarmStart warm;
            std::vector<std::vector<double>> prefix;
            if (opt.textbook) {
                for (const auto &c : rec.currents) {
                    std::vector<double> p(c.size() + 1, 0.0);
                    for (std::size_t k = 0; k < c.size(); ++k) p[k + 1] = p[k] + c[k];
                    prefix.push_back(std::move(p));
                }
            }
            for (std::size_t g = 0; g < steps.size(); ++g) {
                const OperatorMatrix &omega = rec.snapshots[g];
                const SdpSolution sol = solve_reduced_recovery(omega, code, sdp, warm.valid() ? &warm : nullptr);
                warm = sol.warm;
                row.f_e.push_back(sol.primal);
                if (opt.control_recoveries) {
                    const OperatorMatrix q = reduced_objective(omega, code.dim());
                    row.control.push_back((*opt.control_recoveries)[g].cwiseProduct(q.transpose()).sum().real());
                }
                if (opt.textbook) {
                    const std::size_t k1 = steps[g];
                    if (k1 == 0) {
                        row.tb_fbar.push_back(nan);
                        row.tb_f_e.push_back(nan);
                        continue;
                    }
                    const std::size_t k0 = window > 0 && k1 > window ? k1 - window : 0;
                    SyndromeEstimate est;
                    for (const auto &p : prefix) {
                        const double mean = (p[k1] - p[k0]) / static_cast<double>(k1 - k0);
                        est.integrated_values.push_back(mean);
                        est.signs.push_back(mean >= 0.0 ? +1 : -1);
                    }
                    const TextbookOutcome tb = apply_correction(omega, code, textbook_correct(code, est));
                    row.tb_fbar.push_back(tb.fbar);
                    row.tb_f_e.push_back(tb.f_e);
                }
            }
            return row;
        } catch (const std::exception &e) {
            throw std::runtime_error("trajectory " + std::to_string(l) + " (seed " + std::to_string(seed) +
                                     "): " + e.what());
        }
    });
    ConditionalSamples s;
    s.times_ns = times_ns;
    for (const auto &r : rows) {
        s.f_e.push_back(r.f_e);
        s.textbook_fbar.push_back(r.tb_fbar);
        s.textbook_f_e.push_back(r.tb_f_e);
        s.control.push_back(r.control);
    }
    return s;
}

namespace detail {

inline std::vector<double> column(const std::vector<std::vector<double>> &m, std::size_t g) {
    std::vector<double> c;
    c.reserve(m.size());
    for (const auto &row : m) c.push_back(row.at(g));
    return c;
}

inline std::vector<double> to_fbar(std::vector<double> f_e) {
    for (double &x : f_e) x = average_fidelity(x);
    return f_e;
}

}  // namespace detail

/// Ensemble mean of the optimal conditional average fidelity.
inline Curve curve_from_samples(const ConditionalSamples &s) {
    Curve c;
    for (std::size_t g = 0; g < s.times_ns.size(); ++g) {
        const Estimate e = mean_and_stderr(detail::to_fbar(detail::column(s.f_e, g)));
        c.push_back({s.times_ns[g], e.value, e.std_error, e.count});
    }
    return c;
}

/// Textbook curve; the t = 0 row carries no record and is skipped.
inline Curve textbook_curve_from_samples(const ConditionalSamples &s) {
    Curve c;
    for (std::size_t g = 0; g < s.times_ns.size(); ++g) {
        const auto col = detail::column(s.textbook_fbar, g);
        if (std::isnan(col.front())) continue;
        const Estimate e = mean_and_stderr(col);
        c.push_back({s.times_ns[g], e.value, e.std_error, e.count});
    }
    return c;
}

/// Unconditional evolution with a single optimal recovery per grid time.
struct DeterministicCurve {
    Curve curve;
    std::vector<double> f_e;
    /// Reduced optimal recovery variable at each time.
    std::vector<OperatorMatrix> recoveries;
};

inline DeterministicCurve unconditional_curve(const StabilizerCode &code, const NoiseModel &noise,
                                              const MeasurementSetup *setup, const ExperimentConfig &cfg,
                                              const std::vector<double> &times_ns) {
    std::vector<std::size_t> steps;
    for (double t : times_ns) steps.push_back(cfg.steps_at(t));
    const auto states = integrate_unconditional_snapshots(reference_entangled_state(code), code.n, noise, setup,
                                                          cfg.dt(), steps);
    DeterministicCurve out;
    SdpWarmStart warm;
    for (std::size_t g = 0; g < times_ns.size(); ++g) {
        const SdpSolution sol =
            solve_reduced_recovery(states[g], code, cfg.sdp_options(), warm.valid() ? &warm : nullptr);
        warm = sol.warm;
        out.f_e.push_back(sol.primal);
        out.recoveries.push_back(sol.z);
        out.curve.push_back({times_ns[g], average_fidelity(sol.primal), 0.0, 0});
    }
    return out;
}

/// Optimal recovery without measurement.
inline DeterministicCurve run_curve_f1(const ExperimentConfig &cfg, bool with_measurement_dissipators = false) {
    const StabilizerCode code = cfg.stabilizer_code();
    const MeasurementSetup s = cfg.setup();
    return unconditional_curve(code, cfg.noise, with_measurement_dissipators ? &s : nullptr, cfg, cfg.grid());
}

inline Curve run_curve_f2(const ExperimentConfig &cfg) {
    return curve_from_samples(sample_conditional(cfg, cfg.eta, cfg.grid()));
}

inline Curve run_curve_textbook(const ExperimentConfig &cfg) {
    ConditionalOptions o;
    o.textbook = true;
    return textbook_curve_from_samples(sample_conditional(cfg, cfg.eta, cfg.grid(), o));
}

/// Single physical qubit under the same noise.
struct UnencodedCurves {
    /// Optimal single-qubit recovery.
    Curve optimal;
    /// No recovery at all.
    Curve bare;
};

inline UnencodedCurves run_curve_unencoded(const ExperimentConfig &cfg) {
    const StabilizerCode q = unencoded_qubit();
    const auto times = cfg.grid();
    UnencodedCurves out;
    out.optimal = unconditional_curve(q, cfg.noise, nullptr, cfg, times).curve;
    std::vector<std::size_t> steps;
    for (double t : times) steps.push_back(cfg.steps_at(t));
    const StateVector phi = reference_entangled_state(q);
    const auto states = integrate_unconditional_snapshots(phi, 1, cfg.noise, nullptr, cfg.dt(), steps);
    for (std::size_t g = 0; g < times.size(); ++g) {
        const double f_e = (phi.adjoint() * states[g] * phi)(0, 0).real();
        out.bare.push_back({times[g], average_fidelity(f_e), 0.0, 0});
    }
    return out;
}

/// F2 - F1 on the average-fidelity scale with a control variate:
///   E[F_J] - F1 = E[F_J - C_J] + (F1m - F1),
/// where C_J uses the recovery optimal for the unconditional state with
/// measurement dissipators, whose fidelity is F1m = E[C_J].
inline Curve difference_from_samples(const ConditionalSamples &s, const std::vector<double> &f1,
                                     const std::vector<double> &f1m) {
    Curve c;
    for (std::size_t g = 0; g < s.times_ns.size(); ++g) {
        std::vector<double> gain;
        for (std::size_t l = 0; l < s.f_e.size(); ++l) gain.push_back(s.f_e[l][g] - s.control.at(l).at(g));
        const Estimate e = mean_and_stderr(gain);
        c.push_back({s.times_ns[g], 2.0 / 3.0 * (e.value + f1m[g] - f1[g]), 2.0 / 3.0 * e.std_error, e.count});
    }
    return c;
}

/// Everything `bench` emits.
struct BenchResult {
    Curve f2;
    Curve f1;
    Curve f1_meas;
    Curve unencoded_optimal;
    Curve unencoded_bare;
    /// Empty for codes without a lookup decoder.
    Curve textbook;
    Curve f2_minus_f1;
};

inline BenchResult run_bench(const ExperimentConfig &cfg) {
    cfg.validate();
    const StabilizerCode code = cfg.stabilizer_code();
    BenchResult r;
    const DeterministicCurve f1 = run_curve_f1(cfg, false);
    const DeterministicCurve f1m = run_curve_f1(cfg, true);
    r.f1 = f1.curve;
    r.f1_meas = f1m.curve;
    const UnencodedCurves u = run_curve_unencoded(cfg);
    r.unencoded_optimal = u.optimal;
    r.unencoded_bare = u.bare;
    ConditionalOptions o;
    o.textbook = code.syndrome_table.has_value();
    o.control_recoveries = &f1m.recoveries;
    const ConditionalSamples s = sample_conditional(cfg, cfg.eta, cfg.grid(), o);
    r.f2 = curve_from_samples(s);
    if (o.textbook) r.textbook = textbook_curve_from_samples(s);
    r.f2_minus_f1 = difference_from_samples(s, f1.f_e, f1m.f_e);
    return r;
}

/// F2 at t_star for each efficiency; every efficiency reuses the master seed.
inline Curve run_eta_sweep(const ExperimentConfig &cfg, const std::vector<double> &etas, double t_star_ns) {
    cfg.validate();
    Curve c;
    for (double eta : etas) {
        if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("run_eta_sweep: eta must lie in [0, 1]");
        const Curve one = curve_from_samples(sample_conditional(cfg, eta, {t_star_ns}));
        c.push_back({eta, one.front().fbar, one.front().stderr_value, one.front().n_traj});
    }
    return c;
}

// ---------------------------------------------------------------------------
// Output.

inline std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline void write_curve_csv(std::ostream &os, const Curve &c, const std::string &x_name = "t_ns",
                            const std::string &y_name = "fbar") {
    os << x_name << ',' << y_name << ",stderr,n_traj\n";
    for (const auto &p : c) {
        os << format_number(p.x) << ',' << format_number(p.fbar) << ',' << format_number(p.stderr_value) << ','
           << p.n_traj << '\n';
    }
}

inline void save_curve_csv(const std::filesystem::path &path, const Curve &c, const std::string &x_name = "t_ns",
                           const std::string &y_name = "fbar") {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    write_curve_csv(os, c, x_name, y_name);
}

inline void write_manifest(const std::filesystem::path &path, const ExperimentConfig &cfg, const std::string &command,
                           const std::vector<std::string> &files, double wall_seconds) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    nlohmann::json j;
    j["command"] = command;
    j["config"] = config_to_json(cfg);
    j["config_hash"] = hash;
    j["versions"] = {{"paritybench", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"trajectory_format", 1}};
    j["threads"] = resolve_threads(cfg.threads);
    j["files"] = files;
    j["wall_time_s"] = wall_seconds;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << j.dump(2) << '\n';
}

/// Runs the full curve suite and writes CSVs plus manifest.json into cfg.out.
inline BenchResult write_bench(const ExperimentConfig &cfg) {
    const auto start = std::chrono::steady_clock::now();
    const BenchResult r = run_bench(cfg);
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    std::vector<std::string> files{"f2.csv", "f1.csv", "f1_meas.csv", "unencoded_optimal.csv",
                                   "unencoded_bare.csv", "f2_minus_f1.csv"};
    save_curve_csv(dir / "f2.csv", r.f2);
    save_curve_csv(dir / "f1.csv", r.f1);
    save_curve_csv(dir / "f1_meas.csv", r.f1_meas);
    save_curve_csv(dir / "unencoded_optimal.csv", r.unencoded_optimal);
    save_curve_csv(dir / "unencoded_bare.csv", r.unencoded_bare);
    save_curve_csv(dir / "f2_minus_f1.csv", r.f2_minus_f1, "t_ns", "delta_fbar");
    if (!r.textbook.empty()) {
        save_curve_csv(dir / "textbook.csv", r.textbook);
        files.push_back("textbook.csv");
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(dir / "manifest.json", cfg, "bench", files, wall);
    return r;
}

inline Curve write_eta_sweep(const ExperimentConfig &cfg) {
    const auto start = std::chrono::steady_clock::now();
    const Curve c = run_eta_sweep(cfg, cfg.etas, cfg.t_star_ns);
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    save_curve_csv(dir / "eta_sweep.csv", c, "eta");
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(dir / "manifest.json", cfg, "sweep-eta", {"eta_sweep.csv"}, wall);
    return c;
}

}  // namespace paritybench
