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

#include "paritybench/paritybench.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace pb = paritybench;
namespace fs = std::filesystem;

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trajectories;
    std::optional<std::size_t> threads;
};

void add_common(CLI::App *cmd, CommonFlags &f) {
    cmd->add_option("--config", f.config, "Experiment config file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--trajectories", f.trajectories, "Trajectory or shot count");
    cmd->add_option("--threads", f.threads, "Worker threads (default: PARITYBENCH_THREADS or all cores)");
}

pb::ExperimentConfig load(const CommonFlags &f) {
    pb::ExperimentConfig cfg = pb::load_config(f.config);
    if (f.out) cfg.out = *f.out;
    if (f.seed) cfg.seed = *f.seed;
    if (f.trajectories) cfg.trajectories = *f.trajectories;
    if (f.threads) cfg.threads = *f.threads;
    cfg.validate();
    if (auto w = cfg.noise.warning()) std::cerr << "warning: " << *w << '\n';
    if (cfg.cqed.chi != 0.0 || cfg.chi1) {
        const double c1 = cfg.chi1.value_or(cfg.cqed.chi);
        if (auto w = pb::photon_number_warning(cfg.cqed, c1, cfg.chi2.value_or(-c1))) std::cerr << "warning: " << *w << '\n';
    }
    fs::create_directories(cfg.out);
    return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

nlohmann::json simulation_parameters(const pb::ExperimentConfig &cfg, double eta) {
    nlohmann::json p = pb::config_to_json(cfg);
    const auto s = cfg.setup(eta);
    p["eta"] = eta;
    p["gamma_meas"] = s.gamma_meas;
    p["gamma_deph_odd"] = s.gamma_deph_odd;
    std::vector<std::string> ops;
    for (const auto &op : s.operators) ops.push_back(op.str());
    p["operators"] = ops;
    return p;
}

pb::TrajectoryFileHeader header_for(const pb::ExperimentConfig &cfg, const pb::StabilizerCode &code, bool with_reference,
                                    std::size_t steps) {
    pb::TrajectoryFileHeader h;
    h.master_seed = cfg.seed;
    h.dt = cfg.dt();
    h.steps = steps;
    h.operators = cfg.setup().operators.size();
    h.state_dim = static_cast<std::size_t>(code.dim()) * (with_reference ? 2 : 1);
    h.raw_innovation = cfg.eta == 0.0 || cfg.setup().gamma_meas == 0.0;
    h.parameters = simulation_parameters(cfg, cfg.eta);
    h.parameters["with_reference"] = with_reference;
    return h;
}

int cmd_simulate(const CommonFlags &f) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = load(f);
    const auto code = cfg.stabilizer_code();
    pb::EnsembleSpec spec{code, cfg.noise, cfg.setup(), cfg.t_max_ns * 1e-9, cfg.dt()};
    const auto records = pb::run_ensemble(spec, cfg.trajectories, cfg.seed, cfg.threads);
    const auto path = fs::path(cfg.out) / "trajectories.bin";
    pb::save_trajectories(path.string(), header_for(cfg, code, true, cfg.steps_at(cfg.t_max_ns)), records);
    pb::write_manifest(fs::path(cfg.out) / "manifest.json", cfg, "simulate", {"trajectories.bin"}, seconds_since(t0));
    std::cout << "wrote " << records.size() << " trajectories to " << path.string() << '\n';
    return 0;
}

std::vector<pb::TrajectoryRecord> load_input(const pb::ExperimentConfig &cfg, const std::string &input,
                                             const pb::StabilizerCode &code) {
    const std::string path = input.empty() ? (fs::path(cfg.out) / "trajectories.bin").string() : input;
    pb::TrajectoryFileHeader h;
    auto records = pb::load_trajectories(path, h);
    if (h.state_dim != static_cast<std::size_t>(2 * code.dim())) {
        throw std::runtime_error(path + " does not hold reference-entangled states of the configured code");
    }
    return records;
}

int cmd_recover(const CommonFlags &f, const std::string &input) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = load(f);
    const auto code = cfg.stabilizer_code();
    const auto records = load_input(cfg, input, code);
    const auto sols = pb::parallel_map<pb::SdpSolution>(records.size(), cfg.threads, [&](std::size_t i) {
        try {
            return pb::solve_reduced_recovery(records[i].final_state, code, cfg.sdp_options());
        } catch (const std::exception &e) {
            throw std::runtime_error("seed " + std::to_string(records[i].seed) + ": " + e.what());
        }
    });
    std::ofstream os(fs::path(cfg.out) / "recover.csv");
    os << "seed,f_e,fbar,gap\n";
    std::vector<double> fbar;
    for (std::size_t i = 0; i < records.size(); ++i) {
        fbar.push_back(pb::average_fidelity(sols[i].primal));
        os << records[i].seed << ',' << pb::format_number(sols[i].primal) << ',' << pb::format_number(fbar.back())
           << ',' << pb::format_number(sols[i].gap) << '\n';
    }
    const auto e = pb::mean_and_stderr(fbar);
    pb::write_manifest(fs::path(cfg.out) / "manifest.json", cfg, "recover", {"recover.csv"}, seconds_since(t0));
    std::cout << "mean fbar " << pb::format_number(e.value) << " +- " << pb::format_number(e.std_error) << " over "
              << e.count << " trajectories\n";
    return 0;
}

int cmd_textbook(const CommonFlags &f, const std::string &input) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = load(f);
    const auto code = cfg.stabilizer_code();
    if (!code.syndrome_table) throw std::invalid_argument("textbook decoding requires the bit_flip code");
    const auto records = load_input(cfg, input, code);
    std::ofstream os(fs::path(cfg.out) / "textbook_shots.csv");
    os << "seed,signs,f_e,fbar\n";
    std::vector<double> fbar;
    for (const auto &r : records) {
        pb::TimeWindow w = pb::full_window(r);
        if (cfg.textbook_window_ns > 0.0) w.t0 = std::max(0.0, w.t1 - cfg.textbook_window_ns * 1e-9);
        const auto s = pb::integrate_currents(r, w);
        const auto out = pb::apply_correction(r.final_state, code, pb::textbook_correct(code, s));
        std::string signs;
        for (int v : s.signs) signs += v > 0 ? '+' : '-';
        fbar.push_back(out.fbar);
        os << r.seed << ',' << signs << ',' << pb::format_number(out.f_e) << ',' << pb::format_number(out.fbar) << '\n';
    }
    const auto e = pb::mean_and_stderr(fbar);
    pb::write_manifest(fs::path(cfg.out) / "manifest.json", cfg, "textbook", {"textbook_shots.csv"},
                       seconds_since(t0));
    std::cout << "mean textbook fbar " << pb::format_number(e.value) << " +- " << pb::format_number(e.std_error)
              << '\n';
    return 0;
}

int cmd_estimate(const CommonFlags &f, const std::string &stage) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = load(f);
    const auto code = cfg.stabilizer_code();
    const fs::path dir(cfg.out);
    pb::AcquisitionSpec spec{code, cfg.noise, cfg.setup(), cfg.t_max_ns * 1e-9, cfg.dt()};
    std::vector<std::string> files;
    if (stage == "acquire" || stage == "all") {
        auto shots = pb::acquire_shots(spec, cfg.trajectories, cfg.seed, cfg.threads);
        std::ofstream log(dir / "shots.csv");
        pb::write_shot_log(log, shots);
        std::vector<pb::TrajectoryRecord> lab;
        for (const auto &s : shots) lab.push_back(s.trajectory);
        pb::save_trajectories((dir / "lab_trajectories.bin").string(),
                              header_for(cfg, code, false, cfg.steps_at(cfg.t_max_ns)), lab);
        files.insert(files.end(), {"shots.csv", "lab_trajectories.bin"});
        std::cout << "acquired " << shots.size() << " shots\n";
    }
    if (stage == "process" || stage == "all") {
        std::ifstream log(dir / "shots.csv");
        if (!log) throw std::runtime_error("missing " + (dir / "shots.csv").string());
        auto shots = pb::read_shot_log(log);
        pb::TrajectoryFileHeader h;
        auto lab = pb::load_trajectories((dir / "lab_trajectories.bin").string(), h);
        if (lab.size() != shots.size()) throw std::runtime_error("shot log and lab trajectories differ in length");
        for (std::size_t i = 0; i < shots.size(); ++i) {
            if (lab[i].seed != pb::splitmix64(shots[i].seed)) {
                throw std::runtime_error("lab trajectory " + std::to_string(i) + " does not belong to its shot");
            }
            shots[i].trajectory = std::move(lab[i]);
        }
        const auto processed = pb::process_shots(shots, code, cfg.noise, cfg.setup(), cfg.threads, cfg.sdp_options());
        const auto e = pb::estimate_average_fe(processed);
        std::vector<double> direct;
        for (const auto &p : processed) direct.push_back(p.f_e);
        const auto d = pb::mean_and_stderr(direct);
        std::ofstream os(dir / "estimate.csv");
        os << "quantity,f_e,stderr,n_shots\n";
        os << "estimator," << pb::format_number(e.value) << ',' << pb::format_number(e.std_error) << ',' << e.count
           << '\n';
        os << "direct," << pb::format_number(d.value) << ',' << pb::format_number(d.std_error) << ',' << d.count << '\n';
        files.push_back("estimate.csv");
        std::cout << "estimated F_e " << pb::format_number(e.value) << " +- " << pb::format_number(e.std_error)
                  << " (direct " << pb::format_number(d.value) << " +- " << pb::format_number(d.std_error) << ")\n";
    }
    pb::write_manifest(dir / "manifest.json", cfg, "estimate " + stage, files, seconds_since(t0));
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Continuous parity-measurement error-correction benchmarks"};
    app.set_version_flag("--version", std::string(pb::kVersion));
    app.require_subcommand(1);

    CommonFlags flags;
    std::string input;
    std::string stage = "all";

    auto *simulate = app.add_subcommand("simulate", "Simulate conditional trajectories and store them");
    add_common(simulate, flags);
    auto *recover = app.add_subcommand("recover", "Optimal recovery for each stored trajectory");
    add_common(recover, flags);
    recover->add_option("--input", input, "Trajectory file (default <out>/trajectories.bin)");
    auto *textbook = app.add_subcommand("textbook", "Lookup-table decoding of stored trajectories");
    add_common(textbook, flags);
    textbook->add_option("--input", input, "Trajectory file (default <out>/trajectories.bin)");
    auto *estimate = app.add_subcommand("estimate", "Delayed-tomography fidelity estimate");
    add_common(estimate, flags);
    estimate->add_option("--stage", stage, "acquire, process or all")
        ->check(CLI::IsMember({"acquire", "process", "all"}));
    auto *bench = app.add_subcommand("bench", "Full curve suite");
    add_common(bench, flags);
    auto *sweep = app.add_subcommand("sweep-eta", "Fidelity against detection efficiency at t_star");
    add_common(sweep, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*simulate) return cmd_simulate(flags);
        if (*recover) return cmd_recover(flags, input);
        if (*textbook) return cmd_textbook(flags, input);
        if (*estimate) return cmd_estimate(flags, stage);
        if (*bench) {
            const auto cfg = load(flags);
            pb::write_bench(cfg);
            std::cout << "wrote curves to " << cfg.out << '\n';
            return 0;
        }
        if (*sweep) {
            const auto cfg = load(flags);
            pb::write_eta_sweep(cfg);
            std::cout << "wrote " << (fs::path(cfg.out) / "eta_sweep.csv").string() << '\n';
            return 0;
        }
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
