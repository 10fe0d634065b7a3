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

// Trajectory ensemble files and shot logs.
//
// Ensemble file layout (all integers and floats little-endian):
//
//   8 bytes   magic "PBTRAJ\0\0"
//   u64       header length L
//   L bytes   JSON header (format_version, parameters, master seed, dt, steps, ...)
//   per trajectory:
//     u64     seed
//     f64     currents, operator-major (operator 0 steps 0..N-1, then operator 1, ...)
//     f64     final state, row-major, interleaved (re, im)

#include "paritybench/estimator_acquire.hpp"
#include "paritybench/qcore.hpp"
#include "paritybench/sme.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace paritybench {

inline constexpr int kTrajectoryFormatVersion = 1;
inline constexpr std::array<char, 8> kTrajectoryMagic{'P', 'B', 'T', 'R', 'A', 'J', '\0', '\0'};

/// Shape and provenance of an ensemble file.
struct TrajectoryFileHeader {
    int format_version = kTrajectoryFormatVersion;
    std::uint64_t master_seed = 0;
    double dt = 0.0;
    std::size_t steps = 0;
    std::size_t operators = 0;
    std::size_t state_dim = 0;
    std::size_t count = 0;
    bool raw_innovation = false;
    /// Free-form simulation parameters (code, rates, eta, ...).
    nlohmann::json parameters = nlohmann::json::object();
};

namespace detail {

inline void write_u64(std::ostream &os, std::uint64_t v) {
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(b.data(), 8);
}

inline std::uint64_t read_u64(std::istream &is) {
    std::array<unsigned char, 8> b{};
    if (!is.read(reinterpret_cast<char *>(b.data()), 8)) throw std::runtime_error("trajectory file: truncated");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
}

inline void write_f64(std::ostream &os, double x) { write_u64(os, std::bit_cast<std::uint64_t>(x)); }

inline double read_f64(std::istream &is) { return std::bit_cast<double>(read_u64(is)); }

}  // namespace detail

inline nlohmann::json header_to_json(const TrajectoryFileHeader &h) {
    return {{"format_version", h.format_version},
            {"master_seed", h.master_seed},
            {"dt", h.dt},
            {"steps", h.steps},
            {"operators", h.operators},
            {"state_dim", h.state_dim},
            {"count", h.count},
            {"raw_innovation", h.raw_innovation},
            {"parameters", h.parameters}};
}

inline TrajectoryFileHeader header_from_json(const nlohmann::json &j) {
    TrajectoryFileHeader h;
    h.format_version = j.at("format_version").get<int>();
    if (h.format_version != kTrajectoryFormatVersion) {
        throw std::runtime_error("trajectory file: unsupported format version " + std::to_string(h.format_version));
    }
    h.master_seed = j.at("master_seed").get<std::uint64_t>();
    h.dt = j.at("dt").get<double>();
    h.steps = j.at("steps").get<std::size_t>();
    h.operators = j.at("operators").get<std::size_t>();
    h.state_dim = j.at("state_dim").get<std::size_t>();
    h.count = j.at("count").get<std::size_t>();
    h.raw_innovation = j.value("raw_innovation", false);
    h.parameters = j.value("parameters", nlohmann::json::object());
    return h;
}

/// Writes `records` after `header`; count, steps and shapes are checked against the header.
inline void write_trajectories(std::ostream &os, TrajectoryFileHeader header,
                               const std::vector<TrajectoryRecord> &records) {
    header.count = records.size();
    for (const auto &r : records) {
        if (r.steps != header.steps || r.currents.size() != header.operators ||
            static_cast<std::size_t>(r.final_state.rows()) != header.state_dim) {
            throw std::invalid_argument("write_trajectories: record shape does not match the header");
        }
        for (const auto &c : r.currents)
            if (c.size() != header.steps) throw std::invalid_argument("write_trajectories: current length mismatch");
    }
    const std::string text = header_to_json(header).dump();
    os.write(kTrajectoryMagic.data(), kTrajectoryMagic.size());
    detail::write_u64(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto &r : records) {
        detail::write_u64(os, r.seed);
        for (const auto &c : r.currents)
            for (double x : c) detail::write_f64(os, x);
        for (Eigen::Index i = 0; i < r.final_state.rows(); ++i)
            for (Eigen::Index j = 0; j < r.final_state.cols(); ++j) {
                detail::write_f64(os, r.final_state(i, j).real());
                detail::write_f64(os, r.final_state(i, j).imag());
            }
    }
    if (!os) throw std::runtime_error("write_trajectories: stream error");
}

inline TrajectoryFileHeader read_trajectory_header(std::istream &is) {
    std::array<char, 8> magic{};
    if (!is.read(magic.data(), magic.size()) || magic != kTrajectoryMagic) {
        throw std::runtime_error("trajectory file: bad magic");
    }
    const std::uint64_t len = detail::read_u64(is);
    if (len > (std::uint64_t{1} << 30)) throw std::runtime_error("trajectory file: header too large");
    std::string text(len, '\0');
    if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw std::runtime_error("trajectory file: truncated");
    return header_from_json(nlohmann::json::parse(text));
}

inline std::vector<TrajectoryRecord> read_trajectories(std::istream &is, TrajectoryFileHeader &header) {
    header = read_trajectory_header(is);
    std::vector<TrajectoryRecord> out(header.count);
    const auto d = static_cast<Eigen::Index>(header.state_dim);
    for (auto &r : out) {
        r.seed = detail::read_u64(is);
        r.dt = header.dt;
        r.steps = header.steps;
        r.raw_innovation = header.raw_innovation;
        r.currents.assign(header.operators, std::vector<double>(header.steps));
        for (auto &c : r.currents)
            for (double &x : c) x = detail::read_f64(is);
        r.final_state.resize(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) {
                const double re = detail::read_f64(is);
                const double im = detail::read_f64(is);
                r.final_state(i, j) = Complex(re, im);
            }
    }
    return out;
}

inline void save_trajectories(const std::string &path, const TrajectoryFileHeader &header,
                              const std::vector<TrajectoryRecord> &records) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_trajectories(os, header, records);
}

inline std::vector<TrajectoryRecord> load_trajectories(const std::string &path, TrajectoryFileHeader &header) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_trajectories(is, header);
}

// Shot log: "seed,sigma,tau,coin,k,nu", one shot per line after the header.

inline constexpr const char *kShotLogHeader = "seed,sigma,tau,coin,k,nu";

inline void write_shot_log(std::ostream &os, const std::vector<ShotRecord> &shots) {
    os << kShotLogHeader << '\n';
    for (const auto &s : shots) {
        os << s.seed << ',' << s.sigma << ',' << s.tau << ',' << s.coin << ',' << s.k.str() << ',' << s.nu << '\n';
    }
}

/// Parses a shot log; trajectories are left empty.
inline std::vector<ShotRecord> read_shot_log(std::istream &is) {
    std::string line;
    if (!std::getline(is, line) || line != kShotLogHeader) throw std::runtime_error("shot log: bad header");
    std::vector<ShotRecord> shots;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string seed, sigma, tau, coin, k, nu;
        if (!std::getline(ss, seed, ',') || !std::getline(ss, sigma, ',') || !std::getline(ss, tau, ',') ||
            !std::getline(ss, coin, ',') || !std::getline(ss, k, ',') || !std::getline(ss, nu, ',')) {
            throw std::runtime_error("shot log: malformed line " + std::to_string(lineno));
        }
        ShotRecord s;
        s.seed = std::stoull(seed);
        if (sigma.size() != 1 || std::string("IXYZ").find(sigma[0]) == std::string::npos) {
            throw std::runtime_error("shot log: bad sigma on line " + std::to_string(lineno));
        }
        s.sigma = sigma[0];
        s.tau = std::stoi(tau);
        s.coin = std::stoi(coin);
        s.k = PauliLabel(k);
        s.nu = std::stoi(nu);
        if ((s.tau != 1 && s.tau != -1) || (s.nu != 1 && s.nu != -1) || (s.sigma == 'I' && s.tau != 1)) {
            throw std::runtime_error("shot log: invalid signs on line " + std::to_string(lineno));
        }
        shots.push_back(std::move(s));
    }
    return shots;
}

}  // namespace paritybench
