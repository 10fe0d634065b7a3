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

// Lindblad and diffusive stochastic master-equation integration.
//
// Every jump operator used here is monomial (at most one nonzero per column,
// injective on its support): Pauli X, lowering operators, and diagonal
// parities. That lets one step run in O(#ops * dim^2) without dense matrix
// products. The deterministic part of a step is the first-order Kraus map
//
//   rho -> M0 rho M0^dag + dt sum_j L_j rho L_j^dag,  M0 = I - dt/2 sum_j L_j^dag L_j
//
// which agrees with rho + dt L(rho) to O(dt^2), is completely positive for any
// dt, and is followed by renormalization. Each measured parity S_i adds
// sqrt(eta Gamma_m) (S rho + rho S - 2<S> rho) dW_i.

#include "paritybench/codes.hpp"
#include "paritybench/parallel.hpp"
#include "paritybench/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace paritybench {

/// Per-qubit error rates (1/s).
struct NoiseModel {
    double gamma_x = 0.0;
    double gamma_1 = 0.0;
    double gamma_phi = 0.0;

    void validate() const {
        if (gamma_x < 0.0 || gamma_1 < 0.0 || gamma_phi < 0.0) {
            throw std::invalid_argument("NoiseModel: rates must be nonnegative");
        }
    }

    /// Both bit flips and relaxation on at once is allowed but unusual.
    std::optional<std::string> warning() const {
        if (gamma_x > 0.0 && gamma_1 > 0.0) {
            return "NoiseModel: both gamma_x and gamma_1 are nonzero";
        }
        return std::nullopt;
    }

    bool is_zero() const { return gamma_x == 0.0 && gamma_1 == 0.0 && gamma_phi == 0.0; }
};

/// Continuously monitored two-qubit parities.
struct MeasurementSetup {
    std::vector<PauliLabel> operators;
    double gamma_meas = 0.0;
    double gamma_deph_odd = 0.0;
    double eta = 1.0;

    /// Qubit pair (a, b) measured by operator i.
    static std::pair<std::size_t, std::size_t> pair_of(const PauliLabel &op) {
        std::vector<std::size_t> qs;
        for (std::size_t q = 0; q < op.size(); ++q) {
            if (op[q] == 'Z') {
                qs.push_back(q);
            } else if (op[q] != 'I') {
                throw std::invalid_argument("MeasurementSetup: operator " + op.str() + " is not a ZZ parity");
            }
        }
        if (qs.size() != 2) {
            throw std::invalid_argument("MeasurementSetup: operator " + op.str() + " must have exactly two Z letters");
        }
        return {qs[0], qs[1]};
    }

    void validate(std::size_t n) const {
        if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("MeasurementSetup: eta must lie in [0, 1]");
        if (gamma_meas < 0.0 || gamma_deph_odd < 0.0) {
            throw std::invalid_argument("MeasurementSetup: rates must be nonnegative");
        }
        for (const auto &op : operators) {
            if (op.size() != n) throw std::invalid_argument("MeasurementSetup: operator length mismatch");
            (void)pair_of(op);
        }
        for (std::size_t i = 0; i < operators.size(); ++i)
            for (std::size_t j = i + 1; j < operators.size(); ++j)
                if (!operators[i].commutes_with(operators[j]))
                    throw std::invalid_argument("MeasurementSetup: measured operators must commute");
    }

    /// Continuously measured stabilizers of `code` (two-qubit ZZ parities only).
    static MeasurementSetup parity_stabilizers(const StabilizerCode &code, double gamma_meas, double gamma_deph_odd,
                                               double eta) {
        MeasurementSetup s;
        for (const auto &stab : code.stabilizers) {
            if (stab.weight() == 2 && std::all_of(stab.str().begin(), stab.str().end(),
                                                  [](char c) { return c == 'I' || c == 'Z'; })) {
                s.operators.push_back(stab);
            }
        }
        s.gamma_meas = gamma_meas;
        s.gamma_deph_odd = gamma_deph_odd;
        s.eta = eta;
        return s;
    }
};

/// One measurement record and the conditional state it produced.
struct TrajectoryRecord {
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::size_t steps = 0;
    /// currents[i][k] is J_i over step k.
    std::vector<std::vector<double>> currents;
    /// True when eta * Gamma_m == 0: the stored samples are raw innovations dW/dt.
    bool raw_innovation = false;
    OperatorMatrix final_state;
    /// Conditional states at the requested snapshot steps, in request order.
    std::vector<OperatorMatrix> snapshots;
};

/// Sparse operator with at most one nonzero per column: op|j> = value[j] |target[j]>.
struct MonomialOperator {
    Eigen::Index dim = 0;
    std::vector<Eigen::Index> target;  // -1 for a zero column
    std::vector<Complex> value;

    static MonomialOperator from_dense(const OperatorMatrix &m) {
        MonomialOperator op;
        op.dim = m.rows();
        op.target.assign(static_cast<std::size_t>(op.dim), -1);
        op.value.assign(static_cast<std::size_t>(op.dim), Complex(0.0));
        std::vector<bool> used(static_cast<std::size_t>(op.dim), false);
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                if (m(r, c) == Complex(0.0)) continue;
                if (op.target[static_cast<std::size_t>(c)] != -1 || used[static_cast<std::size_t>(r)]) {
                    throw std::invalid_argument("MonomialOperator: operator is not an injective monomial matrix");
                }
                op.target[static_cast<std::size_t>(c)] = r;
                op.value[static_cast<std::size_t>(c)] = m(r, c);
                used[static_cast<std::size_t>(r)] = true;
            }
        }
        return op;
    }

    bool is_diagonal() const {
        for (std::size_t j = 0; j < target.size(); ++j)
            if (target[j] != -1 && target[j] != static_cast<Eigen::Index>(j)) return false;
        return true;
    }

    /// Diagonal entries (zero where the column is empty); only meaningful when is_diagonal().
    Eigen::VectorXcd diagonal() const {
        Eigen::VectorXcd d = Eigen::VectorXcd::Zero(dim);
        for (std::size_t j = 0; j < target.size(); ++j)
            if (target[j] != -1) d(static_cast<Eigen::Index>(j)) = value[j];
        return d;
    }

    /// out += op * rho * op^dag
    void add_sandwich(const OperatorMatrix &rho, OperatorMatrix &out, double scale) const {
        const Eigen::Index d = dim;
        const Complex *src = rho.data();
        Complex *dst = out.data();
        for (Eigen::Index j = 0; j < d; ++j) {
            const Eigen::Index tj = target[static_cast<std::size_t>(j)];
            if (tj < 0) continue;
            const Complex vj = std::conj(value[static_cast<std::size_t>(j)]) * scale;
            for (Eigen::Index i = 0; i < d; ++i) {
                const Eigen::Index ti = target[static_cast<std::size_t>(i)];
                if (ti < 0) continue;
                dst[ti + tj * d] += value[static_cast<std::size_t>(i)] * vj * src[i + j * d];
            }
        }
    }
};

namespace detail {

/// Lifts an n-qubit operator to (n-qubit) (x) I_2 when a reference factor is present.
inline OperatorMatrix lift(const OperatorMatrix &op, bool with_reference) {
    return with_reference ? kron(op, OperatorMatrix::Identity(2, 2)) : op;
}

inline Eigen::VectorXd lift(const Eigen::VectorXd &diag, bool with_reference) {
    if (!with_reference) return diag;
    Eigen::VectorXd out(diag.size() * 2);
    for (Eigen::Index i = 0; i < diag.size(); ++i) out(2 * i) = out(2 * i + 1) = diag(i);
    return out;
}

/// Diagonal of the odd-subspace dephasor |01><01| - |10><10| on qubits (a, b).
inline Eigen::VectorXd odd_dephasor_diagonal(std::size_t n, std::size_t a, std::size_t b) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        const bool xa = (idx >> (n - 1 - a)) & 1;
        const bool xb = (idx >> (n - 1 - b)) & 1;
        if (!xa && xb) d(idx) = 1.0;
        if (xa && !xb) d(idx) = -1.0;
    }
    return d;
}

inline Eigen::VectorXd parity_diagonal(const PauliLabel &op) {
    const std::size_t n = op.size();
    const Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::VectorXd d(dim);
    for (Eigen::Index idx = 0; idx < dim; ++idx) {
        int sign = 1;
        for (std::size_t q = 0; q < n; ++q)
            if (op[q] == 'Z' && ((idx >> (n - 1 - q)) & 1)) sign = -sign;
        d(idx) = sign;
    }
    return d;
}

}  // namespace detail

/// Precomputed generator for one (noise, measurement, dimension) combination.
///
/// L(rho) = W o rho + sum_k M_k rho M_k^dag, where W folds every diagonal jump
/// operator and the whole anticommutator term into one Hadamard factor and the
/// M_k are the non-diagonal monomial jumps. step() applies the Kraus form of
/// one time step with the same split.
class LindbladGenerator {
   public:
    LindbladGenerator(std::size_t n, const NoiseModel &model, const MeasurementSetup *setup, bool with_reference)
        : n_(n), with_reference_(with_reference) {
        model.validate();
        if (setup) setup->validate(n);
        dim_ = (Eigen::Index{1} << n) * (with_reference ? 2 : 1);

        std::vector<Eigen::VectorXcd> diagonal_jumps;
        Eigen::VectorXd decay = Eigen::VectorXd::Zero(dim_);  // diag of sum L^dag L

        auto add_jump = [&](const OperatorMatrix &op_n, double rate) {
            if (rate <= 0.0) return;
            auto mono = MonomialOperator::from_dense(detail::lift(op_n, with_reference));
            for (std::size_t j = 0; j < mono.value.size(); ++j) mono.value[j] *= std::sqrt(rate);
            for (std::size_t j = 0; j < mono.value.size(); ++j) decay(static_cast<Eigen::Index>(j)) += std::norm(mono.value[j]);
            if (mono.is_diagonal()) {
                diagonal_jumps.push_back(mono.diagonal());
            } else {
                jumps_.push_back(std::move(mono));
            }
        };

        for (std::size_t q = 0; q < n; ++q) {
            add_jump(pauli(PauliLabel::single(n, q, 'X')), model.gamma_x);
            add_jump(embed_single(sigma_minus(), q, n), model.gamma_1);
            add_jump(pauli(PauliLabel::single(n, q, 'Z')), model.gamma_phi / 2.0);
        }
        if (setup) {
            for (const auto &op : setup->operators) {
                add_jump(pauli(op), setup->gamma_meas);
                const auto [a, b] = MeasurementSetup::pair_of(op);
                const Eigen::VectorXd od = detail::odd_dephasor_diagonal(n, a, b);
                add_jump(OperatorMatrix(od.cast<Complex>().asDiagonal()), setup->gamma_deph_odd / 2.0);
            }
        }

        decay_ = decay;
        diagonal_sum_ = OperatorMatrix::Zero(dim_, dim_);
        for (const auto &d : diagonal_jumps) diagonal_sum_ += d * d.adjoint();
        hadamard_ = diagonal_sum_;
        for (Eigen::Index j = 0; j < dim_; ++j)
            for (Eigen::Index i = 0; i < dim_; ++i) hadamard_(i, j) -= 0.5 * (decay(i) + decay(j));
    }

    /// Hadamard factor of one step: (1 - dt d_i / 2)(1 - dt d_j / 2) + dt G_ij.
    OperatorMatrix step_kernel(double dt) const {
        const Eigen::VectorXd m = Eigen::VectorXd::Ones(dim_) - 0.5 * dt * decay_;
        OperatorMatrix k = dt * diagonal_sum_;
        k += (m * m.transpose()).cast<Complex>();
        return k;
    }

    /// out = M0 rho M0^dag + dt sum_j L_j rho L_j^dag, with `kernel` from step_kernel(dt).
    void step(const OperatorMatrix &kernel, double dt, const OperatorMatrix &rho, OperatorMatrix &out) const {
        out = kernel.cwiseProduct(rho);
        add_offdiagonal_jumps(rho, out, dt);
    }

    /// out += scale * sum_k M_k rho M_k^dag over the non-diagonal jumps.
    void add_offdiagonal_jumps(const OperatorMatrix &rho, OperatorMatrix &out, double scale) const {
        for (const auto &m : jumps_) m.add_sandwich(rho, out, scale);
    }

    /// Diagonal of sum_j L_j^dag L_j.
    const Eigen::VectorXd &decay() const { return decay_; }
    /// G_ab = sum over diagonal jumps of l_a conj(l_b).
    const OperatorMatrix &diagonal_sum() const { return diagonal_sum_; }

    Eigen::Index dim() const { return dim_; }
    std::size_t qubits() const { return n_; }
    bool with_reference() const { return with_reference_; }

    /// out = L(rho)
    void apply(const OperatorMatrix &rho, OperatorMatrix &out) const {
        out = hadamard_.cwiseProduct(rho);
        for (const auto &m : jumps_) m.add_sandwich(rho, out, 1.0);
    }

    OperatorMatrix apply(const OperatorMatrix &rho) const {
        OperatorMatrix out;
        apply(rho, out);
        return out;
    }

   private:
    std::size_t n_;
    bool with_reference_;
    Eigen::Index dim_ = 0;
    Eigen::VectorXd decay_;
    OperatorMatrix diagonal_sum_;
    OperatorMatrix hadamard_;
    std::vector<MonomialOperator> jumps_;
};

namespace detail {

inline std::size_t qubits_for_dim(Eigen::Index dim, bool &with_reference, std::size_t n_hint) {
    const Eigen::Index sys = Eigen::Index{1} << n_hint;
    if (dim == sys) {
        with_reference = false;
    } else if (dim == 2 * sys) {
        with_reference = true;
    } else {
        throw std::invalid_argument("state dimension does not match the qubit count");
    }
    return n_hint;
}

inline std::size_t infer_qubits(const MeasurementSetup *setup, std::size_t fallback) {
    if (setup && !setup->operators.empty()) return setup->operators.front().size();
    return fallback;
}

}  // namespace detail

/// One first-order step of the Lindblad equation on `n` system qubits (plus a
/// trailing reference qubit when rho has twice the system dimension).
inline OperatorMatrix lindblad_step(const OperatorMatrix &rho, std::size_t n, const NoiseModel &model,
                                    const MeasurementSetup *setup, double dt) {
    require_density_matrix(rho, "lindblad_step");
    if (!(dt > 0.0)) throw std::invalid_argument("lindblad_step: dt must be positive");
    bool with_reference = false;
    detail::qubits_for_dim(rho.rows(), with_reference, n);
    const LindbladGenerator gen(n, model, setup, with_reference);
    OperatorMatrix out;
    gen.step(gen.step_kernel(dt), dt, rho, out);
    out /= out.trace().real();
    return out;
}

namespace detail {

inline std::size_t step_count(double T, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(T >= 0.0)) throw std::invalid_argument("T must be nonnegative");
    const double ratio = T / dt;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio)) {
        throw std::invalid_argument("dt does not divide T");
    }
    return static_cast<std::size_t>(rounded);
}

inline void renormalize(OperatorMatrix &rho) {
    const double tr = rho.trace().real();
    if (!(tr > 0.0) || !std::isfinite(tr)) {
        throw std::runtime_error("conditional state lost its trace (dt too large?)");
    }
    rho /= tr;
}

inline void hermitize(OperatorMatrix &rho) { rho = 0.5 * (rho + rho.adjoint()).eval(); }

}  // namespace detail

/// Deterministic Euler integration from a pure state. With a reference-entangled
/// input this returns the Choi-like state (E (x) I)(Phi).
inline OperatorMatrix integrate_unconditional(const StateVector &state0, std::size_t n, const NoiseModel &model,
                                              const MeasurementSetup *setup, double T, double dt) {
    const std::size_t steps = detail::step_count(T, dt);
    bool with_reference = false;
    detail::qubits_for_dim(state0.size(), with_reference, n);
    const LindbladGenerator gen(n, model, setup, with_reference);
    const OperatorMatrix kernel = gen.step_kernel(dt);
    OperatorMatrix rho = projector(state0);
    OperatorMatrix next;
    for (std::size_t k = 0; k < steps; ++k) {
        gen.step(kernel, dt, rho, next);
        rho.swap(next);
        detail::renormalize(rho);
    }
    detail::hermitize(rho);
    return rho;
}

/// Unconditional states at several step indices (sorted ascending) of one run.
inline std::vector<OperatorMatrix> integrate_unconditional_snapshots(const StateVector &state0, std::size_t n,
                                                                     const NoiseModel &model,
                                                                     const MeasurementSetup *setup, double dt,
                                                                     const std::vector<std::size_t> &snapshot_steps) {
    bool with_reference = false;
    detail::qubits_for_dim(state0.size(), with_reference, n);
    const LindbladGenerator gen(n, model, setup, with_reference);
    const OperatorMatrix kernel = gen.step_kernel(dt);
    OperatorMatrix rho = projector(state0);
    OperatorMatrix next;
    std::vector<OperatorMatrix> out;
    std::size_t k = 0;
    for (std::size_t target : snapshot_steps) {
        if (target < k) throw std::invalid_argument("snapshot steps must be sorted");
        for (; k < target; ++k) {
            gen.step(kernel, dt, rho, next);
            rho.swap(next);
            detail::renormalize(rho);
        }
        OperatorMatrix snap = rho;
        detail::hermitize(snap);
        out.push_back(std::move(snap));
    }
    return out;
}

/// Settings for one conditional integration.
struct SmeRun {
    double dt = 0.0;
    std::size_t steps = 0;
    /// Step indices at which to store conditional states (sorted ascending, each <= steps).
    std::vector<std::size_t> snapshot_steps;
    bool keep_currents = true;
};

/// Integrator of the diffusive SME with per-step renormalization.
///
/// Each step applies the first-order Kraus form
///
///   rho -> M rho M^dag + (1 - eta) Gamma_m dt sum_i S_i rho S_i + dt sum_(other L) L rho L^dag,
///   M = I - dt/2 sum_j L_j^dag L_j + sqrt(eta Gamma_m) sum_i S_i dY_i,
///
/// with dY_i = 2 sqrt(eta Gamma_m) J_i dt. Expanding M rho M^dag with
/// dY^2 = dt and renormalizing reproduces the Euler-Maruyama step of the
/// nonlinear SME to first order, while keeping the state positive. Before
/// renormalization the update is linear in rho for a given record.
///
/// run() draws dY from its exact outcome density Tr[K_dY(rho)] N(dY; 0, dt),
/// so the ensemble mean of one step is exactly the unconditional step. The
/// innovation dW = dY - 2 sqrt(eta Gamma_m) <S> dt is N(0, dt) to leading order.
class SmeIntegrator {
   public:
    SmeIntegrator(std::size_t n, NoiseModel model, MeasurementSetup setup, bool with_reference)
        : n_(n), setup_(std::move(setup)), generator_(n, model, &setup_, with_reference) {
        for (const auto &op : setup_.operators) {
            parity_.push_back(detail::lift(detail::parity_diagonal(op), with_reference));
        }
        coupling_ = std::sqrt(setup_.eta * setup_.gamma_meas);
        monitored_ = generator_.diagonal_sum();
        for (const auto &s : parity_) {
            monitored_ -= (setup_.eta * setup_.gamma_meas) * (s * s.transpose()).cast<Complex>();
        }
        // Tr of the record-independent part per basis state: d_a - eta Gamma_m m
        residual_weight_ = generator_.decay().array() - setup_.eta * setup_.gamma_meas * static_cast<double>(parity_.size());
    }

    Eigen::Index dim() const { return generator_.dim(); }
    const MeasurementSetup &setup() const { return setup_; }
    double coupling() const { return coupling_; }

    /// Enforces the stability guard dt * Gamma_m <= 0.1.
    void check_step(double dt) const {
        if (!(dt > 0.0)) throw std::invalid_argument("integrate_sme: dt must be positive");
        if (dt * setup_.gamma_meas > 0.1 + 1e-12) {
            throw std::invalid_argument("integrate_sme: dt * gamma_meas exceeds 0.1");
        }
    }

    /// Simulates one record from `state0` with increments drawn from `seed`.
    TrajectoryRecord run(const StateVector &state0, const SmeRun &cfg, std::uint64_t seed) const {
        check_step(cfg.dt);
        TrajectoryRecord rec = start(state0, cfg, seed);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> uniform(0.0, 1.0);
        const double dt = cfg.dt;
        const double sqrt_dt = std::sqrt(dt);
        const std::size_t m = parity_.size();
        const Eigen::VectorXd m0 = Eigen::VectorXd::Ones(dim()) - 0.5 * dt * generator_.decay();
        const double root_m = std::sqrt(static_cast<double>(m));
        std::vector<double> dy(m), y(m);
        Eigen::VectorXd weight(dim());
        integrate(state0, rec, cfg,
                  [&](std::size_t, const Eigen::VectorXd &pop, const std::vector<double> &,
                      std::vector<double> &current) -> const std::vector<double> & {
            if (coupling_ == 0.0) {
                for (std::size_t i = 0; i < m; ++i) {
                    dy[i] = 0.0;
                    current[i] = gauss(rng) * sqrt_dt / dt;
                }
                return dy;
            }
            // basis state a carries weight rho_aa (m0_a^2 + c^2 m dt + dt r_a)
            const double beta = coupling_ * root_m;
            for (Eigen::Index a = 0; a < weight.size(); ++a) {
                weight(a) = std::max(0.0, pop(a)) *
                            (m0(a) * m0(a) + beta * beta * dt + dt * residual_weight_(a));
            }
            const double total = weight.sum();
            double pick = uniform(rng) * total;
            Eigen::Index a = 0;
            while (a + 1 < weight.size() && pick >= weight(a)) pick -= weight(a++);
            // along s_a / sqrt(m): density ~ [(alpha + beta z)^2 + delta] N(z; 0, dt)
            const double alpha = m0(a);
            const double delta = dt * residual_weight_(a);
            double z;
            if (uniform(rng) * (alpha * alpha + delta + beta * beta * dt) < alpha * alpha + delta) {
                z = std::abs(gauss(rng)) * sqrt_dt;
            } else {
                const double g1 = gauss(rng), g2 = gauss(rng), g3 = gauss(rng);
                z = std::sqrt(g1 * g1 + g2 * g2 + g3 * g3) * sqrt_dt;
            }
            const double plus = (alpha + beta * z) * (alpha + beta * z) + delta;
            const double minus = (alpha - beta * z) * (alpha - beta * z) + delta;
            if (uniform(rng) * (plus + minus) >= plus) z = -z;
            // orthogonal components are free Gaussians
            double along = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                y[i] = gauss(rng) * sqrt_dt;
                along += y[i] * parity_[i](a) / root_m;
            }
            for (std::size_t i = 0; i < m; ++i) {
                dy[i] = y[i] + (z - along) * parity_[i](a) / root_m;
                current[i] = dy[i] / (2.0 * coupling_ * dt);
            }
            return dy;
        });
        return rec;
    }

    /// Filters `state0` through a previously recorded set of currents.
    TrajectoryRecord replay(const StateVector &state0, const SmeRun &cfg,
                            const std::vector<std::vector<double>> &currents) const {
        check_step(cfg.dt);
        if (currents.size() != parity_.size()) throw std::invalid_argument("replay: operator count mismatch");
        for (const auto &c : currents)
            if (c.size() < cfg.steps) throw std::invalid_argument("replay: record shorter than the run");
        TrajectoryRecord rec = start(state0, cfg, 0);
        std::vector<double> dy(parity_.size());
        integrate(state0, rec, cfg,
                  [&](std::size_t k, const Eigen::VectorXd &, const std::vector<double> &,
                      std::vector<double> &current) -> const std::vector<double> & {
            for (std::size_t i = 0; i < dy.size(); ++i) {
                current[i] = currents[i][k];
                // no information reaches the filter when eta * Gamma_m == 0
                dy[i] = coupling_ > 0.0 ? 2.0 * coupling_ * currents[i][k] * cfg.dt : 0.0;
            }
            return dy;
        });
        return rec;
    }

   private:
    TrajectoryRecord start(const StateVector &state0, const SmeRun &cfg, std::uint64_t seed) const {
        if (state0.size() != dim()) throw std::invalid_argument("integrate_sme: state dimension mismatch");
        TrajectoryRecord rec;
        rec.seed = seed;
        rec.dt = cfg.dt;
        rec.steps = cfg.steps;
        rec.raw_innovation = coupling_ == 0.0 && !parity_.empty();
        if (cfg.keep_currents) rec.currents.assign(parity_.size(), std::vector<double>(cfg.steps));
        return rec;
    }

    /// Shared loop. `innovation(k, populations, expectations, current_out)` fills
    /// the current sample for step k and returns the record increments dY.
    template <typename Innovation>
    void integrate(const StateVector &state0, TrajectoryRecord &rec, const SmeRun &cfg,
                   Innovation &&innovation) const {
        const Eigen::Index d = dim();
        const std::size_t m = parity_.size();
        const double dt = cfg.dt;
        const OperatorMatrix kernel = generator_.step_kernel(dt);
        const OperatorMatrix base = dt * monitored_;
        const Eigen::VectorXd m0 = Eigen::VectorXd::Ones(d) - 0.5 * dt * generator_.decay();
        OperatorMatrix rho = projector(state0);
        OperatorMatrix next(d, d);
        std::vector<double> expect(m), current(m);
        Eigen::VectorXd mv(d);
        std::size_t next_snapshot = 0;
        rec.snapshots.reserve(cfg.snapshot_steps.size());
        auto take_snapshots = [&](std::size_t k) {
            while (next_snapshot < cfg.snapshot_steps.size() && cfg.snapshot_steps[next_snapshot] == k) {
                OperatorMatrix snap = rho;
                detail::hermitize(snap);
                rec.snapshots.push_back(std::move(snap));
                ++next_snapshot;
            }
        };
        for (std::size_t i = 1; i < cfg.snapshot_steps.size(); ++i)
            if (cfg.snapshot_steps[i] < cfg.snapshot_steps[i - 1])
                throw std::invalid_argument("snapshot steps must be sorted");
        if (!cfg.snapshot_steps.empty() && cfg.snapshot_steps.back() > cfg.steps)
            throw std::invalid_argument("snapshot step beyond the end of the run");

        for (std::size_t k = 0; k < cfg.steps; ++k) {
            take_snapshots(k);
            const Eigen::VectorXd diag = rho.diagonal().real();
            for (std::size_t i = 0; i < m; ++i) expect[i] = parity_[i].dot(diag);
            const std::vector<double> &dy = innovation(k, diag, expect, current);
            if (cfg.keep_currents)
                for (std::size_t i = 0; i < m; ++i) rec.currents[i][k] = current[i];

            if (coupling_ == 0.0) {
                generator_.step(kernel, dt, rho, next);
            } else {
                mv = m0;
                for (std::size_t i = 0; i < m; ++i) mv += (coupling_ * dy[i]) * parity_[i];
                const Complex *r = rho.data();
                const Complex *g = base.data();
                Complex *f = next.data();
                for (Eigen::Index b = 0; b < d; ++b)
                    for (Eigen::Index a = 0; a < d; ++a) {
                        const Eigen::Index idx = a + b * d;
                        f[idx] = (mv(a) * mv(b) + g[idx]) * r[idx];
                    }
                generator_.add_offdiagonal_jumps(rho, next, dt);
            }
            rho.swap(next);
            detail::renormalize(rho);
        }
        take_snapshots(cfg.steps);
        detail::hermitize(rho);
        rec.final_state = std::move(rho);
    }

    std::size_t n_;
    MeasurementSetup setup_;
    LindbladGenerator generator_;
    std::vector<Eigen::VectorXd> parity_;
    OperatorMatrix monitored_;
    Eigen::VectorXd residual_weight_;
    double coupling_ = 0.0;
};

/// One conditional integration from `state0` over [0, T].
inline TrajectoryRecord integrate_sme(const StateVector &state0, std::size_t n, const NoiseModel &model,
                                      const MeasurementSetup &setup, double T, double dt, std::uint64_t seed) {
    bool with_reference = false;
    detail::qubits_for_dim(state0.size(), with_reference, n);
    const SmeIntegrator integrator(n, model, setup, with_reference);
    SmeRun run;
    run.dt = dt;
    run.steps = detail::step_count(T, dt);
    return integrator.run(state0, run, seed);
}

/// Everything needed to simulate an ensemble of records.
struct EnsembleSpec {
    StabilizerCode code;
    NoiseModel model;
    MeasurementSetup setup;
    double T = 0.0;
    double dt = 0.0;
    /// Start from the reference-entangled state (otherwise from `state0`).
    bool with_reference = true;
    StateVector state0;
    std::vector<std::size_t> snapshot_steps;
    bool keep_currents = true;
};

/// Trajectory l uses seed derive_seed(master_seed, l); output order is the
/// index order regardless of scheduling.
inline std::vector<TrajectoryRecord> run_ensemble(const EnsembleSpec &spec, std::size_t count,
                                                  std::uint64_t master_seed, std::size_t threads = 0) {
    if (count == 0) throw std::invalid_argument("run_ensemble: count must be at least 1");
    const SmeIntegrator integrator(spec.code.n, spec.model, spec.setup, spec.with_reference);
    const StateVector state0 = spec.with_reference ? reference_entangled_state(spec.code) : spec.state0;
    SmeRun run;
    run.dt = spec.dt;
    run.steps = detail::step_count(spec.T, spec.dt);
    run.snapshot_steps = spec.snapshot_steps;
    run.keep_currents = spec.keep_currents;
    return parallel_map<TrajectoryRecord>(count, threads, [&](std::size_t index) {
        return integrator.run(state0, run, derive_seed(master_seed, index));
    });
}

}  // namespace paritybench
