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

// Optimal recovery by semidefinite programming over Choi matrices.
//
// Choi convention: C = sum_ij R(|i><j|) (x) |i><j|, output factor first and
// input factor last, so R(rho)_ab = sum_ij C[(a,i),(b,j)] rho_ij and a CPTP
// map satisfies C >= 0 and Tr_out C = I_in.
//
// The entanglement fidelity <phi| (R (x) I)(Omega_E) |phi> only sees the
// code-space block of R's output. The solver therefore optimizes the reduced
// variable Z[(r,a),(s,b)] = <r|R(|a><b|)|s> (r, s logical; a, b physical), of
// size 2 * 2^n, subject to Z >= 0 and Tr_out Z = I. Any Z with Tr_out Z <= I
// completes to such a Z by adding |0_L><0_L| (x) (I - Tr_out Z), which can only
// raise the objective because it is PSD. Embedding Z through the logical
// basis gives a CPTP map of the full space whose output lies in the code space.
//
// The reduced problem  max Tr(Z Q)  s.t. Z >= 0, Tr_out Z = I  has dual
// min Tr(Y)  s.t. I_2 (x) Y >= Q, solved here by ADMM with over-relaxation
// and residual balancing. Every few iterations the current iterate is made
// exactly feasible (scale, then complete) and the dual estimate is shifted
// into the feasible set, which gives a certified gap.
//
// ADMM can stall on nearly rank-deficient objectives (strongly conditioned
// states). SdpMethod::automatic then falls back to a log-barrier Newton method
// on the dual, min Tr Y - mu log det(I (x) Y - Q), whose central path yields
// a primal point mu (I (x) Y - Q)^-1 and the same certified gap.

#include "paritybench/codes.hpp"
#include "paritybench/qcore.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace paritybench {

/// Choi matrix of a channel, output factor first.
struct RecoveryChoi {
    OperatorMatrix matrix;
    Eigen::Index out_dim = 0;
    Eigen::Index in_dim = 0;
    /// ||Tr_out(matrix) - I_in||_F
    double tp_defect = 0.0;
};

namespace detail {

inline OperatorMatrix trace_out_first(const OperatorMatrix &m, Eigen::Index out_dim, Eigen::Index in_dim) {
    OperatorMatrix t = OperatorMatrix::Zero(in_dim, in_dim);
    for (Eigen::Index x = 0; x < out_dim; ++x) t += m.block(x * in_dim, x * in_dim, in_dim, in_dim);
    return t;
}

inline double tp_defect_of(const OperatorMatrix &m, Eigen::Index out_dim, Eigen::Index in_dim) {
    return (trace_out_first(m, out_dim, in_dim) - OperatorMatrix::Identity(in_dim, in_dim)).norm();
}

}  // namespace detail

inline RecoveryChoi make_choi(OperatorMatrix matrix, Eigen::Index out_dim, Eigen::Index in_dim) {
    if (matrix.rows() != out_dim * in_dim || matrix.cols() != out_dim * in_dim) {
        throw std::invalid_argument("make_choi: matrix size does not match out_dim * in_dim");
    }
    RecoveryChoi c;
    c.tp_defect = detail::tp_defect_of(matrix, out_dim, in_dim);
    c.matrix = std::move(matrix);
    c.out_dim = out_dim;
    c.in_dim = in_dim;
    return c;
}

/// Choi matrix of rho -> sum_k K rho K^dag.
inline RecoveryChoi choi_from_kraus(const std::vector<OperatorMatrix> &kraus) {
    if (kraus.empty()) throw std::invalid_argument("choi_from_kraus: no Kraus operators");
    const Eigen::Index out = kraus.front().rows();
    const Eigen::Index in = kraus.front().cols();
    OperatorMatrix c = OperatorMatrix::Zero(out * in, out * in);
    for (const auto &k : kraus) {
        if (k.rows() != out || k.cols() != in) throw std::invalid_argument("choi_from_kraus: inconsistent shapes");
        // vec with output index major: v[(x,i)] = K_{x i}
        Eigen::VectorXcd v(out * in);
        for (Eigen::Index x = 0; x < out; ++x)
            for (Eigen::Index i = 0; i < in; ++i) v(x * in + i) = k(x, i);
        c += v * v.adjoint();
    }
    return make_choi(std::move(c), out, in);
}

inline RecoveryChoi identity_choi(Eigen::Index dim) { return choi_from_kraus({OperatorMatrix::Identity(dim, dim)}); }

/// rho -> Tr(rho) I / dim.
inline RecoveryChoi depolarizing_choi(Eigen::Index dim) {
    OperatorMatrix c = OperatorMatrix::Identity(dim * dim, dim * dim) / static_cast<double>(dim);
    return make_choi(std::move(c), dim, dim);
}

/// R(rho) = Tr_in[C (I (x) rho^T)].
inline OperatorMatrix apply_channel(const RecoveryChoi &r, const OperatorMatrix &rho) {
    if (rho.rows() != r.in_dim || rho.cols() != r.in_dim) {
        throw std::invalid_argument("apply_channel: input dimension mismatch");
    }
    const Eigen::Index in = r.in_dim;
    OperatorMatrix out = OperatorMatrix::Zero(r.out_dim, r.out_dim);
    for (Eigen::Index a = 0; a < r.out_dim; ++a)
        for (Eigen::Index b = 0; b < r.out_dim; ++b) {
            Complex s = 0.0;
            for (Eigen::Index i = 0; i < in; ++i)
                for (Eigen::Index j = 0; j < in; ++j) s += r.matrix(a * in + i, b * in + j) * rho(i, j);
            out(a, b) = s;
        }
    return out;
}

/// (R (x) I_ref)(omega) for omega on (system) (x) (ref_dim).
inline OperatorMatrix apply_channel_with_reference(const RecoveryChoi &r, const OperatorMatrix &omega,
                                                   Eigen::Index ref_dim = 2) {
    const Eigen::Index in = r.in_dim;
    const Eigen::Index out = r.out_dim;
    if (omega.rows() != in * ref_dim || omega.cols() != in * ref_dim) {
        throw std::invalid_argument("apply_channel_with_reference: dimension mismatch");
    }
    OperatorMatrix result = OperatorMatrix::Zero(out * ref_dim, out * ref_dim);
    for (Eigen::Index u = 0; u < ref_dim; ++u)
        for (Eigen::Index v = 0; v < ref_dim; ++v) {
            OperatorMatrix block(in, in);
            for (Eigen::Index i = 0; i < in; ++i)
                for (Eigen::Index j = 0; j < in; ++j) block(i, j) = omega(i * ref_dim + u, j * ref_dim + v);
            const OperatorMatrix mapped = apply_channel(r, block);
            for (Eigen::Index a = 0; a < out; ++a)
                for (Eigen::Index b = 0; b < out; ++b) result(a * ref_dim + u, b * ref_dim + v) = mapped(a, b);
        }
    return result;
}

/// <phi| (R (x) I)(omega_e) |phi> with phi the code's reference-entangled state.
inline double entanglement_fidelity(const RecoveryChoi &r, const OperatorMatrix &omega_e, const StabilizerCode &code) {
    if (r.in_dim != code.dim() || r.out_dim != code.dim() || omega_e.rows() != 2 * code.dim()) {
        throw std::invalid_argument("entanglement_fidelity: dimension mismatch");
    }
    const StateVector phi = reference_entangled_state(code);
    const OperatorMatrix out = apply_channel_with_reference(r, omega_e);
    return (phi.adjoint() * out * phi)(0, 0).real();
}

/// Choi state of the adjoint map, Omega_{R^dag} = (R^dag (x) I)(Phi), so that
/// Tr(Omega_{R^dag} Omega_E) is the entanglement fidelity.
inline OperatorMatrix adjoint_choi_state(const RecoveryChoi &r, const StabilizerCode &code) {
    const Eigen::Index in = r.in_dim;
    const Eigen::Index out = r.out_dim;
    if (out != code.dim()) throw std::invalid_argument("adjoint_choi_state: output dimension mismatch");
    // R^dag(Y) = (Tr_out[C (Y (x) I)])^T
    auto adjoint_map = [&](const OperatorMatrix &y) {
        OperatorMatrix m = OperatorMatrix::Zero(in, in);
        for (Eigen::Index i = 0; i < in; ++i)
            for (Eigen::Index j = 0; j < in; ++j) {
                Complex s = 0.0;
                for (Eigen::Index x = 0; x < out; ++x)
                    for (Eigen::Index z = 0; z < out; ++z) s += r.matrix(x * in + i, z * in + j) * y(z, x);
                m(i, j) = s;
            }
        return OperatorMatrix(m.transpose());
    };
    OperatorMatrix result = OperatorMatrix::Zero(in * 2, in * 2);
    for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v) {
            const OperatorMatrix y = code.logical(u) * code.logical(v).adjoint() * 0.5;
            const OperatorMatrix mapped = adjoint_map(y);
            for (Eigen::Index a = 0; a < in; ++a)
                for (Eigen::Index b = 0; b < in; ++b) result(a * 2 + u, b * 2 + v) = mapped(a, b);
        }
    return result;
}

/// (F_e d + 1) / (d + 1).
inline double average_fidelity(double f_e, int d = 2) {
    if (d < 1) throw std::invalid_argument("average_fidelity: d must be positive");
    return (f_e * d + 1.0) / (d + 1.0);
}

/// Average fidelity of a map that may leak out of the code space:
/// (d F_e + p_code) / (d + 1), where p_code = Tr[P R(E(P / d))]. Equal to
/// average_fidelity() when the map keeps the code space (p_code = 1).
inline double average_fidelity_with_leakage(double f_e, double p_code, int d = 2) {
    return (f_e * d + p_code) / (d + 1.0);
}

// ---------------------------------------------------------------------------
// Reduced (code-space output) recovery variable and its SDP.

/// Objective matrix of the reduced problem: F_e = Re Tr(Z Q).
/// Q[(s,b),(r,a)] = Omega_E[(a,r),(b,s)] / 2, i.e. half the transpose of
/// Omega_E with the reference factor moved first.
inline OperatorMatrix reduced_objective(const OperatorMatrix &omega_e, Eigen::Index sys_dim) {
    if (omega_e.rows() != 2 * sys_dim || omega_e.cols() != 2 * sys_dim) {
        throw std::invalid_argument("reduced_objective: omega_e must live on system (x) reference");
    }
    OperatorMatrix q(2 * sys_dim, 2 * sys_dim);
    for (Eigen::Index r = 0; r < 2; ++r)
        for (Eigen::Index a = 0; a < sys_dim; ++a)
            for (Eigen::Index s = 0; s < 2; ++s)
                for (Eigen::Index b = 0; b < sys_dim; ++b)
                    q(s * sys_dim + b, r * sys_dim + a) = 0.5 * omega_e(a * 2 + r, b * 2 + s);
    return q;
}

/// Objective for the full-output Choi variable: F_e = Re Tr(C W) with
/// W[(y,b),(x,a)] = 1/2 sum_rs omega[(a,r),(b,s)] conj(r_x) s_y.
inline OperatorMatrix full_objective(const OperatorMatrix &omega_e, const StabilizerCode &code) {
    const Eigen::Index d = code.dim();
    if (omega_e.rows() != 2 * d) throw std::invalid_argument("full_objective: dimension mismatch");
    OperatorMatrix w = OperatorMatrix::Zero(d * d, d * d);
    for (Eigen::Index y = 0; y < d; ++y)
        for (Eigen::Index b = 0; b < d; ++b)
            for (Eigen::Index x = 0; x < d; ++x)
                for (Eigen::Index a = 0; a < d; ++a) {
                    Complex s = 0.0;
                    for (int r = 0; r < 2; ++r)
                        for (int t = 0; t < 2; ++t)
                            s += omega_e(a * 2 + r, b * 2 + t) * std::conj(code.logical(r)(x)) * code.logical(t)(y);
                    w(y * d + b, x * d + a) = 0.5 * s;
                }
    return w;
}

/// Z[(r,a),(s,b)] = <r_L|R(|a><b|)|s_L> for a Kraus-specified map.
inline OperatorMatrix reduced_from_kraus(const std::vector<OperatorMatrix> &kraus, const StabilizerCode &code) {
    const Eigen::Index d = code.dim();
    OperatorMatrix z = OperatorMatrix::Zero(2 * d, 2 * d);
    for (const auto &k : kraus) {
        Eigen::VectorXcd v(2 * d);
        for (int r = 0; r < 2; ++r) {
            const Eigen::VectorXcd row = code.logical(r).adjoint() * k;  // <r_L| K
            v.segment(r * d, d) = row;
        }
        z += v * v.adjoint();
    }
    return z;
}

/// Embeds a reduced variable as a full Choi matrix through the logical basis.
inline RecoveryChoi choi_from_reduced(const OperatorMatrix &z, const StabilizerCode &code) {
    const Eigen::Index d = code.dim();
    if (z.rows() != 2 * d) throw std::invalid_argument("choi_from_reduced: dimension mismatch");
    // (V (x) I) with V = [0_L 1_L]
    OperatorMatrix lift = OperatorMatrix::Zero(d * d, 2 * d);
    for (int r = 0; r < 2; ++r)
        for (Eigen::Index x = 0; x < d; ++x)
            for (Eigen::Index a = 0; a < d; ++a) lift(x * d + a, r * d + a) = code.logical(r)(x);
    return make_choi(lift * z * lift.adjoint(), d, d);
}

enum class SdpMethod {
    /// ADMM first, barrier method if ADMM has not certified within its budget.
    automatic,
    admm,
    barrier,
};

/// Solver controls.
struct SdpOptions {
    /// Certified primal-dual gap at which the solve stops. The barrier
    /// certificate bottoms out near 3e-8 in double precision.
    double tol = 1e-6;
    SdpMethod method = SdpMethod::automatic;
    /// ADMM iteration cap (for automatic, the budget before switching).
    int max_iterations = 50000;
    int automatic_admm_budget = 300;
    int max_newton_steps = 500;
    int check_every = 10;
    double over_relaxation = 1.6;
    double initial_penalty = 1.0;
    /// Solve in real arithmetic when the objective is real (exact for real data).
    bool allow_real = true;
};

/// Iterate carried between related solves (e.g. successive snapshots).
struct SdpWarmStart {
    OperatorMatrix z;
    OperatorMatrix u;
    double penalty = 0.0;
    bool valid() const { return z.size() > 0 && penalty > 0.0; }
};

struct SdpSolution {
    /// Certified-feasible variable: Z >= 0 and Tr_out Z = I.
    OperatorMatrix z;
    double primal = 0.0;
    /// Certified upper bound on the optimum.
    double dual = 0.0;
    double gap = std::numeric_limits<double>::infinity();
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    /// Method that produced the certificate.
    SdpMethod method = SdpMethod::admm;
    SdpWarmStart warm;
};

class SdpNotConverged : public std::runtime_error {
   public:
    SdpNotConverged(const std::string &what, SdpSolution best) : std::runtime_error(what), best_(std::move(best)) {}
    const SdpSolution &best() const { return best_; }

   private:
    SdpSolution best_;
};

namespace detail {

inline std::string format_gap(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
Mat<Scalar> block_trace_out(const Mat<Scalar> &m, Eigen::Index out, Eigen::Index in) {
    Mat<Scalar> t = Mat<Scalar>::Zero(in, in);
    for (Eigen::Index x = 0; x < out; ++x) t += m.block(x * in, x * in, in, in);
    return t;
}

template <typename Scalar>
void add_identity_kron(Mat<Scalar> &m, const Mat<Scalar> &y, Eigen::Index out, Eigen::Index in, double scale) {
    for (Eigen::Index x = 0; x < out; ++x) m.block(x * in, x * in, in, in) += scale * y;
}

template <typename Scalar>
Mat<Scalar> hermitian_part(const Mat<Scalar> &m) {
    return (m + m.adjoint()) * 0.5;
}

template <typename Scalar>
Mat<Scalar> project_psd(const Mat<Scalar> &m) {
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(m);
    const auto &ev = es.eigenvalues();
    const auto &v = es.eigenvectors();
    Eigen::Index first = 0;
    while (first < ev.size() && ev(first) <= 0.0) ++first;
    const Eigen::Index k = ev.size() - first;
    if (k == 0) return Mat<Scalar>::Zero(m.rows(), m.cols());
    const auto vk = v.rightCols(k);
    return vk * ev.tail(k).asDiagonal() * vk.adjoint();
}

template <typename Scalar>
struct Certificate {
    Mat<Scalar> z;
    double primal = 0.0;
    double dual = std::numeric_limits<double>::infinity();
};

/// Feasible primal from a PSD iterate and a feasible dual from the multiplier.
template <typename Scalar>
Certificate<Scalar> certify(const Mat<Scalar> &z_psd, const Mat<Scalar> &u, double penalty, const Mat<Scalar> &q,
                            Eigen::Index out, Eigen::Index in) {
    Certificate<Scalar> c;
    const Mat<Scalar> id = Mat<Scalar>::Identity(in, in);

    Mat<Scalar> t = hermitian_part<Scalar>(block_trace_out<Scalar>(z_psd, out, in));
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es_t(t, Eigen::EigenvaluesOnly);
    const double tmax = es_t.eigenvalues().maxCoeff();
    c.z = z_psd;
    if (tmax > 1.0) {
        c.z /= tmax;
        t /= tmax;
    }
    c.z.block(0, 0, in, in) += id - t;
    c.primal = std::real((c.z.cwiseProduct(q.transpose())).sum());

    // Y = 1/2 Tr_out(Q - penalty U), shifted until I (x) Y >= Q.
    Mat<Scalar> y = hermitian_part<Scalar>(Mat<Scalar>(block_trace_out<Scalar>(Mat<Scalar>(q - penalty * u), out, in) /
                                                       static_cast<double>(out)));
    Mat<Scalar> slack = -q;
    add_identity_kron<Scalar>(slack, y, out, in, 1.0);
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es_s(hermitian_part<Scalar>(slack), Eigen::EigenvaluesOnly);
    const double smin = es_s.eigenvalues().minCoeff();
    double dual = std::real(y.trace());
    if (smin < 0.0) dual += -smin * static_cast<double>(in);
    c.dual = dual;
    return c;
}

template <typename Scalar>
SdpSolution admm_solve(const Mat<Scalar> &q, Eigen::Index out, Eigen::Index in, const SdpOptions &opt,
                       const SdpWarmStart *warm) {
    const Eigen::Index n = out * in;
    const Mat<Scalar> id_in = Mat<Scalar>::Identity(in, in);

    Mat<Scalar> z, u;
    double penalty = opt.initial_penalty;
    if (warm && warm->valid() && warm->z.rows() == n) {
        if constexpr (std::is_same_v<Scalar, double>) {
            z = warm->z.real();
            u = warm->u.real();
        } else {
            z = warm->z;
            u = warm->u;
        }
        penalty = warm->penalty;
    } else {
        // maximally mixed recovery: Z = I_out (x) I_in / out
        z = Mat<Scalar>::Identity(n, n) / static_cast<double>(out);
        u = Mat<Scalar>::Zero(n, n);
    }

    auto project_affine = [&](Mat<Scalar> &m) {
        const Mat<Scalar> defect = block_trace_out<Scalar>(m, out, in) - id_in;
        add_identity_kron<Scalar>(m, defect, out, in, -1.0 / static_cast<double>(out));
    };

    SdpSolution best;
    best.primal = -std::numeric_limits<double>::infinity();
    Mat<Scalar> x(n, n), z_prev(n, n);
    const double alpha = opt.over_relaxation;
    int it = 0;
    double r_norm = 0.0, s_norm = 0.0;
    for (it = 1; it <= opt.max_iterations; ++it) {
        x = z - u + q / penalty;
        project_affine(x);
        z_prev = z;
        const Mat<Scalar> x_hat = alpha * x + (1.0 - alpha) * z_prev;
        z = project_psd<Scalar>(hermitian_part<Scalar>(Mat<Scalar>(x_hat + u)));
        u += x_hat - z;

        if (it % opt.check_every == 0 || it == opt.max_iterations) {
            r_norm = (x - z).norm();
            s_norm = penalty * (z - z_prev).norm();
            const Certificate<Scalar> cert = certify<Scalar>(z, u, penalty, q, out, in);
            if (cert.dual - cert.primal < best.gap || cert.primal > best.primal) {
                if (cert.dual - cert.primal < best.gap) {
                    best.gap = cert.dual - cert.primal;
                    best.dual = cert.dual;
                }
                if (cert.primal > best.primal) {
                    best.primal = cert.primal;
                    best.z = cert.z.template cast<Complex>();
                }
                best.gap = best.dual - best.primal;
            }
            best.primal_residual = r_norm;
            best.dual_residual = s_norm;
            best.iterations = it;
            if (best.gap <= opt.tol) break;
            // residual balancing
            if (r_norm > 10.0 * s_norm) {
                penalty *= 2.0;
                u /= 2.0;
            } else if (s_norm > 10.0 * r_norm) {
                penalty /= 2.0;
                u *= 2.0;
            }
        }
    }
    best.warm.z = z.template cast<Complex>();
    best.warm.u = u.template cast<Complex>();
    best.warm.penalty = penalty;
    if (!(best.gap <= opt.tol)) {
        throw SdpNotConverged("recovery SDP did not reach gap " + format_gap(opt.tol) + " in " +
                                  std::to_string(opt.max_iterations) + " iterations (gap " + format_gap(best.gap) + ")",
                              best);
    }
    return best;
}

/// Feasible primal from Z = mu S^{-1} by scaling and completion.
template <typename Scalar>
Certificate<Scalar> complete_primal(Mat<Scalar> z, const Mat<Scalar> &q, Eigen::Index out, Eigen::Index in) {
    Certificate<Scalar> c;
    Mat<Scalar> t = hermitian_part<Scalar>(block_trace_out<Scalar>(z, out, in));
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es_t(t, Eigen::EigenvaluesOnly);
    const double tmax = es_t.eigenvalues().maxCoeff();
    if (tmax > 1.0) {
        z /= tmax;
        t /= tmax;
    }
    z.block(0, 0, in, in) += Mat<Scalar>::Identity(in, in) - t;
    c.primal = std::real((z.cwiseProduct(q.transpose())).sum());
    c.z = std::move(z);
    return c;
}

/// Dual log-barrier path following: min Tr(Y) - mu log det(I (x) Y - Q) by
/// damped Newton steps in Y, with mu shrinking once each centering converges.
/// Every Y visited is strictly dual feasible, so Tr(Y) is a valid upper bound.
template <typename Scalar>
SdpSolution barrier_solve(const Mat<Scalar> &q, Eigen::Index out, Eigen::Index in, const SdpOptions &opt) {
    const Eigen::Index n = out * in;
    const Eigen::Index m = in * in;
    using Chol = Eigen::LLT<Mat<Scalar>>;

    auto slack = [&](const Mat<Scalar> &y) {
        Mat<Scalar> s = -q;
        add_identity_kron<Scalar>(s, y, out, in, 1.0);
        return hermitian_part<Scalar>(s);
    };
    auto log_det = [](const Chol &llt) { return 2.0 * llt.matrixLLT().diagonal().real().array().log().sum(); };

    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es_q(q, Eigen::EigenvaluesOnly);
    const double qmax = es_q.eigenvalues().maxCoeff();
    Mat<Scalar> y = Mat<Scalar>::Identity(in, in) * (qmax + 1.0);
    double mu = std::max(1.0, std::abs(qmax)) / static_cast<double>(n);

    SdpSolution best;
    best.method = SdpMethod::barrier;
    best.primal = -std::numeric_limits<double>::infinity();
    best.dual = std::numeric_limits<double>::infinity();
    Mat<Scalar> hess(m, m);
    int steps = 0;
    int stalled = 0;
    while (steps < opt.max_newton_steps && stalled < 2) {
        // centering
        Mat<Scalar> sinv;
        for (int inner = 0; inner < 50 && steps < opt.max_newton_steps; ++inner, ++steps) {
            const Mat<Scalar> s = slack(y);
            Chol llt(s);
            sinv = llt.solve(Mat<Scalar>::Identity(n, n));
            const Mat<Scalar> grad = Mat<Scalar>::Identity(in, in) - mu * block_trace_out<Scalar>(sinv, out, in);
            hess.setZero();
            for (Eigen::Index x = 0; x < out; ++x)
                for (Eigen::Index xp = 0; xp < out; ++xp) {
                    const Mat<Scalar> a = sinv.block(x * in, xp * in, in, in);
                    const Mat<Scalar> c = sinv.block(xp * in, x * in, in, in);
                    // vec(A X C) = (C^T (x) A) vec(X)
                    for (Eigen::Index j = 0; j < in; ++j)
                        for (Eigen::Index i = 0; i < in; ++i) hess.block(j * in, i * in, in, in) += c(i, j) * a;
                }
            hess *= mu;
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(
                grad.data(), m);
            const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dvec = -Eigen::LDLT<Mat<Scalar>>(hess).solve(g);
            Mat<Scalar> delta = Eigen::Map<const Mat<Scalar>>(dvec.data(), in, in);
            delta = hermitian_part<Scalar>(delta);
            const double decrement = -std::real((grad.cwiseProduct(delta.conjugate())).sum());
            // squared Newton decrement of the mu-scaled barrier
            const double lambda2 = decrement / mu;
            if (lambda2 < 1e-12) break;
            // backtracking on the barrier objective, staying inside the cone
            const double f0 = std::real(y.trace()) - mu * log_det(llt);
            // inside the quadratic region a full step is feasible and the
            // Armijo test is below roundoff
            const bool full_step = lambda2 < 0.0625;
            double t = 1.0;
            for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
                const Mat<Scalar> y_try = y + t * delta;
                Chol llt_try(slack(y_try));
                if (llt_try.info() != Eigen::Success) continue;
                const Eigen::VectorXd diag = llt_try.matrixLLT().diagonal().real();
                if ((diag.array() <= 0.0).any() || !diag.allFinite()) continue;
                if (full_step) break;
                const double f1 = std::real(y_try.trace()) - mu * log_det(llt_try);
                if (f1 <= f0 - 0.25 * t * decrement) break;
            }
            y += t * delta;
            if (t == 1.0 && lambda2 < 1e-8) break;
        }
        // certify at the current center
        const Mat<Scalar> s = slack(y);
        Chol llt(s);
        if (llt.info() != Eigen::Success) break;
        sinv = llt.solve(Mat<Scalar>::Identity(n, n));
        const Certificate<Scalar> cert = complete_primal<Scalar>(Mat<Scalar>(mu * sinv), q, out, in);
        const double dual = std::real(y.trace());
        if (dual < best.dual) best.dual = dual;
        if (cert.primal > best.primal) {
            best.primal = cert.primal;
            best.z = cert.z.template cast<Complex>();
        }
        const double previous_gap = best.gap;
        best.gap = best.dual - best.primal;
        stalled = best.gap > 0.5 * previous_gap ? stalled + 1 : 0;
        best.iterations = steps;
        best.primal_residual = (block_trace_out<Scalar>(Mat<Scalar>(mu * sinv), out, in) -
                                Mat<Scalar>::Identity(in, in))
                                   .norm();
        best.dual_residual = 0.0;
        if (best.gap <= opt.tol) return best;
        mu *= 0.1;
    }
    throw SdpNotConverged("recovery SDP barrier method did not reach gap " + format_gap(opt.tol) + " (gap " +
                              format_gap(best.gap) + ")",
                          best);
}

template <typename Scalar>
SdpSolution solve_with(const Mat<Scalar> &q, Eigen::Index out, Eigen::Index in, const SdpOptions &opt,
                       const SdpWarmStart *warm) {
    switch (opt.method) {
        case SdpMethod::admm: return admm_solve<Scalar>(q, out, in, opt, warm);
        case SdpMethod::barrier: return barrier_solve<Scalar>(q, out, in, opt);
        case SdpMethod::automatic: break;
    }
    SdpOptions first = opt;
    first.max_iterations = std::min(opt.max_iterations, opt.automatic_admm_budget);
    try {
        return admm_solve<Scalar>(q, out, in, first, warm);
    } catch (const SdpNotConverged &stalled) {
        SdpSolution sol = barrier_solve<Scalar>(q, out, in, opt);
        // keep the ADMM iterate for warm starts; it is the better starting point nearby
        sol.warm = stalled.best().warm;
        sol.iterations += stalled.best().iterations;
        return sol;
    }
}

}  // namespace detail

/// max Re Tr(Z Q) over Z >= 0 with Tr_out Z = I_in; Q Hermitian PSD of size out*in.
inline SdpSolution solve_choi_sdp(const OperatorMatrix &q, Eigen::Index out, Eigen::Index in,
                                  const SdpOptions &opt = {}, const SdpWarmStart *warm = nullptr) {
    if (q.rows() != out * in || q.cols() != out * in) throw std::invalid_argument("solve_choi_sdp: size mismatch");
    if (!is_hermitian(q, 1e-9)) throw std::invalid_argument("solve_choi_sdp: objective must be Hermitian");
    const OperatorMatrix qh = 0.5 * (q + q.adjoint());
    const double imag = qh.imag().cwiseAbs().maxCoeff();
    const double scale = std::max(1e-300, qh.cwiseAbs().maxCoeff());
    if (opt.allow_real && imag <= 1e-14 * scale) {
        const bool warm_real = !warm || !warm->valid() || warm->z.imag().cwiseAbs().maxCoeff() <= 1e-12;
        if (warm_real) {
            return detail::solve_with<double>(qh.real(), out, in, opt, warm);
        }
    }
    return detail::solve_with<Complex>(qh, out, in, opt, warm);
}

/// Result of an optimal-recovery solve.
struct RecoveryResult {
    RecoveryChoi choi;
    OperatorMatrix reduced;
    double f_e = 0.0;
    SdpSolution stats;
};

/// Reduced solve only: certified F_e and the code-space block of the recovery.
inline SdpSolution solve_reduced_recovery(const OperatorMatrix &omega_e, const StabilizerCode &code,
                                          const SdpOptions &opt = {}, const SdpWarmStart *warm = nullptr) {
    require_density_matrix(omega_e, "solve_optimal_recovery", Tolerances{1e-8, 1e-7, -1e-6});
    return solve_choi_sdp(reduced_objective(omega_e, code.dim()), 2, code.dim(), opt, warm);
}

/// Maximizes the entanglement fidelity over CPTP recoveries.
inline RecoveryResult solve_optimal_recovery(const OperatorMatrix &omega_e, const StabilizerCode &code,
                                             const SdpOptions &opt = {}, const SdpWarmStart *warm = nullptr) {
    RecoveryResult res;
    res.stats = solve_reduced_recovery(omega_e, code, opt, warm);
    res.reduced = res.stats.z;
    res.choi = choi_from_reduced(res.reduced, code);
    res.f_e = res.stats.primal;
    return res;
}

}  // namespace paritybench
