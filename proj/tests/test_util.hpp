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

#include "paritybench/paritybench.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace pbtest {

using namespace paritybench;

inline bool near(const OperatorMatrix &a, const OperatorMatrix &b, double tol) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).cwiseAbs().maxCoeff() <= tol;
}

/// (E (x) I)(Phi) for a Pauli mixture sum_k p_k P_k rho P_k on the code qubits.
inline OperatorMatrix pauli_mixture_omega(const StabilizerCode &code, const std::vector<std::pair<PauliLabel, double>> &terms) {
    const StateVector phi = reference_entangled_state(code);
    OperatorMatrix omega = OperatorMatrix::Zero(phi.size(), phi.size());
    for (const auto &[label, p] : terms) {
        const OperatorMatrix e = kron(pauli(label), OperatorMatrix::Identity(2, 2));
        omega += p * e * phi * phi.adjoint() * e.adjoint();
    }
    return omega;
}

/// Independent X flips with probability p on each of the code's qubits.
inline std::vector<std::pair<PauliLabel, double>> iid_x_terms(std::size_t n, double p) {
    std::vector<std::pair<PauliLabel, double>> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::string s(n, 'I');
        double prob = 1.0;
        for (std::size_t q = 0; q < n; ++q) {
            const bool flip = (mask >> q) & 1u;
            if (flip) s[q] = 'X';
            prob *= flip ? p : 1.0 - p;
        }
        out.emplace_back(PauliLabel(s), prob);
    }
    return out;
}

inline OperatorMatrix random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    OperatorMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
    return m;
}

/// Random CPTP map with `count` Kraus operators (normalized by the inverse square root of sum K^dag K).
inline KrausChannel random_channel(Eigen::Index dim, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    KrausChannel ks;
    OperatorMatrix s = OperatorMatrix::Zero(dim, dim);
    for (int i = 0; i < count; ++i) {
        ks.push_back(random_complex(dim, dim, rng));
        s += ks.back().adjoint() * ks.back();
    }
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(s);
    const OperatorMatrix inv_sqrt =
        es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
    for (auto &k : ks) k = k * inv_sqrt;
    return ks;
}

inline OperatorMatrix random_density(Eigen::Index dim, std::mt19937_64 &rng) {
    const OperatorMatrix a = random_complex(dim, dim, rng);
    OperatorMatrix rho = a * a.adjoint();
    return rho / rho.trace().real();
}

}  // namespace pbtest
