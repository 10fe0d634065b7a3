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

// Dense complex operator algebra shared by every other module.
//
// Tensor ordering: qubit 0 is the leftmost factor (most significant bit of a
// basis index). When a reference qubit is present it is always the last
// factor.

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace paritybench {

using Complex = std::complex<double>;
using OperatorMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

/// Numerical tolerances used by validation checks across the library.
struct Tolerances {
    double hermitian = 1e-10;
    double trace = 1e-9;
    double min_eigenvalue = -1e-9;
    double psd_input_hermitian = 1e-8;
    double stabilizer_fix = 1e-12;
    double normalization = 1e-12;
};

inline constexpr Tolerances kTolerances{};

inline constexpr std::size_t kMaxQubits = 5;

/// A tensor product of single-qubit Paulis, e.g. "ZZI".
class PauliLabel {
   public:
    PauliLabel() = default;

    explicit PauliLabel(std::string_view letters) : letters_(letters) {
        if (letters_.empty()) {
            throw std::invalid_argument("PauliLabel: empty label");
        }
        for (char c : letters_) {
            if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
                throw std::invalid_argument("PauliLabel: invalid letter '" + std::string(1, c) + "' in \"" +
                                            letters_ + "\"");
            }
        }
    }

    /// Label of an n-qubit identity.
    static PauliLabel identity(std::size_t n) { return PauliLabel(std::string(n, 'I')); }

    /// The label with `letter` on `qubit` and identity elsewhere.
    static PauliLabel single(std::size_t n, std::size_t qubit, char letter) {
        std::string s(n, 'I');
        s.at(qubit) = letter;
        return PauliLabel(s);
    }

    /// Enumerates label number `index` in base-4 order I, X, Y, Z with qubit 0 most significant.
    static PauliLabel from_index(std::size_t n, std::uint64_t index) {
        static constexpr char kLetters[4] = {'I', 'X', 'Y', 'Z'};
        std::string s(n, 'I');
        for (std::size_t q = n; q-- > 0;) {
            s[q] = kLetters[index & 3u];
            index >>= 2;
        }
        return PauliLabel(s);
    }

    std::size_t size() const { return letters_.size(); }
    char operator[](std::size_t q) const { return letters_[q]; }
    const std::string &str() const { return letters_; }

    bool is_identity() const {
        return std::all_of(letters_.begin(), letters_.end(), [](char c) { return c == 'I'; });
    }

    /// Count of non-identity letters.
    std::size_t weight() const {
        return static_cast<std::size_t>(std::count_if(letters_.begin(), letters_.end(), [](char c) { return c != 'I'; }));
    }

    bool commutes_with(const PauliLabel &other) const {
        if (other.size() != size()) {
            throw std::invalid_argument("PauliLabel::commutes_with: length mismatch");
        }
        std::size_t anticommuting = 0;
        for (std::size_t q = 0; q < size(); ++q) {
            char a = letters_[q];
            char b = other.letters_[q];
            if (a != 'I' && b != 'I' && a != b) {
                ++anticommuting;
            }
        }
        return anticommuting % 2 == 0;
    }

    /// Product up to phase: letterwise Pauli multiplication ignoring the global phase.
    PauliLabel times_ignoring_phase(const PauliLabel &other) const {
        if (other.size() != size()) {
            throw std::invalid_argument("PauliLabel::times_ignoring_phase: length mismatch");
        }
        auto bits = [](char c) -> int {
            switch (c) {
                case 'X': return 1;
                case 'Z': return 2;
                case 'Y': return 3;
                default: return 0;
            }
        };
        static constexpr char kFromBits[4] = {'I', 'X', 'Z', 'Y'};
        std::string s(size(), 'I');
        for (std::size_t q = 0; q < size(); ++q) {
            s[q] = kFromBits[bits(letters_[q]) ^ bits(other.letters_[q])];
        }
        return PauliLabel(s);
    }

    friend bool operator==(const PauliLabel &, const PauliLabel &) = default;
    friend auto operator<=>(const PauliLabel &, const PauliLabel &) = default;

   private:
    std::string letters_;
};

inline OperatorMatrix single_qubit_pauli(char letter) {
    OperatorMatrix m(2, 2);
    const Complex i(0.0, 1.0);
    switch (letter) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, -i, i, 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("single_qubit_pauli: invalid letter");
    }
    return m;
}

/// Lowering operator |0><1|.
inline OperatorMatrix sigma_minus() {
    OperatorMatrix m = OperatorMatrix::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
}

inline OperatorMatrix kron(const OperatorMatrix &a, const OperatorMatrix &b) {
    OperatorMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline StateVector kron(const StateVector &a, const StateVector &b) {
    StateVector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

/// Dense matrix of a Pauli label; qubit 0 is the leftmost factor.
///
/// Built directly from the bit structure rather than by repeated kron: each
/// column has exactly one nonzero entry.
inline OperatorMatrix pauli(const PauliLabel &label) {
    const std::size_t n = label.size();
    if (n == 0) {
        throw std::invalid_argument("pauli: empty label");
    }
    const Eigen::Index dim = Eigen::Index{1} << n;
    OperatorMatrix out = OperatorMatrix::Zero(dim, dim);
    const Complex i(0.0, 1.0);
    for (Eigen::Index col = 0; col < dim; ++col) {
        Eigen::Index row = col;
        Complex amp = 1.0;
        for (std::size_t q = 0; q < n; ++q) {
            const Eigen::Index bit = Eigen::Index{1} << (n - 1 - q);
            const bool one = (col & bit) != 0;
            switch (label[q]) {
                case 'X': row ^= bit; break;
                case 'Y': row ^= bit; amp *= one ? -i : i; break;
                case 'Z': amp *= one ? -1.0 : 1.0; break;
                default: break;
            }
        }
        out(row, col) = amp;
    }
    return out;
}

/// Embeds a single-qubit operator on `qubit` of an n-qubit register.
inline OperatorMatrix embed_single(const OperatorMatrix &op, std::size_t qubit, std::size_t n) {
    if (qubit >= n) {
        throw std::invalid_argument("embed_single: qubit index out of range");
    }
    const Eigen::Index left = Eigen::Index{1} << qubit;
    const Eigen::Index right = Eigen::Index{1} << (n - 1 - qubit);
    return kron(kron(OperatorMatrix::Identity(left, left), op), OperatorMatrix::Identity(right, right));
}

inline OperatorMatrix projector(const StateVector &psi) { return psi * psi.adjoint(); }

inline Complex expectation(const OperatorMatrix &rho, const OperatorMatrix &op) { return (rho * op).trace(); }

inline std::size_t product(const std::vector<std::size_t> &dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

/// Partial trace keeping the subsystems listed in `keep` (in their original order).
inline OperatorMatrix partial_trace(const OperatorMatrix &m, const std::vector<std::size_t> &keep,
                                    const std::vector<std::size_t> &dims) {
    const std::size_t total = product(dims);
    if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != total) {
        throw std::invalid_argument("partial_trace: factor dimensions do not match the matrix");
    }
    if (keep.empty()) {
        throw std::invalid_argument("partial_trace: keep set is empty");
    }
    std::vector<bool> kept(dims.size(), false);
    for (std::size_t k : keep) {
        if (k >= dims.size() || kept[k]) {
            throw std::invalid_argument("partial_trace: invalid or repeated subsystem index");
        }
        kept[k] = true;
    }
    std::vector<std::size_t> keep_sorted(keep);
    std::sort(keep_sorted.begin(), keep_sorted.end());
    std::vector<std::size_t> traced;
    for (std::size_t s = 0; s < dims.size(); ++s) {
        if (!kept[s]) traced.push_back(s);
    }
    std::vector<std::size_t> kdims, tdims;
    for (std::size_t s : keep_sorted) kdims.push_back(dims[s]);
    for (std::size_t s : traced) tdims.push_back(dims[s]);
    const std::size_t kdim = product(kdims);
    const std::size_t tdim = product(tdims);

    // stride of each subsystem in the full index
    std::vector<std::size_t> stride(dims.size());
    std::size_t acc = 1;
    for (std::size_t s = dims.size(); s-- > 0;) {
        stride[s] = acc;
        acc *= dims[s];
    }
    auto offsets = [&](const std::vector<std::size_t> &subs, const std::vector<std::size_t> &sdims, std::size_t count) {
        std::vector<std::size_t> out(count);
        for (std::size_t idx = 0; idx < count; ++idx) {
            std::size_t rem = idx;
            std::size_t off = 0;
            for (std::size_t j = subs.size(); j-- > 0;) {
                off += (rem % sdims[j]) * stride[subs[j]];
                rem /= sdims[j];
            }
            out[idx] = off;
        }
        return out;
    };
    const auto koff = offsets(keep_sorted, kdims, kdim);
    const auto toff = offsets(traced, tdims, tdim);

    OperatorMatrix out = OperatorMatrix::Zero(static_cast<Eigen::Index>(kdim), static_cast<Eigen::Index>(kdim));
    for (std::size_t a = 0; a < kdim; ++a) {
        for (std::size_t b = 0; b < kdim; ++b) {
            Complex s = 0.0;
            for (std::size_t t = 0; t < tdim; ++t) {
                s += m(static_cast<Eigen::Index>(koff[a] + toff[t]), static_cast<Eigen::Index>(koff[b] + toff[t]));
            }
            out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = s;
        }
    }
    if (keep_sorted != keep) {
        // Reorder the kept factors into the caller's requested order.
        std::vector<std::size_t> order;  // position in keep_sorted for each requested subsystem
        for (std::size_t k : keep) {
            order.push_back(static_cast<std::size_t>(std::find(keep_sorted.begin(), keep_sorted.end(), k) - keep_sorted.begin()));
        }
        std::vector<std::size_t> kstride(kdims.size());
        std::size_t a2 = 1;
        for (std::size_t j = kdims.size(); j-- > 0;) {
            kstride[j] = a2;
            a2 *= kdims[j];
        }
        std::vector<std::size_t> perm(kdim);
        for (std::size_t idx = 0; idx < kdim; ++idx) {
            // idx enumerates the requested order
            std::size_t rem = idx;
            std::size_t sorted_index = 0;
            for (std::size_t j = keep.size(); j-- > 0;) {
                const std::size_t d = kdims[order[j]];
                sorted_index += (rem % d) * kstride[order[j]];
                rem /= d;
            }
            perm[idx] = sorted_index;
        }
        OperatorMatrix reordered(out.rows(), out.cols());
        for (std::size_t a = 0; a < kdim; ++a)
            for (std::size_t b = 0; b < kdim; ++b)
                reordered(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    out(static_cast<Eigen::Index>(perm[a]), static_cast<Eigen::Index>(perm[b]));
        return reordered;
    }
    return out;
}

inline double hermiticity_defect(const OperatorMatrix &m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const OperatorMatrix &m, double tol = kTolerances.hermitian) {
    return m.rows() == m.cols() && hermiticity_defect(m) <= tol;
}

inline double min_eigenvalue(const OperatorMatrix &h) {
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// Checks Hermiticity, unit trace, and the eigenvalue floor.
inline bool is_density_matrix(const OperatorMatrix &rho, const Tolerances &tol = kTolerances) {
    if (rho.rows() == 0 || rho.rows() != rho.cols()) return false;
    if (!is_hermitian(rho, tol.hermitian)) return false;
    if (std::abs(rho.trace() - Complex(1.0, 0.0)) > tol.trace) return false;
    return min_eigenvalue(rho) >= tol.min_eigenvalue;
}

inline void require_density_matrix(const OperatorMatrix &rho, std::string_view where,
                                   const Tolerances &tol = kTolerances) {
    if (!is_density_matrix(rho, tol)) {
        throw std::invalid_argument(std::string(where) + ": input is not a density matrix");
    }
}

/// Frobenius-nearest positive semidefinite matrix.
inline OperatorMatrix psd_project(const OperatorMatrix &h) {
    if (h.rows() != h.cols() || !is_hermitian(h, kTolerances.psd_input_hermitian)) {
        throw std::invalid_argument("psd_project: input is not Hermitian");
    }
    const OperatorMatrix sym = (h + h.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(sym);
    const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().adjoint();
}

/// Eigenprojectors of a non-identity Pauli: P+ + P- = I and P+ - P- = pauli(p).
inline std::pair<OperatorMatrix, OperatorMatrix> spectral_projectors(const PauliLabel &p) {
    if (p.is_identity()) {
        throw std::invalid_argument("spectral_projectors: the identity has no -1 eigenspace");
    }
    const OperatorMatrix b = pauli(p);
    const OperatorMatrix id = OperatorMatrix::Identity(b.rows(), b.cols());
    return {(id + b) * 0.5, (id - b) * 0.5};
}

/// Trace norm distance 0.5 * ||a - b||_1 for Hermitian arguments.
inline double trace_distance(const OperatorMatrix &a, const OperatorMatrix &b) {
    const OperatorMatrix d = a - b;
    const OperatorMatrix h = (d + d.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(h, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline Eigen::Index dim_of_qubits(std::size_t n) {
    if (n == 0 || n > kMaxQubits) {
        throw std::invalid_argument("qubit count must be between 1 and 5");
    }
    return Eigen::Index{1} << n;
}

}  // namespace paritybench
