/*
 * Copyright 2026 Metaspin Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "metaspin/complexify.hpp"

#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <fmt/format.h>

#include "metaspin/errors.hpp"
#include "metaspin/matrix_functions.hpp"

namespace metaspin {

namespace {

bool is_standard_j(const Eigen::MatrixXd& j) {
    const int n = static_cast<int>(j.rows()) / 2;
    Eigen::MatrixXd j_std = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    j_std.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    j_std.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    return (j - j_std).norm() < 1e-12 * j.norm();
}

void check_commutes(const Eigen::MatrixXd& k, const Eigen::MatrixXd& j) {
    const double scale = std::max(1.0, k.norm());
    if ((k * j - j * k).norm() > kCommutationTol * scale) {
        throw std::invalid_argument(fmt::format(
            "to_complex: matrix does not commute with J, residual {:.3e}",
            (k * j - j * k).norm() / scale));
    }
}

}  // namespace

ComplexSplit split(const Eigen::MatrixXd& m, const Eigen::MatrixXd& j) {
    ComplexSplit out;
    out.c_part = (m - j * m * j) / 2.0;
    out.d_part = (m + j * m * j) / 2.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(out.c_part);
    if (lu.isInvertible()) {
        out.z_part = lu.solve(out.d_part);
    }
    return out;
}

Eigen::MatrixXd standardizing_basis(const Eigen::MatrixXd& j) {
    const int n = static_cast<int>(j.rows()) / 2;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(j.cast<std::complex<double>>());
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("standardizing_basis: eigensolver failed");
    }

    // Gram-Schmidt inside the +i eigenspace keeps the vectors eigenvectors.
    Eigen::MatrixXcd plus(2 * n, n);
    int found = 0;
    for (int i = 0; i < 2 * n && found < n; ++i) {
        if (es.eigenvalues()(i).imag() <= 0.0) {
            continue;
        }
        Eigen::VectorXcd v = es.eigenvectors().col(i);
        for (int k = 0; k < found; ++k) {
            v -= plus.col(k).dot(v) * plus.col(k);
        }
        const double norm = v.norm();
        if (norm < 1e-12) {
            continue;
        }
        plus.col(found++) = v / norm;
    }
    if (found != n) {
        throw std::invalid_argument("standardizing_basis: J has no n-dimensional +i eigenspace");
    }

    Eigen::MatrixXd basis(2 * n, 2 * n);
    basis.leftCols(n) = plus.real();
    basis.rightCols(n) = plus.imag();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (!lu.isInvertible()) {
        throw std::invalid_argument("standardizing_basis: eigenvectors do not span");
    }
    return basis;
}

ComplexMatrix to_complex(const Eigen::MatrixXd& k) {
    const int n = static_cast<int>(k.rows()) / 2;
    Eigen::MatrixXd j_std = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    j_std.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
    j_std.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
    check_commutes(k, j_std);
    ComplexMatrix out;
    out.entries = k.topLeftCorner(n, n).cast<std::complex<double>>() +
        std::complex<double>(0.0, 1.0) * k.topRightCorner(n, n).cast<std::complex<double>>();
    return out;
}

ComplexMatrix to_complex(const Eigen::MatrixXd& k, const Eigen::MatrixXd& j) {
    check_commutes(k, j);
    if (is_standard_j(j)) {
        return to_complex(k);
    }
    const Eigen::MatrixXd basis = standardizing_basis(j);
    const Eigen::MatrixXd k_std = basis.partialPivLu().solve(k * basis);
    return to_complex(k_std);
}

Eigen::MatrixXd from_complex(const ComplexMatrix& k) {
    const int n = static_cast<int>(k.entries.rows());
    Eigen::MatrixXd out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = k.entries.real();
    out.topRightCorner(n, n) = k.entries.imag();
    out.bottomLeftCorner(n, n) = -k.entries.imag();
    out.bottomRightCorner(n, n) = k.entries.real();
    return out;
}

std::complex<double> det_bar(const Eigen::MatrixXd& k) {
    const int n = static_cast<int>(k.rows()) / 2;
    // Eigenvalue product rather than LU so per-eigenvalue phases stay
    // available to the phase assembly downstream.
    const Eigen::VectorXcd evs = complex_eigenvalues(to_complex(k).entries);
    std::complex<double> det = 1.0;
    for (int i = 0; i < n; ++i) {
        det *= evs(i);
    }
    return det;
}

std::complex<double> det_bar(const Eigen::MatrixXd& k, const Eigen::MatrixXd& j) {
    if (is_standard_j(j)) {
        return det_bar(k);
    }
    const Eigen::MatrixXd basis = standardizing_basis(j);
    return det_bar(basis.partialPivLu().solve(k * basis));
}

std::complex<double> tr_bar(const Eigen::MatrixXd& k) {
    return to_complex(k).entries.trace();
}

std::complex<double> tr_bar(const Eigen::MatrixXd& k, const Eigen::MatrixXd& j) {
    if (is_standard_j(j)) {
        return tr_bar(k);
    }
    const Eigen::MatrixXd basis = standardizing_basis(j);
    return tr_bar(basis.partialPivLu().solve(k * basis));
}

Eigen::VectorXcd bar_eigenvalues(const Eigen::MatrixXd& k, const Eigen::MatrixXd& j) {
    if (is_standard_j(j)) {
        return complex_eigenvalues(to_complex(k).entries);
    }
    const Eigen::MatrixXd basis = standardizing_basis(j);
    return complex_eigenvalues(to_complex(basis.partialPivLu().solve(k * basis)).entries);
}

Eigen::MatrixXd z_of(const Eigen::MatrixXd& m, const Eigen::MatrixXd& j,
                     double degenerate_tol) {
    const ComplexSplit parts = split(m, j);
    const std::complex<double> det = det_bar(parts.c_part, j);
    if (std::abs(det) < degenerate_tol) {
        throw FermionBoundaryError(
            fmt::format("z_of: C_M degenerate, |det-bar| = {:.3e}", std::abs(det)),
            std::abs(det));
    }
    return parts.c_part.partialPivLu().solve(parts.d_part);
}

}  // namespace metaspin
