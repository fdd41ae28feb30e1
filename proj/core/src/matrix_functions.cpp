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

#include "metaspin/matrix_functions.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace metaspin {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Positions of the diagonal blocks of a quasi-triangular real Schur form.
// Eigen zeroes negligible subdiagonal entries exactly.
std::vector<std::pair<int, int>> schur_blocks(const Eigen::MatrixXd& t) {
    const int n = static_cast<int>(t.rows());
    std::vector<std::pair<int, int>> blocks;
    int i = 0;
    while (i < n) {
        if (i + 1 < n && t(i + 1, i) != 0.0) {
            blocks.emplace_back(i, 2);
            i += 2;
        } else {
            blocks.emplace_back(i, 1);
            i += 1;
        }
    }
    return blocks;
}

}  // namespace

Eigen::MatrixXd sqrt_spd(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("sqrt_spd: eigendecomposition failed");
    }
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw std::domain_error(fmt::format(
            "sqrt_spd: matrix not positive definite, smallest eigenvalue {:.3e}",
            es.eigenvalues().minCoeff()));
    }
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
        es.eigenvectors().transpose();
}

Eigen::MatrixXd log_spd(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("log_spd: eigendecomposition failed");
    }
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw std::domain_error(fmt::format(
            "log_spd: matrix not positive definite, smallest eigenvalue {:.3e}",
            es.eigenvalues().minCoeff()));
    }
    return es.eigenvectors() * es.eigenvalues().array().log().matrix().asDiagonal() *
        es.eigenvectors().transpose();
}

Eigen::MatrixXd tanh_symmetric(const Eigen::MatrixXd& a) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("tanh_symmetric: eigendecomposition failed");
    }
    return es.eigenvectors() * es.eigenvalues().array().tanh().matrix().asDiagonal() *
        es.eigenvectors().transpose();
}

OrthogonalFunctions orthogonal_sqrt_log(const Eigen::MatrixXd& q, double min_margin) {
    const int n = static_cast<int>(q.rows());
    Eigen::RealSchur<Eigen::MatrixXd> schur(q);
    if (schur.info() != Eigen::Success) {
        throw std::runtime_error("orthogonal_sqrt_log: Schur decomposition failed");
    }
    const Eigen::MatrixXd& t = schur.matrixT();
    const Eigen::MatrixXd& u = schur.matrixU();

    // An orthogonal quasi-triangular matrix is block diagonal: 2x2 rotation
    // blocks and 1x1 entries +-1. Eigenvalues -1 surface either as a block
    // with angle pi or as paired 1x1 entries; both sit on the branch cut.
    Eigen::MatrixXd sqrt_t = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd log_t = Eigen::MatrixXd::Zero(n, n);
    double max_angle = 0.0;
    std::vector<int> negatives;
    for (const auto& [start, size] : schur_blocks(t)) {
        if (size == 1) {
            if (t(start, start) > 0.0) {
                sqrt_t(start, start) = 1.0;
            } else {
                negatives.push_back(start);
            }
            continue;
        }
        const double c = (t(start, start) + t(start + 1, start + 1)) / 2.0;
        const double s = (t(start + 1, start) - t(start, start + 1)) / 2.0;
        const double theta = std::atan2(s, c);
        max_angle = std::max(max_angle, std::abs(theta));
        const double ch = std::cos(theta / 2.0);
        const double sh = std::sin(theta / 2.0);
        sqrt_t(start, start) = ch;
        sqrt_t(start + 1, start + 1) = ch;
        sqrt_t(start + 1, start) = sh;
        sqrt_t(start, start + 1) = -sh;
        log_t(start + 1, start) = theta;
        log_t(start, start + 1) = -theta;
    }
    if (!negatives.empty()) {
        max_angle = kPi;
    }

    const double margin = kPi - max_angle;
    if (margin < min_margin) {
        throw std::domain_error(fmt::format(
            "orthogonal_sqrt_log: rotation angle within {:.3e} of the branch cut at pi",
            margin));
    }
    return OrthogonalFunctions{
        u * sqrt_t * u.transpose(),
        u * log_t * u.transpose(),
        margin,
    };
}

Eigen::MatrixXd tanh_antisymmetric(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    Eigen::RealSchur<Eigen::MatrixXd> schur(a);
    if (schur.info() != Eigen::Success) {
        throw std::runtime_error("tanh_antisymmetric: Schur decomposition failed");
    }
    const Eigen::MatrixXd& t = schur.matrixT();
    const Eigen::MatrixXd& u = schur.matrixU();

    Eigen::MatrixXd tanh_t = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [start, size] : schur_blocks(t)) {
        if (size == 1) {
            continue;
        }
        const double kappa = (t(start + 1, start) - t(start, start + 1)) / 2.0;
        if (std::abs(kappa) >= kPi / 2.0) {
            throw std::domain_error(fmt::format(
                "tanh_antisymmetric: angle {:.6f} outside (-pi/2, pi/2)", kappa));
        }
        const double tk = std::tan(kappa);
        tanh_t(start + 1, start) = tk;
        tanh_t(start, start + 1) = -tk;
    }
    return u * tanh_t * u.transpose();
}

Eigen::VectorXcd complex_eigenvalues(const Eigen::MatrixXcd& a) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(a, false);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("complex_eigenvalues: eigensolver failed");
    }
    return es.eigenvalues();
}

double arg_principal_plus(std::complex<double> z, double cut_tol) {
    if (std::abs(z.imag()) <= cut_tol * std::abs(z) && z.real() < 0.0) {
        return kPi;
    }
    return std::arg(z);
}

}  // namespace metaspin
