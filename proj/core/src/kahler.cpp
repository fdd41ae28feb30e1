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

#include "metaspin/kahler.hpp"

#include <random>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "metaspin/errors.hpp"

namespace metaspin {

namespace {

double relative_deviation(const Matrix& residual, const Matrix& reference) {
    double scale = std::max(1.0, reference.norm());
    return residual.norm() / scale;
}

}  // namespace

Statistics statistics_from_string(std::string_view name) {
    if (name == "boson") return Statistics::Boson;
    if (name == "fermion") return Statistics::Fermion;
    throw std::invalid_argument(
        fmt::format("unknown statistics '{}', expected 'boson' or 'fermion'", name));
}

void KahlerStructure::validate() const {
    if (n_modes < 1) {
        throw std::invalid_argument(fmt::format("n_modes must be positive, got {}", n_modes));
    }
    const int d = 2 * n_modes;
    for (const Matrix* m : {&omega, &g_metric, &j, &omega_inv, &g_inv}) {
        if (m->rows() != d || m->cols() != d) {
            throw std::invalid_argument(fmt::format(
                "Kahler matrices must be {}x{}, got {}x{}", d, d, m->rows(), m->cols()));
        }
    }
    const Matrix identity = Matrix::Identity(d, d);
    if (relative_deviation(j * j + identity, identity) > kStructuralTol) {
        throw std::invalid_argument("J^2 = -1 violated");
    }
    if (relative_deviation(omega * omega_inv - identity, identity) > kStructuralTol) {
        throw std::invalid_argument("Omega omega != 1");
    }
    if (relative_deviation(g_metric * g_inv - identity, identity) > kStructuralTol) {
        throw std::invalid_argument("G g != 1");
    }
    if (statistics == Statistics::Boson) {
        if (relative_deviation(j * omega * j.transpose() - omega, omega) > kStructuralTol) {
            throw std::invalid_argument("J Omega J^T = Omega violated");
        }
        // -J Omega must be positive definite (it is the metric G).
        Eigen::SelfAdjointEigenSolver<Matrix> es(-j * omega);
        if (es.eigenvalues().minCoeff() <= 0.0) {
            throw std::invalid_argument("-J Omega is not positive definite");
        }
    } else {
        if (relative_deviation(j * g_metric * j.transpose() - g_metric, g_metric) >
            kStructuralTol) {
            throw std::invalid_argument("J G J^T = G violated");
        }
    }
    // Triangle relation: J = Omega g and J = -G omega. The derived form is
    // recomputed from the stored pair, never trusted independently.
    if (relative_deviation(omega * g_inv - j, j) > kStructuralTol) {
        throw std::invalid_argument("J = Omega g violated");
    }
    if (relative_deviation(-g_metric * omega_inv - j, j) > kStructuralTol) {
        throw std::invalid_argument("J = -G omega violated");
    }
}

KahlerStructure standard_kahler(int n_modes, Statistics statistics) {
    if (n_modes < 1) {
        throw std::invalid_argument(fmt::format("n_modes must be positive, got {}", n_modes));
    }
    const int n = n_modes;
    const int d = 2 * n;
    Matrix block = Matrix::Zero(d, d);
    block.topRightCorner(n, n) = Matrix::Identity(n, n);
    block.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);

    KahlerStructure kahler;
    kahler.n_modes = n;
    kahler.statistics = statistics;
    kahler.omega = block;
    kahler.omega_inv = -block;  // omega = Omega^{-1} = -Omega in the standard basis
    kahler.g_metric = Matrix::Identity(d, d);
    kahler.g_inv = Matrix::Identity(d, d);
    kahler.j = block;
    kahler.validate();
    return kahler;
}

bool is_in_algebra(const Matrix& k, const KahlerStructure& kahler, double tol) {
    const Matrix& form = kahler.form();
    return relative_deviation(k * form + form * k.transpose(), form) <=
           tol * std::max(1.0, k.norm());
}

bool is_in_group(const Matrix& m, const KahlerStructure& kahler, double tol) {
    const Matrix& form = kahler.form();
    double scaled_tol = tol * std::max(1.0, m.norm() * m.norm());
    if (relative_deviation(m * form * m.transpose() - form, form) > scaled_tol) return false;
    return std::abs(m.determinant() - 1.0) <= scaled_tol * 100.0;
}

QuadraticHamiltonian make_quadratic_hamiltonian(Matrix h, Statistics statistics) {
    double sign = statistics == Statistics::Boson ? -1.0 : 1.0;
    Matrix residual = h + sign * h.transpose();
    if (relative_deviation(residual, h) > kStructuralTol) {
        throw std::invalid_argument(fmt::format(
            "Hamiltonian coefficient matrix must be {} ({} statistics), deviation {:.3e}",
            statistics == Statistics::Boson ? "symmetric" : "antisymmetric",
            to_string(statistics), residual.norm()));
    }
    return QuadraticHamiltonian{std::move(h), statistics};
}

LieGenerator make_lie_generator(Matrix k, const KahlerStructure& kahler) {
    if (!is_in_algebra(k, kahler)) {
        throw std::invalid_argument("matrix is not in the Lie algebra of the kinematic form");
    }
    return LieGenerator{std::move(k), kahler.statistics};
}

GroupElement make_group_element(Matrix m, const KahlerStructure& kahler) {
    if (!is_in_group(m, kahler, 1e-8)) {
        throw std::invalid_argument("matrix does not preserve the kinematic form");
    }
    return GroupElement{std::move(m), kahler.statistics};
}

LieGenerator generator_from_hamiltonian(const QuadraticHamiltonian& h,
                                        const KahlerStructure& kahler) {
    // Re-check symmetry: callers may have aggregate-built the input.
    QuadraticHamiltonian checked = make_quadratic_hamiltonian(h.h, h.statistics);
    Matrix k = kahler.form() * checked.h;
    return LieGenerator{std::move(k), kahler.statistics};
}

QuadraticHamiltonian hamiltonian_from_generator(const LieGenerator& k,
                                                const KahlerStructure& kahler) {
    Matrix h = kahler.form_inv() * k.k;
    return QuadraticHamiltonian{std::move(h), kahler.statistics};
}

LieGenerator random_generator(int n_modes, Statistics statistics, std::uint64_t seed,
                              double scale) {
    if (scale <= 0.0) {
        throw std::invalid_argument(fmt::format("scale must be positive, got {}", scale));
    }
    const int d = 2 * n_modes;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    Matrix raw(d, d);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
            raw(r, c) = normal(rng);
        }
    }
    // Projecting h instead of K keeps the algebra constraint exact.
    Matrix h = statistics == Statistics::Boson ? Matrix((raw + raw.transpose()) / 2.0)
                                               : Matrix((raw - raw.transpose()) / 2.0);
    KahlerStructure kahler = standard_kahler(n_modes, statistics);
    return LieGenerator{kahler.form() * h, statistics};
}

GroupElement group_exponential(const LieGenerator& k) {
    return GroupElement{k.k.exp(), k.statistics};
}

GroupElement group_inverse(const GroupElement& m, const KahlerStructure& kahler) {
    return GroupElement{kahler.form() * m.m.transpose() * kahler.form_inv(), m.statistics};
}

Matrix relative_complex_structure(const GroupElement& m, const KahlerStructure& kahler) {
    Eigen::FullPivLU<Matrix> lu(m.m);
    if (!lu.isInvertible()) {
        throw std::invalid_argument("group element matrix is singular");
    }
    return -m.m * kahler.j * lu.inverse() * kahler.j;
}

}  // namespace metaspin
