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

#ifndef METASPIN_KAHLER_HPP
#define METASPIN_KAHLER_HPP

#include <cstdint>

#include <Eigen/Dense>

#include "metaspin/statistics.hpp"

namespace metaspin {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Structural invariants (group membership, J^2 = -1, compatibility) are
// checked at this relative Frobenius tolerance.
inline constexpr double kStructuralTol = 1e-10;

/// Compatible triple (G, Omega, J) with the inverse forms (g, omega): the
/// metric, symplectic form, and complex structure of the phase space,
/// linked by J = Omega g = -G omega.
struct KahlerStructure {
    int n_modes = 0;
    Statistics statistics = Statistics::Boson;
    Matrix omega;      // symplectic form, upper indices
    Matrix g_metric;   // metric, upper indices
    Matrix j;          // complex structure
    Matrix omega_inv;  // omega with lower indices, Omega * omega_inv = 1
    Matrix g_inv;      // g with lower indices, G * g_inv = 1

    /// The kinematic invariant: Omega for bosons, G for fermions.
    const Matrix& form() const { return statistics == Statistics::Boson ? omega : g_metric; }

    /// Lower-index inverse of form().
    const Matrix& form_inv() const { return statistics == Statistics::Boson ? omega_inv : g_inv; }

    /// Throws std::invalid_argument when any structural invariant fails.
    void validate() const;
};

/// Coefficient matrix h of a quadratic Hamiltonian: symmetric for bosons,
/// antisymmetric for fermions.
struct QuadraticHamiltonian {
    Matrix h;
    Statistics statistics = Statistics::Boson;
};

/// Lie algebra element K with K Omega = -Omega K^T (bosons) or
/// K G = -G K^T (fermions).
struct LieGenerator {
    Matrix k;
    Statistics statistics = Statistics::Boson;
};

/// Group element M with M Omega M^T = Omega (bosons) or M G M^T = G
/// (fermions) and det M = 1.
struct GroupElement {
    Matrix m;
    Statistics statistics = Statistics::Boson;
};

/// Standard basis forms in the (q_1..q_N, p_1..p_N) ordering:
/// Omega = [[0, 1], [-1, 0]], G = 1, J = [[0, 1], [-1, 0]].
KahlerStructure standard_kahler(int n_modes, Statistics statistics);

/// Validating constructors. Each rejects inputs violating the type's
/// invariant instead of repairing them.
QuadraticHamiltonian make_quadratic_hamiltonian(Matrix h, Statistics statistics);
LieGenerator make_lie_generator(Matrix k, const KahlerStructure& kahler);
GroupElement make_group_element(Matrix m, const KahlerStructure& kahler);

bool is_in_algebra(const Matrix& k, const KahlerStructure& kahler, double tol = kStructuralTol);
bool is_in_group(const Matrix& m, const KahlerStructure& kahler, double tol = kStructuralTol);

/// K = Omega h (bosons) or K = G h (fermions).
LieGenerator generator_from_hamiltonian(const QuadraticHamiltonian& h, const KahlerStructure& kahler);

/// h = omega K (bosons) or h = g K (fermions); inverse of the above.
QuadraticHamiltonian hamiltonian_from_generator(const LieGenerator& k, const KahlerStructure& kahler);

/// Deterministic random algebra element. Entries of h are drawn i.i.d.
/// normal(0, scale) and (anti)symmetrized, so the algebra constraint holds
/// by construction.
LieGenerator random_generator(int n_modes, Statistics statistics, std::uint64_t seed, double scale);

/// Group exponential M = exp(K).
GroupElement group_exponential(const LieGenerator& k);

/// Inverse through the kinematic form, M^{-1} = F M^T f. Exact on group
/// elements, no linear solve involved.
GroupElement group_inverse(const GroupElement& m, const KahlerStructure& kahler);

/// Relative complex structure Delta_M = -M J M^{-1} J.
Matrix relative_complex_structure(const GroupElement& m, const KahlerStructure& kahler);

}  // namespace metaspin

#endif
