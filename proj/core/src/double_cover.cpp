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

#include "metaspin/double_cover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <fmt/format.h>

#include "metaspin/cartan.hpp"
#include "metaspin/circle_cocycle.hpp"
#include "metaspin/complexify.hpp"
#include "metaspin/errors.hpp"
#include "metaspin/matrix_functions.hpp"

namespace metaspin {

namespace {

constexpr double kReferenceTol = 1e-12;
constexpr double kDriftTol = 1e-10;
constexpr double kRepairTarget = 1e-6;
constexpr double kRepairScale = 0.3;
constexpr int kRepairRetries = 16;

bool references_match(const KahlerStructure& a, const KahlerStructure& b) {
    return a.statistics == b.statistics && a.n_modes == b.n_modes &&
           (a.j - b.j).norm() < kReferenceTol * std::max(1.0, a.j.norm()) &&
           (a.form() - b.form()).norm() < kReferenceTol * std::max(1.0, a.form().norm());
}

// One symmetrization step back onto the form-preserving manifold. Exact on
// group elements, first-order contraction on drifted ones.
Matrix project_to_group(const Matrix& m, const KahlerStructure& kahler) {
    const Matrix m_inv_t = m.transpose().partialPivLu()
                               .solve(Matrix::Identity(m.rows(), m.cols()));
    return (m + kahler.form() * m_inv_t * kahler.form_inv()) / 2.0;
}

/// T = sqrt(-J_new J_old), the radial factor carrying J_old to J_new.
Matrix migration_radial(const KahlerStructure& from, const KahlerStructure& target) {
    const Matrix a = -target.j * from.j;
    const int d = static_cast<int>(a.rows());
    if (from.statistics == Statistics::Fermion) {
        const double det = (Matrix::Identity(d, d) + a).partialPivLu().determinant();
        if (std::abs(det) < kDegenerateTol) {
            throw DegeneratePairError(fmt::format(
                "migrate_reference: det(1 - J_new J) = {:.3e}, structures antipodal",
                std::abs(det)));
        }
    }

    const bool plain =
        (from.g_metric - Matrix::Identity(d, d)).norm() < 1e-12;
    if (plain) {
        if (from.statistics == Statistics::Boson) {
            return sqrt_spd((a + a.transpose()) / 2.0);
        }
        return orthogonal_sqrt_log(a, 0.0).sqrt;
    }
    Eigen::LLT<Matrix> llt(from.g_metric);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("migrate_reference: metric not positive definite");
    }
    const Matrix l = llt.matrixL();
    const Matrix lt_inv = l.transpose().fullPivLu().inverse();
    Matrix b = l.transpose() * a * lt_inv;
    Matrix sqrt_b;
    if (from.statistics == Statistics::Boson) {
        sqrt_b = sqrt_spd((b + b.transpose()) / 2.0);
    } else {
        sqrt_b = orthogonal_sqrt_log(b, 0.0).sqrt;
    }
    return lt_inv * sqrt_b * l.transpose();
}

}  // namespace

KahlerStructure with_complex_structure(const KahlerStructure& base, const Matrix& new_j) {
    KahlerStructure out = base;
    out.j = new_j;
    if (base.statistics == Statistics::Boson) {
        // J = Omega g fixes the metric.
        out.g_inv = base.omega_inv * new_j;
        Eigen::FullPivLU<Matrix> lu(out.g_inv);
        if (!lu.isInvertible()) {
            throw InvalidTargetError("with_complex_structure: omega J is singular");
        }
        out.g_metric = lu.inverse();
    } else {
        // J = -G omega fixes the symplectic form.
        out.omega_inv = -base.g_inv * new_j;
        Eigen::FullPivLU<Matrix> lu(out.omega_inv);
        if (!lu.isInvertible()) {
            throw InvalidTargetError("with_complex_structure: g J is singular");
        }
        out.omega = lu.inverse();
    }
    try {
        out.validate();
    } catch (const std::invalid_argument& err) {
        throw InvalidTargetError(fmt::format(
            "with_complex_structure: incompatible complex structure ({})", err.what()));
    }
    return out;
}

CoverElement lift(const GroupElement& m, int sheet, const KahlerStructure& kahler) {
    if (sheet != 1 && sheet != -1) {
        throw std::invalid_argument(fmt::format("lift: sheet must be +1 or -1, got {}", sheet));
    }
    const CirclePhase phi = circle(m, kahler);
    const std::complex<double> root = std::polar(1.0, std::arg(phi.value) / 2.0);
    return CoverElement{m, static_cast<double>(sheet) * root, kahler};
}

CoverElement multiply(const CoverElement& a, const CoverElement& b) {
    if (a.m.statistics != b.m.statistics || !references_match(a.reference, b.reference)) {
        throw ReferenceMismatchError(
            "multiply: cover elements anchored at different references");
    }
    const std::complex<double> half = half_cocycle_phase(a.m, b.m, a.reference);

    Matrix product = a.m.m * b.m.m;
    const Matrix& form = a.reference.form();
    const double drift =
        (product * form * product.transpose() - form).norm() / std::max(1.0, form.norm());
    if (drift > kDriftTol) {
        product = project_to_group(product, a.reference);
    }

    std::complex<double> psi = a.psi * b.psi * half;
    psi /= std::abs(psi);
    return CoverElement{GroupElement{std::move(product), a.m.statistics}, psi, a.reference};
}

CoverElement inverse(const CoverElement& a) {
    return CoverElement{group_inverse(a.m, a.reference), std::conj(a.psi), a.reference};
}

CoverElement migrate_reference(const CoverElement& a, const KahlerStructure& target) {
    if (target.statistics != a.reference.statistics || target.n_modes != a.reference.n_modes ||
        (target.form() - a.reference.form()).norm() >
            1e-10 * std::max(1.0, a.reference.form().norm())) {
        throw InvalidTargetError(
            "migrate_reference: target must share the kinematic form of the source");
    }
    if (references_match(a.reference, target)) {
        return CoverElement{a.m, a.psi, target};
    }

    const Matrix t = migration_radial(a.reference, target);
    const GroupElement t_elem{t, a.m.statistics};
    const GroupElement t_inv = group_inverse(t_elem, a.reference);
    const GroupElement t_inv_m{t_inv.m * a.m.m, a.m.statistics};

    const double eta1 = cocycle(t_inv, a.m, a.reference).eta;
    const double eta2 = cocycle(t_inv_m, t_elem, a.reference).eta;
    std::complex<double> psi = a.psi * std::polar(1.0, (eta1 + eta2) / 2.0);
    psi /= std::abs(psi);
    return CoverElement{a.m, psi, target};
}

namespace {

// Orthonormal basis of the near-(-1) invariant subspace of an orthogonal
// Delta, from the Schur blocks with rotation angle close to pi.
Matrix boundary_subspace(const Matrix& delta) {
    const int d = static_cast<int>(delta.rows());
    Eigen::RealSchur<Matrix> schur(delta);
    const Matrix& t = schur.matrixT();
    const Matrix& u = schur.matrixU();
    std::vector<int> columns;
    int i = 0;
    while (i < d) {
        if (i + 1 < d && t(i + 1, i) != 0.0) {
            const double c = (t(i, i) + t(i + 1, i + 1)) / 2.0;
            const double s = (t(i + 1, i) - t(i, i + 1)) / 2.0;
            if (std::abs(std::atan2(s, c)) > 3.14159265358979323846 - 0.5) {
                columns.push_back(i);
                columns.push_back(i + 1);
            }
            i += 2;
        } else {
            if (t(i, i) < 0.0) {
                columns.push_back(i);
            }
            i += 1;
        }
    }
    Matrix v(d, static_cast<int>(columns.size()));
    for (int k = 0; k < static_cast<int>(columns.size()); ++k) {
        v.col(k) = u.col(columns[k]);
    }
    return v;
}

// Perturbation direction for one offending element: the quasi-diagonal
// alternating-rotation direction inside the degenerate block, which is
// guaranteed to move eigenvalue pairs off -1. Two-dimensional blocks have
// no such interior direction and mix with the complement instead.
Matrix perturbation_direction(const Matrix& delta, const Matrix& j) {
    const int d = static_cast<int>(delta.rows());
    const Matrix v = boundary_subspace(delta);
    const int dim = static_cast<int>(v.cols());
    if (dim == 0) {
        return Matrix::Zero(d, d);
    }

    // J-adapted frame (x_1..x_m, y_k = -J x_k) inside the subspace.
    const int m = dim / 2;
    Matrix frame(d, 2 * m);
    int have = 0;
    for (int k = 0; k < dim && have < m; ++k) {
        Vector x = v.col(k);
        for (int p = 0; p < 2 * have; ++p) {
            x -= frame.col(p).dot(x) * frame.col(p);
        }
        if (x.norm() < 1e-8) {
            continue;
        }
        x.normalize();
        Vector y = -j * x;
        for (int p = 0; p < 2 * have; ++p) {
            y -= frame.col(p).dot(y) * frame.col(p);
        }
        y -= x.dot(y) * x;
        if (y.norm() < 1e-8) {
            continue;
        }
        y.normalize();
        frame.col(2 * have) = x;
        frame.col(2 * have + 1) = y;
        ++have;
    }

    Matrix direction = Matrix::Zero(d, d);
    if (have >= 2) {
        for (int k = 0; k + 1 < 2 * have; k += 2) {
            const int sign = (k % 4 == 0) ? 1 : -1;
            const Vector& x1 = frame.col(k);
            const Vector& x2 = frame.col((k + 2) % (2 * have));
            const Vector& y1 = frame.col(k + 1);
            const Vector& y2 = frame.col((k + 3) % (2 * have));
            direction += sign * (x1 * x2.transpose() - x2 * x1.transpose());
            direction -= sign * (y1 * y2.transpose() - y2 * y1.transpose());
        }
    } else if (have == 1) {
        // Mix the pair with the complement.
        Vector z = Vector::Zero(d);
        for (int c = 0; c < d; ++c) {
            z = Vector::Unit(d, c);
            for (int p = 0; p < 2; ++p) {
                z -= frame.col(p).dot(z) * frame.col(p);
            }
            if (z.norm() > 0.5) {
                break;
            }
        }
        z.normalize();
        direction = frame.col(0) * z.transpose() - z * frame.col(0).transpose();
    }
    return direction;
}

// Antisymmetric in the metric g, for the polar projection below.
Matrix random_direction(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix raw(d, d);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
            raw(r, c) = normal(rng);
        }
    }
    return (raw - raw.transpose()) / 2.0;
}

// Nearest complex structure to an antisymmetric candidate: the orthogonal
// polar factor of an antisymmetric matrix squares to -1.
Matrix polar_complex_structure(const Matrix& candidate) {
    const Matrix b = sqrt_spd(-candidate * candidate);
    return candidate * b.fullPivLu().inverse();
}

double repair_margin(const std::vector<CoverElement>& elements,
                     const KahlerStructure& kahler) {
    double margin = std::numeric_limits<double>::max();
    const auto consider = [&](const GroupElement& g) {
        margin = std::min(margin, is_interior(g, kahler).margin);
    };
    for (std::size_t i = 0; i < elements.size(); ++i) {
        consider(elements[i].m);
        for (std::size_t k = 0; k < elements.size(); ++k) {
            if (i == k) {
                continue;
            }
            consider(GroupElement{elements[i].m.m * elements[k].m.m,
                                  elements[i].m.statistics});
            consider(GroupElement{group_inverse(elements[i].m, kahler).m * elements[k].m.m,
                                  elements[i].m.statistics});
        }
    }
    return margin;
}

}  // namespace

RepairResult repair_reference(const std::vector<CoverElement>& elements, std::uint64_t seed) {
    if (elements.empty()) {
        throw std::invalid_argument("repair_reference: empty element list");
    }
    for (const CoverElement& e : elements) {
        if (e.m.statistics != Statistics::Fermion) {
            throw std::invalid_argument("repair_reference: fermionic statistics required");
        }
        if (!references_match(e.reference, elements.front().reference)) {
            throw ReferenceMismatchError("repair_reference: elements must share a reference");
        }
    }
    const KahlerStructure& base = elements.front().reference;
    const int d = 2 * base.n_modes;

    if (repair_margin(elements, base) >= kRepairTarget) {
        return RepairResult{base, elements};
    }

    // Deterministic direction from the degenerate blocks, then seeded
    // random rotations as fallback.
    Matrix direction = Matrix::Zero(d, d);
    for (const CoverElement& e : elements) {
        const InteriorCheck check = is_interior(e.m, base);
        if (check.margin < kRepairTarget) {
            direction += perturbation_direction(
                relative_complex_structure(e.m, base), base.j);
        }
    }

    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < kRepairRetries; ++attempt) {
        if (attempt > 0 || direction.norm() < 1e-12) {
            direction = random_direction(d, rng);
        }
        const Matrix scaled = direction * (kRepairScale / direction.operatorNorm());
        try {
            // Two hops: a short step first so the migration cocycles stay
            // well inside their admissible region near the boundary.
            const KahlerStructure mid = with_complex_structure(
                base, polar_complex_structure(base.j + 0.1 * scaled));
            const KahlerStructure full = with_complex_structure(
                base, polar_complex_structure(base.j + scaled));
            if (repair_margin(elements, full) < kRepairTarget) {
                continue;
            }
            std::vector<CoverElement> migrated;
            migrated.reserve(elements.size());
            for (const CoverElement& e : elements) {
                migrated.push_back(migrate_reference(migrate_reference(e, mid), full));
            }
            return RepairResult{full, std::move(migrated)};
        } catch (const Error&) {
            continue;
        } catch (const std::domain_error&) {
            continue;
        }
    }
    throw RepairFailedError(fmt::format(
        "repair_reference: no admissible complex structure found after {} attempts",
        kRepairRetries));
}

}  // namespace metaspin
