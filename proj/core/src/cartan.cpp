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

#include "metaspin/cartan.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <fmt/format.h>

#include "metaspin/complexify.hpp"
#include "metaspin/errors.hpp"
#include "metaspin/matrix_functions.hpp"

namespace metaspin {

namespace {

bool is_identity_metric(const Eigen::MatrixXd& g) {
    return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).norm() < 1e-12;
}

}  // namespace

CartanFactors cartan_decompose(const GroupElement& m, const KahlerStructure& kahler) {
    CartanFactors out;
    out.delta = relative_complex_structure(m, kahler);

    if (m.statistics == Statistics::Fermion) {
        const double det = (Eigen::MatrixXd::Identity(out.delta.rows(), out.delta.cols()) +
                            out.delta).partialPivLu().determinant();
        if (std::abs(det) < kDegenerateTol) {
            throw FermionBoundaryError(
                fmt::format("cartan_decompose: det(1 + Delta) = {:.3e} at the boundary",
                            std::abs(det)),
                det);
        }
    }

    // Delta is self-adjoint (bosons) resp. orthogonal (fermions) in the
    // metric g. The Cholesky factor of g carries it to a matrix that is
    // exactly treatable by the symmetric resp. Schur-block routines.
    const bool plain = is_identity_metric(kahler.g_metric);
    Eigen::MatrixXd l;  // g = l l^T
    Eigen::MatrixXd b = out.delta;
    if (!plain) {
        Eigen::LLT<Eigen::MatrixXd> llt(kahler.g_metric);
        if (llt.info() != Eigen::Success) {
            throw std::invalid_argument("cartan_decompose: metric not positive definite");
        }
        l = llt.matrixL();
        b = l.transpose() * out.delta * l.transpose().fullPivLu().inverse();
    }
    b = (m.statistics == Statistics::Boson) ? ((b + b.transpose()) / 2.0).eval() : b;

    Eigen::MatrixXd sqrt_b;
    Eigen::MatrixXd log_b;
    if (m.statistics == Statistics::Boson) {
        sqrt_b = sqrt_spd(b);
        log_b = log_spd(b);
    } else {
        const OrthogonalFunctions funcs = orthogonal_sqrt_log(b, 0.0);
        sqrt_b = funcs.sqrt;
        log_b = funcs.log;
    }
    if (!plain) {
        const Eigen::MatrixXd lt_inv = l.transpose().fullPivLu().inverse();
        sqrt_b = lt_inv * sqrt_b * l.transpose();
        log_b = lt_inv * log_b * l.transpose();
    }

    out.t = sqrt_b;
    out.k_plus = log_b / 2.0;
    out.u = out.t.partialPivLu().solve(m.m);
    return out;
}

LieSplit lie_split(const LieGenerator& k, const KahlerStructure& kahler) {
    LieSplit out;
    out.k_minus = (k.k - kahler.j * k.k * kahler.j) / 2.0;
    out.k_plus = (k.k + kahler.j * k.k * kahler.j) / 2.0;
    return out;
}

InteriorCheck is_interior(const GroupElement& m, const KahlerStructure& kahler) {
    const Eigen::MatrixXd delta = relative_complex_structure(m, kahler);
    const double det = (Eigen::MatrixXd::Identity(delta.rows(), delta.cols()) + delta)
                           .partialPivLu().determinant();
    return InteriorCheck{std::abs(det) >= kDegenerateTol, std::abs(det)};
}

}  // namespace metaspin
