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

#ifndef METASPIN_COMPLEXIFY_HPP
#define METASPIN_COMPLEXIFY_HPP

#include <complex>
#include <optional>

#include <Eigen/Dense>

#include "metaspin/kahler.hpp"

namespace metaspin {

/// Split of a real matrix into its J-commuting and J-anticommuting parts.
struct ComplexSplit {
    Eigen::MatrixXd c_part;                  // commutes with J
    Eigen::MatrixXd d_part;                  // anticommutes with J
    std::optional<Eigen::MatrixXd> z_part;   // C^{-1} D when C is invertible
};

/// N x N complex matrix identified with a J-commuting real 2N x 2N matrix.
struct ComplexMatrix {
    Eigen::MatrixXcd entries;
};

/// Relative tolerance on ||KJ - JK|| accepted before complexification.
inline constexpr double kCommutationTol = 1e-9;

/// Determinant magnitude below which a map counts as degenerate. Shared
/// with the Cartan boundary classification so error taxonomies align.
inline constexpr double kDegenerateTol = 1e-8;

ComplexSplit split(const Eigen::MatrixXd& m, const Eigen::MatrixXd& j);

/// Basis with columns (a_1..a_N, b_1..b_N) built from the +i eigenvectors
/// a_k + i b_k of J, so that basis^{-1} J basis is the standard J.
Eigen::MatrixXd standardizing_basis(const Eigen::MatrixXd& j);

ComplexMatrix to_complex(const Eigen::MatrixXd& k);
ComplexMatrix to_complex(const Eigen::MatrixXd& k, const Eigen::MatrixXd& j);

/// Inverse of to_complex for the standard J.
Eigen::MatrixXd from_complex(const ComplexMatrix& k);

std::complex<double> det_bar(const Eigen::MatrixXd& k);
std::complex<double> det_bar(const Eigen::MatrixXd& k, const Eigen::MatrixXd& j);
std::complex<double> tr_bar(const Eigen::MatrixXd& k);
std::complex<double> tr_bar(const Eigen::MatrixXd& k, const Eigen::MatrixXd& j);

/// Eigenvalues of the complexified matrix (N values, half the real spectrum).
Eigen::VectorXcd bar_eigenvalues(const Eigen::MatrixXd& k, const Eigen::MatrixXd& j);

/// Z_M = C_M^{-1} D_M. Throws FermionBoundaryError when C_M is degenerate.
Eigen::MatrixXd z_of(const Eigen::MatrixXd& m, const Eigen::MatrixXd& j,
                     double degenerate_tol = kDegenerateTol);

}  // namespace metaspin

#endif
