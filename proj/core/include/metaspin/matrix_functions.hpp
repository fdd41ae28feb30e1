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

#ifndef METASPIN_MATRIX_FUNCTIONS_HPP
#define METASPIN_MATRIX_FUNCTIONS_HPP

#include <complex>

#include <Eigen/Dense>

namespace metaspin {

/// Principal square root of a symmetric positive definite matrix.
Eigen::MatrixXd sqrt_spd(const Eigen::MatrixXd& a);

/// Principal logarithm of a symmetric positive definite matrix.
Eigen::MatrixXd log_spd(const Eigen::MatrixXd& a);

/// tanh of a symmetric matrix.
Eigen::MatrixXd tanh_symmetric(const Eigen::MatrixXd& a);

struct OrthogonalFunctions {
    Eigen::MatrixXd sqrt;  // principal square root, rotation angles halved
    Eigen::MatrixXd log;   // principal logarithm, antisymmetric
    double margin;         // pi minus the largest |rotation angle|
};

/// Principal square root and logarithm of a special orthogonal matrix,
/// computed blockwise on its real Schur form. The branch cut sits at
/// rotation angle pi; `margin` reports the distance to it. Throws
/// std::domain_error when an eigenvalue -1 is closer than min_margin.
OrthogonalFunctions orthogonal_sqrt_log(const Eigen::MatrixXd& q, double min_margin = 1e-12);

/// tanh of a real antisymmetric matrix (blockwise tan of rotation angles).
/// Requires all angles strictly inside (-pi/2, pi/2).
Eigen::MatrixXd tanh_antisymmetric(const Eigen::MatrixXd& a);

/// Eigenvalues of a complex matrix (no eigenvectors).
Eigen::VectorXcd complex_eigenvalues(const Eigen::MatrixXcd& a);

/// Argument in (-pi, pi] with values within `cut_tol` of the negative real
/// axis assigned +pi, matching the branch convention used by the cocycle.
double arg_principal_plus(std::complex<double> z, double cut_tol = 1e-10);

}  // namespace metaspin

#endif
