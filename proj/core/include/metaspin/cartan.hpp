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

#ifndef METASPIN_CARTAN_HPP
#define METASPIN_CARTAN_HPP

#include <Eigen/Dense>

#include "metaspin/kahler.hpp"

namespace metaspin {

struct CartanFactors {
    Eigen::MatrixXd t;       // radial factor, T^2 = delta
    Eigen::MatrixXd u;       // commutes with J
    Eigen::MatrixXd k_plus;  // anticommutes with J, exp(k_plus) = t
    Eigen::MatrixXd delta;   // -M J M^{-1} J
};

struct LieSplit {
    Eigen::MatrixXd k_minus;  // commutes with J
    Eigen::MatrixXd k_plus;   // anticommutes with J
};

struct InteriorCheck {
    bool interior;
    double margin;  // |det(1 + delta)|
};

/// Canonical decomposition M = T u with T = sqrt(Delta_M), u = T^{-1} M.
/// Fermionic elements with |det(1 + Delta_M)| below threshold are refused
/// with FermionBoundaryError carrying the determinant.
CartanFactors cartan_decompose(const GroupElement& m, const KahlerStructure& kahler);

LieSplit lie_split(const LieGenerator& k, const KahlerStructure& kahler);

InteriorCheck is_interior(const GroupElement& m, const KahlerStructure& kahler);

}  // namespace metaspin

#endif
