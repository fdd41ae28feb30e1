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

#ifndef METASPIN_CIRCLE_COCYCLE_HPP
#define METASPIN_CIRCLE_COCYCLE_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "metaspin/complexify.hpp"
#include "metaspin/kahler.hpp"

namespace metaspin {

struct CirclePhase {
    std::complex<double> value;  // unit modulus
    double margin;               // |det-bar C_M| before normalization
};

struct CocycleValue {
    double eta;                     // sum of eigen_args
    std::vector<double> eigen_args; // N arguments, each in (-pi, pi]
    double margin;                  // smallest determinant magnitude met
};

/// phi(M) = det-bar(C_M) / |det-bar(C_M)|.
CirclePhase circle(const GroupElement& m, const KahlerStructure& kahler);

/// eta(M1, M2) = Im tr-bar log(1 - Z_{M1} Z_{M2^{-1}}), assembled from the
/// per-eigenvalue arguments so sheet information survives. Eigenvalues on
/// the negative real axis take argument +pi; conjugate pairs straddling the
/// cut are symmetrized to contribute zero. Determinant magnitudes below
/// degenerate_tol raise DegeneratePairError.
CocycleValue cocycle(const GroupElement& m1, const GroupElement& m2,
                     const KahlerStructure& kahler, double degenerate_tol = kDegenerateTol);

/// e^{i eta / 2}, the only form downstream phase bookkeeping consumes.
std::complex<double> half_cocycle_phase(const GroupElement& m1, const GroupElement& m2,
                                        const KahlerStructure& kahler);

}  // namespace metaspin

#endif
