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

#ifndef METASPIN_EXPECTATION_HPP
#define METASPIN_EXPECTATION_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "metaspin/double_cover.hpp"
#include "metaspin/kahler.hpp"

namespace metaspin {

struct ExpectationValue {
    double modulus = 0.0;
    double phase = 0.0;  // radians in (-pi, pi]; meaningful only when defined
    std::complex<double> squared{0.0, 0.0};
    bool defined = false;
};

struct TrajectoryPoint {
    double t = 0.0;
    ExpectationValue value;
    double phase_unwrapped = 0.0;  // NaN when the point is undefined
    double phase_naive = 0.0;      // half the principal argument of squared
};

/// Squared vacuum amplitude of the group element: 1/det-bar(C_M) for bosons,
/// det-bar(C_M) for fermions.
std::complex<double> expectation_squared(const GroupElement& m, const KahlerStructure& kahler);

/// |amplitude| = det^{-1/4}(C_M) for bosons, det^{+1/4}(C_M) for fermions,
/// with the plain real determinant.
double expectation_modulus(const GroupElement& m, const KahlerStructure& kahler);

/// Amplitude of a cover element against its own reference vacuum: the phase
/// conventions make it D(M) psi* for bosons and D(M) psi for fermions.
std::complex<double> vacuum_expectation(const CoverElement& element);

/// Full complex amplitude of exp(K) for a bosonic generator, assembled from
/// the Jordan-Chevalley split and the rescaled normal-form structure.
/// Requires the standard Kahler structure.
ExpectationValue phase_boson(const LieGenerator& k, const KahlerStructure& kahler);

/// Full complex amplitude of exp(K) for a fermionic generator, via a complex
/// structure commuting with K. Requires the standard Kahler structure. When
/// the modulus vanishes the result carries defined = false.
ExpectationValue phase_fermion(const LieGenerator& k, const KahlerStructure& kahler);

/// Dispatch on statistics.
ExpectationValue exponential_phase(const LieGenerator& k, const KahlerStructure& kahler);

/// Complex structure commuting with an antisymmetric generator, built from
/// its rotation planes with per-plane signs flipped until det(1 + Delta)
/// clears 1e-6.
Eigen::MatrixXd fermion_commuting_structure(const LieGenerator& k,
                                            const KahlerStructure& kahler);

/// Cover element realizing exp(K) with the sheet fixed by the phase formula.
/// Throws FermionBoundaryError when the amplitude is undefined.
CoverElement exp_cover(const LieGenerator& k, const KahlerStructure& kahler);

/// Pointwise amplitude along t -> exp(tK) with an unwrapped phase series and
/// the naive half-argument of the squared amplitude for comparison.
/// t_grid must be ascending. Points are evaluated concurrently.
std::vector<TrajectoryPoint> phase_trajectory(const LieGenerator& k,
                                              const KahlerStructure& kahler,
                                              const std::vector<double>& t_grid);

}  // namespace metaspin

#endif
