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

#ifndef METASPIN_DOUBLE_COVER_HPP
#define METASPIN_DOUBLE_COVER_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "metaspin/kahler.hpp"

namespace metaspin {

/// Double-cover element (M, psi) anchored at a reference complex structure.
/// Invariant: psi^2 = phi(M) with phi evaluated against `reference`.
struct CoverElement {
    GroupElement m;
    std::complex<double> psi;
    KahlerStructure reference;
};

struct RepairResult {
    KahlerStructure kahler;
    std::vector<CoverElement> elements;
};

/// Rebuilds a compatible structure around new_j, keeping the kinematic
/// form: bosons keep Omega and derive the metric, fermions keep G and
/// derive the symplectic form. Throws InvalidTargetError when new_j is
/// incompatible.
KahlerStructure with_complex_structure(const KahlerStructure& base, const Matrix& new_j);

/// psi = sheet * sqrt(phi(M)) with sqrt(e^{i t}) = e^{i t/2}, t in (-pi, pi].
CoverElement lift(const GroupElement& m, int sheet, const KahlerStructure& kahler);

/// (M1 M2, psi1 psi2 e^{i eta(M1,M2)/2}). References must match.
CoverElement multiply(const CoverElement& a, const CoverElement& b);

/// (M^{-1}, psi*).
CoverElement inverse(const CoverElement& a);

/// Re-anchors the element at target.j, multiplying psi by the migration
/// phase e^{i(eta(T^{-1},M) + eta(T^{-1}M,T))/2} with T = sqrt(-J_new J).
CoverElement migrate_reference(const CoverElement& a, const KahlerStructure& target);

/// Chooses a reference J under which every element and every pairwise
/// product is safely interior, and migrates the elements to it. Returns
/// the inputs unchanged when the current reference already qualifies.
RepairResult repair_reference(const std::vector<CoverElement>& elements, std::uint64_t seed);

}  // namespace metaspin

#endif
