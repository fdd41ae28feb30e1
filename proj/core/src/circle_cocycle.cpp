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

#include "metaspin/circle_cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "metaspin/complexify.hpp"
#include "metaspin/errors.hpp"

namespace metaspin {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kCutTol = 1e-10;

double c_magnitude(const GroupElement& m, const KahlerStructure& kahler) {
    const ComplexSplit parts = split(m.m, kahler.j);
    return std::abs(det_bar(parts.c_part, kahler.j));
}

}  // namespace

CirclePhase circle(const GroupElement& m, const KahlerStructure& kahler) {
    const ComplexSplit parts = split(m.m, kahler.j);
    const std::complex<double> det = det_bar(parts.c_part, kahler.j);
    const double magnitude = std::abs(det);
    if (m.statistics == Statistics::Fermion && magnitude < kDegenerateTol) {
        throw FermionBoundaryError(
            fmt::format("circle: |det-bar C_M| = {:.3e} at the boundary", magnitude),
            magnitude);
    }
    return CirclePhase{det / magnitude, magnitude};
}

CocycleValue cocycle(const GroupElement& m1, const GroupElement& m2,
                     const KahlerStructure& kahler, double degenerate_tol) {
    const int n = kahler.n_modes;
    const GroupElement m2_inv = group_inverse(m2, kahler);

    const double margin1 = c_magnitude(m1, kahler);
    const double margin2 = c_magnitude(m2_inv, kahler);
    double margin = std::min(margin1, margin2);
    if (margin < degenerate_tol) {
        throw DegeneratePairError(fmt::format(
            "cocycle: degenerate pair, |det-bar C| = {:.3e}", margin));
    }

    const Eigen::MatrixXd z1 = z_of(m1.m, kahler.j, degenerate_tol);
    const Eigen::MatrixXd z2 = z_of(m2_inv.m, kahler.j, degenerate_tol);
    const Eigen::MatrixXd x =
        Eigen::MatrixXd::Identity(2 * n, 2 * n) - z1 * z2;
    const double margin_x = std::abs(det_bar(x, kahler.j));
    margin = std::min(margin, margin_x);
    if (margin_x < degenerate_tol) {
        throw DegeneratePairError(fmt::format(
            "cocycle: 1 - Z_1 Z_2 degenerate, |det-bar| = {:.3e}", margin_x));
    }

    const Eigen::VectorXcd evs = bar_eigenvalues(x, kahler.j);

    // Eigenvalues on the cut take argument +pi; a conjugate pair straddling
    // the cut is symmetrized to +pi, -pi so it contributes nothing.
    CocycleValue out;
    out.eigen_args.assign(n, 0.0);
    out.margin = margin;
    std::vector<int> on_cut;
    for (int i = 0; i < n; ++i) {
        const std::complex<double> ev = evs(i);
        if (ev.real() < 0.0 && std::abs(ev.imag()) <= kCutTol * std::abs(ev)) {
            on_cut.push_back(i);
        } else {
            out.eigen_args[i] = std::arg(ev);
        }
    }
    std::sort(on_cut.begin(), on_cut.end(),
              [&](int a, int b) { return evs(a).imag() < evs(b).imag(); });
    int lo = 0;
    int hi = static_cast<int>(on_cut.size()) - 1;
    while (lo < hi) {
        out.eigen_args[on_cut[lo++]] = -kPi;
        out.eigen_args[on_cut[hi--]] = kPi;
    }
    if (lo == hi) {
        out.eigen_args[on_cut[lo]] = kPi;
    }

    out.eta = std::accumulate(out.eigen_args.begin(), out.eigen_args.end(), 0.0);
    return out;
}

std::complex<double> half_cocycle_phase(const GroupElement& m1, const GroupElement& m2,
                                        const KahlerStructure& kahler) {
    const CocycleValue value = cocycle(m1, m2, kahler);
    return std::polar(1.0, value.eta / 2.0);
}

}  // namespace metaspin
