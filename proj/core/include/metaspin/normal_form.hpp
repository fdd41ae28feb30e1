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

#ifndef METASPIN_NORMAL_FORM_HPP
#define METASPIN_NORMAL_FORM_HPP

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "metaspin/kahler.hpp"

namespace metaspin {

// Block classes for the symplectic normal form of a bosonic generator.
//   1: real pair +-mu, one Jordan chain per sign, D modes
//   2: complex quadruple +-mu+-i nu, D modes per chain pair, 2D total
//   3: zero eigenvalue, single even chain of length D, D/2 modes
//   4: zero eigenvalue, paired odd chains of length D, D modes
//   5: imaginary pair +-i nu, even chains of length D, D modes
//   6: imaginary pair +-i nu, odd chains of length D, D modes
struct BlockDescriptor {
    int class_c = 0;
    std::complex<double> eigenvalue;  // canonical representative, Re >= 0, Im >= 0
    int jordan_dim = 1;
    // Sign in front of the tabulated pattern. Classes 3 and 5 store the
    // symplectic sign sigma; class 6 stores the real product i*sigma that
    // multiplies the block entries; classes 1, 2, 4 store +1.
    double sigma = 1.0;
    int first_mode = 0;
    int mode_count = 0;
    double scale = 1.0;  // class-3 rescaling parameter, 1 when untouched
};

struct BlockTriple {
    Eigen::MatrixXd i_i;  // upper-left generator block
    Eigen::MatrixXd i_r;  // upper-right, symmetric
    Eigen::MatrixXd i_l;  // lower-left, symmetric
};

struct NormalFormResult {
    Eigen::MatrixXd s;         // symplectic basis change, S Omega S^T = Omega
    Eigen::MatrixXd k_normal;  // S^{-1} K S, block normal form
    std::vector<BlockDescriptor> blocks;
};

struct ChevalleySplit {
    Eigen::MatrixXd k_imag;  // semisimple imaginary part, commutes with k_rest
    Eigen::MatrixXd k_rest;  // remainder, exp path stays off the spectral cut
};

struct ContinuityReport {
    double min_distance = 0.0;  // closest approach to the branch cut over the sweep
    int crossings = 0;          // paired negative-real-axis crossings observed
    bool rescale_needed = false;
    int grid = 0;
};

/// Builds the 2D x 2D generator block for a descriptor, including its scale.
BlockTriple block_matrices(const BlockDescriptor& block);

/// Symplectic normal form K = S k_normal S^{-1} with S symplectic for the
/// standard form of the generator's statistics. Bosonic generators only.
/// Throws IllConditionedError when the generalized eigenbasis condition
/// number exceeds 1e8.
NormalFormResult symplectic_normal_form(const LieGenerator& k);

/// Splits K into the imaginary semisimple part and the remainder through the
/// normal form, so [k_imag, k_rest] = 0 holds by construction.
ChevalleySplit jordan_chevalley(const LieGenerator& k);

/// Same split evaluated on an already computed normal form of k, including a
/// rescaled one; the rescaling leaves k_imag unchanged.
ChevalleySplit chevalley_split(const NormalFormResult& nf, const LieGenerator& k);

/// Conjugates every class-3 block by its balancing diagonal, multiplying the
/// block entries by epsilon while leaving all other blocks untouched.
NormalFormResult rescale_c3_blocks(const NormalFormResult& nf, double epsilon);

/// Sweeps exp(t k_rest) for t in [0, 1] and reports how close the reduced
/// eigenvalues of its diagonal projection come to the spectral cut.
/// k_rest and j_tilde are expressed in the same basis, j_tilde standard form.
ContinuityReport continuity_certificate(const Eigen::MatrixXd& k_rest,
                                        const Eigen::MatrixXd& j_tilde,
                                        int grid = 1000);

}  // namespace metaspin

#endif
