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

#include "metaspin/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "metaspin/complexify.hpp"
#include "metaspin/errors.hpp"

namespace metaspin {

namespace {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

constexpr double kClusterTol = 1e-7;
constexpr double kRankTol = 1e-8;
constexpr double kConditionLimit = 1e8;
constexpr double kGaugeResidual = 1e-11;
constexpr double kCutSafety = 0.1;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

Eigen::MatrixXd omega_lower(int n_modes) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
    w.topRightCorner(n_modes, n_modes) = -Eigen::MatrixXd::Identity(n_modes, n_modes);
    w.bottomLeftCorner(n_modes, n_modes) = Eigen::MatrixXd::Identity(n_modes, n_modes);
    return w;
}

template <typename Scalar>
Mat<Scalar> nullspace_of(const Mat<Scalar>& a, double rel_tol) {
    Eigen::JacobiSVD<Mat<Scalar>> svd(a, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    double top = sv.size() > 0 ? sv(0) : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv(i) > rel_tol * std::max(top, 1e-300)) ++rank;
    }
    return svd.matrixV().rightCols(a.cols() - rank);
}

template <typename Scalar>
Mat<Scalar> orthonormal_columns(const Mat<Scalar>& b) {
    if (b.cols() == 0) return b;
    Eigen::HouseholderQR<Mat<Scalar>> qr(b);
    long thin = std::min(b.rows(), b.cols());
    return qr.householderQ() * Mat<Scalar>::Identity(b.rows(), thin);
}

/// Jordan chains of `a` on its kernel tower. Chains are listed tallest
/// first; chain[0] is the top and chain[i + 1] = a chain[i].
template <typename Scalar>
std::vector<std::vector<Vec<Scalar>>> jordan_chains(const Mat<Scalar>& a, double rel_tol) {
    std::vector<Mat<Scalar>> kernels;
    Mat<Scalar> power = a;
    int prev_dim = 0;
    while (true) {
        Mat<Scalar> kernel = nullspace_of<Scalar>(power, rel_tol);
        if (kernel.cols() == prev_dim) break;
        kernels.push_back(kernel);
        prev_dim = static_cast<int>(kernel.cols());
        if (prev_dim >= static_cast<int>(a.rows())) break;
        power = (power * a).eval();
        double norm = power.norm();
        if (norm > 0.0) power /= norm;
    }
    if (kernels.empty()) return {};
    int max_height = static_cast<int>(kernels.size());
    auto dim_at = [&](int h) {
        if (h <= 0) return 0;
        return static_cast<int>(kernels[std::min(h, max_height) - 1].cols());
    };
    auto count_at_least = [&](int h) { return dim_at(h) - dim_at(h - 1); };

    std::vector<std::vector<Vec<Scalar>>> chains;
    for (int h = max_height; h >= 1; --h) {
        int fresh = count_at_least(h) - (h < max_height ? count_at_least(h + 1) : 0);
        if (fresh <= 0) continue;
        // Claimed directions inside ker(a^h): the next smaller kernel plus
        // the pushforwards of every taller chain. Both sit inside ker(a^h).
        std::vector<Vec<Scalar>> claimed_cols;
        if (h >= 2) {
            const Mat<Scalar>& lower = kernels[h - 2];
            for (int c = 0; c < lower.cols(); ++c) claimed_cols.push_back(lower.col(c));
        }
        for (const auto& chain : chains) {
            claimed_cols.push_back(chain[chain.size() - h]);
        }
        Mat<Scalar> q;
        if (!claimed_cols.empty()) {
            Mat<Scalar> claimed(a.rows(), static_cast<long>(claimed_cols.size()));
            for (int c = 0; c < claimed.cols(); ++c) claimed.col(c) = claimed_cols[c];
            q = orthonormal_columns<Scalar>(claimed);
        }
        Mat<Scalar> candidates = kernels[h - 1];
        if (q.cols() > 0) candidates -= q * (q.adjoint() * kernels[h - 1]);
        Eigen::JacobiSVD<Mat<Scalar>> svd(candidates, Eigen::ComputeFullU);
        for (int t = 0; t < fresh; ++t) {
            std::vector<Vec<Scalar>> chain;
            chain.push_back(svd.matrixU().col(t));
            for (int j = 1; j < h; ++j) chain.push_back(a * chain.back());
            chains.push_back(std::move(chain));
        }
    }
    return chains;
}

double pairing(const Eigen::MatrixXd& w_form, const Eigen::VectorXd& x,
               const Eigen::VectorXd& y) {
    return x.dot(w_form * y);
}

Complex pairing_c(const Eigen::MatrixXd& w_form, const CVector& x, const CVector& y) {
    return x.transpose() * (w_form * y);
}

/// Projector onto the symplectic complement of a fixed block basis whose
/// columns (q..., p...) satisfy basis^T w basis = omega_lower(m).
Eigen::MatrixXd symplectic_projector(const Eigen::MatrixXd& w_form,
                                     const Eigen::MatrixXd& basis) {
    int m = static_cast<int>(basis.cols()) / 2;
    Eigen::MatrixXd w_block = omega_lower(m);
    Eigen::MatrixXd correction =
        basis * w_block.partialPivLu().solve(basis.transpose() * w_form);
    return Eigen::MatrixXd::Identity(basis.rows(), basis.rows()) - correction;
}

struct BlockBasis {
    Eigen::MatrixXd q;  // 2N x m
    Eigen::MatrixXd p;  // 2N x m
    BlockDescriptor desc;
};

Eigen::MatrixXd stack_block(const BlockBasis& block) {
    Eigen::MatrixXd b(block.q.rows(), block.q.cols() + block.p.cols());
    b << block.q, block.p;
    return b;
}

BlockTriple pattern_triple(int class_c, Complex eigenvalue, int jordan_dim, double sigma) {
    double mu = eigenvalue.real();
    double nu = eigenvalue.imag();
    int d = jordan_dim;
    BlockTriple triple;
    switch (class_c) {
        case 1: {
            triple.i_i = Eigen::MatrixXd::Zero(d, d);
            for (int i = 0; i < d; ++i) triple.i_i(i, i) = mu;
            for (int i = 0; i + 1 < d; ++i) triple.i_i(i + 1, i) = 1.0;
            triple.i_r = Eigen::MatrixXd::Zero(d, d);
            triple.i_l = Eigen::MatrixXd::Zero(d, d);
            break;
        }
        case 2: {
            int m = 2 * d;
            triple.i_i = Eigen::MatrixXd::Zero(m, m);
            for (int b = 0; b < d; ++b) {
                triple.i_i(2 * b, 2 * b) = mu;
                triple.i_i(2 * b + 1, 2 * b + 1) = mu;
                triple.i_i(2 * b, 2 * b + 1) = nu;
                triple.i_i(2 * b + 1, 2 * b) = -nu;
                if (b + 1 < d) {
                    triple.i_i(2 * b + 2, 2 * b) = 1.0;
                    triple.i_i(2 * b + 3, 2 * b + 1) = 1.0;
                }
            }
            triple.i_r = Eigen::MatrixXd::Zero(m, m);
            triple.i_l = Eigen::MatrixXd::Zero(m, m);
            break;
        }
        case 3: {
            int m = d / 2;
            triple.i_i = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i + 1 < m; ++i) triple.i_i(i + 1, i) = sigma;
            triple.i_r = Eigen::MatrixXd::Zero(m, m);
            triple.i_l = Eigen::MatrixXd::Zero(m, m);
            triple.i_l(m - 1, m - 1) = sigma * (m % 2 == 0 ? 1.0 : -1.0);
            break;
        }
        case 4: {
            triple.i_i = Eigen::MatrixXd::Zero(d, d);
            for (int i = 0; i + 1 < d; ++i) triple.i_i(i + 1, i) = 1.0;
            triple.i_r = Eigen::MatrixXd::Zero(d, d);
            triple.i_l = Eigen::MatrixXd::Zero(d, d);
            break;
        }
        case 5: {
            triple.i_i = Eigen::MatrixXd::Zero(d, d);
            triple.i_r = Eigen::MatrixXd::Zero(d, d);
            triple.i_l = Eigen::MatrixXd::Zero(d, d);
            for (int i = 1; i <= d; ++i) {
                for (int j = 1; j <= d; ++j) {
                    if (i + j == d + 1) {
                        triple.i_r(i - 1, j - 1) = sigma * nu;
                        triple.i_l(i - 1, j - 1) = -sigma * nu;
                    } else if (i + j == d + 2) {
                        triple.i_r(i - 1, j - 1) = sigma * (i % 2 == 0 ? 1.0 : -1.0);
                    } else if (i + j == d) {
                        triple.i_l(i - 1, j - 1) = sigma * (i % 2 == 0 ? 1.0 : -1.0);
                    }
                }
            }
            break;
        }
        case 6: {
            // sigma carries the real product i*sigma for this class.
            triple.i_i = Eigen::MatrixXd::Zero(d, d);
            for (int i = 0; i + 1 < d; ++i) triple.i_i(i + 1, i) = 1.0;
            triple.i_r = Eigen::MatrixXd::Zero(d, d);
            triple.i_l = Eigen::MatrixXd::Zero(d, d);
            for (int i = 1; i <= d; ++i) {
                int j = d + 1 - i;
                triple.i_r(i - 1, j - 1) = sigma * (i % 2 == 1 ? 1.0 : -1.0) * nu;
                triple.i_l(i - 1, j - 1) = -triple.i_r(i - 1, j - 1);
            }
            break;
        }
        default:
            throw std::invalid_argument(fmt::format("unknown block class {}", class_c));
    }
    return triple;
}

Eigen::MatrixXd embed_triple(const BlockTriple& triple) {
    int m = static_cast<int>(triple.i_i.rows());
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    k.topLeftCorner(m, m) = triple.i_i;
    k.topRightCorner(m, m) = triple.i_r;
    k.bottomLeftCorner(m, m) = triple.i_l;
    k.bottomRightCorner(m, m) = -triple.i_i.transpose();
    return k;
}

std::vector<std::pair<int, int>> upper_pairs(int d) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
    return pairs;
}

/// Gauge solver for chains of height two and above. Finds P with
/// A_W P = P k_target and (W P)^T w (W P) = omega_lower(m), so the columns
/// of W P are a symplectic basis realizing the tabulated block.
bool gauge_newton(const Eigen::MatrixXd& w, const Eigen::MatrixXd& kw,
                  const Eigen::MatrixXd& w_form, const Eigen::MatrixXd& k_target,
                  unsigned seed, Eigen::MatrixXd* out) {
    int d = static_cast<int>(w.cols());
    int m = d / 2;
    Eigen::MatrixXd gram = w.transpose() * w;
    Eigen::MatrixXd a_w = gram.ldlt().solve(w.transpose() * kw);

    Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd sylvester = Eigen::kroneckerProduct(identity, a_w).eval() -
                                Eigen::kroneckerProduct(k_target.transpose(), identity).eval();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sylvester, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    double top = sv.size() > 0 ? std::max(sv(0), 1.0) : 1.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv(i) > 1e-8 * top) ++rank;
    }
    int basis_dim = d * d - rank;
    if (basis_dim <= 0) return false;
    std::vector<Eigen::MatrixXd> basis;
    basis.reserve(basis_dim);
    for (int c = 0; c < basis_dim; ++c) {
        Eigen::VectorXd v = svd.matrixV().col(d * d - 1 - c);
        basis.push_back(Eigen::Map<Eigen::MatrixXd>(v.data(), d, d));
    }

    Eigen::MatrixXd g_w = w.transpose() * w_form * w;
    Eigen::MatrixXd w_block = omega_lower(m);
    auto pairs = upper_pairs(d);
    int n_eq = static_cast<int>(pairs.size());

    auto compose = [&](const Eigen::VectorXd& c) {
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d, d);
        for (int i = 0; i < basis_dim; ++i) p += c(i) * basis[i];
        return p;
    };
    auto residual = [&](const Eigen::MatrixXd& p) {
        Eigen::MatrixXd e = p.transpose() * g_w * p - w_block;
        Eigen::VectorXd f(n_eq);
        for (int i = 0; i < n_eq; ++i) f(i) = e(pairs[i].first, pairs[i].second);
        return f;
    };

    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int attempt = 0; attempt < 25; ++attempt) {
        Eigen::VectorXd c(basis_dim);
        for (int i = 0; i < basis_dim; ++i) c(i) = gauss(rng);
        c *= std::sqrt(static_cast<double>(d)) / c.norm();
        Eigen::MatrixXd p = compose(c);
        Eigen::VectorXd f = residual(p);
        for (int iter = 0; iter < 80 && f.norm() >= kGaugeResidual; ++iter) {
            Eigen::MatrixXd jac(n_eq, basis_dim);
            for (int b = 0; b < basis_dim; ++b) {
                Eigen::MatrixXd de =
                    basis[b].transpose() * g_w * p + p.transpose() * g_w * basis[b];
                for (int i = 0; i < n_eq; ++i) jac(i, b) = de(pairs[i].first, pairs[i].second);
            }
            Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-f);
            double t = 1.0;
            bool improved = false;
            for (int back = 0; back < 30; ++back) {
                Eigen::VectorXd c_next = c + t * step;
                Eigen::VectorXd f_next = residual(compose(c_next));
                if (f_next.norm() < f.norm() * (1.0 - 1e-4 * t)) {
                    c = c_next;
                    f = f_next;
                    improved = true;
                    break;
                }
                t *= 0.5;
            }
            if (!improved) break;
            p = compose(c);
        }
        if (f.norm() < kGaugeResidual) {
            *out = compose(c);
            return true;
        }
    }
    return false;
}

struct Orbit {
    double mu = 0.0;
    double nu = 0.0;
    int multiplicity = 0;  // algebraic multiplicity of one representative
};

std::vector<Orbit> eigenvalue_orbits(const Eigen::MatrixXd& k, double scale) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(k, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw IllConditionedError("eigenvalue computation failed to converge", 0.0);
    }
    CVector values = solver.eigenvalues();
    double tol = kClusterTol * std::max(1.0, scale);

    // Fold the spectrum onto the closed quadrant Re >= 0, Im >= 0; orbit
    // members are the sign and conjugation images of one representative.
    std::vector<Complex> folded(values.size());
    for (int i = 0; i < values.size(); ++i) {
        folded[i] = Complex(std::abs(values(i).real()), std::abs(values(i).imag()));
    }
    std::vector<Orbit> orbits;
    std::vector<bool> used(folded.size(), false);
    for (size_t i = 0; i < folded.size(); ++i) {
        if (used[i]) continue;
        std::vector<size_t> members{i};
        used[i] = true;
        for (size_t j = i + 1; j < folded.size(); ++j) {
            if (!used[j] && std::abs(folded[j] - folded[i]) < tol) {
                members.push_back(j);
                used[j] = true;
            }
        }
        Complex mean(0.0, 0.0);
        for (size_t idx : members) mean += folded[idx];
        mean /= static_cast<double>(members.size());
        Orbit orbit;
        orbit.mu = mean.real() < tol ? 0.0 : mean.real();
        orbit.nu = mean.imag() < tol ? 0.0 : mean.imag();
        int orbit_size = 1;
        if (orbit.mu > 0.0 && orbit.nu > 0.0) {
            orbit_size = 4;
        } else if (orbit.mu > 0.0 || orbit.nu > 0.0) {
            orbit_size = 2;
        }
        if (static_cast<int>(members.size()) % orbit_size != 0) {
            throw IllConditionedError(
                fmt::format("eigenvalue cluster at ({}, {}) has multiplicity {} not divisible "
                            "by its orbit size {}",
                            orbit.mu, orbit.nu, members.size(), orbit_size),
                static_cast<double>(members.size()));
        }
        orbit.multiplicity = static_cast<int>(members.size()) / orbit_size;
        orbits.push_back(orbit);
    }
    return orbits;
}

Eigen::MatrixXd realify_chain(const std::vector<CVector>& chain) {
    long rows = chain[0].size();
    Eigen::MatrixXd w(rows, 2 * static_cast<long>(chain.size()));
    for (size_t i = 0; i < chain.size(); ++i) {
        w.col(2 * static_cast<long>(i)) = chain[i].real();
        w.col(2 * static_cast<long>(i) + 1) = chain[i].imag();
    }
    return w;
}

Eigen::MatrixXd stack_real_chain(const std::vector<Eigen::VectorXd>& chain) {
    Eigen::MatrixXd w(chain[0].size(), static_cast<long>(chain.size()));
    for (size_t i = 0; i < chain.size(); ++i) w.col(static_cast<long>(i)) = chain[i];
    return w;
}

Eigen::MatrixXd assemble_normal(const std::vector<BlockDescriptor>& blocks, int n_modes) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
    for (const auto& desc : blocks) {
        BlockTriple triple = block_matrices(desc);
        int f = desc.first_mode;
        int m = desc.mode_count;
        k.block(f, f, m, m) = triple.i_i;
        k.block(f, n_modes + f, m, m) = triple.i_r;
        k.block(n_modes + f, f, m, m) = triple.i_l;
        k.block(n_modes + f, n_modes + f, m, m) = -triple.i_i.transpose();
    }
    return k;
}

}  // namespace

BlockTriple block_matrices(const BlockDescriptor& block) {
    BlockTriple triple =
        pattern_triple(block.class_c, block.eigenvalue, block.jordan_dim, block.sigma);
    triple.i_i *= block.scale;
    triple.i_r *= block.scale;
    triple.i_l *= block.scale;
    return triple;
}

NormalFormResult symplectic_normal_form(const LieGenerator& k) {
    if (k.statistics != Statistics::Bosonic) {
        throw std::invalid_argument("symplectic normal form is defined for bosonic generators");
    }
    const Eigen::MatrixXd& kk = k.k;
    int dim = static_cast<int>(kk.rows());
    int n_modes = dim / 2;
    KahlerStructure standard = standard_kahler(n_modes, Statistics::Bosonic);
    const Eigen::MatrixXd& w_form = standard.omega_inv;
    double scale = std::max(1.0, kk.norm());

    if ((kk * standard.omega + standard.omega * kk.transpose()).norm() > 1e-7 * scale) {
        throw std::invalid_argument("generator does not satisfy the algebra condition");
    }

    std::vector<BlockBasis> blocks;

    if (kk.norm() < 1e-13) {
        // Vanishing generator: the standard basis is already normal.
        for (int i = 0; i < n_modes; ++i) {
            BlockBasis block;
            block.q = Eigen::MatrixXd::Zero(dim, 1);
            block.p = Eigen::MatrixXd::Zero(dim, 1);
            block.q(i, 0) = 1.0;
            block.p(n_modes + i, 0) = 1.0;
            block.desc.class_c = 4;
            block.desc.eigenvalue = Complex(0.0, 0.0);
            block.desc.jordan_dim = 1;
            blocks.push_back(std::move(block));
        }
    } else {
        std::vector<Orbit> orbits = eigenvalue_orbits(kk, scale);
        std::sort(orbits.begin(), orbits.end(), [](const Orbit& a, const Orbit& b) {
            if (a.mu != b.mu) return a.mu > b.mu;
            return a.nu > b.nu;
        });

        CMatrix kc = kk.cast<Complex>();
        unsigned gauge_seed = 2026u;
        for (const Orbit& orbit : orbits) {
            gauge_seed += 101u;
            bool is_zero = orbit.mu == 0.0 && orbit.nu == 0.0;
            bool is_real = orbit.mu > 0.0 && orbit.nu == 0.0;
            bool is_imag = orbit.mu == 0.0 && orbit.nu > 0.0;

            if (is_real) {
                Eigen::MatrixXd a_plus = kk - orbit.mu * Eigen::MatrixXd::Identity(dim, dim);
                Eigen::MatrixXd a_minus = kk + orbit.mu * Eigen::MatrixXd::Identity(dim, dim);
                auto plus = jordan_chains<double>(a_plus, kRankTol);
                auto minus = jordan_chains<double>(a_minus, kRankTol);
                if (plus.size() != minus.size()) {
                    throw IllConditionedError(
                        fmt::format("chain counts for +/-{} disagree", orbit.mu), 0.0);
                }
                std::vector<Eigen::MatrixXd> projectors;
                std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> simple;
                for (size_t idx = 0; idx < plus.size(); ++idx) {
                    int height = static_cast<int>(plus[idx].size());
                    if (height == 1) {
                        simple.emplace_back(plus[idx][0], minus[idx][0]);
                        continue;
                    }
                    Eigen::MatrixXd w(dim, 2 * height);
                    w << stack_real_chain(plus[idx]), stack_real_chain(minus[idx]);
                    for (const auto& proj : projectors) w = proj * w;
                    BlockDescriptor desc;
                    desc.class_c = 1;
                    desc.eigenvalue = Complex(orbit.mu, 0.0);
                    desc.jordan_dim = height;
                    BlockTriple triple = pattern_triple(1, desc.eigenvalue, height, 1.0);
                    Eigen::MatrixXd p_gauge;
                    if (!gauge_newton(w, kk * w, w_form, embed_triple(triple), gauge_seed,
                                      &p_gauge)) {
                        throw IllConditionedError(
                            fmt::format("no symplectic gauge found for a real chain pair at {}",
                                        orbit.mu),
                            0.0);
                    }
                    Eigen::MatrixXd basis = w * p_gauge;
                    BlockBasis block;
                    block.q = basis.leftCols(height);
                    block.p = basis.rightCols(height);
                    block.desc = desc;
                    projectors.push_back(symplectic_projector(w_form, stack_block(block)));
                    blocks.push_back(std::move(block));
                }
                if (!simple.empty()) {
                    int m = static_cast<int>(simple.size());
                    Eigen::MatrixXd a_vecs(dim, m);
                    Eigen::MatrixXd c_vecs(dim, m);
                    for (int i = 0; i < m; ++i) {
                        Eigen::VectorXd a = simple[i].first;
                        Eigen::VectorXd c = simple[i].second;
                        for (const auto& proj : projectors) {
                            a = proj * a;
                            c = proj * c;
                        }
                        a_vecs.col(i) = a;
                        c_vecs.col(i) = c;
                    }
                    Eigen::MatrixXd gram(m, m);
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < m; ++j)
                            gram(i, j) = pairing(w_form, a_vecs.col(i), c_vecs.col(j));
                    Eigen::MatrixXd p_vecs = c_vecs * (-gram.inverse());
                    for (int i = 0; i < m; ++i) {
                        BlockBasis block;
                        block.q = a_vecs.col(i);
                        block.p = p_vecs.col(i);
                        block.desc.class_c = 1;
                        block.desc.eigenvalue = Complex(orbit.mu, 0.0);
                        block.desc.jordan_dim = 1;
                        blocks.push_back(std::move(block));
                    }
                }
            } else if (is_zero) {
                auto chains = jordan_chains<double>(kk, kRankTol);
                std::vector<Eigen::MatrixXd> projectors;
                std::vector<Eigen::VectorXd> simple;
                std::vector<std::vector<Eigen::VectorXd>> odd_tall;
                for (auto& chain : chains) {
                    int height = static_cast<int>(chain.size());
                    if (height == 1) {
                        simple.push_back(chain[0]);
                        continue;
                    }
                    if (height % 2 != 0) {
                        odd_tall.push_back(chain);
                        continue;
                    }
                    Eigen::MatrixXd w = stack_real_chain(chain);
                    for (const auto& proj : projectors) w = proj * w;
                    BlockDescriptor desc;
                    desc.class_c = 3;
                    desc.eigenvalue = Complex(0.0, 0.0);
                    desc.jordan_dim = height;
                    BlockBasis block;
                    if (height == 2) {
                        // Closed form: q from the top, p from its image.
                        Eigen::VectorXd f1 = w.col(0);
                        Eigen::VectorXd f2 = kk * f1;
                        double s = pairing(w_form, f1, f2);
                        if (std::abs(s) < 1e-12) {
                            throw IllConditionedError("nilpotent chain pairing degenerate",
                                                      std::abs(s));
                        }
                        desc.sigma = s >= 0.0 ? 1.0 : -1.0;
                        double alpha = 1.0 / std::sqrt(std::abs(s));
                        block.q = alpha * f1;
                        block.p = -desc.sigma * alpha * f2;
                    } else {
                        bool solved = false;
                        for (double sigma : {1.0, -1.0}) {
                            desc.sigma = sigma;
                            BlockTriple triple =
                                pattern_triple(3, desc.eigenvalue, height, sigma);
                            Eigen::MatrixXd p_gauge;
                            if (gauge_newton(w, kk * w, w_form, embed_triple(triple),
                                             gauge_seed, &p_gauge)) {
                                Eigen::MatrixXd basis = w * p_gauge;
                                block.q = basis.leftCols(height / 2);
                                block.p = basis.rightCols(height / 2);
                                solved = true;
                                break;
                            }
                        }
                        if (!solved) {
                            throw IllConditionedError(
                                "no symplectic gauge found for an even nilpotent chain", 0.0);
                        }
                    }
                    block.desc = desc;
                    projectors.push_back(symplectic_projector(w_form, stack_block(block)));
                    blocks.push_back(std::move(block));
                }
                if (odd_tall.size() % 2 != 0) {
                    throw IllConditionedError("odd nilpotent chains failed to pair", 0.0);
                }
                for (size_t i = 0; i + 1 < odd_tall.size(); i += 2) {
                    int height = static_cast<int>(odd_tall[i].size());
                    if (static_cast<int>(odd_tall[i + 1].size()) != height) {
                        throw IllConditionedError("odd nilpotent chains have unequal heights",
                                                  0.0);
                    }
                    Eigen::MatrixXd w(dim, 2 * height);
                    w << stack_real_chain(odd_tall[i]), stack_real_chain(odd_tall[i + 1]);
                    for (const auto& proj : projectors) w = proj * w;
                    BlockDescriptor desc;
                    desc.class_c = 4;
                    desc.eigenvalue = Complex(0.0, 0.0);
                    desc.jordan_dim = height;
                    BlockTriple triple = pattern_triple(4, desc.eigenvalue, height, 1.0);
                    Eigen::MatrixXd p_gauge;
                    if (!gauge_newton(w, kk * w, w_form, embed_triple(triple), gauge_seed,
                                      &p_gauge)) {
                        throw IllConditionedError(
                            "no symplectic gauge found for paired odd nilpotent chains", 0.0);
                    }
                    Eigen::MatrixXd basis = w * p_gauge;
                    BlockBasis block;
                    block.q = basis.leftCols(height);
                    block.p = basis.rightCols(height);
                    block.desc = desc;
                    projectors.push_back(symplectic_projector(w_form, stack_block(block)));
                    blocks.push_back(std::move(block));
                }
                if (!simple.empty()) {
                    // Symplectic Gram-Schmidt over the remaining kernel pairs.
                    std::vector<Eigen::VectorXd> pool = simple;
                    for (auto& v : pool)
                        for (const auto& proj : projectors) v = proj * v;
                    while (pool.size() >= 2) {
                        Eigen::VectorXd x = pool.front();
                        pool.erase(pool.begin());
                        int best = -1;
                        double best_mag = 0.0;
                        for (size_t j = 0; j < pool.size(); ++j) {
                            double mag = std::abs(pairing(w_form, x, pool[j]));
                            if (mag > best_mag) {
                                best_mag = mag;
                                best = static_cast<int>(j);
                            }
                        }
                        if (best < 0 || best_mag < 1e-12) {
                            throw IllConditionedError(
                                "kernel pairing degenerate during symplectic Gram-Schmidt",
                                best_mag);
                        }
                        Eigen::VectorXd y = pool[best];
                        pool.erase(pool.begin() + best);
                        double s = pairing(w_form, x, y);
                        double root = std::sqrt(std::abs(s));
                        BlockBasis block;
                        block.q = x / root;
                        block.p = -y * (root / s);
                        block.desc.class_c = 4;
                        block.desc.eigenvalue = Complex(0.0, 0.0);
                        block.desc.jordan_dim = 1;
                        Eigen::MatrixXd proj = symplectic_projector(w_form, stack_block(block));
                        for (auto& v : pool) v = proj * v;
                        projectors.push_back(proj);
                        blocks.push_back(std::move(block));
                    }
                    if (!pool.empty()) {
                        throw IllConditionedError("kernel dimension is odd after pairing", 0.0);
                    }
                }
            } else if (is_imag) {
                CMatrix a = kc - Complex(0.0, orbit.nu) * CMatrix::Identity(dim, dim);
                auto chains = jordan_chains<Complex>(a, kRankTol);
                std::vector<Eigen::MatrixXd> projectors;
                std::vector<CVector> simple;
                for (auto& chain : chains) {
                    int height = static_cast<int>(chain.size());
                    if (height == 1) {
                        simple.push_back(chain[0]);
                        continue;
                    }
                    Eigen::MatrixXd w = realify_chain(chain);
                    for (const auto& proj : projectors) w = proj * w;
                    BlockDescriptor desc;
                    desc.eigenvalue = Complex(0.0, orbit.nu);
                    desc.jordan_dim = height;
                    desc.class_c = height % 2 == 0 ? 5 : 6;
                    bool solved = false;
                    BlockBasis block;
                    for (double sigma : {1.0, -1.0}) {
                        desc.sigma = sigma;
                        BlockTriple triple =
                            pattern_triple(desc.class_c, desc.eigenvalue, height, sigma);
                        Eigen::MatrixXd p_gauge;
                        if (gauge_newton(w, kk * w, w_form, embed_triple(triple), gauge_seed,
                                         &p_gauge)) {
                            Eigen::MatrixXd basis = w * p_gauge;
                            block.q = basis.leftCols(height);
                            block.p = basis.rightCols(height);
                            solved = true;
                            break;
                        }
                    }
                    if (!solved) {
                        throw IllConditionedError(
                            fmt::format("no symplectic gauge found for an imaginary chain at {}",
                                        orbit.nu),
                            0.0);
                    }
                    block.desc = desc;
                    projectors.push_back(symplectic_projector(w_form, stack_block(block)));
                    blocks.push_back(std::move(block));
                }
                if (!simple.empty()) {
                    int m = static_cast<int>(simple.size());
                    for (auto& v : simple) {
                        for (const auto& proj : projectors) {
                            CVector next(v.size());
                            next.real() = proj * v.real();
                            next.imag() = proj * v.imag();
                            v = next;
                        }
                    }
                    // Hermitian Krein form; its signature fixes the block signs.
                    CMatrix krein(m, m);
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < m; ++j)
                            krein(i, j) = Complex(0.0, 0.5) *
                                          pairing_c(w_form, simple[i].conjugate(), simple[j]);
                    Eigen::SelfAdjointEigenSolver<CMatrix> es(krein);
                    for (int j = 0; j < m; ++j) {
                        double lambda = es.eigenvalues()(j);
                        if (std::abs(lambda) < 1e-12) {
                            throw IllConditionedError("Krein form degenerate", std::abs(lambda));
                        }
                        CVector v = CVector::Zero(dim);
                        for (int i = 0; i < m; ++i) v += simple[i] * es.eigenvectors()(i, j);
                        v /= std::sqrt(std::abs(lambda));
                        double sign = lambda > 0.0 ? 1.0 : -1.0;
                        BlockBasis block;
                        block.q = v.real();
                        block.p = sign * v.imag();
                        block.desc.class_c = 6;
                        block.desc.eigenvalue = Complex(0.0, orbit.nu);
                        block.desc.jordan_dim = 1;
                        block.desc.sigma = sign;
                        blocks.push_back(std::move(block));
                    }
                }
            } else {
                Complex lambda(orbit.mu, orbit.nu);
                CMatrix a_q = kc - lambda * CMatrix::Identity(dim, dim);
                CMatrix a_p = kc + std::conj(lambda) * CMatrix::Identity(dim, dim);
                auto q_chains = jordan_chains<Complex>(a_q, kRankTol);
                auto p_chains = jordan_chains<Complex>(a_p, kRankTol);
                if (q_chains.size() != p_chains.size()) {
                    throw IllConditionedError("quadruple chain counts disagree", 0.0);
                }
                std::vector<Eigen::MatrixXd> projectors;
                std::vector<std::pair<CVector, CVector>> simple;
                for (size_t idx = 0; idx < q_chains.size(); ++idx) {
                    int height = static_cast<int>(q_chains[idx].size());
                    if (height == 1) {
                        simple.emplace_back(q_chains[idx][0], p_chains[idx][0]);
                        continue;
                    }
                    Eigen::MatrixXd w(dim, 4 * height);
                    w << realify_chain(q_chains[idx]), realify_chain(p_chains[idx]);
                    for (const auto& proj : projectors) w = proj * w;
                    BlockDescriptor desc;
                    desc.class_c = 2;
                    desc.eigenvalue = lambda;
                    desc.jordan_dim = height;
                    BlockTriple triple = pattern_triple(2, lambda, height, 1.0);
                    Eigen::MatrixXd p_gauge;
                    if (!gauge_newton(w, kk * w, w_form, embed_triple(triple), gauge_seed,
                                      &p_gauge)) {
                        throw IllConditionedError(
                            "no symplectic gauge found for a complex quadruple chain", 0.0);
                    }
                    Eigen::MatrixXd basis = w * p_gauge;
                    BlockBasis block;
                    block.q = basis.leftCols(2 * height);
                    block.p = basis.rightCols(2 * height);
                    block.desc = desc;
                    projectors.push_back(symplectic_projector(w_form, stack_block(block)));
                    blocks.push_back(std::move(block));
                }
                if (!simple.empty()) {
                    int m = static_cast<int>(simple.size());
                    for (auto& pair : simple) {
                        for (const auto& proj : projectors) {
                            CVector a(pair.first.size());
                            a.real() = proj * pair.first.real();
                            a.imag() = proj * pair.first.imag();
                            pair.first = a;
                            CVector b(pair.second.size());
                            b.real() = proj * pair.second.real();
                            b.imag() = proj * pair.second.imag();
                            pair.second = b;
                        }
                    }
                    // The pairing of v against conj(u) carries the whole Gram.
                    CMatrix z(m, m);
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < m; ++j)
                            z(i, j) = 0.5 * pairing_c(w_form, simple[i].first,
                                                      simple[j].second.conjugate());
                    CMatrix coeff = -(z.inverse()).conjugate();
                    for (int j = 0; j < m; ++j) {
                        CVector u = CVector::Zero(dim);
                        for (int i = 0; i < m; ++i) u += simple[i].second * coeff(i, j);
                        BlockBasis block;
                        block.q = Eigen::MatrixXd(dim, 2);
                        block.p = Eigen::MatrixXd(dim, 2);
                        block.q.col(0) = simple[j].first.real();
                        block.q.col(1) = simple[j].first.imag();
                        block.p.col(0) = u.real();
                        block.p.col(1) = u.imag();
                        block.desc.class_c = 2;
                        block.desc.eigenvalue = lambda;
                        block.desc.jordan_dim = 1;
                        blocks.push_back(std::move(block));
                    }
                }
            }
        }
    }

    // Deterministic placement: class, then size, then eigenvalue.
    std::sort(blocks.begin(), blocks.end(), [](const BlockBasis& a, const BlockBasis& b) {
        if (a.desc.class_c != b.desc.class_c) return a.desc.class_c < b.desc.class_c;
        if (a.desc.jordan_dim != b.desc.jordan_dim) return a.desc.jordan_dim > b.desc.jordan_dim;
        double ar = a.desc.eigenvalue.real();
        double br = b.desc.eigenvalue.real();
        if (ar != br) return ar > br;
        return a.desc.eigenvalue.imag() > b.desc.eigenvalue.imag();
    });

    NormalFormResult result;
    result.s = Eigen::MatrixXd::Zero(dim, dim);
    int mode_cursor = 0;
    for (auto& block : blocks) {
        int m = static_cast<int>(block.q.cols());
        block.desc.first_mode = mode_cursor;
        block.desc.mode_count = m;
        result.s.middleCols(mode_cursor, m) = block.q;
        result.s.middleCols(n_modes + mode_cursor, m) = block.p;
        result.blocks.push_back(block.desc);
        mode_cursor += m;
    }
    if (mode_cursor != n_modes) {
        throw IllConditionedError(
            fmt::format("normal-form blocks cover {} of {} modes", mode_cursor, n_modes), 0.0);
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(result.s);
    double cond = svd.singularValues()(0) / svd.singularValues().tail(1)(0);
    if (!(cond < kConditionLimit)) {
        throw IllConditionedError(
            fmt::format("generalized eigenbasis condition number {:.3e} exceeds limit", cond),
            cond);
    }

    // Assemble the normal form from the descriptors rather than conjugating,
    // so the returned matrix carries the exact tabulated structure.
    result.k_normal = assemble_normal(result.blocks, n_modes);

    double residual =
        (kk * result.s - result.s * result.k_normal).norm() / (scale * result.s.norm());
    if (residual > 1e-7) {
        throw IllConditionedError(
            fmt::format("normal-form reconstruction residual {:.3e}", residual), cond);
    }
    double sympl = (result.s.transpose() * w_form * result.s - w_form).norm();
    if (sympl > 1e-6) {
        throw IllConditionedError(
            fmt::format("normal-form basis symplectic residual {:.3e}", sympl), cond);
    }
    return result;
}

ChevalleySplit jordan_chevalley(const LieGenerator& k) {
    return chevalley_split(symplectic_normal_form(k), k);
}

ChevalleySplit chevalley_split(const NormalFormResult& nf, const LieGenerator& k) {
    int dim = static_cast<int>(k.k.rows());
    int n_modes = dim / 2;
    Eigen::MatrixXd imag_normal = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& desc : nf.blocks) {
        int f = desc.first_mode;
        int m = desc.mode_count;
        double nu = desc.eigenvalue.imag() * desc.scale;
        switch (desc.class_c) {
            case 2: {
                // Rotation part of the diagonal blocks only.
                Eigen::MatrixXd i_i = Eigen::MatrixXd::Zero(m, m);
                for (int b = 0; b < desc.jordan_dim; ++b) {
                    i_i(2 * b, 2 * b + 1) = nu;
                    i_i(2 * b + 1, 2 * b) = -nu;
                }
                imag_normal.block(f, f, m, m) = i_i;
                imag_normal.block(n_modes + f, n_modes + f, m, m) = -i_i.transpose();
                break;
            }
            case 5: {
                // Anti-diagonal nu entries only; the unit entries are nilpotent.
                Eigen::MatrixXd i_r = Eigen::MatrixXd::Zero(m, m);
                int d = desc.jordan_dim;
                for (int i = 1; i <= d; ++i) {
                    i_r(i - 1, d - i) = desc.sigma * nu;
                }
                imag_normal.block(f, n_modes + f, m, m) = i_r;
                imag_normal.block(n_modes + f, f, m, m) = -i_r;
                break;
            }
            case 6: {
                BlockTriple triple = block_matrices(desc);
                imag_normal.block(f, n_modes + f, m, m) = triple.i_r;
                imag_normal.block(n_modes + f, f, m, m) = triple.i_l;
                break;
            }
            default:
                break;
        }
    }
    KahlerStructure standard = standard_kahler(n_modes, Statistics::Bosonic);
    Eigen::MatrixXd s_inv = nf.s.partialPivLu().solve(Eigen::MatrixXd::Identity(dim, dim));
    Eigen::MatrixXd k_imag = nf.s * imag_normal * s_inv;
    // Exact reality: symmetrize the generating quadratic form.
    Eigen::MatrixXd h = standard.omega_inv * k_imag;
    h = 0.5 * (h + h.transpose()).eval();
    ChevalleySplit split;
    split.k_imag = standard.omega * h;
    split.k_rest = k.k - split.k_imag;
    return split;
}

NormalFormResult rescale_c3_blocks(const NormalFormResult& nf, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("rescale parameter must be positive");
    }
    int dim = static_cast<int>(nf.s.rows());
    int n_modes = dim / 2;
    Eigen::VectorXd diag = Eigen::VectorXd::Ones(dim);
    NormalFormResult out = nf;
    for (auto& desc : out.blocks) {
        if (desc.class_c != 3) continue;
        for (int i = 0; i < desc.mode_count; ++i) {
            double exponent = (desc.jordan_dim - 1) / 2.0 - i;
            diag(desc.first_mode + i) = std::pow(epsilon, exponent);
            diag(n_modes + desc.first_mode + i) = std::pow(epsilon, -exponent);
        }
        desc.scale *= epsilon;
    }
    out.s = nf.s * diag.asDiagonal();
    out.k_normal = assemble_normal(out.blocks, n_modes);
    return out;
}

ContinuityReport continuity_certificate(const Eigen::MatrixXd& k_rest,
                                        const Eigen::MatrixXd& j_tilde, int grid) {
    if (grid < 2) {
        throw std::invalid_argument("certificate grid needs at least two points");
    }
    ContinuityReport report;
    report.grid = grid;
    report.min_distance = std::numeric_limits<double>::infinity();
    Eigen::VectorXcd previous;
    for (int step = 0; step <= grid; ++step) {
        double t = static_cast<double>(step) / grid;
        Eigen::MatrixXd m_t = (t * k_rest).exp();
        Eigen::MatrixXd c_t = 0.5 * (m_t - j_tilde * m_t * j_tilde);
        Eigen::VectorXcd values = bar_eigenvalues(c_t, j_tilde);
        for (int i = 0; i < values.size(); ++i) {
            Complex z = values(i);
            double dist = z.real() < 0.0 ? std::abs(z.imag()) : std::abs(z);
            report.min_distance = std::min(report.min_distance, dist);
        }
        if (previous.size() == values.size()) {
            // Nearest-neighbour matching between consecutive spectra.
            std::vector<bool> taken(values.size(), false);
            for (int i = 0; i < previous.size(); ++i) {
                int best = -1;
                double best_dist = std::numeric_limits<double>::infinity();
                for (int j = 0; j < values.size(); ++j) {
                    if (taken[j]) continue;
                    double dist = std::abs(values(j) - previous(i));
                    if (dist < best_dist) {
                        best_dist = dist;
                        best = j;
                    }
                }
                if (best < 0) continue;
                taken[best] = true;
                Complex a = previous(i);
                Complex b = values(best);
                if (a.real() < 0.0 && b.real() < 0.0 && a.imag() * b.imag() < 0.0) {
                    ++report.crossings;
                }
            }
        }
        previous = values;
    }
    report.rescale_needed = report.min_distance <= kCutSafety;
    return report;
}

}  // namespace metaspin
