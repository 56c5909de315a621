// Copyright 2026 The liospec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch_amalgamated.hpp>

#include <random>

#include "liospec/perturbation.hpp"
#include "liospec/spin_model.hpp"
#include "oracles.hpp"

using namespace liospec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// entries in the orthonormal Hermite frame, where rounding is not amplified by N_j / N_k
MatrixXr orthonormal_frame(const MatrixXr& m) {
  MatrixXr r = m;
  for (Eigen::Index k = 0; k < m.rows(); ++k)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      r(k, j) *= std::exp(detail::log_hermite_norm(int(k)) - detail::log_hermite_norm(int(j)));
  return r;
}

}  // namespace

TEST_CASE("hermitian basis is already biorthonormal", "[pt]") {
  MatrixXc h = oracle::random_dense(6, 3);
  h = (h + h.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h);
  const MatrixXc u = es.eigenvectors();
  const auto b = biorthonormalize(u, u);
  CHECK((b.left - u).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b.right - u).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("biorthonormal pair of a 2x2 non-normal matrix", "[pt]") {
  // [[0, 1], [0, -1]]: right (1, 0), (1, -1); left (1, 1), (0, 1)
  MatrixXc r(2, 2), l(2, 2);
  r << 1.0, 1.0, 0.0, -1.0;
  l << 2.0, 0.0, 2.0, -3.0;
  const auto b = biorthonormalize(r, l, {cplx(0.0), cplx(-1.0)});
  CHECK_THAT(std::abs(b.left(0, 0) - 1.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(std::abs(b.left(1, 0) - 1.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(std::abs(b.left(0, 1)), WithinAbs(0.0, 1e-15));
  CHECK_THAT(std::abs(b.left(1, 1) + 1.0), WithinAbs(0.0, 1e-15));
  MatrixXc a(2, 2);
  a << 0.0, 1.0, 0.0, -1.0;
  CHECK((b.left.adjoint() * a * b.right - MatrixXc(VectorXc(Eigen::Vector2cd(0.0, -1.0)).asDiagonal())).norm() < 1e-15);

  MatrixXc swapped = l;
  swapped.col(0).swap(swapped.col(1));
  CHECK_THROWS_AS(biorthonormalize(r, swapped), NumericalError);
  CHECK_THROWS_AS(biorthonormalize(r, MatrixXc(l.leftCols(1))), ValidationError);
}

TEST_CASE("perturbation theory on closed-form cases", "[pt]") {
  MatrixXc a = MatrixXc::Zero(2, 2), v(2, 2);
  a(1, 1) = -1.0;
  v << 0.0, 1.0, 1.0, 0.0;
  const auto b = biorthogonal_basis(a);
  const Eigen::Index i = std::abs(b.eigenvalues[0]) < 0.5 ? 0 : 1;
  const auto c = pt_corrections(b, v, i);
  CHECK_THAT(std::abs(c.first), WithinAbs(0.0, 1e-15));
  CHECK_THAT(std::abs(c.second - 1.0), WithinAbs(0.0, 1e-14));
  for (double eps : {1e-2, 1e-3}) {
    const double exact = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * eps * eps));
    CHECK(std::abs(exact - eps * eps * c.second.real()) < 3.0 * std::pow(eps, 4));
  }
  const auto u = pt_corrections(b, MatrixXc::Identity(2, 2), i);
  CHECK_THAT(std::abs(u.first - 1.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(std::abs(u.second), WithinAbs(0.0, 1e-15));
}

TEST_CASE("second-order error is third order in eps", "[pt][oracle]") {
  const MatrixXc a = oracle::random_dense(8, 11), v = oracle::random_dense(8, 12);
  const auto b = biorthogonal_basis(a);
  for (Eigen::Index i = 0; i < 8; ++i) {
    const auto c = pt_corrections(b, v, i);
    const cplx l0 = b.eigenvalues[static_cast<std::size_t>(i)];
    std::vector<double> le, lr;
    for (double eps : {4e-3, 2e-3, 1e-3, 5e-4}) {
      const auto ex = eig_dense(MatrixXc(a + eps * v)).values;
      const cplx pred = l0 + eps * c.first + eps * eps * c.second;
      double best = 1e300;
      for (const auto& z : ex) best = std::min(best, std::abs(z - pred));
      le.push_back(std::log(eps));
      lr.push_back(std::log(best));
    }
    INFO("index " << i);
    CHECK(oracle::slope(le, lr) >= 2.8);
  }
}

TEST_CASE("degenerate eigenvalues are refused", "[pt]") {
  MatrixXc a = MatrixXc::Zero(3, 3);
  a(2, 2) = -1.0;
  const auto b = biorthonormalize(MatrixXc::Identity(3, 3), MatrixXc::Identity(3, 3), {cplx(0.0), cplx(0.0), cplx(-1.0)});
  CHECK_THROWS_AS(pt_corrections(b, MatrixXc::Ones(3, 3), 0), DegeneracyError);
  CHECK_NOTHROW(pt_corrections(b, MatrixXc::Ones(3, 3), 2));
  CHECK_THROWS_AS(pt_corrections(b, MatrixXc::Ones(2, 2), 2), ValidationError);
}

TEST_CASE("Hermite-basis quadrature", "[pt][limit-cycle]") {
  // identity operator gives <chi_k|psi_j> = delta
  const MatrixXr id = detail::hermite_matrix([](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 1.0; }, 16, 64);
  CHECK((orthonormal_frame(id) - MatrixXr::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-12);
  const auto [x, w] = detail::gauss_hermite(64);
  CHECK_THAT(w.sum(), WithinRel(std::sqrt(kPi), 1e-14));
  CHECK_THAT((w.array() * x.array().square()).sum(), WithinRel(std::sqrt(kPi) / 2.0, 1e-13));

  for (double g : {1.5, 2.0, 4.0}) {
    const auto m = limit_cycle_matrices(g, 1, 14);
    MatrixXr want = MatrixXr::Zero(14, 14);
    for (int j = 0; j < 14; ++j) want(j, j) = m.unperturbed[static_cast<std::size_t>(j)].real();
    CHECK((orthonormal_frame(m.A) - want).cwiseAbs().maxCoeff() < 1e-12 * 14 * (g - 1.0) / std::sqrt(g));
    // V1 maps even to odd: entries with k - j even vanish
    const MatrixXr v1 = orthonormal_frame(m.V1);
    double even = 0.0, odd = 0.0;
    for (int k = 0; k < 14; ++k)
      for (int j = 0; j < 14; ++j) ((k - j) % 2 == 0 ? even : odd) = std::max((k - j) % 2 == 0 ? even : odd, std::abs(v1(k, j)));
    CHECK(even < 1e-10 * odd);
  }
}

TEST_CASE("limit-cycle branch corrections", "[pt][limit-cycle]") {
  const auto l0 = limit_cycle_correction(2.0, 0);
  CHECK_THAT(l0.first, WithinAbs(2.0, 1e-10));
  CHECK_THAT(l0.second, WithinAbs(-2.0, 1e-10));
  CHECK_THAT(std::abs(l0.value()), WithinAbs(0.0, 1e-10));
  for (int l : {1, 2, 3}) {
    const auto c = limit_cycle_correction(2.0, l);
    CHECK_THAT(c.first, WithinAbs((4.0 - l * l) / 2.0, 1e-10));
    CHECK_THAT(c.second, WithinAbs(-2.0, 1e-10));
    CHECK_THAT(c.value().real(), WithinAbs(-l * l / 2.0, 1e-10));
  }
  const double pre = -4.0 / (4.0 * std::pow(2.0, 0.25));
  CHECK_THAT(l0.v1_column[1], WithinAbs(2.0 * pre, 1e-12));
  CHECK_THAT(l0.v1_column[3], WithinAbs(pre, 1e-12));
  for (int k : {0, 2, 4, 5, 6, 7}) CHECK_THAT(l0.v1_column[k], WithinAbs(0.0, 1e-12));

  for (double g : {1.2, 1.5, 3.0, 5.0, 10.0}) {
    // V1 alone does not shift the head at first order
    const auto m = limit_cycle_matrices(g, 2, 12);
    const MatrixXc id = MatrixXc::Identity(12, 12);
    const auto b = biorthonormalize(id, id, m.unperturbed);
    CHECK_THAT(std::abs(pt_corrections(b, m.V1.cast<cplx>(), 0).first), WithinAbs(0.0, 1e-12));
    for (int l : {0, 1, 2})
      CHECK_THAT(limit_cycle_correction(g, l).value().real(),
                 WithinAbs(-l * l * (g * g - 4.0 * g + 5.0) / (2.0 * (g - 1.0)), 1e-9 * (1.0 + l * l) * g));
  }
  CHECK_THAT(limit_cycle_branch(400.0, 2.0, 1).real(), WithinAbs(-0.5 / 400.0, 1e-12));
  CHECK_THROWS_AS(limit_cycle_correction(0.9, 1), ValidationError);
  CHECK_THROWS_AS(limit_cycle_correction(2.0, 1, 8), ValidationError);
}

TEST_CASE("head of the l = 1 block approaches the perturbative curvature", "[pt][oracle]") {
  std::vector<double> sre;
  for (double S : {100.0, 200.0, 400.0}) {
    const auto sp = block_spectrum(build_block({S, 2.0}, 1), {false});
    sre.push_back(S * sp.values.front().real());
  }
  // S Re = c + d/S + ...; two Richardson levels
  const double r1 = 2.0 * sre[1] - sre[0], r2 = 2.0 * sre[2] - sre[1];
  const double lim = (4.0 * r2 - r1) / 3.0;
  CHECK_THAT(lim, WithinRel(-0.5, 0.05));
  CHECK_THAT(r2, WithinRel(-0.5, 0.05));
}
