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

#include "liospec/classical.hpp"
#include "liospec/fokker_planck.hpp"
#include "liospec/spin_model.hpp"
#include "oracles.hpp"

using namespace liospec;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double d1(const std::function<double(double)>& f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}
double d2(const std::function<double(double)>& f, double x, double h = 1e-4) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

double nearest(const std::vector<cplx>& v, cplx z) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : v) best = std::min(best, std::abs(w - z));
  return best;
}

}  // namespace

TEST_CASE("coefficients at the equator", "[fp]") {
  for (double g : {0.0, 0.7, 3.0})
    for (int l : {0, 1, 4}) {
      const auto c = fp_coefficients(kPi / 2, 25.0, g, l);
      CHECK_THAT(c.g0, WithinAbs(-g * l * l / 50.0, 1e-14));
      CHECK_THAT(c.g1, WithinAbs(1.0, 1e-14));
      CHECK_THAT(c.g2, WithinAbs(1.0 / 50.0, 1e-15));
    }
  CHECK_THROWS_AS(fp_coefficients(0.0, 10.0, 1.0, 0), ValidationError);
  CHECK_THROWS_AS(fp_coefficients(kPi, 10.0, 1.0, 0), ValidationError);
}

TEST_CASE("coefficients are a divergence form on the sphere", "[fp][oracle]") {
  // L f = (1/sin) (A f' + B f)' + V f with A = sin g2, B = sin^2 (1 - gamma cos^2)
  const double S = 7.0;
  for (double g : {0.0, 0.5, 2.0})
    for (double th : {0.3, 1.1, 2.0, 2.9}) {
      auto A = [&](double t) { return std::sin(t) * (1.0 + g * std::cos(t) * std::cos(t)) / (2.0 * S); };
      auto B = [&](double t) { return std::sin(t) * std::sin(t) * (1.0 - g * std::cos(t) * std::cos(t)); };
      const auto c = fp_coefficients(th, S, g, 0);
      const double s = std::sin(th);
      CHECK_THAT(c.g2, WithinAbs(A(th) / s, 1e-14));
      CHECK_THAT(c.g1, WithinAbs((d1(A, th) + B(th)) / s, 1e-8));
      CHECK_THAT(c.g0, WithinAbs(d1(B, th) / s, 1e-8));
      CHECK(c.g2 > 0.0);
    }
}

TEST_CASE("large-S coefficients reduce to the classical drift", "[fp][oracle]") {
  // Liouville: rho_t = -(1/sin) d/dtheta (sin thetadot rho), thetadot = -(ds_z/dt)/sin
  const double g = 1.6;
  auto thdot = [&](double t) { return -spin_flow(std::cos(t), 0.0, g).first / std::sin(t); };
  auto flux = [&](double t) { return std::sin(t) * thdot(t); };
  for (double th : {0.4, 1.3, 2.5}) {
    const auto c = fp_coefficients(th, 1e12, g, 0);
    CHECK_THAT(c.g1, WithinAbs(-thdot(th), 1e-10));
    CHECK_THAT(c.g0, WithinAbs(-d1(flux, th) / std::sin(th), 1e-8));
  }
}

TEST_CASE("theta operator structure", "[fp]") {
  const auto op = discretize_fp(15.0, 1.4, 0, 400, {false});
  REQUIRE(op.size() == 400);
  CHECK(op.grid[0] > 0.0);
  CHECK(op.grid[399] < kPi);
  CHECK_THAT(op.grid[0], WithinAbs(0.5 * kPi / 400, 1e-15));
  for (Eigen::Index k = 1; k < op.size(); ++k) CHECK(op.grid[k] > op.grid[k - 1]);
  CHECK(op.boundary == FpBoundary::PoleRegularized);

  // conservation: weights annihilate from the left; all-ones on the mass form
  const MatrixXr a = op.matrix.dense();
  const double scale = a.cwiseAbs().maxCoeff();
  CHECK((op.weights.transpose() * a).cwiseAbs().maxCoeff() < 1e-8 * scale * op.weights.maxCoeff());
  const MatrixXr m = op.mass_form().dense();
  CHECK(m.colwise().sum().cwiseAbs().maxCoeff() < 1e-8 * scale);

  const auto sp = fp_spectrum(op, 3);
  CHECK(std::abs(sp.values.front()) < 1e-8);
  CHECK(sp.is_sorted());
  CHECK((op.matrix.apply(fp_null_vector(op))).cwiseAbs().maxCoeff() < 1e-9 * scale);

  CHECK_THROWS_AS(discretize_fp(15.0, 1.4, 0, 99), ValidationError);
  CHECK_THROWS_AS(discretize_fp(15.0, -1.0, 0, 400), ValidationError);
}

TEST_CASE("under-resolved grids are flagged", "[fp]") {
  CHECK_THROWS_AS(discretize_fp(300.0, 0.5, 0, 100), ResolutionError);
  CHECK_NOTHROW(discretize_fp(300.0, 0.5, 0, 2000));
}

TEST_CASE("slow theta-operator modes sit on the fixed-point wedge", "[fp][scaling]") {
  const double g = 0.5;
  for (int l : {0, 1}) {
    const auto sp = fp_spectrum(discretize_fp(300.0, g, l, 2000), 10);
    for (int j : {0, 1}) {
      const cplx want(-(1.0 - g) * (l + 2 * j), l);
      INFO("l = " << l << ", j = " << j);
      CHECK(nearest(sp.values, want) <= 0.02);
    }
  }
}

TEST_CASE("Richardson order of the theta operator", "[fp][convergence]") {
  std::vector<VectorXr> lam;
  const std::vector<int> ns{250, 500, 1000, 2000};
  for (int n : ns) {
    const auto sp = fp_spectrum(discretize_fp(20.0, 0.5, 1, n, {false}), 10);
    VectorXr v(10);
    for (int j = 0; j < 10; ++j) v[j] = sp.values[static_cast<std::size_t>(j)].real();
    lam.push_back(v);
  }
  // successive differences shrink by 2^p
  std::vector<double> lh, le;
  for (std::size_t i = 0; i + 1 < lam.size(); ++i) {
    lh.push_back(std::log(kPi / ns[i]));
    le.push_back(std::log((lam[i] - lam[i + 1]).cwiseAbs().maxCoeff()));
  }
  CHECK_THAT(oracle::slope(lh, le), WithinAbs(2.0, 0.2));
}

TEST_CASE("discrete steady state matches the closed form", "[fp][steady]") {
  for (double g : {0.5, 2.0}) {
    const auto op = discretize_fp(20.0, g, 0, 2000);
    const VectorXr f = fp_null_vector(op);
    VectorXr cf(op.size());
    for (Eigen::Index k = 0; k < op.size(); ++k) cf[k] = steady_state_closed_form(op.grid[k], 20.0, g);
    const VectorXr fn = f / op.weights.dot(f), cn = cf / op.weights.dot(cf);
    CHECK((fn - cn).cwiseAbs().maxCoeff() / cn.cwiseAbs().maxCoeff() <= 1e-3);

    // the same vector from the eigensolver
    const auto sp = fp_spectrum(op, 1, true);
    VectorXr v = sp.right->col(0).real();
    v /= op.weights.dot(v);
    CHECK((v - cn).cwiseAbs().maxCoeff() / cn.cwiseAbs().maxCoeff() <= 1e-3);
  }
}

TEST_CASE("closed-form steady state", "[fp][steady]") {
  VectorXr th = VectorXr::LinSpaced(20001, 0.0, kPi);
  Eigen::Index k;
  VectorXr f(th.size());
  for (Eigen::Index i = 0; i < th.size(); ++i) f[i] = steady_state_closed_form(th[i], 20.0, 2.0);
  f.maxCoeff(&k);
  CHECK_THAT(th[k], WithinAbs(kPi / 4.0, kPi / 20000));
  CHECK_THAT(f[k], WithinAbs(1.0, 1e-6));

  for (Eigen::Index i = 0; i < th.size(); ++i) f[i] = steady_state_closed_form(th[i], 20.0, 0.5);
  f.maxCoeff(&k);
  CHECK(k == 0);
  CHECK_THAT(steady_state_width(300.0, 0.5), WithinRel(std::sqrt(3.0 / 300.0), 0.05));
  CHECK_THAT(steady_state_width(400.0, 1.0) / steady_state_width(100.0, 1.0), WithinRel(std::pow(0.25, 0.25), 0.10));

  // gamma -> 0 is continuous and reduces to e^{2S cos}
  for (double t : {0.1, 1.0, 2.5}) {
    const double at0 = steady_state_log(t, 10.0, 0.0) - steady_state_log(0.0, 10.0, 0.0);
    CHECK_THAT(at0, WithinAbs(20.0 * (std::cos(t) - 1.0), 1e-12));
    const double small = steady_state_log(t, 10.0, 1e-9) - steady_state_log(0.0, 10.0, 1e-9);
    CHECK_THAT(small, WithinAbs(at0, 1e-6));
    const double above = steady_state_log(t, 10.0, 1.1e-8) - steady_state_log(0.0, 10.0, 1.1e-8);
    const double below = steady_state_log(t, 10.0, 0.9e-8) - steady_state_log(0.0, 10.0, 0.9e-8);
    CHECK_THAT(above, WithinAbs(below, 1e-6));
  }

  // normalization by adaptive quadrature against a plain trapezoid
  for (double g : {0.5, 2.0}) {
    const VectorXr grid = VectorXr::LinSpaced(200001, 0.0, kPi);
    double acc = 0.0;
    for (Eigen::Index i = 0; i + 1 < grid.size(); ++i) {
      auto w = [&](double t) { return steady_state_closed_form(t, 30.0, g) * std::sin(t); };
      acc += 0.5 * (w(grid[i]) + w(grid[i + 1])) * (grid[i + 1] - grid[i]);
    }
    CHECK_THAT(steady_state_normalization(30.0, g), WithinRel(2.0 * kPi * acc, 1e-8));
  }
}

TEST_CASE("scaled fixed-point modes", "[fp][scaled]") {
  const auto m00 = scaled_fixed_point_modes(0.5, 0, 0);
  CHECK(m00.eigenvalue == cplx(0.0, 0.0));
  for (double r : {0.0, 0.5, 1.7}) CHECK_THAT(m00.f(r), WithinAbs(std::exp(-r * r), 1e-15));
  CHECK(scaled_fixed_point_modes(0.5, 1, 0).eigenvalue == cplx(-0.5, 1.0));

  for (double g : {0.0, 0.5, 0.8})
    for (int l : {0, 1, 2, -3})
      for (int j : {0, 1, 3, 25}) {
        const auto m = scaled_fixed_point_modes(g, l, j);
        const double mu = (m.eigenvalue - cplx(0.0, l)).real();
        const double nrm = std::abs(m.f(std::sqrt(0.5 * (std::abs(l) + 1.0)))) + 1.0;
        for (double r : {0.4, 0.9, 1.6, 2.3}) {
          const double op = (1.0 - g) * (0.5 * d2(m.f, r) + (r + 0.5 / r) * d1(m.f, r) + (2.0 - l * l / (2.0 * r * r)) * m.f(r));
          INFO("gamma = " << g << ", l = " << l << ", j = " << j << ", r = " << r);
          CHECK(std::abs(op - mu * m.f(r)) <= 1e-6 * nrm * (1.0 + j * j));
        }
      }
  CHECK_THROWS_AS(scaled_fixed_point_modes(1.0, 0, 0), ValidationError);
}

TEST_CASE("scaled limit-cycle modes", "[fp][scaled]") {
  for (int l : {0, 1, 5}) CHECK(scaled_limit_cycle_modes(3.0, l, 0).eigenvalue.real() == 0.0);
  CHECK_THAT(scaled_limit_cycle_modes(2.0, 0, 1).eigenvalue.real(), WithinAbs(-std::sqrt(2.0), 1e-15));
  for (double g : {1.5, 2.0, 6.0})
    for (int j : {0, 1, 2, 7, 20}) {
      const auto m = scaled_limit_cycle_modes(g, 2, j);
      const double mu = m.eigenvalue.real();
      const double scale = std::abs(std::hermite(static_cast<unsigned>(j), 1.0)) + 1.0;
      for (double x : {-1.2, -0.3, 0.4, 1.5}) {
        const double op = (g - 1.0) / std::sqrt(g) * (d2(m.f, x) + 2.0 * x * d1(m.f, x) + 2.0 * m.f(x));
        CHECK(std::abs(op - mu * m.f(x)) <= 1e-6 * scale * (1.0 + j * j));
      }
    }
  CHECK_THROWS_AS(scaled_limit_cycle_modes(1.0, 0, 0), ValidationError);
}

TEST_CASE("FP and Lindblad spectra agree at moderate S", "[fp][oracle]") {
  const double S = 40.0, tol = std::max(0.05, 5.0 / S);
  for (double g : {0.5, 2.0})
    for (int l : {0, 1}) {
      const auto fp = fp_spectrum(discretize_fp(S, g, l, 2000), 5).values;
      const auto lb = block_spectrum(build_block({S, g}, l), {false}).values;
      INFO("gamma = " << g << ", l = " << l);
      for (const auto& z : fp) CHECK(nearest(lb, z) <= tol);
      for (std::size_t j = 0; j < 5; ++j) CHECK(nearest(fp, lb[j]) <= tol);
    }
}

TEST_CASE("bifurcation operator: raw and hermitian forms", "[fp][bifurcation]") {
  for (int l : {0, 1, 2}) {
    const auto raw = bifurcation_operator(l, 12.0, 600, FpForm::Raw);
    const auto her = bifurcation_operator(l, 12.0, 600, FpForm::Hermitian);
    CHECK(her.matrix.sub == her.matrix.sup);
    CHECK(raw.boundary == FpBoundary::ZeroFlux);
    const VectorXr a = bifurcation_eigenvalues(raw, 30), b = bifurcation_eigenvalues(her, 30);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, b.cwiseAbs().maxCoeff()));
    // independent: dense nonsymmetric solve of the raw matrix
    Eigen::EigenSolver<MatrixXr> es(raw.matrix.dense(), false);
    std::vector<double> ev;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(-es.eigenvalues()[i].real());
    std::sort(ev.begin(), ev.end());
    for (int n = 0; n < 10; ++n) CHECK_THAT(ev[static_cast<std::size_t>(n)], WithinAbs(b[n], 1e-6 * std::max(1.0, b[n])));
  }
  CHECK_THROWS_AS(bifurcation_operator(0, 12.0, 499), ValidationError);
  CHECK_THROWS_AS(bifurcation_operator(0, 5.0, 1000), ValidationError);
}

TEST_CASE("bifurcation steady state", "[fp][bifurcation]") {
  const auto b = bifurcation_basis(0, 14.0, 2000, 3);
  CHECK(std::abs(b.eps[0]) < 1e-8);
  for (Eigen::Index k = 0; k < b.x.size() && b.x[k] < 6.0; k += 29)
    CHECK_THAT(b.right(k, 0), WithinRel(std::exp(-0.5 * b.x[k] * b.x[k]) / std::sqrt(kPi / 2.0), 1e-3));
  const auto raw = bifurcation_operator(0, 14.0, 2000, FpForm::Raw);
  CHECK(std::abs(raw.weights.dot(raw.matrix.apply(VectorXr(raw.grid.array().sin())))) < 1e-8);
}

TEST_CASE("zeta constant of the bifurcation spectrum", "[fp][bifurcation]") {
  for (int l : {0, 1}) {
    const VectorXr e = bifurcation_eigenvalues(bifurcation_operator(l, 25.0, 4000), 201);
    INFO("l = " << l);
    CHECK_THAT(fit_zeta(e, 20, 200), WithinAbs(kZeta, 0.05));
  }
}

TEST_CASE("eigenfunction moments and expansion coefficients", "[fp][bifurcation]") {
  const auto b = bifurcation_basis(0, 25.0, 4000, 250);
  const double zeta = fit_zeta(b.eps, 20, 200);
  CHECK_THAT(eigenfunction_moments(b, 100, 0.0), WithinAbs(1.0, 1e-12));
  CHECK_THAT(eigenfunction_moments(b, 100, 1.0), WithinRel(std::cbrt(kZeta) * 10.0, 0.10));
  CHECK_THAT(eigenfunction_moments(b, 100, 2.0), WithinRel(std::pow(std::cbrt(kZeta) * 10.0, 2.0), 0.15));
  CHECK_THROWS_AS(eigenfunction_moments(b, 100, -1.0), ValidationError);

  VectorXr c = expansion_coefficients(b.right.col(0), b);
  CHECK_THAT(c[0], WithinAbs(1.0, 1e-8));
  CHECK(c.tail(c.size() - 1).cwiseAbs().maxCoeff() < 1e-8);
  c = expansion_coefficients(b.right.col(0) + b.right.col(1), b);
  CHECK_THAT(c[0], WithinAbs(1.0, 1e-8));
  CHECK_THAT(c[1], WithinAbs(1.0, 1e-8));
  CHECK(c.tail(c.size() - 2).cwiseAbs().maxCoeff() < 1e-8);

  // wavepacket f = e^{-2(x - 8)^2}, F = e^{x^2/2} f
  const double x0 = 8.0, xf = 4.0 * x0 / 3.0;
  VectorXr F(b.x.size());
  for (Eigen::Index k = 0; k < F.size(); ++k) F[k] = std::exp(-2.0 * (b.x[k] - x0) * (b.x[k] - x0) + 0.5 * b.x[k] * b.x[k]);
  c = expansion_coefficients(F, b);
  Eigen::Index peak;
  c.cwiseAbs().maxCoeff(&peak);
  const double n0 = std::pow(zeta, -2.0 / 3.0) * xf * xf;
  CHECK_THAT(static_cast<double>(peak), WithinRel(n0, 0.15));
  CHECK_THAT(static_cast<double>(peak), WithinRel(66.0, 0.15));
  // Gaussian profile: log|c_n| is a parabola with curvature -1/dn^2
  std::vector<double> ns, ls;
  for (Eigen::Index n = 0; n < c.size(); ++n)
    if (std::abs(c[n]) > 0.05 * std::abs(c[peak])) {
      ns.push_back(static_cast<double>(n));
      ls.push_back(std::log(std::abs(c[n])));
    }
  MatrixXr A(ns.size(), 3);
  VectorXr y(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    A.row(static_cast<Eigen::Index>(i)) << 1.0, ns[i], ns[i] * ns[i];
    y[static_cast<Eigen::Index>(i)] = ls[i];
  }
  const Eigen::Vector3d q = A.colPivHouseholderQr().solve(y);
  const double dn = 1.0 / std::sqrt(-q[2]);
  const double dn_pred = 2.0 * std::pow(zeta, -2.0 / 3.0) * xf * std::sqrt(2.0 / 3.0);
  CHECK_THAT(dn, WithinRel(dn_pred, 0.15));
  CHECK_THAT(-q[1] / (2.0 * q[2]), WithinRel(n0, 0.15));
  // reconstruction
  CHECK((b.right * c - F).cwiseAbs().maxCoeff() < 1e-8 * F.cwiseAbs().maxCoeff());
}

TEST_CASE("unresolved eigenfunctions are flagged", "[fp][bifurcation]") {
  const auto b = bifurcation_basis(0, 25.0, 500, 201);
  CHECK_THROWS_AS(eigenfunction_moments(b, 200, 1.0), ResolutionError);
  CHECK_NOTHROW(eigenfunction_moments(b, 5, 1.0));
}

TEST_CASE("wavepacket falls toward the origin", "[fp][bifurcation]") {
  const std::vector<double> taus{0.0, 0.05, 0.1, 0.2, 0.3, 0.5};
  const auto p = evolve_bifurcation(8.0, taus);
  REQUIRE(p.times == taus);
  for (std::size_t i = 0; i < taus.size(); ++i) {
    // characteristic of the drift dx/dtau = -2x^2
    CHECK_THAT(p.peak_locations[i], WithinRel(8.0 / (1.0 + 16.0 * taus[i]), 0.05));
    CHECK_THAT(p.widths[i], WithinRel(p.widths[0], 0.20));
  }
  CHECK_THAT(p.widths[0], WithinRel(2.0 * std::sqrt(0.5 * std::log(2.0)), 1e-3));
  for (std::size_t i = 1; i < taus.size(); ++i) {
    INFO("tau = " << taus[i]);
    CHECK_THAT(p.peak_locations[i], WithinRel(0.5 / taus[i], 0.10));
  }
}

TEST_CASE("wavepacket relaxes to the stationary profile", "[fp][bifurcation]") {
  BifurcationEvolveOptions o;
  o.n_grid = 2000;
  o.dt = 2e-4;
  const auto s = evolve_bifurcation_states(8.0, {6.0}, o).back();
  const auto raw = bifurcation_operator(0, o.x_max, o.n_grid, FpForm::Raw);
  const VectorXr pi = fp_null_vector(raw);
  const VectorXr a = s.f / raw.weights.dot(s.f), b = pi / raw.weights.dot(pi);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-4 * b.maxCoeff());
  // conservation of mass
  const auto s0 = evolve_bifurcation_states(8.0, {0.0}, o).back();
  CHECK_THAT(raw.weights.dot(s.f), WithinRel(raw.weights.dot(s0.f), 1e-10));
}

TEST_CASE("stationary distribution does not move", "[fp][sphere]") {
  const auto init = sphere_steady_state(50.0, 2.0, 800);
  CHECK_THAT(init.total(), WithinAbs(1.0, 1e-12));
  const auto out = evolve_sphere(init, 50.0, 2.0, 10.0, 0.02);
  const VectorXc& a = init.modes.at(0);
  const VectorXc& b = out.back().dist.modes.at(0);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-6 * a.cwiseAbs().maxCoeff());
  CHECK_THAT(out.back().t, WithinAbs(10.0, 1e-12));
}

TEST_CASE("wavepacket follows the classical flow and dephases", "[fp][sphere]") {
  const double S = 50.0, g = 2.0;
  const int lmax = static_cast<int>(std::ceil(std::sqrt(160.0 * S)));
  const auto init = sphere_gaussian(800, kPi / 2, 0.0, std::sqrt(0.5 / S), lmax);
  CHECK_THAT(init.total(), WithinAbs(1.0, 1e-12));
  const auto cm0 = center_of_mass(init);
  CHECK_THAT(cm0.first, WithinAbs(kPi / 2, 1e-9));
  CHECK_THAT(cm0.second, WithinAbs(0.0, 1e-12));
  for (std::size_t k = 0; k < 800; k += 37)
    CHECK(init.density(static_cast<Eigen::Index>(k), 1.3) >= -1e-12);

  SphereEvolveOptions opt;
  opt.sample_every = 0.25;
  const auto out = evolve_sphere(init, S, g, 60.0, 0.01, opt);
  const auto cl = integrate_ode_dense(
      [g](double, const VectorXr& y) {
        VectorXr d(1);
        d[0] = spin_flow(std::clamp(y[0], -1.0, 1.0), 0.0, g).first;
        return d;
      },
      VectorXr::Zero(1), {0.0, 60.0}, {1e-12});
  double worst_th = 0.0, worst_phi = 0.0;
  std::vector<double> ts, var;
  for (const auto& s : out) {
    CHECK_THAT(s.dist.total(), WithinAbs(1.0, 1e-6 * std::max(1.0, s.t)));
    const auto [th, ph] = center_of_mass(s.dist);
    if (s.t <= 4.0 * kPi + 1e-9) {
      worst_th = std::max(worst_th, std::abs(th - std::acos(cl.dense.at(s.t)[0])));
      worst_phi = std::max(worst_phi, std::abs(std::remainder(ph + s.t, 2.0 * kPi)));
    }
    if (s.t >= 20.0) {
      ts.push_back(s.t);
      var.push_back(azimuthal_variance(s.dist));
    }
  }
  CHECK(worst_th <= 0.1);
  CHECK(worst_phi <= 0.1);
  const double k = oracle::slope(ts, var);
  CHECK(k > 0.0);
  const double mx = std::accumulate(ts.begin(), ts.end(), 0.0) / ts.size();
  const double my = std::accumulate(var.begin(), var.end(), 0.0) / var.size();
  double ss = 0.0, sr = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    ss += (var[i] - my) * (var[i] - my);
    const double r = var[i] - my - k * (ts[i] - mx);
    sr += r * r;
  }
  CHECK(1.0 - sr / ss >= 0.95);
}

TEST_CASE("sphere evolution validation", "[fp][sphere]") {
  auto d = sphere_gaussian(200, 1.0, 0.0, 0.2, 4);
  CHECK_THROWS_AS(evolve_sphere(d, 10.0, 1.0, 1.0, 0.0), ValidationError);
  d.modes[0] *= 2.0;
  CHECK_THROWS_AS(evolve_sphere(d, 10.0, 1.0, 1.0, 0.1), ValidationError);
  d.modes.erase(0);
  CHECK_THROWS_AS(evolve_sphere(d, 10.0, 1.0, 1.0, 0.1), ValidationError);
  // parallel result equals serial
  const auto g = sphere_gaussian(200, 1.0, 0.3, 0.2, 6);
  SphereEvolveOptions o1, o3;
  o3.workers = 3;
  const auto a = evolve_sphere(g, 10.0, 1.5, 2.0, 0.05, o1).back().dist;
  const auto b = evolve_sphere(g, 10.0, 1.5, 2.0, 0.05, o3).back().dist;
  for (const auto& [l, f] : a.modes) CHECK(f == b.modes.at(l));
}
