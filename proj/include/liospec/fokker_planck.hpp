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

#ifndef LIOSPEC_FOKKER_PLANCK_HPP
#define LIOSPEC_FOKKER_PLANCK_HPP

#include <atomic>
#include <cmath>
#include <functional>
#include <future>
#include <map>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "liospec/numerics.hpp"

namespace liospec {

struct ResolutionError : NumericalError {
  using NumericalError::NumericalError;
};

struct FpCoefficients {
  double g0 = 0.0, g1 = 0.0, g2 = 0.0;
};

// Coefficients of (lambda - il) f = g0 f + g1 f' + g2 f'' in theta.
inline FpCoefficients fp_coefficients(double theta, double S, double gamma, int l) {
  require(theta > 0.0 && theta < kPi, "fp_coefficients: theta must lie strictly between the poles");
  require(S > 0.0 && gamma >= 0.0, "fp_coefficients: invalid S or gamma");
  const double s = std::sin(theta), c = std::cos(theta), t = std::tan(theta);
  const double ll = static_cast<double>(l) * l;
  FpCoefficients g;
  const double c2t = std::cos(2.0 * theta);
  g.g0 = 2.0 * c - ll / (2.0 * S * t * t) - 0.5 * gamma * (std::sin(4.0 * theta) / s + ll * c2t * c2t / (S * s * s));
  g.g1 = s + 1.0 / (2.0 * S * t) - gamma * (s * c * c + (1.0 - 3.0 * c2t) / (4.0 * S * t));
  g.g2 = (1.0 + gamma * c * c) / (2.0 * S);
  return g;
}

enum class FpBoundary { PoleRegularized, ZeroFlux };
enum class FpForm { Raw, Hermitian };

// A real tridiagonal eigenoperator on a 1D grid; the full generator is phase*i + matrix.
// `weights` is the conservation left vector of the l = 0 operator (quadrature weights of the grid).
struct FpOperator {
  VectorXr grid;
  Tridiagonal<double> matrix;
  VectorXr weights;
  int l = 0;
  double S = 0.0, gamma = 0.0;
  FpBoundary boundary = FpBoundary::PoleRegularized;
  FpForm form = FpForm::Raw;
  double phase = 0.0;

  Eigen::Index size() const { return grid.size(); }

  // W A W^{-1}: acts on masses w_k f_k, annihilated from the left by the all-ones vector when l = 0.
  Tridiagonal<double> mass_form() const {
    Tridiagonal<double> m = matrix;
    for (Eigen::Index k = 0; k + 1 < size(); ++k) {
      m.sup[k] *= weights[k] / weights[k + 1];
      m.sub[k] *= weights[k + 1] / weights[k];
    }
    return m;
  }
};

namespace detail {

// x / (e^x - 1)
inline double bernoulli(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - 0.5 * x;
  if (x > 700.0) return 0.0;
  return x / std::expm1(x);
}

// Exponentially fitted flux a f' + b f between two cells: J = (a/d)[B(-P) f_right - B(P) f_left], P = b d / a.
struct FaceFlux {
  double left = 0.0, right = 0.0;  // J = right * f_{k+1} - left * f_k
  double peclet = 0.0;
};

inline FaceFlux sg_face(double a, double b, double d) {
  const double p = b * d / a;
  return {a / d * bernoulli(p), a / d * bernoulli(-p), p};
}

inline VectorXr theta_grid(int n) {
  VectorXr th(n);
  for (int k = 0; k < n; ++k) th[k] = (k + 0.5) * kPi / n;
  return th;
}

inline FpOperator theta_operator(double S, double gamma, int l, int n) {
  const double h = kPi / n;
  FpOperator op;
  op.grid = theta_grid(n);
  op.l = l;
  op.S = S;
  op.gamma = gamma;
  op.phase = l;
  op.boundary = FpBoundary::PoleRegularized;
  op.weights = op.grid.array().sin() * h;
  op.matrix.diag = VectorXr::Zero(n);
  op.matrix.sub.resize(n - 1);
  op.matrix.sup.resize(n - 1);
  // divergence form: L f = (1/sin) d/dtheta [A f' + B f] + V f
  for (int k = 0; k + 1 < n; ++k) {
    const double tf = (k + 1) * h, s = std::sin(tf), c = std::cos(tf);
    const double a = s * (1.0 + gamma * c * c) / (2.0 * S);
    const double b = s * s * (1.0 - gamma * c * c);
    const FaceFlux j = sg_face(a, b, h);
    const double wl = op.weights[k], wr = op.weights[k + 1];
    op.matrix.sup[k] = j.right / wl;
    op.matrix.diag[k] -= j.left / wl;
    op.matrix.sub[k] = j.left / wr;
    op.matrix.diag[k + 1] -= j.right / wr;
  }
  if (l != 0) {
    const double ll = static_cast<double>(l) * l;
    for (int k = 0; k < n; ++k) {
      const double th = op.grid[k], s = std::sin(th), t = std::tan(th), c2 = std::cos(2.0 * th);
      op.matrix.diag[k] += -ll / (2.0 * S * t * t) - gamma * ll * c2 * c2 / (2.0 * S * s * s);
    }
  }
  return op;
}

inline VectorXr real_spectrum_desc(const Tridiagonal<double>& t) {
  const auto s = symmetrize(t);
  VectorXr v = symmetric_tridiagonal_eig(s.diag, s.off, false).values;
  return v.reverse();
}

}  // namespace detail

struct DiscretizeOptions {
  bool check_resolution = true;
  int probe_modes = 10;
  double drift_tol = 0.01;
};

// Half-offset theta grid, exponentially fitted conservative fluxes (central differences as P -> 0).
inline FpOperator discretize_fp(double S, double gamma, int l, int n_grid, const DiscretizeOptions& opt = {}) {
  require(S > 0.0 && std::isfinite(S), "discretize_fp: S must be positive");
  require(std::isfinite(gamma) && gamma >= 0.0, "discretize_fp: gamma must be nonnegative");
  require(n_grid >= 100, "discretize_fp: n_grid must be at least 100");
  FpOperator op = detail::theta_operator(S, gamma, l, n_grid);
  if (opt.check_resolution) {
    const VectorXr fine = detail::real_spectrum_desc(op.matrix);
    const VectorXr coarse = detail::real_spectrum_desc(detail::theta_operator(S, gamma, l, n_grid / 2).matrix);
    const Eigen::Index m = std::min<Eigen::Index>(opt.probe_modes, coarse.size());
    const double scale = fine.head(m).cwiseAbs().maxCoeff();
    double worst = 0.0;
    for (Eigen::Index j = 0; j < m; ++j)
      worst = std::max(worst, std::abs(fine[j] - coarse[j]) / std::max(std::abs(fine[j]), 0.1 * scale));
    if (worst > opt.drift_tol)
      throw ResolutionError("discretize_fp: slow eigenvalues drift by " + sci(worst) + " between n_grid = " +
                            std::to_string(n_grid) + " and " + std::to_string(n_grid / 2));
  }
  return op;
}

// The `count` slowest eigenvalues phase*i + mu, mu real (the operator is similar to a symmetric one).
inline Spectrum fp_spectrum(const FpOperator& op, int count = -1, bool vectors = false) {
  const auto s = symmetrize(op.matrix);
  const auto e = symmetric_tridiagonal_eig(s.diag, s.off, false);
  const Eigen::Index n = op.size();
  const Eigen::Index m = count < 0 ? n : std::min<Eigen::Index>(count, n);
  const double sign = op.form == FpForm::Hermitian ? -1.0 : 1.0;  // slowest = largest of the generator
  Spectrum sp;
  MatrixXc right;
  if (vectors) right.resize(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Index idx = sign > 0 ? n - 1 - j : j;
    sp.values.emplace_back(sign * e.values[idx], op.phase);
    if (vectors) {
      // inverse iteration from a generic start; the full vector set is O(n^3)
      VectorXr start(n);
      for (Eigen::Index k = 0; k < n; ++k) start[k] = 1.0 + 0.5 * std::sin(1.618 * static_cast<double>(k * (j + 1)));
      VectorXr v = tridiagonal_eigenvector(op.matrix, e.values[idx], start, 3);
      right.col(j) = v.cast<cplx>();
    }
  }
  if (vectors) sp.right = std::move(right);
  sp.labels.assign(sp.values.size(), BranchLabel{op.l, 0, false});
  sp.sort();
  return sp;
}

// log of the exact null vector of a conservative raw l = 0 operator (zero flux through every face).
inline VectorXr fp_null_log(const FpOperator& op) {
  require(op.l == 0 && op.form == FpForm::Raw, "fp_null_vector: needs the raw l = 0 operator");
  const Eigen::Index n = op.size();
  VectorXr lg(n);
  lg[0] = 0.0;
  // sub[k] w_{k+1} multiplies f_k in the face flux, sup[k] w_k multiplies f_{k+1}
  for (Eigen::Index k = 0; k + 1 < n; ++k)
    lg[k + 1] = lg[k] + std::log(op.matrix.sub[k] * op.weights[k + 1]) - std::log(op.matrix.sup[k] * op.weights[k]);
  return lg.array() - lg.maxCoeff();
}

// Peak-normalized.
inline VectorXr fp_null_vector(const FpOperator& op) { return fp_null_log(op).array().exp(); }

// log f0 up to a constant; the gamma -> 0 limit of (2/sqrt g) atan(sqrt g c) is taken by series.
inline double steady_state_log(double theta, double S, double gamma) {
  require(S > 0.0 && gamma >= 0.0, "steady_state_log: invalid S or gamma");
  const double c = std::cos(theta);
  const double x = std::sqrt(gamma) * c;
  double at;  // (2/sqrt g) atan(sqrt g c)
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    at = 2.0 * c * (1.0 - x2 / 3.0 + x2 * x2 / 5.0);
  } else {
    at = 2.0 / std::sqrt(gamma) * std::atan(x);
  }
  return -2.0 * S * (c - at);
}

inline double steady_state_peak(double gamma) {
  return gamma > 1.0 ? std::acos(1.0 / std::sqrt(gamma)) : 0.0;
}

// Unnormalized closed-form steady state, scaled to 1 at its maximum.
inline double steady_state_closed_form(double theta, double S, double gamma) {
  return std::exp(steady_state_log(theta, S, gamma) - steady_state_log(steady_state_peak(gamma), S, gamma));
}

// 2 pi * integral of steady_state_closed_form * sin(theta) over the sphere.
inline double steady_state_normalization(double S, double gamma) {
  auto f = [&](double th) { return steady_state_closed_form(th, S, gamma) * std::sin(th); };
  const double tc = steady_state_peak(gamma);
  double total = 0.0;
  if (tc > 0.0) total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, tc, 15, 1e-13);
  total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, tc, kPi, 15, 1e-13);
  return 2.0 * kPi * total;
}

// Distance from the peak to the (larger-theta) point where f0 falls to 1/e.
inline double steady_state_width(double S, double gamma) {
  const double tc = steady_state_peak(gamma);
  auto g = [&](double th) { return steady_state_log(th, S, gamma) - steady_state_log(tc, S, gamma) + 1.0; };
  if (g(kPi) > 0.0) throw NumericalError("steady_state_width: distribution does not fall to 1/e");
  std::uintmax_t it = 200;
  const auto r = boost::math::tools::toms748_solve(g, tc, kPi, boost::math::tools::eps_tolerance<double>(50), it);
  return 0.5 * (r.first + r.second) - tc;
}

struct ScaledMode {
  cplx eigenvalue;
  std::function<double(double)> f;
};

// Leading-order modes about the north-pole fixed point; r = theta / dtheta.
inline ScaledMode scaled_fixed_point_modes(double gamma, int l, int j) {
  require(gamma >= 0.0 && gamma < 1.0, "scaled_fixed_point_modes: need 0 <= gamma < 1");
  require(j >= 0, "scaled_fixed_point_modes: j must be nonnegative");
  const unsigned al = static_cast<unsigned>(std::abs(l));
  ScaledMode m;
  m.eigenvalue = cplx(-(1.0 - gamma) * (al + 2.0 * j), l);
  m.f = [al, j](double r) {
    return std::pow(r, al) * std::exp(-r * r) * std::assoc_laguerre(static_cast<unsigned>(j), al, r * r);
  };
  return m;
}

// Leading-order modes about the limit cycle; x = (theta - theta_c) / dtheta.
inline ScaledMode scaled_limit_cycle_modes(double gamma, int l, int j) {
  require(gamma > 1.0, "scaled_limit_cycle_modes: need gamma > 1");
  require(j >= 0, "scaled_limit_cycle_modes: j must be nonnegative");
  ScaledMode m;
  m.eigenvalue = cplx(-2.0 * (gamma - 1.0) / std::sqrt(gamma) * j, l);
  m.f = [j](double x) { return std::exp(-x * x) * std::hermite(static_cast<unsigned>(j), x); };
  return m;
}

// ---- bifurcation operator, x in (0, x_max) on a grid uniform in u = sqrt(x) ----

inline constexpr double kZeta = 2.265;

namespace detail {

struct BifurcationGrid {
  VectorXr x, volume, face_x, face_d;
};

inline BifurcationGrid bifurcation_grid(double x_max, int n) {
  const double du = std::sqrt(x_max) / n;
  BifurcationGrid g;
  g.x.resize(n);
  g.volume.resize(n);
  g.face_x.resize(n - 1);
  g.face_d.resize(n - 1);
  for (int k = 0; k < n; ++k) {
    const double u = (k + 0.5) * du;
    g.x[k] = u * u;
    g.volume[k] = (2.0 * k + 1.0) * du * du;
  }
  for (int k = 0; k + 1 < n; ++k) {
    const double u = (k + 1) * du;
    g.face_x[k] = u * u;
    g.face_d[k] = g.x[k + 1] - g.x[k];
  }
  return g;
}

}  // namespace detail

// Raw: D f = (x f' + 2x^2 f)' - l^2/(4x) f, so that -eps f = D f.
// Hermitian: the symmetric matrix of eps F = -x F'' - F' + (x^3 - 2x + l^2/(4x)) F acting on sqrt(V_k) F(x_k).
inline FpOperator bifurcation_operator(int l, double x_max, int n_grid, FpForm form = FpForm::Hermitian) {
  require(n_grid >= 500, "bifurcation_operator: n_grid must be at least 500");
  require(x_max > 0.0 && std::isfinite(x_max) && std::exp(-0.5 * x_max * x_max) < 1e-12,
          "bifurcation_operator: x_max too small for the e^{-x^2/2} tail");
  const auto g = detail::bifurcation_grid(x_max, n_grid);
  const int n = n_grid;
  FpOperator op;
  op.grid = g.x;
  op.weights = g.volume;
  op.l = l;
  op.S = 0.0;
  op.gamma = 1.0;
  op.boundary = FpBoundary::ZeroFlux;
  op.form = form;
  op.phase = l;
  op.matrix.diag = VectorXr::Zero(n);
  op.matrix.sub.resize(n - 1);
  op.matrix.sup.resize(n - 1);
  const double ll = static_cast<double>(l) * l;
  for (int k = 0; k + 1 < n; ++k) {
    const double xf = g.face_x[k], d = g.face_d[k];
    const auto j = detail::sg_face(xf, 2.0 * xf * xf, d);
    const double vl = g.volume[k], vr = g.volume[k + 1];
    if (form == FpForm::Raw) {
      op.matrix.sup[k] = j.right / vl;
      op.matrix.diag[k] -= j.left / vl;
      op.matrix.sub[k] = j.left / vr;
      op.matrix.diag[k + 1] -= j.right / vr;
    } else {
      const double hp = 0.5 * j.peclet;
      const double shape = std::abs(hp) < 1e-8 ? 1.0 : hp / std::sinh(hp);  // sqrt(B(P) B(-P))
      const double off = -xf / d * shape / std::sqrt(vl * vr);
      op.matrix.sup[k] = off;
      op.matrix.sub[k] = off;
      op.matrix.diag[k] += j.left / vl;
      op.matrix.diag[k + 1] += j.right / vr;
    }
  }
  const double sgn = form == FpForm::Raw ? -1.0 : 1.0;
  for (int k = 0; k < n; ++k) op.matrix.diag[k] += sgn * ll / (4.0 * g.x[k]);
  return op;
}

// eps_n ascending, for either form.
inline VectorXr bifurcation_eigenvalues(const FpOperator& op, int count = -1) {
  const auto s = symmetrize(op.matrix);
  VectorXr v = symmetric_tridiagonal_eig(s.diag, s.off, false).values;
  if (op.form == FpForm::Raw) v = (-v).reverse().eval();
  const Eigen::Index m = count < 0 ? v.size() : std::min<Eigen::Index>(count, v.size());
  return v.head(m);
}

struct BifurcationBasis {
  int l = 0;
  VectorXr x, volume;
  VectorXr eps;
  MatrixXr right;           // F_n(x_k), normalized so that sum_k F_n(x_k) V_k = 1
  MatrixXr left;            // duals: left.col(n) . right.col(m) = delta_nm
  VectorXr phase_per_cell;  // largest local oscillation phase of each mode, radians per cell
  double condition = 1.0;
};

// Lowest `modes` eigenpairs of the Hermitian form.
inline BifurcationBasis bifurcation_basis(int l, double x_max, int n_grid, int modes) {
  const FpOperator h = bifurcation_operator(l, x_max, n_grid, FpForm::Hermitian);
  require(modes >= 1 && modes <= n_grid, "bifurcation_basis: invalid mode count");
  BifurcationBasis b;
  b.l = l;
  b.x = h.grid;
  b.volume = h.weights;
  b.eps = symmetric_tridiagonal_eig(h.matrix.diag, h.matrix.sup, false).values.head(modes);
  const Eigen::Index n = h.size();
  b.right.resize(n, modes);
  b.left.resize(n, modes);
  b.phase_per_cell.resize(modes);
  const VectorXr sv = h.weights.cwiseSqrt();
  double nmin = std::numeric_limits<double>::infinity(), nmax = 0.0;
  for (int m = 0; m < modes; ++m) {
    const VectorXr u = tridiagonal_eigenvector(h.matrix.diag, h.matrix.sup, b.eps[m]);
    double integral = u.dot(sv);
    const VectorXr f = u.cwiseQuotient(sv);
    b.right.col(m) = f / integral;
    b.left.col(m) = u.cwiseProduct(sv) * integral;
    nmin = std::min(nmin, std::abs(integral));
    nmax = std::max(nmax, std::abs(integral));
    // pi per sign change, densest 32-cell window
    const Eigen::Index win = std::min<Eigen::Index>(32, n - 1);
    std::vector<int> flips(static_cast<std::size_t>(n), 0);
    for (Eigen::Index k = 0; k + 1 < n; ++k) flips[static_cast<std::size_t>(k + 1)] = flips[static_cast<std::size_t>(k)] + (u[k] * u[k + 1] < 0.0);
    int most = 0;
    for (Eigen::Index k = 0; k + win < n; ++k)
      most = std::max(most, flips[static_cast<std::size_t>(k + win)] - flips[static_cast<std::size_t>(k)]);
    b.phase_per_cell[m] = kPi * most / static_cast<double>(win);
  }
  b.condition = nmin > 0.0 ? nmax / nmin : std::numeric_limits<double>::infinity();
  return b;
}

// integral x^p F_n dx with F_n normalized to unit integral.
inline double eigenfunction_moments(const BifurcationBasis& b, int n, double p) {
  require(n >= 0 && n < b.eps.size(), "eigenfunction_moments: mode index out of range");
  require(p >= 0.0, "eigenfunction_moments: p must be nonnegative");
  if (b.phase_per_cell[n] > 0.5)
    throw ResolutionError("eigenfunction_moments: mode " + std::to_string(n) + " oscillates " +
                          sci(b.phase_per_cell[n]) + " rad per cell");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < b.x.size(); ++k) acc += std::pow(b.x[k], p) * b.right(k, n) * b.volume[k];
  return acc;
}

// c_n with F = sum c_n F_n, F given by its samples on the basis grid.
inline VectorXr expansion_coefficients(const VectorXr& F, const BifurcationBasis& b) {
  require(F.size() == b.x.size(), "expansion_coefficients: sample count must match the grid");
  if (!(b.condition <= 1e8))
    throw NumericalError("expansion_coefficients: dual basis condition " + sci(b.condition) + " exceeds 1e8");
  return b.left.transpose() * F;
}

// zeta from eps_n = zeta n^{3/2} over n in [lo, hi], least squares in log space.
inline double fit_zeta(const VectorXr& eps, int lo = 20, int hi = 200) {
  require(lo >= 1 && hi < eps.size() && lo < hi, "fit_zeta: range outside the available eigenvalues");
  double acc = 0.0;
  for (int n = lo; n <= hi; ++n) acc += std::log(eps[n]) - 1.5 * std::log(static_cast<double>(n));
  return std::exp(acc / (hi - lo + 1));
}

struct DecayProfile {
  std::vector<double> times, peak_locations, widths;
};

struct BifurcationEvolveOptions {
  int n_grid = 4000;
  double x_max = 25.0;
  double dt = 1e-4;
};

namespace detail {

// Peak by a parabola through log f at the three samples around the maximum; FWHM by linear interpolation.
inline std::pair<double, double> peak_and_width(const VectorXr& x, const VectorXr& f) {
  Eigen::Index k;
  const double top = f.maxCoeff(&k);
  double xp = x[k];
  if (k > 0 && k + 1 < x.size() && f[k - 1] > 0.0 && f[k + 1] > 0.0) {
    const double x0 = x[k - 1], x1 = x[k], x2 = x[k + 1];
    const double y0 = std::log(f[k - 1]), y1 = std::log(f[k]), y2 = std::log(f[k + 1]);
    const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
    const double a = (d12 - d01) / (x2 - x0);
    if (a < 0.0) xp = 0.5 * (x0 + x1) - d01 / (2.0 * a);
  }
  const double half = 0.5 * top;
  double lo = x[0], hi = x[x.size() - 1];
  for (Eigen::Index i = k; i > 0; --i)
    if (f[i - 1] < half) {
      lo = x[i - 1] + (half - f[i - 1]) / (f[i] - f[i - 1]) * (x[i] - x[i - 1]);
      break;
    }
  for (Eigen::Index i = k; i + 1 < x.size(); ++i)
    if (f[i + 1] < half) {
      hi = x[i] + (f[i] - half) / (f[i] - f[i + 1]) * (x[i + 1] - x[i]);
      break;
    }
  return {xp, hi - lo};
}

}  // namespace detail

struct BifurcationSnapshot {
  double tau = 0.0;
  VectorXr f;
};

// Evolves f = e^{-2(x - x0)^2} under df/dtau = D f (l = 0) by Crank-Nicolson in the symmetric frame.
inline std::vector<BifurcationSnapshot> evolve_bifurcation_states(double x0, const std::vector<double>& t_grid,
                                                                  const BifurcationEvolveOptions& opt = {}) {
  require(x0 > 0.0 && x0 + 4.0 < opt.x_max, "evolve_bifurcation: x0 must sit well inside (0, x_max)");
  require(opt.dt > 0.0, "evolve_bifurcation: dt must be positive");
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    require(t_grid[i] >= 0.0 && (i == 0 || t_grid[i] > t_grid[i - 1]), "evolve_bifurcation: times must increase");
  const FpOperator raw = bifurcation_operator(0, opt.x_max, opt.n_grid, FpForm::Raw);
  const FpOperator h = bifurcation_operator(0, opt.x_max, opt.n_grid, FpForm::Hermitian);
  const Eigen::Index n = h.size();
  // y = G f with log G_k = (log V_k - log pi_k)/2, pi the discrete stationary weight
  const VectorXr log_pi = fp_null_log(raw);
  const VectorXr log_g = 0.5 * (raw.weights.array().log() - log_pi.array());
  VectorXr y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double d = raw.grid[k] - x0;
    y[k] = std::exp(-2.0 * d * d + log_g[k]);
  }
  std::vector<BifurcationSnapshot> out;
  double t = 0.0;
  auto emit = [&] {
    VectorXr f(n);
    for (Eigen::Index k = 0; k < n; ++k) f[k] = y[k] == 0.0 ? 0.0 : std::copysign(std::exp(std::log(std::abs(y[k])) - log_g[k]), y[k]);
    out.push_back({t, f});
  };
  for (double target : t_grid) {
    while (t < target) {
      const double dt = std::min(opt.dt, target - t);
      const VectorXr rhs = y - 0.5 * dt * h.matrix.apply(y);
      const VectorXr sub = 0.5 * dt * h.matrix.sub, sup = 0.5 * dt * h.matrix.sup;
      const VectorXr diag = (1.0 + 0.5 * dt * h.matrix.diag.array()).matrix();
      y = thomas_solve<double>(sub, diag, sup, rhs);
      t = (target - t - dt) <= 1e-14 * std::max(1.0, target) ? target : t + dt;
    }
    emit();
  }
  return out;
}

inline DecayProfile evolve_bifurcation(double x0, const std::vector<double>& t_grid,
                                       const BifurcationEvolveOptions& opt = {}) {
  const auto snaps = evolve_bifurcation_states(x0, t_grid, opt);
  const auto g = detail::bifurcation_grid(opt.x_max, opt.n_grid);
  DecayProfile p;
  for (const auto& s : snaps) {
    const auto [xp, w] = detail::peak_and_width(g.x, s.f);
    p.times.push_back(s.tau);
    p.peak_locations.push_back(xp);
    p.widths.push_back(w);
  }
  return p;
}

// ---- dynamics on the sphere ----

// rho(theta, phi) = f_0 + 2 Re sum_{l > 0} f_l e^{il phi}; only l >= 0 is stored.
struct SphereDistribution {
  VectorXr grid, weights;
  std::map<int, VectorXc> modes;

  double total() const {
    auto it = modes.find(0);
    return it == modes.end() ? 0.0 : 2.0 * kPi * weights.dot(it->second.real());
  }
  double density(Eigen::Index k, double phi) const {
    double r = 0.0;
    for (const auto& [l, f] : modes) r += l == 0 ? f[k].real() : 2.0 * (f[k] * std::polar(1.0, l * phi)).real();
    return r;
  }
  // <e^{i phi}> over the sphere
  cplx first_harmonic() const {
    auto it = modes.find(1);
    if (it == modes.end()) return 0.0;
    return 2.0 * kPi * it->second.dot(weights.cast<cplx>());  // f_{-1} = conj(f_1)
  }
};

inline SphereDistribution sphere_gaussian(int n_grid, double theta0, double phi0, double sigma, int l_max) {
  require(n_grid >= 100 && sigma > 0.0 && l_max >= 0, "sphere_gaussian: invalid arguments");
  require(theta0 > 0.0 && theta0 < kPi, "sphere_gaussian: theta0 must avoid the poles");
  SphereDistribution d;
  d.grid = detail::theta_grid(n_grid);
  d.weights = d.grid.array().sin() * (kPi / n_grid);
  const double sphi = sigma / std::sin(theta0);
  VectorXr radial(n_grid);
  for (int k = 0; k < n_grid; ++k) {
    const double u = (d.grid[k] - theta0) / sigma;
    radial[k] = std::exp(-0.5 * u * u) / (2.0 * kPi);
  }
  for (int l = 0; l <= l_max; ++l)
    d.modes[l] = (radial * std::exp(-0.5 * l * l * sphi * sphi)).cast<cplx>() * std::polar(1.0, -l * phi0);
  const double z = d.total();
  for (auto& [l, f] : d.modes) f /= z;
  return d;
}

inline SphereDistribution sphere_steady_state(double S, double gamma, int n_grid) {
  const FpOperator op = discretize_fp(S, gamma, 0, n_grid, {false});
  SphereDistribution d;
  d.grid = op.grid;
  d.weights = op.weights;
  d.modes[0] = fp_null_vector(op).cast<cplx>();
  d.modes[0] /= d.total();
  return d;
}

// (<theta>, circular mean of phi)
inline std::pair<double, double> center_of_mass(const SphereDistribution& d) {
  const double z = d.total();
  const auto& f0 = d.modes.at(0);
  const double th = 2.0 * kPi * d.weights.dot(d.grid.cwiseProduct(f0.real())) / z;
  return {th, std::arg(d.first_harmonic())};
}

// -2 log |<e^{i phi}>|: the variance of a wrapped normal.
inline double azimuthal_variance(const SphereDistribution& d) {
  return -2.0 * std::log(std::abs(d.first_harmonic()) / d.total());
}

struct SphereEvolveOptions {
  double sample_every = 0.0;  // 0: only the final state
  int workers = 1;
  double growth_tol = 1e-3;
  double mass_tol = 1e-6;
};

struct SphereSnapshot {
  double t = 0.0;
  SphereDistribution dist;
};

inline std::vector<SphereSnapshot> evolve_sphere(const SphereDistribution& init, double S, double gamma, double t_final,
                                                 double dt, const SphereEvolveOptions& opt = {}) {
  require(t_final >= 0.0 && dt > 0.0, "evolve_sphere: need t_final >= 0 and dt > 0");
  require(init.modes.count(0) == 1, "evolve_sphere: the l = 0 mode is required");
  const double m0 = init.total();
  require(std::abs(m0 - 1.0) <= 1e-6, "evolve_sphere: initial distribution must be normalized");
  const int n = static_cast<int>(init.grid.size());
  const int steps = static_cast<int>(std::ceil(t_final / dt - 1e-9));
  const double h = steps > 0 ? t_final / steps : 0.0;
  const int every =
      std::max(1, opt.sample_every > 0.0 && steps > 0 ? static_cast<int>(std::llround(opt.sample_every / h)) : steps);
  std::vector<int> ls;
  for (const auto& kv : init.modes) ls.push_back(kv.first);
  const int nsnap = 1 + steps / every + (steps % every != 0);
  std::vector<SphereSnapshot> out(static_cast<std::size_t>(nsnap));
  for (auto& s : out) {
    s.dist.grid = init.grid;
    s.dist.weights = init.weights;
  }
  std::vector<std::string> errors(ls.size());
  std::atomic<std::size_t> next{0};
  auto job = [&] {
    for (std::size_t i = next++; i < ls.size(); i = next++) {
      try {
        const int l = ls[i];
        const FpOperator op = discretize_fp(S, gamma, l, n, {false});
        const cplx il(0.0, l);
        const VectorXc sub = (-0.5 * h) * op.matrix.sub.cast<cplx>();
        const VectorXc sup = (-0.5 * h) * op.matrix.sup.cast<cplx>();
        const VectorXc diag = (1.0 - 0.5 * h * (op.matrix.diag.cast<cplx>().array() + il)).matrix();
        VectorXc f = init.modes.at(l);
        std::size_t snap = 0;
        out[snap++].dist.modes[l] = f;
        double norm = init.weights.dot(f.cwiseAbs());
        for (int s = 1; s <= steps; ++s) {
          const VectorXc rhs = f + 0.5 * h * (op.matrix.apply(f) + il * f);
          f = thomas_solve<cplx>(sub, diag, sup, rhs);
          const double nn = init.weights.dot(f.cwiseAbs());
          if (nn > norm * (1.0 + opt.growth_tol) && nn > 1e-300)
            throw NumericalError("evolve_sphere: mode l = " + std::to_string(l) + " grew by " + sci(nn / norm - 1.0) +
                                 " in one step; reduce dt");
          norm = nn;
          if (s % every == 0 || s == steps) out[snap++].dist.modes[l] = f;
        }
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(opt.workers, static_cast<int>(ls.size())));
  if (workers == 1) {
    job();
  } else {
    std::vector<std::future<void>> fs;
    for (int w = 0; w < workers; ++w) fs.push_back(std::async(std::launch::async, job));
    for (auto& f : fs) f.get();
  }
  for (const auto& e : errors)
    if (!e.empty()) throw NumericalError(e);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int s = std::min(steps, static_cast<int>(i) * every);
    out[i].t = (i + 1 == out.size()) ? t_final : s * h;
    const double drift = std::abs(out[i].dist.total() - m0);
    if (drift > opt.mass_tol * std::max(1.0, out[i].t))
      throw NumericalError("evolve_sphere: probability drifted by " + sci(drift) + " at t = " + sci(out[i].t));
  }
  return out;
}

}  // namespace liospec

#endif  // LIOSPEC_FOKKER_PLANCK_HPP
