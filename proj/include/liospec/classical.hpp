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

#ifndef LIOSPEC_CLASSICAL_HPP
#define LIOSPEC_CLASSICAL_HPP

#include <array>
#include <functional>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "liospec/dimer_config.hpp"
#include "liospec/numerics.hpp"

namespace liospec {

enum class AttractorKind { FixedPoint, LimitCycle };
enum class Stability { Stable, Unstable, Marginal };

inline const char* to_string(AttractorKind k) { return k == AttractorKind::FixedPoint ? "fixed-point" : "limit-cycle"; }
inline const char* to_string(Stability s) {
  return s == Stability::Stable ? "stable" : (s == Stability::Unstable ? "unstable" : "marginal");
}

struct Attractor {
  AttractorKind kind = AttractorKind::FixedPoint;
  std::vector<double> location;    // s_z for the spin, state or orbit mean otherwise
  std::vector<cplx> jacobian_eigs; // Floquet exponents (phase mode removed) for cycles
  Stability stability = Stability::Stable;
  double period = 0.0;
  std::vector<double> orbit_times;
  std::vector<VectorXr> orbit;
  std::optional<double> algebraic_rate;  // d eps/dt = rate * eps^2 at a marginal point
};

inline Stability stability_of(const std::vector<cplx>& eigs, double tol = 1e-12) {
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& z : eigs) top = std::max(top, z.real());
  if (top < -tol) return Stability::Stable;
  if (top > tol) return Stability::Unstable;
  return Stability::Marginal;
}

// (ds_z/dt, dphi/dt) on the unit sphere.
inline std::pair<double, double> spin_flow(double s_z, double /*phi*/, double gamma) {
  require(std::abs(s_z) <= 1.0 + 1e-12, "spin_flow: |s_z| must not exceed 1");
  return {(1.0 - gamma * s_z * s_z) * (1.0 - s_z * s_z), -1.0};
}

// Same flow in the plane (X, Y) = theta (cos phi, sin phi); smooth at the north pole.
inline VectorField spin_planar_field(double gamma) {
  return [gamma](double, const VectorXr& y) -> VectorXr {
    const double th = std::hypot(y[0], y[1]);
    const double c = std::cos(th);
    const double sinc = th < 1e-8 ? 1.0 - th * th / 6.0 : std::sin(th) / th;
    const double h = -(1.0 - gamma * c * c) * sinc;
    VectorXr d(2);
    d << h * y[0] + y[1], h * y[1] - y[0];
    return d;
  };
}

inline VectorXr spin_planar_point(double s_z, double phi) {
  const double th = std::acos(std::clamp(s_z, -1.0, 1.0));
  VectorXr y(2);
  y << th * std::cos(phi), th * std::sin(phi);
  return y;
}

inline double spin_planar_sz(const VectorXr& y) { return std::cos(std::hypot(y[0], y[1])); }

// Analytic attractor catalogue of the spin flow.
inline std::vector<Attractor> classify_attractors(double gamma) {
  require(std::isfinite(gamma) && gamma >= 0.0, "classify_attractors: gamma must be nonnegative");
  auto fixed = [](double sz, double re) {
    Attractor a;
    a.kind = AttractorKind::FixedPoint;
    a.location = {sz};
    a.jacobian_eigs = {cplx(re, 1.0), cplx(re, -1.0)};
    a.stability = stability_of(a.jacobian_eigs);
    return a;
  };
  std::vector<Attractor> out;
  if (gamma < 1.0) {
    out.push_back(fixed(1.0, -(1.0 - gamma)));
    out.push_back(fixed(-1.0, 1.0 - gamma));
  } else if (gamma > 1.0) {
    Attractor lc;
    lc.kind = AttractorKind::LimitCycle;
    lc.location = {1.0 / std::sqrt(gamma)};
    lc.period = 2.0 * kPi;
    lc.jacobian_eigs = {cplx(-2.0 * (gamma - 1.0) / std::sqrt(gamma), 0.0)};
    lc.stability = Stability::Stable;
    out.push_back(lc);
    out.push_back(fixed(-1.0, -(gamma - 1.0)));
    out.push_back(fixed(1.0, gamma - 1.0));
  } else {
    Attractor n = fixed(1.0, 0.0);
    n.algebraic_rate = -4.0;
    Attractor s = fixed(-1.0, 0.0);
    s.algebraic_rate = 4.0;
    out.push_back(n);
    out.push_back(s);
  }
  return out;
}

enum class Deviation { North, South, LimitCycle };

// Quartic deviation equations; eps measured from s_z = 1, -1, or 1/sqrt(gamma).
inline double deviation_rhs(double eps, double gamma, Deviation which) {
  require(std::isfinite(eps) && std::isfinite(gamma) && gamma >= 0.0, "deviation_rhs: invalid arguments");
  const double e2 = eps * eps, e3 = e2 * eps, e4 = e3 * eps;
  switch (which) {
    case Deviation::North:
      return 2.0 * (gamma - 1.0) * eps - (5.0 * gamma - 1.0) * e2 + 4.0 * gamma * e3 - gamma * e4;
    case Deviation::South:
      return -2.0 * (gamma - 1.0) * eps + (5.0 * gamma - 1.0) * e2 - 4.0 * gamma * e3 + gamma * e4;
    case Deviation::LimitCycle: {
      require(gamma > 0.0, "deviation_rhs: limit cycle needs gamma > 0");
      const double sg = std::sqrt(gamma);
      return -2.0 * (gamma - 1.0) / sg * eps + (gamma - 5.0) * e2 + 4.0 * sg * e3 - gamma * e4;
    }
  }
  return 0.0;
}

// All sums n_i lambda_i with n_i >= 0 and sum n_i <= n_max.
inline Spectrum wedge_spectrum(const std::vector<cplx>& lambdas, int n_max) {
  require(n_max >= 0, "wedge_spectrum: n_max must be nonnegative");
  for (const auto& z : lambdas) require(z.real() < 0.0, "wedge_spectrum: Jacobian has an eigenvalue with Re >= 0");
  Spectrum sp;
  std::function<void(std::size_t, int, cplx)> rec = [&](std::size_t i, int left, cplx acc) {
    if (i == lambdas.size()) {
      sp.values.push_back(acc);
      return;
    }
    for (int n = 0; n <= left; ++n) rec(i + 1, left - n, acc + static_cast<double>(n) * lambdas[i]);
  };
  rec(0, n_max, cplx(0.0));
  sp.sort();
  return sp;
}

using DimerState = std::array<cplx, 2>;

// kappa [-a_j + i (J a_jbar + Delta a_j - |a_j|^2 a_j - F_j)] in tilded variables.
inline DimerState bh_flow(const DimerState& a, const DimerConfig& c) {
  c.validate();
  const cplx i(0.0, 1.0);
  const double f[2] = {c.F1_tilde, c.F2_tilde};
  DimerState d;
  for (int j = 0; j < 2; ++j) {
    const cplx aj = a[static_cast<std::size_t>(j)], ab = a[static_cast<std::size_t>(1 - j)];
    d[static_cast<std::size_t>(j)] =
        c.kappa * (-aj + i * (c.J_tilde * ab + c.Delta_tilde * aj - std::norm(aj) * aj - f[j]));
  }
  return d;
}

inline VectorXr dimer_to_vector(const DimerState& a) {
  VectorXr y(4);
  y << a[0].real(), a[0].imag(), a[1].real(), a[1].imag();
  return y;
}

inline DimerState dimer_from_vector(const VectorXr& y) { return {cplx(y[0], y[1]), cplx(y[2], y[3])}; }

inline VectorField dimer_field(const DimerConfig& c) {
  c.validate();
  return [c](double, const VectorXr& y) { return dimer_to_vector(bh_flow(dimer_from_vector(y), c)); };
}

struct NoRecurrenceError : NumericalError {
  NoRecurrenceError(const std::string& what, double best, double at) : NumericalError(what), best_residual(best), best_time(at) {}
  double best_residual, best_time;
};

struct LimitCycleOptions {
  double return_tol = 1e-8;      // on ||y(t) - y(t0)||, relative to max(1, orbit diameter)
  double diameter_tol = 1e-6;    // below this the attractor is a fixed point
  double ode_tol = 1e-11;
  int probe_samples = 20000;
  int orbit_samples = 512;
  bool floquet = true;
};

namespace detail {

inline MatrixXr fd_jacobian(const VectorField& f, const VectorXr& y) {
  const Eigen::Index n = y.size();
  MatrixXr j(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = 1e-6 * std::max(1.0, std::abs(y[k]));
    VectorXr a = y, b = y;
    a[k] += h;
    b[k] -= h;
    j.col(k) = (f(0.0, a) - f(0.0, b)) / (2.0 * h);
  }
  return j;
}

inline std::vector<cplx> eigenvalues_of(const MatrixXr& m) {
  Eigen::EigenSolver<MatrixXr> es(m, false);
  std::vector<cplx> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

}  // namespace detail

// Integrates past transients, then locates the first return of the trajectory to its own
// starting point by minimizing the return distance over the probe window.
inline Attractor detect_limit_cycle(const VectorField& f, const VectorXr& y0, double t_settle, double t_probe,
                                    const LimitCycleOptions& opt = {}) {
  require(t_settle > 0.0 && t_probe > 0.0, "detect_limit_cycle: t_settle and t_probe must be positive");
  OdeOptions oo;
  oo.tol = opt.ode_tol;
  const VectorXr ys = integrate_ode_dense(f, y0, {0.0, t_settle}, oo).trajectory.states.back();
  const OdeResult probe = integrate_ode_dense(f, ys, {t_settle, t_settle + t_probe}, oo);

  const int ns = opt.probe_samples;
  std::vector<double> ts(static_cast<std::size_t>(ns) + 1), ds(static_cast<std::size_t>(ns) + 1);
  VectorXr mean = VectorXr::Zero(ys.size());
  std::vector<VectorXr> samples;
  samples.reserve(ts.size());
  for (int i = 0; i <= ns; ++i) {
    ts[static_cast<std::size_t>(i)] = t_settle + t_probe * i / ns;
    samples.push_back(probe.dense.at(ts[static_cast<std::size_t>(i)]));
    ds[static_cast<std::size_t>(i)] = (samples.back() - ys).norm();
    mean += samples.back();
  }
  mean /= static_cast<double>(samples.size());
  double diameter = 0.0;
  for (const auto& s : samples) diameter = std::max(diameter, 2.0 * (s - mean).norm());

  Attractor a;
  if (diameter < opt.diameter_tol) {
    a.kind = AttractorKind::FixedPoint;
    a.location.assign(mean.data(), mean.data() + mean.size());
    a.jacobian_eigs = detail::eigenvalues_of(detail::fd_jacobian(f, mean));
    a.stability = stability_of(a.jacobian_eigs, 1e-7);
    return a;
  }

  const double dmax = *std::max_element(ds.begin(), ds.end());
  const double tol = opt.return_tol * std::max(1.0, diameter);
  bool left_start = false;
  double best = std::numeric_limits<double>::infinity(), best_t = 0.0;
  double t_star = -1.0;
  for (std::size_t i = 1; i + 1 < ds.size(); ++i) {
    if (ds[i] > 0.1 * dmax) left_start = true;
    if (!left_start || !(ds[i] <= ds[i - 1] && ds[i] <= ds[i + 1])) continue;
    auto dist = [&](double t) { return (probe.dense.at(t) - ys).norm(); };
    // stationary point of the squared distance; a root solve gets t to full precision
    auto slope = [&](double t) { return (probe.dense.at(t) - ys).dot(f(t, probe.dense.at(t))); };
    std::pair<double, double> r;
    if (slope(ts[i - 1]) < 0.0 && slope(ts[i + 1]) > 0.0) {
      std::uintmax_t iters = 100;
      const auto br = boost::math::tools::toms748_solve(slope, ts[i - 1], ts[i + 1],
                                                        boost::math::tools::eps_tolerance<double>(50), iters);
      const double tm = 0.5 * (br.first + br.second);
      r = {tm, dist(tm)};
    } else {
      r = boost::math::tools::brent_find_minima(dist, ts[i - 1], ts[i + 1], 26);
    }
    if (r.second < best) {
      best = r.second;
      best_t = r.first;
    }
    if (r.second <= tol) {
      t_star = r.first;
      break;
    }
  }
  if (t_star < 0.0)
    throw NoRecurrenceError("detect_limit_cycle: no return within " + sci(tol) + " over the probe window (best " +
                                sci(best) + " at t = " + sci(best_t) +
                                "); the orbit may be quasiperiodic, chaotic or not yet settled",
                            best, best_t);

  a.kind = AttractorKind::LimitCycle;
  a.period = t_star - t_settle;
  VectorXr avg = VectorXr::Zero(ys.size());
  const int no = opt.orbit_samples;
  for (int i = 0; i <= no; ++i) {
    const double t = t_settle + a.period * i / no;
    a.orbit_times.push_back(t);
    a.orbit.push_back(probe.dense.at(t));
    const double w = (i == 0 || i == no) ? 0.5 : 1.0;
    avg += w * a.orbit.back();
  }
  avg /= static_cast<double>(no);
  a.location.assign(avg.data(), avg.data() + avg.size());

  if (opt.floquet) {
    // Monodromy from the variational equations; the multiplier nearest 1 is the phase mode.
    const Eigen::Index n = ys.size();
    VectorField var = [&f, n](double t, const VectorXr& z) {
      const VectorXr y = z.head(n);
      const MatrixXr j = detail::fd_jacobian([&](double, const VectorXr& x) { return f(t, x); }, y);
      VectorXr d(n + n * n);
      d.head(n) = f(t, y);
      Eigen::Map<MatrixXr>(d.data() + n, n, n) = j * Eigen::Map<const MatrixXr>(z.data() + n, n, n);
      return d;
    };
    VectorXr z0(n + n * n);
    z0.head(n) = ys;
    Eigen::Map<MatrixXr>(z0.data() + n, n, n).setIdentity();
    const VectorXr z1 = integrate_ode_dense(var, z0, {t_settle, t_settle + a.period}, oo).trajectory.states.back();
    auto mult = detail::eigenvalues_of(Eigen::Map<const MatrixXr>(z1.data() + n, n, n));
    std::size_t phase = 0;
    for (std::size_t i = 1; i < mult.size(); ++i)
      if (std::abs(mult[i] - 1.0) < std::abs(mult[phase] - 1.0)) phase = i;
    for (std::size_t i = 0; i < mult.size(); ++i)
      if (i != phase) a.jacobian_eigs.push_back(std::log(mult[i]) / a.period);
    a.stability = stability_of(a.jacobian_eigs, 1e-7);
  } else {
    a.stability = Stability::Stable;
  }
  return a;
}

// Spin-flow attractor reached from s_z(0) = s_z0; location reported as s_z.
inline Attractor detect_spin_attractor(double gamma, double s_z0, double t_settle = 50.0, double t_probe = 20.0,
                                       const LimitCycleOptions& opt = {}) {
  Attractor a = detect_limit_cycle(spin_planar_field(gamma), spin_planar_point(s_z0, 0.0), t_settle, t_probe, opt);
  VectorXr loc = Eigen::Map<const VectorXr>(a.location.data(), static_cast<Eigen::Index>(a.location.size()));
  if (a.kind == AttractorKind::FixedPoint) {
    a.location = {spin_planar_sz(loc)};
  } else {
    double acc = 0.0;
    const std::size_t n = a.orbit.size();
    for (std::size_t i = 0; i < n; ++i) acc += ((i == 0 || i + 1 == n) ? 0.5 : 1.0) * spin_planar_sz(a.orbit[i]);
    a.location = {acc / static_cast<double>(n - 1)};
  }
  return a;
}

}  // namespace liospec

#endif  // LIOSPEC_CLASSICAL_HPP
