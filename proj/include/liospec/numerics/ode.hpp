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

#ifndef LIOSPEC_NUMERICS_ODE_HPP
#define LIOSPEC_NUMERICS_ODE_HPP

#include <functional>
#include <utility>

#include "liospec/numerics/types.hpp"

namespace liospec {

using VectorField = std::function<VectorXr(double, const VectorXr&)>;

struct OdeOptions {
  double tol = 1e-10;
  double h_init = 0.0;  // 0 picks a starting step automatically
  double h_max = 0.0;   // 0 means unbounded
  std::size_t max_steps = 50'000'000;
};

// Continuous extension of Dormand-Prince 5(4), one segment per accepted step.
class DenseSolution {
 public:
  struct Segment {
    double t0, h;
    VectorXr r1, r2, r3, r4, r5;
  };

  void push(Segment s) { seg_.push_back(std::move(s)); }
  bool empty() const { return seg_.empty(); }
  double t_begin() const { return seg_.front().t0; }
  double t_end() const { return seg_.back().t0 + seg_.back().h; }

  VectorXr at(double t) const {
    require(!seg_.empty(), "dense output: empty solution");
    require(t >= t_begin() - 1e-12 * std::abs(t_begin()) - 1e-300 &&
                t <= t_end() + 1e-12 * std::abs(t_end()) + 1e-300,
            "dense output: time outside integrated range");
    auto it = std::upper_bound(seg_.begin(), seg_.end(), t,
                               [](double x, const Segment& s) { return x < s.t0; });
    const Segment& s = it == seg_.begin() ? seg_.front() : *std::prev(it);
    const double th = (t - s.t0) / s.h, th1 = 1.0 - th;
    return s.r1 + th * (s.r2 + th1 * (s.r3 + th * (s.r4 + th1 * s.r5)));
  }

 private:
  std::vector<Segment> seg_;
};

struct OdeResult {
  OdeTrajectory trajectory;
  DenseSolution dense;
  std::size_t rejected = 0;
};

namespace detail {

inline VectorXr checked(const VectorField& f, double t, const VectorXr& y) {
  VectorXr d = f(t, y);
  if (d.size() != y.size()) throw ValidationError("integrate_ode: field returned wrong dimension");
  if (!d.allFinite())
    throw NumericalError("integrate_ode: non-finite derivative at t = " + sci(t));
  return d;
}

}  // namespace detail

// Dormand-Prince 5(4) with step control on the mixed error norm tol * (1 + |y|).
inline OdeResult integrate_ode_dense(const VectorField& f, const VectorXr& y0,
                                     std::pair<double, double> t_span, const OdeOptions& opt = {}) {
  const auto [t0, t1] = t_span;
  require(std::isfinite(t0) && std::isfinite(t1) && t1 > t0, "integrate_ode: t_span must be increasing");
  require(opt.tol > 0.0, "integrate_ode: tol must be positive");
  require(y0.allFinite(), "integrate_ode: non-finite initial state");

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

  const double tol = opt.tol;
  auto err_norm = [&](const VectorXr& e, const VectorXr& ya, const VectorXr& yb) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      const double sc = tol * (1.0 + std::max(std::abs(ya[i]), std::abs(yb[i])));
      s += (e[i] / sc) * (e[i] / sc);
    }
    return std::sqrt(s / static_cast<double>(std::max<Eigen::Index>(e.size(), 1)));
  };

  OdeResult out;
  out.trajectory.tolerance = tol;
  double t = t0;
  VectorXr y = y0;
  VectorXr k1 = detail::checked(f, t, y);
  out.trajectory.times.push_back(t);
  out.trajectory.states.push_back(y);

  const double span = t1 - t0;
  double h = opt.h_init;
  if (h <= 0.0) {
    const double dy = k1.norm() / std::sqrt(static_cast<double>(std::max<Eigen::Index>(y.size(), 1)));
    const double ys = 1.0 + y.norm() / std::sqrt(static_cast<double>(std::max<Eigen::Index>(y.size(), 1)));
    h = dy > 0.0 ? 0.01 * ys / dy * std::pow(tol, 0.2) : 1e-3 * span;
    h = std::min(h, span);
  }
  if (opt.h_max > 0.0) h = std::min(h, opt.h_max);

  std::size_t steps = 0;
  while (t < t1) {
    if (++steps > opt.max_steps) throw NumericalError("integrate_ode: step budget exhausted");
    bool last = false;
    if (t + h >= t1) {
      h = t1 - t;
      last = true;
    }
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw NumericalError("integrate_ode: step size underflow at t = " + sci(t));

    const VectorXr k2 = detail::checked(f, t + c2 * h, y + h * a21 * k1);
    const VectorXr k3 = detail::checked(f, t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const VectorXr k4 = detail::checked(f, t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const VectorXr k5 = detail::checked(f, t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const VectorXr k6 =
        detail::checked(f, t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const VectorXr ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const VectorXr k7 = detail::checked(f, t + h, ynew);
    const VectorXr e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err = err_norm(e, y, ynew);

    if (err <= 1.0) {
      DenseSolution::Segment s;
      s.t0 = t;
      s.h = h;
      s.r1 = y;
      s.r2 = ynew - y;
      s.r3 = h * k1 - s.r2;
      s.r4 = s.r2 - h * k7 - s.r3;
      s.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      out.dense.push(std::move(s));
      t = last ? t1 : t + h;
      y = ynew;
      k1 = k7;
      out.trajectory.times.push_back(t);
      out.trajectory.states.push_back(y);
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++out.rejected;
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
    }
    if (opt.h_max > 0.0) h = std::min(h, opt.h_max);
  }
  return out;
}

inline OdeTrajectory integrate_ode(const VectorField& f, const VectorXr& y0, std::pair<double, double> t_span,
                                   double tol = 1e-10) {
  OdeOptions opt;
  opt.tol = tol;
  return integrate_ode_dense(f, y0, t_span, opt).trajectory;
}

}  // namespace liospec

#endif  // LIOSPEC_NUMERICS_ODE_HPP
