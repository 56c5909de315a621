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

#ifndef LIOSPEC_NUMERICS_KRYLOV_HPP
#define LIOSPEC_NUMERICS_KRYLOV_HPP

#include <unsupported/Eigen/MatrixFunctions>

#include "liospec/numerics/types.hpp"

namespace liospec {

struct KrylovOptions {
  int m = 30;          // Krylov dimension per sub-step
  double tol = 1e-11;  // local error per unit time, relative to ||v||
  int max_rejections = 20;
};

namespace detail {

inline double round_two_digits(double x) {
  if (x <= 0.0) return x;
  const double s = std::pow(10.0, std::floor(std::log10(x)) - 1.0);
  return std::ceil(x / s) * s;
}

}  // namespace detail

// exp(tA) v by Arnoldi projection with adaptive sub-stepping and the augmented-matrix
// error estimate of Sidje's expv.
inline VectorXc propagate_krylov(const SparseMatrixC& a, const VectorXc& v, double t,
                                 const KrylovOptions& opt = {}) {
  require(a.rows() == a.cols(), "propagate_krylov: matrix is not square");
  require(v.size() == a.rows(), "propagate_krylov: vector length mismatch");
  require(t >= 0.0 && std::isfinite(t), "propagate_krylov: t must be finite and nonnegative");
  require(all_finite(v), "propagate_krylov: non-finite input vector");
  const Eigen::Index n = a.rows();
  if (t == 0.0 || v.norm() == 0.0) return v;

  double anorm = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    double s = 0.0;
    for (SparseMatrixC::InnerIterator it(a, r); it; ++it) s += std::abs(it.value());
    anorm = std::max(anorm, s);
  }
  if (anorm == 0.0) return v;

  const int m = static_cast<int>(std::min<Eigen::Index>(opt.m, n));
  const double tol = opt.tol;
  const double btol = 1e-13 * anorm;
  const double gamma = 0.9, delta = 1.2;
  const double rndoff = anorm * 1.1e-16;

  VectorXc w = v;
  double beta = w.norm();
  const double vnorm = beta;
  double t_now = 0.0;
  const double fact = std::pow((m + 1) / std::exp(1.0), m + 1) * std::sqrt(2.0 * kPi * (m + 1));
  double t_new = (1.0 / anorm) * std::pow((fact * tol) / (4.0 * beta * anorm), 1.0 / m);
  t_new = detail::round_two_digits(t_new);

  MatrixXc vb(n, m + 1);
  while (t_now < t) {
    double t_step = std::min(t - t_now, t_new);
    MatrixXc hm = MatrixXc::Zero(m + 2, m + 2);
    vb.col(0) = w / beta;
    int mb = m, k1 = 2;
    for (int j = 0; j < m; ++j) {
      VectorXc p = a * vb.col(j);
      for (int i = 0; i <= j; ++i) {
        const cplx hij = vb.col(i).dot(p);
        p -= hij * vb.col(i);
        hm(i, j) = hij;
      }
      for (int i = 0; i <= j; ++i) {  // second Gram-Schmidt pass
        const cplx c = vb.col(i).dot(p);
        p -= c * vb.col(i);
        hm(i, j) += c;
      }
      const double s = p.norm();
      if (s < btol) {
        k1 = 0;
        mb = j + 1;
        t_step = t - t_now;
        break;
      }
      hm(j + 1, j) = s;
      vb.col(j + 1) = p / s;
    }
    double avnorm = 0.0;
    if (k1 != 0) {
      hm(m + 1, m) = 1.0;
      avnorm = (a * vb.col(m)).norm();
    }

    MatrixXc f;
    double err_loc = 0.0, xm = 1.0 / m;
    int rejections = 0;
    for (;;) {
      const int mx = mb + k1;
      MatrixXc sm = t_step * hm.topLeftCorner(mx, mx);
      f = sm.exp();
      if (k1 == 0) {
        err_loc = btol;
        break;
      }
      const double p1 = std::abs(f(m, 0)) * beta;
      const double p2 = std::abs(f(m + 1, 0)) * beta * avnorm;
      if (p1 > 10.0 * p2) {
        err_loc = p2;
        xm = 1.0 / m;
      } else if (p1 > p2) {
        err_loc = (p1 * p2) / (p1 - p2);
        xm = 1.0 / m;
      } else {
        err_loc = p1;
        xm = 1.0 / std::max(m - 1, 1);
      }
      if (err_loc <= delta * t_step * tol * vnorm) break;
      if (++rejections > opt.max_rejections)
        throw NumericalError("propagate_krylov: step size rejected too often");
      t_step = gamma * t_step * std::pow(t_step * tol * vnorm / err_loc, xm);
      t_step = detail::round_two_digits(t_step);
    }
    const int mx = mb + std::max(0, k1 - 1);
    VectorXc coef = beta * f.col(0).head(mx);
    w = vb.leftCols(std::min(mx, m + 1)) * coef.head(std::min(mx, m + 1));
    if (!all_finite(w)) throw NumericalError("propagate_krylov: non-finite iterate");
    beta = w.norm();
    t_now += t_step;
    if (beta == 0.0) return w;
    t_new = gamma * t_step * std::pow(t_step * tol * vnorm / std::max(err_loc, rndoff), xm);
    t_new = detail::round_two_digits(t_new);
  }
  return w;
}

}  // namespace liospec

#endif  // LIOSPEC_NUMERICS_KRYLOV_HPP
