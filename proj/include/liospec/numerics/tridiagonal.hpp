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

#ifndef LIOSPEC_NUMERICS_TRIDIAGONAL_HPP
#define LIOSPEC_NUMERICS_TRIDIAGONAL_HPP

#include <algorithm>

#include <Eigen/Eigenvalues>

#include "liospec/numerics/types.hpp"

namespace liospec {

// Diagonal similarity D^{-1} T D = symmetric, valid when every product sub*sup is positive.
// log_scale holds log d_k so that right eigenvectors of T are D u and left ones D^{-1} u.
struct SymmetrizedTridiagonal {
  VectorXr diag, off, log_scale;
};

inline bool symmetrizable(const Tridiagonal<double>& t) {
  for (Eigen::Index k = 0; k + 1 < t.size(); ++k)
    if (!(t.sub[k] * t.sup[k] > 0.0)) return false;
  return true;
}

inline SymmetrizedTridiagonal symmetrize(const Tridiagonal<double>& t) {
  t.validate();
  const Eigen::Index n = t.size();
  SymmetrizedTridiagonal s;
  s.diag = t.diag;
  s.off.resize(std::max<Eigen::Index>(n - 1, 0));
  s.log_scale.resize(n);
  s.log_scale[0] = 0.0;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double a = t.sub[k], b = t.sup[k];
    if (!(a * b > 0.0)) throw ValidationError("symmetrize: off-diagonal product must be positive");
    // sign of the symmetric off-diagonal follows sup; a and b share sign
    s.off[k] = std::copysign(std::sqrt(a * b), b);
    s.log_scale[k + 1] = s.log_scale[k] + 0.5 * (std::log(std::abs(a)) - std::log(std::abs(b)));
  }
  return s;
}

struct SymmetricEig {
  VectorXr values;   // ascending
  MatrixXr vectors;  // orthonormal columns, empty unless requested
};

inline SymmetricEig symmetric_tridiagonal_eig(const VectorXr& diag, const VectorXr& off, bool vectors) {
  require(off.size() == std::max<Eigen::Index>(diag.size() - 1, 0), "symmetric_tridiagonal_eig: size mismatch");
  SymmetricEig out;
  if (diag.size() == 1) {
    out.values = diag;
    if (vectors) out.vectors = MatrixXr::Ones(1, 1);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXr> es;
  es.computeFromTridiagonal(diag, off, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("symmetric_tridiagonal_eig: QL iteration failed");
  out.values = es.eigenvalues();
  if (vectors) out.vectors = es.eigenvectors();
  return out;
}

// Unpivoted tridiagonal solve; stable for the diagonally similar-to-definite systems used here.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> thomas_solve(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& sub,
                                                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& diag,
                                                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& sup,
                                                      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs) {
  const Eigen::Index n = diag.size();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c(n);
  Scalar piv = diag[0];
  if (piv == Scalar(0)) throw NumericalError("thomas_solve: zero pivot");
  c[0] = n > 1 ? sup[0] / piv : Scalar(0);
  rhs[0] /= piv;
  for (Eigen::Index k = 1; k < n; ++k) {
    piv = diag[k] - sub[k - 1] * c[k - 1];
    if (piv == Scalar(0)) throw NumericalError("thomas_solve: zero pivot");
    c[k] = k + 1 < n ? sup[k] / piv : Scalar(0);
    rhs[k] = (rhs[k] - sub[k - 1] * rhs[k - 1]) / piv;
  }
  for (Eigen::Index k = n - 2; k >= 0; --k) rhs[k] -= c[k] * rhs[k + 1];
  return rhs;
}

// Solve a general real tridiagonal system with partial pivoting (LAPACK gtsv scheme).
inline VectorXr pivoted_tridiagonal_solve(VectorXr sub, VectorXr diag, VectorXr sup, VectorXr b) {
  const Eigen::Index n = diag.size();
  VectorXr sup2 = VectorXr::Zero(std::max<Eigen::Index>(n - 2, 0));
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (std::abs(diag[i]) >= std::abs(sub[i])) {
      if (diag[i] == 0.0) diag[i] = 1e-300;
      const double fact = sub[i] / diag[i];
      diag[i + 1] -= fact * sup[i];
      b[i + 1] -= fact * b[i];
      sub[i] = 0.0;
    } else {
      const double fact = diag[i] / sub[i];
      diag[i] = sub[i];
      double tmp = diag[i + 1];
      diag[i + 1] = sup[i] - fact * tmp;
      if (i + 2 < n) {
        sup2[i] = sup[i + 1];
        sup[i + 1] = -fact * sup2[i];
      }
      sup[i] = tmp;
      tmp = b[i];
      b[i] = b[i + 1];
      b[i + 1] = tmp - fact * b[i + 1];
    }
  }
  if (diag[n - 1] == 0.0) diag[n - 1] = 1e-300;
  b[n - 1] /= diag[n - 1];
  if (n > 1) b[n - 2] = (b[n - 2] - sup[n - 2] * b[n - 1]) / diag[n - 2];
  for (Eigen::Index i = n - 3; i >= 0; --i) b[i] = (b[i] - sup[i] * b[i + 1] - sup2[i] * b[i + 2]) / diag[i];
  return b;
}

// Eigenvector of a symmetric tridiagonal matrix for a converged eigenvalue, by inverse iteration.
inline VectorXr tridiagonal_eigenvector(const VectorXr& diag, const VectorXr& off, double lambda, int iters = 3) {
  const Eigen::Index n = diag.size();
  const double scale = std::max(diag.cwiseAbs().maxCoeff(), off.size() ? off.cwiseAbs().maxCoeff() : 0.0);
  const double shift = lambda + 1e-13 * std::max(scale, 1.0);
  VectorXr x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * std::sin(1.7 * static_cast<double>(i) + 0.3);
  x.normalize();
  const VectorXr d = diag.array() - shift;
  for (int it = 0; it < iters; ++it) {
    x = pivoted_tridiagonal_solve(off, d, off, x);
    const double nx = x.norm();
    if (!std::isfinite(nx) || nx == 0.0) throw NumericalError("inverse iteration failed");
    x /= nx;
  }
  // fix the sign so that the first significant entry is positive
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(x[i]) > 1e-8) {
      if (x[i] < 0) x = -x;
      break;
    }
  return x;
}

// Right eigenvector of a general real tridiagonal matrix by inverse iteration from a start guess.
inline VectorXr tridiagonal_eigenvector(const Tridiagonal<double>& t, double lambda, VectorXr x, int iters = 2) {
  const double scale = std::max({t.diag.cwiseAbs().maxCoeff(), t.sub.size() ? t.sub.cwiseAbs().maxCoeff() : 0.0,
                                 t.sup.size() ? t.sup.cwiseAbs().maxCoeff() : 0.0, 1.0});
  const VectorXr d = t.diag.array() - (lambda + 1e-13 * scale);
  if (!(x.norm() > 0.0) || !x.allFinite()) x = VectorXr::Ones(t.size());
  x.normalize();
  for (int it = 0; it < iters; ++it) {
    x = pivoted_tridiagonal_solve(t.sub, d, t.sup, x);
    const double nx = x.norm();
    if (!std::isfinite(nx) || nx == 0.0) throw NumericalError("inverse iteration failed");
    x /= nx;
  }
  return x;
}

}  // namespace liospec

#endif  // LIOSPEC_NUMERICS_TRIDIAGONAL_HPP
