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

#ifndef LIOSPEC_NUMERICS_ARNOLDI_HPP
#define LIOSPEC_NUMERICS_ARNOLDI_HPP

#include <cstdint>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#ifdef LIOSPEC_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "liospec/numerics/types.hpp"

namespace liospec {

// Factorization of (A - shift I); one instance per thread.
class ShiftedLU {
 public:
  ShiftedLU(const SparseMatrixC& a, cplx shift) : n_(a.rows()) {
    // not copyable: the factorization keeps pointers into m_
    require(a.rows() == a.cols(), "shift-invert: matrix is not square");
    m_ = a;
    Eigen::SparseMatrix<cplx> id(n_, n_);
    id.setIdentity();
    m_ -= shift * id;
    m_.makeCompressed();
    lu_.analyzePattern(m_);
    lu_.factorize(m_);
    if (lu_.info() != Eigen::Success)
      throw SingularShiftError("shift-invert: factorization of (A - sigma I) is singular at sigma = (" +
                               sci(shift.real()) + ", " + sci(shift.imag()) +
                               "); retry with a perturbed shift");
  }

  ShiftedLU(const ShiftedLU&) = delete;
  ShiftedLU& operator=(const ShiftedLU&) = delete;

  VectorXc solve(const VectorXc& b) const {
    VectorXc x = lu_.solve(b);
    if (!all_finite(x)) throw SingularShiftError("shift-invert: non-finite solve, shift is (nearly) an eigenvalue");
    return x;
  }

  Eigen::Index size() const { return n_; }

 private:
  Eigen::Index n_;
  Eigen::SparseMatrix<cplx> m_;  // UMFPACK solves read the matrix arrays again
#ifdef LIOSPEC_HAVE_UMFPACK
  mutable Eigen::UmfPackLU<Eigen::SparseMatrix<cplx>> lu_;
#else
  mutable Eigen::SparseLU<Eigen::SparseMatrix<cplx>, Eigen::COLAMDOrdering<int>> lu_;
#endif
};

namespace detail {

// Complex Givens: [c s; -conj(s) c] [f; g] = [r; 0].
inline void lartg(cplx f, cplx g, double& c, cplx& s) {
  const double af = std::abs(f), ag = std::abs(g);
  if (ag == 0.0) {
    c = 1.0;
    s = 0.0;
  } else if (af == 0.0) {
    c = 0.0;
    s = std::conj(g) / ag;
  } else {
    const double nrm = std::hypot(af, ag);
    c = af / nrm;
    s = (f / af) * std::conj(g) / nrm;
  }
}

// x' = c x + s y, y' = c y - conj(s) x
template <class X, class Y>
inline void rot(X&& x, Y&& y, double c, cplx s) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const cplx xi = x[i], yi = y[i];
    x[i] = c * xi + s * yi;
    y[i] = c * yi - std::conj(s) * xi;
  }
}

// Swap the adjacent diagonal entries k, k+1 of the Schur pair (T, Z), keeping A = Z T Z^H.
inline void schur_swap(MatrixXc& t, MatrixXc& z, Eigen::Index k) {
  const Eigen::Index n = t.rows();
  const cplx t11 = t(k, k), t22 = t(k + 1, k + 1);
  double c;
  cplx s;
  lartg(t(k, k + 1), t22 - t11, c, s);
  if (k + 2 < n) {
    auto r1 = t.row(k).tail(n - k - 2);
    auto r2 = t.row(k + 1).tail(n - k - 2);
    rot(r1, r2, c, s);
  }
  if (k > 0) {
    auto c1 = t.col(k).head(k);
    auto c2 = t.col(k + 1).head(k);
    rot(c1, c2, c, std::conj(s));
  }
  t(k, k) = t22;
  t(k + 1, k + 1) = t11;
  auto z1 = z.col(k);
  auto z2 = z.col(k + 1);
  rot(z1, z2, c, std::conj(s));
}

// Move entries of largest modulus to the top of the triangular factor.
inline void schur_sort_by_modulus(MatrixXc& t, MatrixXc& z) {
  const Eigen::Index n = t.rows();
  for (Eigen::Index target = 0; target < n; ++target) {
    Eigen::Index best = target;
    for (Eigen::Index i = target + 1; i < n; ++i)
      if (std::abs(t(i, i)) > std::abs(t(best, best))) best = i;
    for (Eigen::Index i = best; i > target; --i) schur_swap(t, z, i - 1);
  }
}

// Eigenvector of the leading (i+1)x(i+1) block of upper-triangular t for eigenvalue t(i,i).
inline VectorXc triangular_eigenvector(const MatrixXc& t, Eigen::Index i) {
  const Eigen::Index m = t.rows();
  VectorXc y = VectorXc::Zero(m);
  y[i] = 1.0;
  const cplx theta = t(i, i);
  const double guard = 1e-14 * std::max(t.norm(), 1e-300);
  for (Eigen::Index r = i - 1; r >= 0; --r) {
    cplx acc = 0.0;
    for (Eigen::Index c = r + 1; c <= i; ++c) acc += t(r, c) * y[c];
    cplx d = t(r, r) - theta;
    if (std::abs(d) < guard) d = guard;
    y[r] = -acc / d;
  }
  return y / y.norm();
}

inline VectorXc random_unit(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  VectorXc v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(nd(rng), nd(rng));
  return v / v.norm();
}

}  // namespace detail

struct ShiftInvertOptions {
  Eigen::Index ncv = 0;     // Krylov dimension; 0 selects 4k
  int max_restarts = 300;
  double ritz_tol = 1e-13;  // relative residual of the inverted operator
  double residual_tol = 1e-8;
  bool vectors = true;
};

// k eigenvalues of A nearest `shift` by Krylov-Schur iteration on (A - shift I)^{-1}.
inline Spectrum eigs_shift_invert(const SparseMatrixC& a, cplx shift, int k, std::uint64_t seed,
                                  const ShiftInvertOptions& opt = {}) {
  require(a.rows() == a.cols(), "eigs_shift_invert: matrix is not square");
  const Eigen::Index n = a.rows();
  require(k >= 1 && k < n, "eigs_shift_invert: need 1 <= k < dimension");
  const ShiftedLU lu(a, shift);

  Eigen::Index m = opt.ncv > 0 ? opt.ncv : 4 * static_cast<Eigen::Index>(k);
  m = std::min<Eigen::Index>(std::max<Eigen::Index>(m, k + 2), n);

  std::mt19937_64 rng(seed);
  MatrixXc v = MatrixXc::Zero(n, m + 1);
  MatrixXc h = MatrixXc::Zero(m + 1, m);
  v.col(0) = detail::random_unit(n, rng);

  Eigen::Index p = 0;
  MatrixXc t, z;
  int restart = 0;
  for (;; ++restart) {
    for (Eigen::Index j = p; j < m; ++j) {
      VectorXc w = lu.solve(v.col(j));
      auto basis = v.leftCols(j + 1);
      VectorXc coef = basis.adjoint() * w;
      w -= basis * coef;
      VectorXc again = basis.adjoint() * w;
      w -= basis * again;
      coef += again;
      h.col(j).head(j + 1) = coef;
      double beta = w.norm();
      if (beta <= 1e-13 * coef.norm()) {
        // Invariant subspace; continue from a fresh direction.
        h(j + 1, j) = 0.0;
        if (j + 1 < n) {
          VectorXc r = detail::random_unit(n, rng);
          for (int pass = 0; pass < 2; ++pass) r -= basis * (basis.adjoint() * r);
          v.col(j + 1) = r / r.norm();
        } else {
          v.col(j + 1).setZero();
        }
      } else {
        h(j + 1, j) = beta;
        v.col(j + 1) = w / beta;
      }
    }

    Eigen::ComplexSchur<MatrixXc> cs(h.topRows(m));
    if (cs.info() != Eigen::Success) throw ConvergenceError("eigs_shift_invert: Schur step failed");
    t = cs.matrixT();
    z = cs.matrixU();
    detail::schur_sort_by_modulus(t, z);

    const Eigen::RowVectorXcd b = h.row(m) * z;
    Eigen::Index nconv = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const VectorXc y = detail::triangular_eigenvector(t, i);
      const double res = std::abs((b.head(i + 1) * y.head(i + 1)).value());
      if (res <= opt.ritz_tol * std::abs(t(i, i))) ++nconv;
    }
    if (nconv == k || m == n) break;
    if (restart + 1 >= opt.max_restarts)
      throw ConvergenceError("eigs_shift_invert: " + std::to_string(nconv) + " of " + std::to_string(k) +
                             " Ritz pairs converged after " + std::to_string(opt.max_restarts) + " restarts");

    p = std::min<Eigen::Index>(m - 1, k + (m - k) / 2);
    MatrixXc kept = v.leftCols(m) * z.leftCols(p);
    v.leftCols(p) = kept;
    v.col(p) = v.col(m);
    MatrixXc hn = MatrixXc::Zero(m + 1, m);
    hn.topLeftCorner(p, p) = t.topLeftCorner(p, p).triangularView<Eigen::Upper>();
    hn.row(p).head(p) = b.head(p);
    h = hn;
  }

  Spectrum sp;
  MatrixXc vecs(n, k);
  const double anorm = std::max(norm_of(a), 1e-300);
  for (Eigen::Index i = 0; i < k; ++i) {
    const cplx lambda = shift + 1.0 / t(i, i);
    const VectorXc y = detail::triangular_eigenvector(t, i);
    VectorXc x = v.leftCols(m) * (z * y);
    x.normalize();
    const double res = (a * x - lambda * x).norm();
    if (res > opt.residual_tol * anorm)
      throw ConvergenceError("eigs_shift_invert: residual " + sci(res / anorm) +
                             " exceeds contract at index " + std::to_string(i));
    sp.values.push_back(lambda);
    vecs.col(i) = x;
  }
  if (opt.vectors) sp.right = std::move(vecs);
  sp.sort();
  return sp;
}

}  // namespace liospec

#endif  // LIOSPEC_NUMERICS_ARNOLDI_HPP
