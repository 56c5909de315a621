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

#ifndef LIOSPEC_NUMERICS_EIG_DENSE_HPP
#define LIOSPEC_NUMERICS_EIG_DENSE_HPP

#include <Eigen/Eigenvalues>

#include "liospec/numerics/types.hpp"

namespace liospec {

struct EigOptions {
  bool right = false;
  bool left = false;
  Eigen::Index dense_cap = 5000;
  double residual_tol = 1e-10;  // relative to ||A||_F
};

// Full spectrum of a dense complex matrix by Hessenberg reduction and shifted QR.
inline Spectrum eig_dense(const MatrixXc& a, const EigOptions& opt = {}) {
  require(a.rows() == a.cols(), "eig_dense: matrix is not square");
  require(a.rows() >= 1, "eig_dense: empty matrix");
  require(a.rows() <= opt.dense_cap,
          "eig_dense: dimension " + std::to_string(a.rows()) + " exceeds dense cap " +
              std::to_string(opt.dense_cap));
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    require(all_finite(VectorXc(a.col(j))), "eig_dense: non-finite entry");

  const bool vectors = opt.right || opt.left;
  Eigen::ComplexEigenSolver<MatrixXc> es;
  es.compute(a, vectors);
  if (es.info() != Eigen::Success) {
    // Eigen does not expose the failing index; the Schur iteration stalls on the trailing block.
    throw ConvergenceError("eig_dense: shifted QR did not converge (iteration cap " +
                           std::to_string(es.getMaxIterations()) + " per eigenvalue, n = " +
                           std::to_string(a.rows()) + ")");
  }

  Spectrum sp;
  const VectorXc& w = es.eigenvalues();
  sp.values.assign(w.data(), w.data() + w.size());
  if (vectors) {
    MatrixXc v = es.eigenvectors();
    for (Eigen::Index j = 0; j < v.cols(); ++j) v.col(j).normalize();
    const double scale = std::max(a.norm(), 1e-300);
    MatrixXc res = a * v - v * w.asDiagonal();
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      if (res.col(j).norm() > opt.residual_tol * scale)
        throw NumericalError("eig_dense: residual contract violated at index " + std::to_string(j));
    }
    if (opt.left) {
      Eigen::PartialPivLU<MatrixXc> lu(v);
      sp.left = lu.inverse().adjoint();
    }
    sp.right = std::move(v);
    if (!opt.right) sp.right.reset();
  }
  sp.sort();
  return sp;
}

inline Spectrum eig_dense(const Tridiagonal<cplx>& t, const EigOptions& opt = {}) {
  t.validate();
  return eig_dense(t.dense(), opt);
}

inline Spectrum eig_dense(const Tridiagonal<double>& t, const EigOptions& opt = {}) {
  t.validate();
  return eig_dense(MatrixXc(t.dense().cast<cplx>()), opt);
}

inline Spectrum eig_dense(const SparseMatrixC& a, const EigOptions& opt = {}) {
  require(a.rows() <= opt.dense_cap, "eig_dense: dimension exceeds dense cap");
  return eig_dense(MatrixXc(a), opt);
}

}  // namespace liospec

#endif  // LIOSPEC_NUMERICS_EIG_DENSE_HPP
