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

#ifndef LIOSPEC_NUMERICS_TYPES_HPP
#define LIOSPEC_NUMERICS_TYPES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace liospec {

using cplx = std::complex<double>;
using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;
using VectorXr = Eigen::VectorXd;
using MatrixXr = Eigen::MatrixXd;
// Row-major compressed storage: indices sorted within each row after makeCompressed().
using SparseMatrixC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline constexpr double kPi = 3.14159265358979323846;

// Base of everything the library throws. The CLI maps the two subclasses to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct SingularShiftError : NumericalError {
  using NumericalError::NumericalError;
};
struct ConvergenceError : NumericalError {
  using NumericalError::NumericalError;
};

// Compact scientific rendering for diagnostics.
inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

// Tridiagonal storage; sub[k] = A(k+1,k), sup[k] = A(k,k+1).
template <class Scalar>
struct Tridiagonal {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> diag, sub, sup;

  Eigen::Index size() const { return diag.size(); }

  void validate() const {
    require(diag.size() >= 1, "tridiagonal: empty matrix");
    require(sub.size() == diag.size() - 1 && sup.size() == diag.size() - 1,
            "tridiagonal: off-diagonal length must be size-1");
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense() const {
    validate();
    const Eigen::Index n = size();
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) a(k, k) = diag[k];
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      a(k + 1, k) = sub[k];
      a(k, k + 1) = sup[k];
    }
    return a;
  }

  template <class V>
  V apply(const V& x) const {
    const Eigen::Index n = size();
    V y(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      y[k] = diag[k] * x[k];
      if (k > 0) y[k] += sub[k - 1] * x[k - 1];
      if (k + 1 < n) y[k] += sup[k] * x[k + 1];
    }
    return y;
  }
};

struct BranchLabel {
  int l = 0;
  int j = 0;
  bool labeled = false;
};

// Eigenvalues with optional right/left eigenvectors (stored as columns) and labels.
// Left vectors are normalized so that left.col(i).adjoint() * right.col(j) = delta_ij.
struct Spectrum {
  std::vector<cplx> values;
  std::optional<MatrixXc> right;
  std::optional<MatrixXc> left;
  std::vector<BranchLabel> labels;

  std::size_t size() const { return values.size(); }

  // Descending real part, then ascending |Im|, then positive Im first.
  static bool precedes(const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    if (std::abs(a.imag()) != std::abs(b.imag())) return std::abs(a.imag()) < std::abs(b.imag());
    return a.imag() > b.imag();
  }

  void sort() {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return precedes(values[a], values[b]); });
    permute(idx);
  }

  void permute(const std::vector<std::size_t>& idx) {
    std::vector<cplx> v(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) v[i] = values[idx[i]];
    values = std::move(v);
    auto reorder = [&](std::optional<MatrixXc>& m) {
      if (!m) return;
      MatrixXc out(m->rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t i = 0; i < idx.size(); ++i)
        out.col(static_cast<Eigen::Index>(i)) = m->col(static_cast<Eigen::Index>(idx[i]));
      m = std::move(out);
    };
    reorder(right);
    reorder(left);
    if (labels.size() == idx.size()) {
      std::vector<BranchLabel> lab(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) lab[i] = labels[idx[i]];
      labels = std::move(lab);
    }
  }

  bool is_sorted() const {
    for (std::size_t i = 1; i < values.size(); ++i)
      if (precedes(values[i], values[i - 1])) return false;
    return true;
  }

  // Largest |<left_i, right_j> - delta_ij|; zero when either side is absent.
  double biorthogonality_defect() const {
    if (!left || !right) return 0.0;
    MatrixXc g = left->adjoint() * (*right);
    g -= MatrixXc::Identity(g.rows(), g.cols());
    return g.cwiseAbs().maxCoeff();
  }
};

struct OdeTrajectory {
  std::vector<double> times;
  std::vector<VectorXr> states;
  double tolerance = 0.0;
};

inline bool all_finite(const VectorXc& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) return false;
  return true;
}

inline bool all_finite(const VectorXr& v) { return v.allFinite(); }

// Frobenius norm; cheap and adequate as the scale in residual contracts.
inline double norm_of(const SparseMatrixC& a) { return a.norm(); }
inline double norm_of(const MatrixXc& a) { return a.norm(); }

}  // namespace liospec

#endif  // LIOSPEC_NUMERICS_TYPES_HPP
