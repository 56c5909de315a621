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

#ifndef LIOSPEC_PERTURBATION_HPP
#define LIOSPEC_PERTURBATION_HPP

#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

#include "liospec/numerics.hpp"

namespace liospec {

struct DegeneracyError : NumericalError {
  using NumericalError::NumericalError;
};

// Columns of left and right with left^H right = I.
struct BiorthogonalBasis {
  std::vector<cplx> eigenvalues;
  MatrixXc right;
  MatrixXc left;
  double scale = 1.0;  // ||A|| for the degeneracy threshold

  Eigen::Index size() const { return right.cols(); }
};

inline BiorthogonalBasis biorthonormalize(const MatrixXc& right, const MatrixXc& left, std::vector<cplx> eigenvalues = {},
                                          double overlap_tol = 1e-12) {
  require(right.rows() == left.rows() && right.cols() == left.cols(), "biorthonormalize: shape mismatch");
  require(eigenvalues.empty() || eigenvalues.size() == static_cast<std::size_t>(right.cols()),
          "biorthonormalize: eigenvalue count does not match the vectors");
  BiorthogonalBasis b;
  b.right = right;
  b.left = left;
  for (Eigen::Index i = 0; i < right.cols(); ++i) {
    const cplx o = left.col(i).dot(right.col(i));  // conjugates the left vector
    if (!(std::abs(o) > overlap_tol * left.col(i).norm() * right.col(i).norm()))
      throw NumericalError("biorthonormalize: vanishing overlap at index " + std::to_string(i) +
                           " (defective operator or mismatched pairing)");
    b.left.col(i) /= std::conj(o);
  }
  const MatrixXc g = b.left.adjoint() * b.right;
  const double off = (g - MatrixXc::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
  if (off > 1e-10) throw NumericalError("biorthonormalize: cross overlaps " + sci(off) + " exceed 1e-10");
  if (eigenvalues.empty()) {
    b.eigenvalues.assign(static_cast<std::size_t>(right.cols()), cplx(0.0));
  } else {
    b.eigenvalues = std::move(eigenvalues);
    double m = 0.0;
    for (const auto& z : b.eigenvalues) m = std::max(m, std::abs(z));
    b.scale = std::max(m, 1.0);
  }
  return b;
}

// Biorthonormal eigenbasis of a dense matrix.
inline BiorthogonalBasis biorthogonal_basis(const MatrixXc& a) {
  EigOptions o;
  o.right = o.left = true;
  auto sp = eig_dense(a, o);
  auto b = biorthonormalize(*sp.right, *sp.left, sp.values);
  b.scale = std::max(a.norm(), 1e-300);
  return b;
}

struct PtCorrection {
  cplx first;
  cplx second;
};

// First and second order shifts of eigenvalue i under A + eps V.
inline PtCorrection pt_corrections(const BiorthogonalBasis& b, const MatrixXc& v, Eigen::Index i, double rel_tol = 1e-8) {
  const Eigen::Index n = b.size();
  require(v.rows() == b.right.rows() && v.cols() == b.right.rows(), "pt_corrections: V has the wrong shape");
  require(i >= 0 && i < n, "pt_corrections: index out of range");
  const auto& lam = b.eigenvalues;
  const cplx li = lam[static_cast<std::size_t>(i)];
  for (Eigen::Index k = 0; k < n; ++k)
    if (k != i && std::abs(li - lam[static_cast<std::size_t>(k)]) < rel_tol * b.scale)
      throw DegeneracyError("pt_corrections: eigenvalues " + std::to_string(i) + " and " + std::to_string(k) +
                            " are degenerate within " + sci(rel_tol * b.scale));
  const VectorXc vi = v * b.right.col(i);
  const VectorXc wi = v.adjoint() * b.left.col(i);  // <chi_i|V as a column
  PtCorrection c;
  c.first = b.left.col(i).dot(vi);
  c.second = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == i) continue;
    c.second += wi.dot(b.right.col(k)) * b.left.col(k).dot(vi) / (li - lam[static_cast<std::size_t>(k)]);
  }
  return c;
}

namespace detail {

// Orthonormal Hermite functions without the Gaussian: h_m = H_m / N_m, N_m^2 = 2^m m! sqrt(pi).
inline VectorXr hermite_normalized(double x, int m_max) {
  VectorXr h(m_max + 1);
  h[0] = std::pow(kPi, -0.25);
  if (m_max >= 1) h[1] = std::sqrt(2.0) * x * h[0];
  for (int m = 1; m < m_max; ++m) h[m + 1] = std::sqrt(2.0 / (m + 1)) * x * h[m] - std::sqrt(double(m) / (m + 1)) * h[m - 1];
  return h;
}

// Gauss-Hermite rule for weight e^{-x^2}: Golub-Welsch nodes, Christoffel weights (the eigenvector
// route loses the tiny outer weights to rounding).
inline std::pair<VectorXr, VectorXr> gauss_hermite(int n) {
  VectorXr d = VectorXr::Zero(n), e(n - 1);
  for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<MatrixXr> es;
  es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
  VectorXr x = es.eigenvalues(), w(n);
  for (int i = 0; i < n; ++i) w[i] = 1.0 / hermite_normalized(x[i], n - 1).squaredNorm();
  return {x, w};
}

inline double log_hermite_norm(int m) { return 0.5 * (m * std::log(2.0) + std::lgamma(m + 1.0) + 0.5 * std::log(kPi)); }

using Coef = std::function<double(double)>;

// <chi_k| a d^2 + b d + c |psi_j>, psi_j = e^{-x^2} H_j, chi_k = H_k / N_k^2. Uses psi_j' = -psi_{j+1}.
inline MatrixXr hermite_matrix(const Coef& a, const Coef& b, const Coef& c, int size, int order) {
  const auto [x, w] = gauss_hermite(order);
  MatrixXr m = MatrixXr::Zero(size, size);
  for (Eigen::Index q = 0; q < x.size(); ++q) {
    const VectorXr h = hermite_normalized(x[q], size + 2);
    const double aq = a(x[q]), bq = b(x[q]), cq = c(x[q]);
    for (int k = 0; k < size; ++k)
      for (int j = 0; j < size; ++j) {
        const double lk = log_hermite_norm(k);
        const double t = aq * h[j + 2] * std::exp(log_hermite_norm(j + 2) - lk) -
                         bq * h[j + 1] * std::exp(log_hermite_norm(j + 1) - lk) +
                         cq * h[j] * std::exp(log_hermite_norm(j) - lk);
        m(k, j) += w[q] * h[k] * t;
      }
  }
  return m;
}

}  // namespace detail

// A, V1, V2 of the limit-cycle expansion in the Hermite basis.
struct LimitCycleMatrices {
  MatrixXr A, V1, V2;
  std::vector<cplx> unperturbed;  // -2 j (gamma - 1)/sqrt(gamma)
};

inline LimitCycleMatrices limit_cycle_matrices(double gamma, int l, int size) {
  require(gamma > 1.0 && std::isfinite(gamma), "limit_cycle_matrices: gamma must exceed 1");
  require(size >= 4, "limit_cycle_matrices: basis too small");
  const int order = std::max(64, size + 8);
  const double g = gamma, c0 = (g - 1.0) / std::sqrt(g), q = std::pow(g, -0.25), ll = double(l) * l;
  LimitCycleMatrices m;
  m.A = detail::hermite_matrix([&](double) { return c0; }, [&](double x) { return 2.0 * c0 * x; },
                               [&](double) { return 2.0 * c0; }, size, order);
  m.V1 = detail::hermite_matrix([&](double x) { return -q * (g - 1.0) * x; },
                                [&](double x) { return -q * (g - 2.0 + (g - 4.0) * x * x); },
                                [&](double x) { return -q * 2.0 * (g - 5.0) * x; }, size, order);
  m.V2 = detail::hermite_matrix(
      [&](double x) { return 0.5 * (g - 2.0) * x * x; },
      [&](double x) { return (3.0 * (g * g - 5.0 * g + 3.0) * x + (13.0 - 10.0 * g) * x * x * x) / (3.0 * (g - 1.0)); },
      [&](double x) { return -(ll * (g * g - 4.0 * g + 5.0) + 2.0 * (13.0 * g - 17.0) * x * x) / (2.0 * (g - 1.0)); },
      size, order);
  for (int j = 0; j < size; ++j) m.unperturbed.emplace_back(-2.0 * c0 * j, 0.0);
  return m;
}

struct LimitCycleCorrection {
  double first = 0.0;   // <chi_0|V2|psi_0>
  double second = 0.0;  // second order in V1
  VectorXr v1_column;   // <chi_k|V1|psi_0>
  int truncation = 0;

  cplx value() const { return {first + second, 0.0}; }
};

namespace detail {

inline LimitCycleCorrection limit_cycle_at(double gamma, int l, int size) {
  const auto m = limit_cycle_matrices(gamma, l, size);
  const MatrixXc id = MatrixXc::Identity(size, size);
  const auto b = biorthonormalize(id, id, m.unperturbed);
  LimitCycleCorrection r;
  r.first = pt_corrections(b, m.V2.cast<cplx>(), 0).first.real();
  r.second = pt_corrections(b, m.V1.cast<cplx>(), 0).second.real();
  r.v1_column = m.V1.col(0);
  r.truncation = size;
  return r;
}

}  // namespace detail

// O(1/S) shift of the limit-cycle branch head: lambda ~ il + value()/S.
inline LimitCycleCorrection limit_cycle_correction(double gamma, int l, int truncation = 12, bool check_closed_forms = true) {
  require(gamma > 1.0 && std::isfinite(gamma), "limit_cycle_correction: gamma must exceed 1");
  require(truncation >= 12, "limit_cycle_correction: truncation must be at least 12");
  const auto r = detail::limit_cycle_at(gamma, l, truncation);
  const auto r4 = detail::limit_cycle_at(gamma, l, truncation + 4);
  const double change = std::abs(r4.first + r4.second - r.first - r.second);
  if (change > 1e-8)
    throw ConvergenceError("limit_cycle_correction: result moves by " + sci(change) + " when the basis grows by 4");

  if (check_closed_forms) {
    const double g = gamma, ll = double(l) * l;
    const double first = (g + 2.0 - ll * (g * g - 4.0 * g + 5.0)) / (2.0 * (g - 1.0));
    const double second = -(g + 2.0) / (2.0 * (g - 1.0));
    const double pre = -(g + 2.0) / (4.0 * std::pow(g, 0.25));
    double col = 0.0;
    for (int k = 0; k < truncation; ++k)
      col = std::max(col, std::abs(r.v1_column[k] - pre * (k == 1 ? 2.0 : k == 3 ? 1.0 : 0.0)));
    const double tol = 1e-9 * std::max(1.0, std::abs(first));
    if (std::abs(r.first - first) > tol || std::abs(r.second - second) > tol || col > 1e-9 * std::abs(pre))
      throw NumericalError("limit_cycle_correction: closed forms disagree (first " + sci(r.first - first) + ", second " +
                           sci(r.second - second) + ", V1 column " + sci(col) + ")");
  }
  return r;
}

inline cplx limit_cycle_branch(double S, double gamma, int l) {
  require(S > 0.0, "limit_cycle_branch: S must be positive");
  return cplx(0.0, l) + limit_cycle_correction(gamma, l).value() / S;
}

}  // namespace liospec

#endif  // LIOSPEC_PERTURBATION_HPP
