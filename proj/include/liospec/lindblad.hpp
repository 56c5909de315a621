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

#ifndef LIOSPEC_LINDBLAD_HPP
#define LIOSPEC_LINDBLAD_HPP

#include <unsupported/Eigen/KroneckerProduct>

#include "liospec/numerics.hpp"

namespace liospec {

// Hamiltonian and jump operators of a GKSL generator; all operators are dim x dim.
struct LindbladSystem {
  SparseMatrixC hamiltonian;
  std::vector<SparseMatrixC> jump_ops;

  Eigen::Index dim() const { return hamiltonian.rows(); }

  void validate() const {
    const Eigen::Index n = hamiltonian.rows();
    require(n >= 1 && hamiltonian.cols() == n, "LindbladSystem: Hamiltonian must be square and non-empty");
    for (const auto& l : jump_ops)
      require(l.rows() == n && l.cols() == n, "LindbladSystem: jump operator dimension mismatch");
    const SparseMatrixC herm = SparseMatrixC(hamiltonian.adjoint()) - hamiltonian;
    require(herm.norm() <= 1e-12 * std::max(1.0, hamiltonian.norm()), "LindbladSystem: Hamiltonian is not Hermitian");
  }
};

struct DensityMatrix {
  MatrixXc entries;

  Eigen::Index dim() const { return entries.rows(); }
  double trace() const { return entries.trace().real(); }

  // Hermitian, unit trace, and positive down to the numerical floor.
  bool valid(double herm_tol = 1e-10, double trace_tol = 1e-10, double floor = -1e-8) const {
    if (entries.rows() != entries.cols() || entries.rows() == 0) return false;
    if ((entries - entries.adjoint()).norm() > herm_tol) return false;
    if (std::abs(entries.trace() - cplx(1.0)) > trace_tol) return false;
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(entries, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= floor;
  }
};

struct DegenerateKernelError : NumericalError {
  DegenerateKernelError(const std::string& what, double a, double b)
      : NumericalError(what), smallest(a), second(b) {}
  double smallest, second;
};

// Column-stacking vectorization: vec(X)[i + n j] = X(i, j).
inline VectorXc vec(const MatrixXc& x) { return Eigen::Map<const VectorXc>(x.data(), x.size()); }

inline MatrixXc unvec(const VectorXc& v, Eigen::Index n) {
  require(v.size() == n * n, "unvec: length is not a square of the dimension");
  return Eigen::Map<const MatrixXc>(v.data(), n, n);
}

namespace detail {

inline SparseMatrixC sparse_identity(Eigen::Index n) {
  SparseMatrixC id(n, n);
  id.setIdentity();
  return id;
}

inline SparseMatrixC kron(const SparseMatrixC& a, const SparseMatrixC& b) {
  SparseMatrixC out = Eigen::kroneckerProduct(a, b);
  return out;
}

}  // namespace detail

// M with vec(d rho/dt) = M vec(rho), using vec(A X B) = (B^T kron A) vec(X).
inline SparseMatrixC build_superoperator(const LindbladSystem& sys) {
  sys.validate();
  const Eigen::Index n = sys.dim();
  const SparseMatrixC id = detail::sparse_identity(n);
  const SparseMatrixC& h = sys.hamiltonian;
  const SparseMatrixC ht = h.transpose();
  SparseMatrixC m = cplx(0.0, -1.0) * (detail::kron(id, h) - detail::kron(ht, id));
  for (const auto& l : sys.jump_ops) {
    const SparseMatrixC ldl = SparseMatrixC(l.adjoint()) * l;
    const SparseMatrixC ldlt = ldl.transpose();
    const SparseMatrixC lc = l.conjugate();
    m += detail::kron(lc, l) - 0.5 * detail::kron(id, ldl) - 0.5 * detail::kron(ldlt, id);
  }
  m.prune(cplx(0.0));
  m.makeCompressed();
  return m;
}

inline MatrixXc apply_liouvillian(const LindbladSystem& sys, const MatrixXc& rho) {
  require(rho.rows() == sys.dim() && rho.cols() == sys.dim(), "apply_liouvillian: dimension mismatch");
  const MatrixXc h = sys.hamiltonian;
  MatrixXc out = cplx(0.0, -1.0) * (h * rho - rho * h);
  for (const auto& ls : sys.jump_ops) {
    const MatrixXc l = ls;
    const MatrixXc ld = l.adjoint();
    // (1/2)([L rho, L^dag] + [L, rho L^dag])
    out += 0.5 * ((l * rho) * ld - ld * (l * rho) + l * (rho * ld) - (rho * ld) * l);
  }
  return out;
}

// ||M^dag vec(I)|| / ||M||; zero for an exactly trace-preserving generator.
inline double trace_preservation_defect(const SparseMatrixC& m) {
  const Eigen::Index n2 = m.rows();
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n2))));
  require(n * n == n2, "trace_preservation_defect: not a superoperator");
  const VectorXc id = vec(MatrixXc::Identity(n, n));
  const VectorXc r = m.adjoint() * id;
  return r.norm() / std::max(m.norm(), 1e-300);
}

struct SteadyStateOptions {
  std::uint64_t seed = 20240917;
  double kernel_gap = 1e-8;
  double shift_offset = 1e-9;
};

// Kernel vector of M from shift-invert near zero, reshaped, Hermitized and trace-normalized.
inline DensityMatrix steady_state(const SparseMatrixC& m, const SteadyStateOptions& opt = {}) {
  const Eigen::Index n2 = m.rows();
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(n2))));
  require(m.cols() == n2 && n * n == n2, "steady_state: not a square superoperator");
  if (n == 1) return DensityMatrix{MatrixXc::Ones(1, 1)};

  // A shift at exactly zero makes (M - sigma) singular and pollutes the second Ritz pair;
  // an offset far below any admissible gap keeps both pairs accurate.
  const double tau = opt.shift_offset * std::max(1.0, m.norm() / std::sqrt(static_cast<double>(n2)));
  Spectrum sp;
  const cplx shifts[] = {cplx(-tau, 0.0), cplx(-tau, 0.5 * tau), cplx(-2.0 * tau, -0.3 * tau)};
  bool done = false;
  for (const auto& s : shifts) {
    try {
      sp = eigs_shift_invert(m, s, 2, opt.seed);
      done = true;
      break;
    } catch (const SingularShiftError&) {
    }
  }
  if (!done) throw NumericalError("steady_state: every shift near zero was singular");

  std::vector<std::size_t> idx = {0, 1};
  if (std::abs(sp.values[1]) < std::abs(sp.values[0])) std::swap(idx[0], idx[1]);
  const double a0 = std::abs(sp.values[idx[0]]), a1 = std::abs(sp.values[idx[1]]);
  if (a1 <= opt.kernel_gap)
    throw DegenerateKernelError("steady_state: kernel is not one-dimensional (|L0| = " + sci(a0) +
                                    ", |L1| = " + sci(a1) + ")",
                                a0, a1);
  MatrixXc rho = unvec(sp.right->col(static_cast<Eigen::Index>(idx[0])), n);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const cplx tr = rho.trace();
  if (std::abs(tr) < 1e-14) throw NumericalError("steady_state: kernel vector is traceless");
  rho /= tr;
  return DensityMatrix{rho};
}

inline DensityMatrix propagate_density(const LindbladSystem& sys, const DensityMatrix& rho0, double t,
                                       const KrylovOptions& opt = {}) {
  require(rho0.dim() == sys.dim(), "propagate_density: dimension mismatch");
  require(t >= 0.0, "propagate_density: t must be nonnegative");
  const SparseMatrixC m = build_superoperator(sys);
  const VectorXc v = propagate_krylov(m, vec(rho0.entries), t, opt);
  DensityMatrix out{unvec(v, sys.dim())};
  if (!(std::abs(out.entries.trace() - rho0.entries.trace()) <= 1e-8))
    throw NumericalError("propagate_density: trace drifted beyond 1e-8");
  return out;
}

}  // namespace liospec

#endif  // LIOSPEC_LINDBLAD_HPP
