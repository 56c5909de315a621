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

#ifndef LIOSPEC_BOSE_HUBBARD_HPP
#define LIOSPEC_BOSE_HUBBARD_HPP

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <future>
#include <map>

#include "liospec/classical.hpp"
#include "liospec/dimer_config.hpp"
#include "liospec/lindblad.hpp"

namespace liospec {

struct FockOperators {
  SparseMatrixC a, a_dag;
};

// Truncated to n_max quanta; [a, a_dag] = I except the last diagonal entry, which is -n_max.
inline FockOperators fock_operators(int n_max) {
  require(n_max >= 1, "fock_operators: n_max must be at least 1");
  const Eigen::Index d = n_max + 1;
  std::vector<Eigen::Triplet<cplx>> t;
  for (Eigen::Index n = 1; n < d; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  FockOperators f;
  f.a.resize(d, d);
  f.a.setFromTriplets(t.begin(), t.end());
  f.a_dag = SparseMatrixC(f.a.adjoint());
  return f;
}

// Site operators on the two-site space, site 1 the slow (outer) index.
inline std::array<SparseMatrixC, 2> dimer_site_ops(int n_max) {
  const auto f = fock_operators(n_max);
  const auto id = detail::sparse_identity(n_max + 1);
  return {detail::kron(f.a, id), detail::kron(id, f.a)};
}

// Rotating-frame Hamiltonian with U = kappa / mu and F_j = sqrt(mu) F_tilde_j kappa.
inline SparseMatrixC dimer_hamiltonian(const DimerConfig& c) {
  c.validate();
  const auto ops = dimer_site_ops(c.n_max);
  const double f[2] = {c.F1(), c.F2()};
  const SparseMatrixC ad0 = SparseMatrixC(ops[0].adjoint()), ad1 = SparseMatrixC(ops[1].adjoint());
  SparseMatrixC h = -c.J() * SparseMatrixC(ad0 * ops[1] + ad1 * ops[0]);
  for (int j = 0; j < 2; ++j) {
    const SparseMatrixC& a = ops[static_cast<std::size_t>(j)];
    const SparseMatrixC ad = SparseMatrixC(a.adjoint());
    const SparseMatrixC n = ad * a, pair = ad * ad * a * a;
    h += -c.Delta() * n + 0.5 * c.U() * pair + f[j] * SparseMatrixC(ad + a);
  }
  h.prune(cplx(0.0));
  return h;
}

inline LindbladSystem dimer_system(const DimerConfig& c) {
  LindbladSystem s;
  s.hamiltonian = dimer_hamiltonian(c);
  for (const auto& a : dimer_site_ops(c.n_max)) s.jump_ops.push_back(std::sqrt(2.0 * c.kappa) * a);
  return s;
}

inline constexpr Eigen::Index kDimerDimensionCap = 20736;

inline Eigen::Index dimer_dimension(int n_max) {
  const Eigen::Index d = n_max + 1;
  return d * d * d * d;
}

inline SparseMatrixC dimer_liouvillian(const DimerConfig& c, Eigen::Index cap = kDimerDimensionCap) {
  c.validate();
  const Eigen::Index dim = dimer_dimension(c.n_max);
  if (dim > cap)
    throw ValidationError("dimer_liouvillian: dimension " + std::to_string(dim) + " at n_max = " + std::to_string(c.n_max) +
                          " exceeds the cap " + std::to_string(cap) + "; lower n_max or raise the cap explicitly");
  return build_superoperator(dimer_system(c));
}

// Mean occupations in the steady state.
inline std::pair<double, double> dimer_occupations(const DimerConfig& c, Eigen::Index cap = kDimerDimensionCap) {
  const auto rho = steady_state(dimer_liouvillian(c, cap));
  const auto ops = dimer_site_ops(c.n_max);
  const MatrixXc n1 = MatrixXc(SparseMatrixC(ops[0].adjoint()) * ops[0]), n2 = MatrixXc(SparseMatrixC(ops[1].adjoint()) * ops[1]);
  return {(n1 * rho.entries).trace().real(), (n2 * rho.entries).trace().real()};
}

// Angular frequency of the classical cycle reached from the vacuum.
inline double classical_dimer_omega(const DimerConfig& c, double t_settle_kappa = 400.0) {
  const auto a = detect_limit_cycle(dimer_field(c), VectorXr::Zero(4), t_settle_kappa / c.kappa, 20.0 / c.kappa);
  if (a.kind != AttractorKind::LimitCycle)
    throw NumericalError("classical_dimer_omega: the vacuum flows to a fixed point at these parameters");
  return 2.0 * kPi / a.period;
}

struct LowLyingOptions {
  int k = 10;                // eigenvalues per shift
  int harmonics = 3;         // shifts at i l omega for l = 0..harmonics (and mirrored)
  std::vector<cplx> shifts;  // overrides the harmonic ladder when non-empty
  double shift_offset = 0.05;  // real part of each shift in units of kappa; keeps clear of the zero mode
  double re_window = 3.0;      // keep Re >= -re_window kappa
  double dedup = 1e-7;
  bool mirror = true;  // compute Im >= 0 shifts only and add conjugates
  int workers = 1;
  std::uint64_t seed = 7;
  Eigen::Index cap = kDimerDimensionCap;
  ShiftInvertOptions arnoldi{};
};

struct LowLyingSpectrum {
  Spectrum spectrum;
  bool complete = true;
  std::vector<std::string> failures;  // one per failed shift
  std::vector<cplx> shifts;
};

namespace detail {

inline void push_unique(std::vector<cplx>& out, cplx z, double tol) {
  for (const auto& w : out)
    if (std::abs(w - z) < tol) return;
  out.push_back(z);
}

}  // namespace detail

inline LowLyingSpectrum low_lying_dimer_spectrum(const DimerConfig& c, double omega, const LowLyingOptions& opt = {}) {
  require(opt.k >= 10, "low_lying_dimer_spectrum: k must be at least 10");
  require(opt.workers >= 1, "low_lying_dimer_spectrum: workers must be positive");
  const SparseMatrixC m = dimer_liouvillian(c, opt.cap);

  LowLyingSpectrum out;
  if (!opt.shifts.empty()) {
    out.shifts = opt.shifts;
  } else {
    require(omega > 0.0 && std::isfinite(omega), "low_lying_dimer_spectrum: omega must be positive");
    for (int l = 0; l <= opt.harmonics; ++l) {
      out.shifts.emplace_back(opt.shift_offset * c.kappa, l * omega);
      if (!opt.mirror && l > 0) out.shifts.emplace_back(opt.shift_offset * c.kappa, -l * omega);
    }
  }

  std::vector<std::vector<cplx>> found(out.shifts.size());
  std::vector<std::string> errs(out.shifts.size());
  auto run = [&](std::size_t i) {
    try {
      ShiftInvertOptions a = opt.arnoldi;
      a.vectors = false;
      found[i] = eigs_shift_invert(m, out.shifts[i], opt.k, opt.seed + i, a).values;
    } catch (const NumericalError& e) {
      errs[i] = "shift (" + sci(out.shifts[i].real()) + ", " + sci(out.shifts[i].imag()) + "): " + e.what();
    }
  };
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> pool;
  for (int w = 0; w < opt.workers; ++w)
    pool.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i; (i = next++) < out.shifts.size();) run(i);
    }));
  for (auto& f : pool) f.get();

  std::vector<cplx> all;
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (!errs[i].empty()) {
      out.complete = false;
      out.failures.push_back(errs[i]);
    }
    for (const auto& z : found[i]) {
      if (z.real() < -opt.re_window * c.kappa) continue;
      detail::push_unique(all, z, opt.dedup);
      if (opt.mirror && opt.shifts.empty()) detail::push_unique(all, std::conj(z), opt.dedup);
    }
  }
  out.spectrum.values = std::move(all);
  out.spectrum.sort();
  return out;
}

struct BranchReport {
  std::vector<cplx> limit_cycle_branch;  // ascending Im
  std::vector<int> harmonic;             // round(Im / omega) of each branch member
  std::vector<cplx> remainder;
  double omega_estimate = 0.0;
};

inline BranchReport classify_dimer_branch(const std::vector<cplx>& values, double omega, double window = 0.15) {
  require(omega > 0.0 && std::isfinite(omega), "classify_dimer_branch: omega must be positive");
  std::map<int, std::size_t> best;
  std::vector<bool> taken(values.size(), false);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double im = values[i].imag();
    const int h = static_cast<int>(std::lround(im / omega));
    if (std::abs(im - h * omega) >= window * omega) continue;
    auto it = best.find(h);
    if (it == best.end() || std::abs(values[i].real()) < std::abs(values[it->second].real())) best[h] = i;
  }
  if (best.empty()) throw NumericalError("classify_dimer_branch: no eigenvalue lies within the harmonic window");
  BranchReport r;
  double num = 0.0, den = 0.0;
  for (const auto& [h, i] : best) {  // map order is ascending harmonic, hence ascending Im
    taken[i] = true;
    r.limit_cycle_branch.push_back(values[i]);
    r.harmonic.push_back(h);
    num += h * values[i].imag();
    den += static_cast<double>(h) * h;
  }
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!taken[i]) r.remainder.push_back(values[i]);
  r.omega_estimate = den > 0.0 ? num / den : omega;
  if (!best.count(0) || std::abs(values[best[0]]) > 1e-8)
    throw NumericalError("classify_dimer_branch: no steady-state eigenvalue on the branch (|Lambda| <= 1e-8)");
  return r;
}

// Tracked eigenvalues as a function of the configuration.
using DimerObservable = std::function<std::vector<cplx>(const DimerConfig&)>;

struct CutoffReport {
  int n_low = 0, n_high = 0;
  std::vector<cplx> low, high;
  double drift = 0.0;
  bool converged = false;
};

namespace detail {

inline double cutoff_drift(const std::vector<cplx>& low, const std::vector<cplx>& high, double floor) {
  if (low.size() != high.size())
    throw NumericalError("cutoff_convergence: observable returned " + std::to_string(low.size()) + " and " +
                         std::to_string(high.size()) + " values at the two cutoffs");
  double d = 0.0;
  for (std::size_t i = 0; i < low.size(); ++i) d = std::max(d, std::abs(high[i] - low[i]) / std::max(std::abs(high[i]), floor));
  return d;
}

}  // namespace detail

// Relative drift of the tracked values between n_max and n_max + 2; values below `floor` in modulus
// are compared absolutely.
inline CutoffReport cutoff_convergence(const DimerConfig& c, const DimerObservable& obs, double floor = 1e-3) {
  DimerConfig hi = c;
  hi.n_max += 2;
  CutoffReport r;
  r.n_low = c.n_max;
  r.n_high = hi.n_max;
  r.low = obs(c);
  r.high = obs(hi);
  r.drift = detail::cutoff_drift(r.low, r.high, floor);
  r.converged = r.drift < 0.01;
  return r;
}

// Branch heads for harmonics 0..harmonics, matched by harmonic index.
inline DimerObservable dimer_branch_observable(double omega, LowLyingOptions opt = {}) {
  return [omega, opt](const DimerConfig& c) {
    const auto sp = low_lying_dimer_spectrum(c, omega, opt);
    if (!sp.complete) throw NumericalError("dimer_branch_observable: " + sp.failures.front());
    const auto br = classify_dimer_branch(sp.spectrum.values, omega);
    std::vector<cplx> v;
    for (int h = 0; h <= opt.harmonics; ++h) {
      const auto it = std::find(br.harmonic.begin(), br.harmonic.end(), h);
      if (it == br.harmonic.end())
        throw NumericalError("dimer_branch_observable: harmonic " + std::to_string(h) + " missing from the branch");
      v.push_back(br.limit_cycle_branch[static_cast<std::size_t>(it - br.harmonic.begin())]);
    }
    return v;
  };
}

// Raise n_max in steps of 2 from c.n_max until converged or the next step exceeds the cap; each
// cutoff is evaluated once. An unconverged report carries the last pair that fit under the cap.
inline CutoffReport converge_cutoff(DimerConfig c, const DimerObservable& obs, Eigen::Index cap = kDimerDimensionCap,
                                    double floor = 1e-3) {
  require(dimer_dimension(c.n_max + 2) <= cap, "converge_cutoff: n_max + 2 already exceeds the dimension cap");
  CutoffReport r;
  r.n_high = c.n_max;
  r.high = obs(c);
  while (dimer_dimension(r.n_high + 2) <= cap) {
    r.n_low = r.n_high;
    r.low = std::move(r.high);
    c.n_max = r.n_low + 2;
    r.n_high = c.n_max;
    r.high = obs(c);
    r.drift = detail::cutoff_drift(r.low, r.high, floor);
    r.converged = r.drift < 0.01;
    if (r.converged) break;
  }
  return r;
}

}  // namespace liospec

#endif  // LIOSPEC_BOSE_HUBBARD_HPP
