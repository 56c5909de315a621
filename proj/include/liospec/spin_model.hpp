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

#ifndef LIOSPEC_SPIN_MODEL_HPP
#define LIOSPEC_SPIN_MODEL_HPP

#include <atomic>
#include <future>
#include <map>
#include <thread>

#include "liospec/lindblad.hpp"
#include "liospec/numerics.hpp"

namespace liospec {

struct SpinParams {
  double S = 0.5;
  double gamma = 0.0;

  int two_s() const { return static_cast<int>(std::llround(2.0 * S)); }

  void validate(bool allow_zero = false) const {
    require(std::isfinite(S) && std::abs(2.0 * S - std::round(2.0 * S)) < 1e-12 && 2.0 * S >= 0.0,
            "spin: 2S must be a nonnegative integer");
    require(allow_zero || S >= 0.5, "spin: S must be at least 1/2");
    require(std::isfinite(gamma) && gamma >= 0.0, "spin: gamma must be nonnegative");
  }
};

struct SpinOperators {
  SparseMatrixC sz, splus, sminus;
};

// beta_{S,m} = sqrt(S(S+1) - m(m+1)).
inline double beta(double S, double m) {
  require(std::abs(2.0 * S - std::round(2.0 * S)) < 1e-12 && S >= 0.0, "beta: invalid S");
  require(std::abs(m) <= S + 1e-12, "beta: |m| exceeds S");
  require(std::abs((S - m) - std::round(S - m)) < 1e-12, "beta: S - m must be an integer");
  return std::sqrt(std::max(0.0, S * (S + 1.0) - m * (m + 1.0)));
}

// Basis index i carries m = S - i, so S+ sits on the superdiagonal.
inline SpinOperators spin_operators(double S) {
  SpinParams{S, 0.0}.validate(true);
  const int n = static_cast<int>(std::llround(2.0 * S)) + 1;
  std::vector<Eigen::Triplet<cplx>> z, p, mn;
  for (int i = 0; i < n; ++i) {
    const double m = S - i;
    if (m != 0.0) z.emplace_back(i, i, m);
    if (i > 0) {
      const double b = beta(S, m);
      p.emplace_back(i - 1, i, b);
      mn.emplace_back(i, i - 1, b);
    }
  }
  SpinOperators ops{SparseMatrixC(n, n), SparseMatrixC(n, n), SparseMatrixC(n, n)};
  ops.sz.setFromTriplets(z.begin(), z.end());
  ops.splus.setFromTriplets(p.begin(), p.end());
  ops.sminus.setFromTriplets(mn.begin(), mn.end());
  ops.sz.makeCompressed();
  ops.splus.makeCompressed();
  ops.sminus.makeCompressed();
  return ops;
}

struct SpinJumps {
  SparseMatrixC l1, l2;
};

// L1 = S+/sqrt(S), L2 = sqrt(gamma/S^3) S- Sz.
inline SpinJumps jump_operators(const SpinParams& p) {
  p.validate();
  const auto ops = spin_operators(p.S);
  SpinJumps j;
  j.l1 = ops.splus / std::sqrt(p.S);
  j.l2 = std::sqrt(p.gamma / (p.S * p.S * p.S)) * (ops.sminus * ops.sz);
  j.l2.prune(cplx(0.0));
  j.l2.makeCompressed();
  return j;
}

// H = -Sz with both jump channels.
inline LindbladSystem spin_system(const SpinParams& p) {
  const auto ops = spin_operators(p.S);
  const auto j = jump_operators(p);
  LindbladSystem sys;
  sys.hamiltonian = -ops.sz;
  sys.jump_ops = {j.l1};
  if (p.gamma > 0.0) sys.jump_ops.push_back(j.l2);
  return sys;
}

// Real tridiagonal part of the l-th diagonal sector, acting on rho_{m, m-l} with m = -S + l + k.
struct LiouvillianBlock {
  int l = 0;
  double S = 0.5;
  double gamma = 0.0;
  VectorXr diag, sub, sup;
  double phase = 0.0;  // imaginary shift i*l applied to the whole block

  Eigen::Index size() const { return diag.size(); }
  double m_at(Eigen::Index k) const { return -S + l + static_cast<double>(k); }
  Tridiagonal<double> tridiagonal() const { return {diag, sub, sup}; }

  MatrixXc dense() const {
    MatrixXc a = tridiagonal().dense().cast<cplx>();
    a.diagonal().array() += cplx(0.0, phase);
    return a;
  }
};

inline LiouvillianBlock build_block(const SpinParams& p, int l) {
  p.validate();
  const int two_s = p.two_s();
  require(l >= 0 && l <= two_s, "build_block: l must lie in [0, 2S]");
  const double S = p.S, g = p.gamma, s3 = S * S * S;
  const int n = two_s + 1 - l;
  LiouvillianBlock b;
  b.l = l;
  b.S = S;
  b.gamma = g;
  b.phase = l;
  b.diag.resize(n);
  b.sub.resize(n - 1);
  b.sup.resize(n - 1);
  for (int k = 0; k < n; ++k) {
    const double m = -S + l + k, mp = m - l;
    const double bm = beta(S, m), bmp = beta(S, mp);
    const double bnm = beta(S, -m), bnmp = beta(S, -mp);
    b.diag[k] = -(bm * bm + bmp * bmp) / (2.0 * S) - g / (2.0 * s3) * (m * m * bnm * bnm + mp * mp * bnmp * bnmp);
    if (k + 1 < n) b.sup[k] = g / s3 * (m + 1.0) * (mp + 1.0) * bm * bmp;
    // row k+1 (m+1) receives from row k (m)
    if (k + 1 < n) {
      const double m1 = m + 1.0, mp1 = mp + 1.0;
      b.sub[k] = beta(S, -m1) * beta(S, -mp1) / S;
    }
  }
  return b;
}

struct BlockSpectrumOptions {
  bool vectors = true;
};

// Splits the block at vanishing up-couplings into irreducible diagonal pieces.
inline std::vector<std::pair<Eigen::Index, Eigen::Index>> block_pieces(const LiouvillianBlock& b) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  Eigen::Index start = 0;
  for (Eigen::Index k = 0; k + 1 < b.size(); ++k)
    if (b.sup[k] == 0.0) {
      out.emplace_back(start, k + 1);
      start = k + 1;
    }
  out.emplace_back(start, b.size());
  return out;
}

// Eigenvalues il + mu. The block is lower block-triangular in its pieces, so the spectrum is the
// union of piece spectra; each returned eigenvector is that of the owning piece, zero elsewhere.
inline Spectrum block_spectrum(const LiouvillianBlock& b, const BlockSpectrumOptions& opt = {}) {
  const Eigen::Index n = b.size();
  require(n >= 1 && b.sub.size() == n - 1 && b.sup.size() == n - 1, "block_spectrum: malformed block");
  Spectrum sp;
  MatrixXc vecs;
  if (opt.vectors) vecs = MatrixXc::Zero(n, n);
  Eigen::Index col = 0;
  const cplx shift(0.0, b.phase);
  for (const auto& [lo, hi] : block_pieces(b)) {
    const Eigen::Index len = hi - lo;
    Tridiagonal<double> t{b.diag.segment(lo, len), b.sub.segment(lo, std::max<Eigen::Index>(len - 1, 0)),
                          b.sup.segment(lo, std::max<Eigen::Index>(len - 1, 0))};
    if (len == 1 || symmetrizable(t)) {
      const auto s = symmetrize(t);
      const auto e = symmetric_tridiagonal_eig(s.diag, s.off, opt.vectors);
      for (Eigen::Index j = 0; j < len; ++j) {
        sp.values.push_back(shift + e.values[j]);
        if (opt.vectors) {
          VectorXr logabs(len);
          for (Eigen::Index i = 0; i < len; ++i)
            logabs[i] = std::log(std::max(std::abs(e.vectors(i, j)), 1e-300)) + s.log_scale[i];
          const double top = logabs.maxCoeff();
          VectorXr v(len);
          for (Eigen::Index i = 0; i < len; ++i)
            v[i] = std::copysign(std::exp(logabs[i] - top), e.vectors(i, j));
          // the rescaled vector loses entries the scaling amplifies; polish on the raw piece
          if (len > 1) v = tridiagonal_eigenvector(t, e.values[j], v);
          vecs.col(col).segment(lo, len) = v.cast<cplx>() / v.norm();
        }
        ++col;
      }
    } else {
      Eigen::EigenSolver<MatrixXr> es(t.dense(), opt.vectors);
      if (es.info() != Eigen::Success) throw ConvergenceError("block_spectrum: dense piece did not converge");
      for (Eigen::Index j = 0; j < len; ++j) {
        sp.values.push_back(shift + es.eigenvalues()[j]);
        if (opt.vectors) {
          VectorXc v = es.eigenvectors().col(j);
          vecs.col(col).segment(lo, len) = v / v.norm();
        }
        ++col;
      }
    }
  }
  if (opt.vectors) sp.right = std::move(vecs);
  sp.labels.assign(sp.values.size(), BranchLabel{b.l, 0, false});
  sp.sort();
  return sp;
}

// Blocks 0..l_max on a pool of `workers` threads; results ordered by l.
inline std::vector<Spectrum> spin_block_spectra(const SpinParams& p, int l_max, int workers = 1,
                                                const BlockSpectrumOptions& opt = {}) {
  p.validate();
  require(l_max >= 0 && l_max <= p.two_s(), "spin_block_spectra: l_max out of range");
  std::vector<Spectrum> out(static_cast<std::size_t>(l_max) + 1);
  workers = std::max(1, workers);
  std::atomic<int> next{0};
  auto job = [&]() {
    for (int l = next++; l <= l_max; l = next++) out[static_cast<std::size_t>(l)] = block_spectrum(build_block(p, l), opt);
  };
  if (workers == 1) {
    job();
  } else {
    std::vector<std::future<void>> fs;
    for (int w = 0; w < workers; ++w) fs.push_back(std::async(std::launch::async, job));
    for (auto& f : fs) f.get();
  }
  return out;
}

// All eigenvalues of the full superoperator, assembled from blocks; l < 0 by conjugation.
inline std::vector<cplx> full_spectrum_from_blocks(const SpinParams& p) {
  std::vector<cplx> all;
  BlockSpectrumOptions opt;
  opt.vectors = false;
  for (int l = 0; l <= p.two_s(); ++l) {
    const auto s = block_spectrum(build_block(p, l), opt);
    for (const auto& z : s.values) {
      all.push_back(z);
      if (l > 0) all.push_back(std::conj(z));
    }
  }
  return all;
}

struct FamilyClassifier {
  double mass_fraction = 0.5;  // south-pole family if at least this much weight ...
  double m_over_s = -0.5;      // ... lies at m/S below this value
  double zero_tol = 1e-9;      // |Re| below this counts as the steady state
};

inline bool is_south_family(const LiouvillianBlock& b, const VectorXc& v, const FamilyClassifier& c = {}) {
  double tot = 0.0, south = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const double w = std::norm(v[k]);
    tot += w;
    if (b.m_at(k) / b.S < c.m_over_s) south += w;
  }
  return tot > 0.0 && south >= c.mass_fraction * tot;
}

struct GapReport {
  double delta_c = 0.0;
  double delta_p = 0.0;
  std::optional<double> delta_pi;
  double S = 0.0;
  double gamma = 0.0;
};

// Needs the l = 0 and l = 1 spectra with eigenvectors, in that order.
inline GapReport extract_gaps(const SpinParams& p, const std::vector<Spectrum>& by_l, const FamilyClassifier& c = {}) {
  require(by_l.size() >= 2, "extract_gaps: blocks l = 0 and l = 1 are required");
  const Spectrum& s0 = by_l[0];
  const Spectrum& s1 = by_l[1];
  require(s0.right.has_value(), "extract_gaps: l = 0 eigenvectors are missing");
  GapReport g;
  g.S = p.S;
  g.gamma = p.gamma;
  g.delta_c = std::numeric_limits<double>::infinity();
  for (const auto& z : s1.values) g.delta_c = std::min(g.delta_c, std::abs(z.real()));

  const LiouvillianBlock b0 = build_block(p, 0);
  double dp = std::numeric_limits<double>::infinity(), dpi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s0.size(); ++i) {
    const double re = std::abs(s0.values[i].real());
    if (is_south_family(b0, s0.right->col(static_cast<Eigen::Index>(i)), c)) {
      dpi = std::min(dpi, re);
    } else if (re > c.zero_tol) {
      dp = std::min(dp, re);
    }
  }
  if (!std::isfinite(dp)) throw NumericalError("extract_gaps: main family has no decaying mode");
  g.delta_p = dp;
  if (p.gamma > 1.0) {
    if (!std::isfinite(dpi)) throw NumericalError("extract_gaps: south-pole family is empty");
    g.delta_pi = dpi;
  }
  return g;
}

inline GapReport spin_gaps(const SpinParams& p, const FamilyClassifier& c = {}) {
  std::vector<Spectrum> s;
  s.push_back(block_spectrum(build_block(p, 0)));
  s.push_back(block_spectrum(build_block(p, 1)));
  return extract_gaps(p, s, c);
}

// (l, Re) of the slowest eigenvalue in each block |l| <= l_max; negative l from the conjugate blocks.
inline std::vector<std::pair<int, double>> spin_branch_heads(const SpinParams& p, int l_max, int workers = 1) {
  BlockSpectrumOptions opt;
  opt.vectors = false;
  const auto blocks = spin_block_spectra(p, l_max, workers, opt);
  std::vector<std::pair<int, double>> b;
  for (int l = 0; l <= l_max; ++l) {
    const double re = blocks[static_cast<std::size_t>(l)].values.front().real();
    b.emplace_back(l, re);
    if (l > 0) b.emplace_back(-l, re);
  }
  return b;
}

}  // namespace liospec

#endif  // LIOSPEC_SPIN_MODEL_HPP
