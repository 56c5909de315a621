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

#ifndef LIOSPEC_ANALYSIS_HPP
#define LIOSPEC_ANALYSIS_HPP

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "liospec/numerics/types.hpp"

namespace liospec {

struct ScalingFit {
  double value = 0.0;  // exponent (power law) or rate (exponential)
  double prefactor = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;  // in the transformed coordinates, in input order
};

using Points = std::vector<std::pair<double, double>>;

namespace detail {

// Least squares on pre-transformed coordinates. Points are summed in sorted order so the result
// does not depend on input order.
inline ScalingFit line_fit(const Points& tr) {
  require(tr.size() >= 3, "fit: at least 3 points are required");
  Points s = tr;
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : s) mx += x, my += y;
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : s) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  require(sxx > 0.0, "fit: abscissae are all equal");
  ScalingFit f;
  f.value = sxy / sxx;
  const double b = my - f.value * mx;
  f.prefactor = b;
  double ss = 0.0;
  for (const auto& [x, y] : s) ss += (y - b - f.value * x) * (y - b - f.value * x);
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - ss / syy, 0.0, 1.0) : 1.0;
  for (const auto& [x, y] : tr) f.residuals.push_back(y - b - f.value * x);
  return f;
}

}  // namespace detail

// y = prefactor x^exponent, fitted on (log x, log y).
inline ScalingFit fit_power_law(const Points& pts) {
  Points t;
  for (const auto& [x, y] : pts) {
    require(x > 0.0 && y > 0.0 && std::isfinite(x) && std::isfinite(y), "fit_power_law: data must be positive");
    t.emplace_back(std::log(x), std::log(y));
  }
  auto f = detail::line_fit(t);
  f.prefactor = std::exp(f.prefactor);
  return f;
}

// y = prefactor e^{rate x}, fitted on (x, log y).
inline ScalingFit fit_exponential(const Points& pts) {
  Points t;
  for (const auto& [x, y] : pts) {
    require(y > 0.0 && std::isfinite(x) && std::isfinite(y), "fit_exponential: y must be positive");
    t.emplace_back(x, std::log(y));
  }
  auto f = detail::line_fit(t);
  f.prefactor = std::exp(f.prefactor);
  return f;
}

struct BranchParabola {
  double curvature = 0.0;  // Re Lambda = -curvature l^2
  double r_squared = 0.0;
};

// Least squares through the origin. |Re| must not decrease with |l| by more than tol.
inline BranchParabola fit_branch_parabola(std::vector<std::pair<int, double>> branch, double rel_tol = 1e-3) {
  std::sort(branch.begin(), branch.end(), [](const auto& a, const auto& b) {
    return std::abs(a.first) != std::abs(b.first) ? std::abs(a.first) < std::abs(b.first) : a.first < b.first;
  });
  bool origin = false;
  std::vector<int> ls;
  double top = 0.0;
  for (const auto& [l, re] : branch) {
    require(std::isfinite(re), "fit_branch_parabola: non-finite real part");
    if (l == 0 && std::abs(re) <= 1e-8) origin = true;
    ls.push_back(std::abs(l));
    top = std::max(top, std::abs(re));
  }
  require(origin, "fit_branch_parabola: branch must contain l = 0 with Re = 0 within 1e-8");
  ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
  require(ls.size() >= 3, "fit_branch_parabola: at least 3 harmonics are required");

  const double tol = 1e-12 + rel_tol * top;
  double prev = 0.0;
  int prev_l = 0;
  for (const auto& [l, re] : branch) {
    if (std::abs(l) > prev_l && std::abs(re) < prev - tol)
      throw NumericalError("fit_branch_parabola: |Re| drops from " + sci(prev) + " to " + sci(std::abs(re)) + " at l = " +
                           std::to_string(l) + " (branch contamination)");
    if (std::abs(l) > prev_l) prev_l = std::abs(l);
    prev = std::max(prev, std::abs(re));
  }
  double num = 0.0, den = 0.0, syy = 0.0;
  for (const auto& [l, re] : branch) {
    const double q = double(l) * l;
    num += -re * q;
    den += q * q;
  }
  BranchParabola p;
  p.curvature = num / den;
  double ss = 0.0;
  for (const auto& [l, re] : branch) {
    ss += std::pow(re + p.curvature * l * l, 2);
    syy += re * re;  // uncentered: the model has no intercept
  }
  p.r_squared = syy > 0.0 ? std::clamp(1.0 - ss / syy, 0.0, 1.0) : 1.0;
  return p;
}

// Labels (l, j): l the nearest harmonic of Im / omega (within window omega), j the rank of |Re|
// inside that harmonic. Unassigned eigenvalues keep labeled = false.
inline Spectrum cluster_branches(Spectrum sp, double omega, double window = 0.15) {
  require(omega > 0.0 && std::isfinite(omega), "cluster_branches: omega must be positive");
  const std::size_t n = sp.values.size();
  sp.labels.assign(n, BranchLabel{});
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    const double im = sp.values[i].imag();
    const int h = static_cast<int>(std::lround(im / omega));
    if (std::abs(im - h * omega) < window * omega) groups[h].push_back(i);
  }
  for (auto& [h, idx] : groups) {
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(sp.values[a].real()) < std::abs(sp.values[b].real()); });
    for (std::size_t r = 0; r < idx.size(); ++r) {
      if (r + 1 < idx.size() &&
          std::abs(std::abs(sp.values[idx[r]].real()) - std::abs(sp.values[idx[r + 1]].real())) <= 1e-9)
        throw NumericalError("cluster_branches: ambiguous rank at harmonic " + std::to_string(h) + ", |Re| = " +
                             sci(std::abs(sp.values[idx[r]].real())));
      sp.labels[idx[r]] = BranchLabel{h, static_cast<int>(r), true};
    }
  }
  return sp;
}

// ---- files -----------------------------------------------------------------------------------

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_spectrum_csv(std::ostream& os, const Spectrum& sp, double S, double gamma) {
  os << "re,im,l,j,S,gamma\n";
  for (std::size_t i = 0; i < sp.values.size(); ++i) {
    const bool lab = i < sp.labels.size() && sp.labels[i].labeled;
    os << fmt17(sp.values[i].real()) << ',' << fmt17(sp.values[i].imag()) << ',';
    if (lab) os << sp.labels[i].l << ',' << sp.labels[i].j;
    else os << ',';
    os << ',' << fmt17(S) << ',' << fmt17(gamma) << '\n';
  }
}

inline void write_dimer_csv(std::ostream& os, const std::vector<cplx>& v, double mu, int n_max) {
  os << "re,im,mu,n_max\n";
  for (const auto& z : v) os << fmt17(z.real()) << ',' << fmt17(z.imag()) << ',' << fmt17(mu) << ',' << n_max << '\n';
}

// Generic table with a header row.
inline void write_csv(std::ostream& os, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt17(r[i]);
    os << '\n';
  }
}

#ifndef LIOSPEC_VERSION
#define LIOSPEC_VERSION "0.0.0"
#endif

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunRecord {
  std::string command;
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 0;
  std::string code_version = LIOSPEC_VERSION;
  std::string started, finished;
  std::vector<std::string> outputs;
  nlohmann::json results = nlohmann::json::object();  // fitted numbers, convergence flags
};

inline void to_json(nlohmann::json& j, const RunRecord& r) {
  j = nlohmann::json{{"command", r.command}, {"parameters", r.parameters}, {"seed", r.seed},
                     {"code_version", r.code_version}, {"started", r.started}, {"finished", r.finished},
                     {"outputs", r.outputs}, {"results", r.results}};
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
  j.at("command").get_to(r.command);
  j.at("parameters").get_to(r.parameters);
  j.at("seed").get_to(r.seed);
  j.at("code_version").get_to(r.code_version);
  j.at("started").get_to(r.started);
  j.at("finished").get_to(r.finished);
  j.at("outputs").get_to(r.outputs);
  if (j.contains("results")) r.results = j.at("results");
}

// `key = value` lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_config(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string k = trim(line.substr(0, eq));
    if (k.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
    out[k] = trim(line.substr(eq + 1));
  }
  return out;
}

// Plot script for a CSV with columns x, y (matplotlib); paths resolve next to the script.
inline std::string plot_script(const std::string& csv, const std::string& x, const std::string& y, const std::string& png,
                               bool logx = false, bool logy = false) {
  std::ostringstream s;
  s << "import csv\nimport os\nimport matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n"
    << "here = os.path.dirname(os.path.abspath(__file__))\n"
    << "rows = list(csv.DictReader(open(os.path.join(here, '" << csv << "'))))\n"
    << "xs = [float(r['" << x << "']) for r in rows]\n"
    << "ys = [float(r['" << y << "']) for r in rows]\n"
    << "plt.plot(xs, ys, '.')\n";
  if (logx) s << "plt.xscale('log')\n";
  if (logy) s << "plt.yscale('log')\n";
  s << "plt.xlabel('" << x << "')\nplt.ylabel('" << y << "')\nplt.savefig(os.path.join(here, '" << png << "'), dpi=150)\n";
  return s.str();
}

}  // namespace liospec

#endif  // LIOSPEC_ANALYSIS_HPP
