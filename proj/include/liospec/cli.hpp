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


#ifndef LIOSPEC_CLI_HPP
#define LIOSPEC_CLI_HPP

#include <exception>
#include <filesystem>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "liospec/analysis.hpp"
#include "liospec/bose_hubbard.hpp"
#include "liospec/classical.hpp"
#include "liospec/fokker_planck.hpp"
#include "liospec/spin_model.hpp"

namespace liospec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

struct Globals {
  std::string out;
  std::uint64_t seed = 7;
  int workers = 1;
  std::string config;
};

// Output files of one run: <stem>.csv, <stem>.run.json, <stem>.plot.py
struct Artifacts {
  std::filesystem::path csv, record, plot;

  static Artifacts from(const std::string& out, const std::string& command) {
    std::filesystem::path p = out.empty() ? std::filesystem::path(command + ".csv") : std::filesystem::path(out);
    if (p.extension() != ".csv") p += ".csv";
    Artifacts a;
    a.csv = p;
    std::filesystem::path stem = p;
    stem.replace_extension();
    a.record = stem.string() + ".run.json";
    a.plot = stem.string() + ".plot.py";
    return a;
  }
};

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + p.string() + " for writing");
  f << text;
  if (!f) throw ValidationError("write to " + p.string() + " failed");
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c;
  }
  return o + '"';
}

inline std::string join(const std::vector<std::string>& v, const char* sep = ",") {
  std::string o;
  for (std::size_t i = 0; i < v.size(); ++i) o += (i ? sep : "") + v[i];
  return o;
}

// Option values as given, or their defaults.
inline std::map<std::string, std::string> parameters_of(const CLI::App& app) {
  std::map<std::string, std::string> m;
  for (const CLI::Option* o : app.get_options()) {
    if (o->get_lnames().empty()) continue;
    const std::string& name = o->get_lnames().front();
    if (name == "help" || name == "config") continue;
    m[name] = o->count() ? join(o->results()) : o->get_default_str();
  }
  return m;
}

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

// Pure sweep: f(i) for i < n on `workers` threads, results in index order.
template <class T, class F>
std::vector<T> sweep(std::size_t n, int workers, F f) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> err(n);
  std::atomic<std::size_t> next{0};
  auto job = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        err[i] = std::current_exception();
      }
    }
  };
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (w == 1) {
    job();
  } else {
    std::vector<std::future<void>> fs;
    for (int k = 0; k < w; ++k) fs.push_back(std::async(std::launch::async, job));
    for (auto& x : fs) x.get();
  }
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace detail

// ---- subcommands ----

struct SpinSpectrumArgs {
  double S = 0.0, gamma = 0.0;
  int l_max = 5, count = 0;
};

inline std::string spin_spectrum(const SpinSpectrumArgs& a, const Globals& g, RunRecord& rec) {
  const SpinParams p{a.S, a.gamma};
  p.validate();
  require(a.count >= 0, "spin-spectrum: --count must be nonnegative");
  BlockSpectrumOptions bo;
  bo.vectors = false;
  const auto blocks = spin_block_spectra(p, a.l_max, g.workers, bo);
  Spectrum all;
  for (int l = 0; l <= a.l_max; ++l) {
    const Spectrum& b = blocks[static_cast<std::size_t>(l)];
    const std::size_t m = a.count > 0 ? std::min<std::size_t>(b.size(), a.count) : b.size();
    for (std::size_t j = 0; j < m; ++j) {
      all.values.push_back(b.values[j]);
      all.labels.push_back({l, static_cast<int>(j), true});
      if (l > 0) {
        all.values.push_back(std::conj(b.values[j]));
        all.labels.push_back({-l, static_cast<int>(j), true});
      }
    }
  }
  all.sort();
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& z : all.values)
    if (std::abs(z.real()) > 1e-9) gap = std::min(gap, std::abs(z.real()));
  rec.results["eigenvalues"] = all.size();
  rec.results["gap"] = gap;
  std::ostringstream os;
  write_spectrum_csv(os, all, a.S, a.gamma);
  return os.str();
}

struct ScalingArgs {
  std::string quantity = "delta_c";
  double gamma = 0.0;
  std::vector<double> spin_lengths;
  int l_max = 10;
};

inline std::string scaling(const ScalingArgs& a, const Globals& g, RunRecord& rec) {
  const std::string& q = a.quantity;
  require(q == "delta_c" || q == "delta_p" || q == "delta_pi" || q == "branch_curvature",
          "scaling: --quantity must be one of delta_c, delta_p, delta_pi, branch_curvature");
  require(!a.spin_lengths.empty(), "scaling: --spin-lengths is empty");
  require(q != "delta_pi" || a.gamma > 1.0, "scaling: delta_pi exists only for gamma > 1");
  require(q != "branch_curvature" || a.gamma > 1.0, "scaling: branch_curvature needs the limit cycle, gamma > 1");
  for (double S : a.spin_lengths) SpinParams{S, a.gamma}.validate();
  const auto vals = detail::sweep<double>(a.spin_lengths.size(), g.workers, [&](std::size_t i) {
    const SpinParams p{a.spin_lengths[i], a.gamma};
    if (q == "branch_curvature") return fit_branch_parabola(spin_branch_heads(p, a.l_max)).curvature;
    const GapReport r = spin_gaps(p);
    return q == "delta_c" ? r.delta_c : q == "delta_p" ? r.delta_p : *r.delta_pi;
  });
  Points pts;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    pts.emplace_back(a.spin_lengths[i], vals[i]);
    rows.push_back({a.spin_lengths[i], vals[i]});
  }
  if (pts.size() >= 3) {
    const bool semilog = q == "delta_pi";
    ScalingFit f;
    try {
      f = semilog ? fit_exponential(pts) : fit_power_law(pts);
    } catch (const ValidationError& e) {
      throw NumericalError(std::string("scaling: computed values cannot be fitted: ") + e.what());
    }
    rec.results["fit"] = semilog ? "exponential" : "power_law";
    rec.results[semilog ? "rate" : "exponent"] = f.value;
    rec.results["prefactor"] = f.prefactor;
    rec.results["r_squared"] = f.r_squared;
  }
  std::ostringstream os;
  write_csv(os, {"S", q}, rows);
  return os.str();
}

inline void add_dimer_flags(CLI::App* sub, DimerConfig& c) {
  sub->add_option("--mu", c.mu, "classical-limit scale");
  sub->add_option("--j-tilde", c.J_tilde);
  sub->add_option("--delta-tilde", c.Delta_tilde);
  sub->add_option("--f1-tilde", c.F1_tilde);
  sub->add_option("--f2-tilde", c.F2_tilde);
  sub->add_option("--kappa", c.kappa);
}

struct ClassicalArgs {
  std::string model = "spin";
  double gamma = detail::nan();
  double sz0 = 0.0, phi0 = 0.0;
  double t_max = 100.0;
  int samples = 1001;
  DimerConfig dimer;
};

inline std::string classical(const ClassicalArgs& a, const Globals&, RunRecord& rec) {
  require(a.model == "spin" || a.model == "dimer", "classical: --model must be spin or dimer");
  require(a.t_max > 0.0 && std::isfinite(a.t_max), "classical: --t-max must be positive");
  require(a.samples >= 2, "classical: --samples must be at least 2");
  OdeOptions oo;
  oo.tol = 1e-12;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  if (a.model == "spin") {
    require(std::isfinite(a.gamma) && a.gamma >= 0.0, "classical: --gamma (nonnegative) is required for the spin model");
    require(std::abs(a.sz0) <= 1.0, "classical: |--sz0| must not exceed 1");
    const double gm = a.gamma;
    const VectorField f = [gm](double, const VectorXr& y) {
      const auto [dz, dphi] = spin_flow(std::clamp(y[0], -1.0, 1.0), y[1], gm);
      VectorXr d(2);
      d << dz, dphi;
      return d;
    };
    VectorXr y0(2);
    y0 << a.sz0, a.phi0;
    const auto sol = integrate_ode_dense(f, y0, {0.0, a.t_max}, oo);
    header = {"t", "s_z", "phi", "one_minus_sz"};
    for (int i = 0; i < a.samples; ++i) {
      const double t = a.t_max * i / (a.samples - 1);
      const VectorXr y = sol.dense.at(t);
      rows.push_back({t, y[0], y[1], 1.0 - y[0]});
    }
    nlohmann::json att = nlohmann::json::array();
    for (const auto& x : classify_attractors(a.gamma))
      att.push_back({{"kind", to_string(x.kind)}, {"stability", to_string(x.stability)}, {"s_z", x.location.front()}});
    rec.results["attractors"] = att;
    const double tail = 1.0 - sol.dense.at(a.t_max)[0];
    rec.results["four_t_times_one_minus_sz_at_t_max"] = 4.0 * a.t_max * tail;
  } else {
    a.dimer.validate();
    VectorXr y0 = VectorXr::Zero(4);
    const auto sol = integrate_ode_dense(dimer_field(a.dimer), y0, {0.0, a.t_max / a.dimer.kappa}, oo);
    header = {"t", "re_a1", "im_a1", "re_a2", "im_a2"};
    for (int i = 0; i < a.samples; ++i) {
      const double t = a.t_max / a.dimer.kappa * i / (a.samples - 1);
      const VectorXr y = sol.dense.at(t);
      rows.push_back({t, y[0], y[1], y[2], y[3]});
    }
    try {
      rec.results["omega"] = classical_dimer_omega(a.dimer);
      rec.results["attractor"] = "limit-cycle";
    } catch (const NumericalError&) {
      rec.results["attractor"] = "fixed-point";
    }
  }
  std::ostringstream os;
  write_csv(os, header, rows);
  return os.str();
}

struct FpSpectrumArgs {
  double S = 0.0, gamma = 0.0;
  int l_max = 3, n_grid = 2000, count = 20;
};

inline std::string fp_spectrum_cmd(const FpSpectrumArgs& a, const Globals& g, RunRecord& rec) {
  require(a.S > 0.0 && a.gamma >= 0.0, "fp-spectrum: need S > 0 and gamma >= 0");
  require(a.l_max >= 0 && a.count >= 1, "fp-spectrum: need --l-max >= 0 and --count >= 1");
  const auto per_l = detail::sweep<Spectrum>(static_cast<std::size_t>(a.l_max) + 1, g.workers, [&](std::size_t l) {
    return fp_spectrum(discretize_fp(a.S, a.gamma, static_cast<int>(l), a.n_grid), a.count);
  });
  Spectrum all;
  for (int l = 0; l <= a.l_max; ++l) {
    const Spectrum& s = per_l[static_cast<std::size_t>(l)];
    for (std::size_t j = 0; j < s.size(); ++j) {
      all.values.push_back(s.values[j]);
      all.labels.push_back({l, static_cast<int>(j), true});
    }
  }
  rec.results["eigenvalues"] = all.size();
  std::ostringstream os;
  write_spectrum_csv(os, all, a.S, a.gamma);
  return os.str();
}

struct FpEvolveArgs {
  double S = 50.0, gamma = 2.0;
  std::string initial = "gaussian:1.5707963267948966,0,0.1";
  double t_max = 20.0, dt = 0.01, sample_every = 0.25;
  int n_grid = 800, l_max = 0;
};

// "gaussian:theta0,phi0,sigma"
inline std::array<double, 3> parse_gaussian(const std::string& s) {
  const std::string tag = "gaussian:";
  require(s.rfind(tag, 0) == 0, "fp-evolve: --initial must look like gaussian:theta0,phi0,sigma");
  std::array<double, 3> v{};
  std::istringstream is(s.substr(tag.size()));
  std::string tok;
  for (int i = 0; i < 3; ++i) {
    require(static_cast<bool>(std::getline(is, tok, ',')), "fp-evolve: --initial needs three numbers");
    std::size_t used = 0;
    try {
      v[static_cast<std::size_t>(i)] = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == tok.size() && used > 0, "fp-evolve: cannot parse '" + tok + "' in --initial");
  }
  require(!std::getline(is, tok, ','), "fp-evolve: --initial has more than three numbers");
  return v;
}

inline std::string fp_evolve(const FpEvolveArgs& a, const Globals& g, RunRecord& rec) {
  const auto [th0, ph0, sigma] = parse_gaussian(a.initial);
  require(a.S > 0.0 && a.gamma >= 0.0, "fp-evolve: need S > 0 and gamma >= 0");
  const int lmax = a.l_max > 0 ? a.l_max : static_cast<int>(std::ceil(std::sqrt(160.0 * a.S)));
  const auto init = sphere_gaussian(a.n_grid, th0, ph0, sigma, lmax);
  SphereEvolveOptions so;
  so.sample_every = a.sample_every;
  so.workers = g.workers;
  const auto snaps = evolve_sphere(init, a.S, a.gamma, a.t_max, a.dt, so);
  std::vector<std::vector<double>> rows;
  Points late;
  for (const auto& s : snaps) {
    const auto [th, ph] = center_of_mass(s.dist);
    const double var = azimuthal_variance(s.dist);
    rows.push_back({s.t, th, ph, var, s.dist.total()});
    if (s.t >= 0.5 * a.t_max) late.emplace_back(s.t, var);
  }
  if (late.size() >= 3) {
    const auto f = liospec::detail::line_fit(late);
    rec.results["variance_growth_rate"] = f.value;
    rec.results["variance_growth_r_squared"] = f.r_squared;
  }
  rec.results["l_max"] = lmax;
  std::ostringstream os;
  write_csv(os, {"t", "theta", "phi", "azimuthal_variance", "mass"}, rows);
  return os.str();
}

struct BifurcationArgs {
  double x0 = 8.0, tau_max = 0.5, dt = 1e-4, x_max = 25.0;
  int samples = 11, n_grid = 4000;
};

inline std::string bifurcation(const BifurcationArgs& a, const Globals&, RunRecord& rec) {
  require(a.tau_max > 0.0 && a.samples >= 2, "bifurcation: need --tau-max > 0 and --samples >= 2");
  std::vector<double> taus;
  for (int i = 0; i < a.samples; ++i) taus.push_back(a.tau_max * i / (a.samples - 1));
  BifurcationEvolveOptions o;
  o.n_grid = a.n_grid;
  o.dt = a.dt;
  o.x_max = a.x_max;
  const auto p = evolve_bifurcation(a.x0, taus, o);
  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  for (std::size_t i = 0; i < p.times.size(); ++i) {
    const double t = p.times[i];
    const double ref = t > 0.0 ? 1.0 / (2.0 * t) : detail::nan();
    rows.push_back({t, p.peak_locations[i], p.widths[i], ref});
    if (t > 0.0) worst = std::max(worst, std::abs(p.peak_locations[i] / ref - 1.0));
  }
  rec.results["max_relative_deviation_from_inverse_2tau"] = worst;
  std::ostringstream os;
  write_csv(os, {"tau", "peak", "width", "inverse_2tau"}, rows);
  return os.str();
}

struct DimerSpectrumArgs {
  DimerConfig dimer;
  int num_eigs = 10, harmonics = 3;
  long long cap = kDimerDimensionCap;
};

inline std::string dimer_spectrum(const DimerSpectrumArgs& a, const Globals& g, RunRecord& rec) {
  a.dimer.validate();
  require(a.num_eigs >= 1 && a.harmonics >= 0, "dimer-spectrum: need --num-eigs >= 1 and --harmonics >= 0");
  const double omega = classical_dimer_omega(a.dimer);
  LowLyingOptions o;
  o.k = a.num_eigs;
  o.harmonics = a.harmonics;
  o.workers = g.workers;
  o.seed = g.seed;
  o.cap = static_cast<Eigen::Index>(a.cap);
  const auto sp = low_lying_dimer_spectrum(a.dimer, omega, o);
  rec.results["omega_classical"] = omega;
  rec.results["complete"] = sp.complete;
  rec.results["failures"] = sp.failures;
  try {
    const auto br = classify_dimer_branch(sp.spectrum.values, omega);
    nlohmann::json b = nlohmann::json::array();
    for (std::size_t i = 0; i < br.harmonic.size(); ++i)
      b.push_back({{"l", br.harmonic[i]}, {"re", br.limit_cycle_branch[i].real()}, {"im", br.limit_cycle_branch[i].imag()}});
    rec.results["branch"] = b;
    rec.results["omega_branch"] = br.omega_estimate;
  } catch (const NumericalError& e) {
    rec.results["branch_error"] = e.what();
  }
  std::ostringstream os;
  write_dimer_csv(os, sp.spectrum.values, a.dimer.mu, a.dimer.n_max);
  return os.str();
}

struct ReportArgs {
  std::vector<std::string> inputs;
};

inline std::vector<std::filesystem::path> collect_records(const std::vector<std::string>& inputs) {
  std::vector<std::filesystem::path> out;
  for (const auto& in : inputs) {
    const std::filesystem::path p(in);
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> here;
      for (const auto& e : std::filesystem::directory_iterator(p)) {
        const std::string n = e.path().filename().string();
        if (e.is_regular_file() && n.size() > 9 && n.compare(n.size() - 9, 9, ".run.json") == 0) here.push_back(e.path());
      }
      std::sort(here.begin(), here.end());
      out.insert(out.end(), here.begin(), here.end());
    } else if (std::filesystem::is_regular_file(p)) {
      out.push_back(p);
    } else {
      throw ValidationError("report: no such file or directory: " + in);
    }
  }
  return out;
}

inline std::string report(const ReportArgs& a, const Globals&, RunRecord& rec) {
  require(!a.inputs.empty(), "report: --inputs is required");
  const auto files = collect_records(a.inputs);
  std::ostringstream os;
  os << "record,command,seed,code_version,started,finished,outputs,parameters,results\n";
  for (const auto& f : files) {
    std::ifstream is(f);
    RunRecord r;
    try {
      r = nlohmann::json::parse(is).get<RunRecord>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("report: " + f.string() + " is not a run record: " + e.what());
    }
    std::string params;
    for (const auto& [k, v] : r.parameters) params += (params.empty() ? "" : ";") + k + "=" + v;
    os << detail::csv_quote(f.string()) << ',' << detail::csv_quote(r.command) << ',' << r.seed << ','
       << detail::csv_quote(r.code_version) << ',' << r.started << ',' << r.finished << ','
       << detail::csv_quote(detail::join(r.outputs, ";")) << ',' << detail::csv_quote(params) << ','
       << detail::csv_quote(r.results.dump()) << '\n';
  }
  rec.results["records"] = files.size();
  return os.str();
}

// ---- driver ----

namespace detail {

inline std::string normalize_key(std::string k) {
  while (!k.empty() && k.front() == '-') k.erase(k.begin());
  std::replace(k.begin(), k.end(), '_', '-');
  return k;
}

inline bool given(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

inline std::optional<std::string> config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ValidationError("--config needs a file name");
      return args[i + 1];
    }
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

// Config entries become flags unless the same flag is on the command line.
inline void inject_config(std::vector<std::string>& args, const CLI::App& app) {
  const auto path = config_path(args);
  if (!path) return;
  std::ifstream is(*path);
  if (!is) throw ValidationError("cannot read config file " + *path);
  const auto cfg = parse_config(is);
  const CLI::App* sub = nullptr;
  for (const auto& a : args)
    for (const CLI::App* s : app.get_subcommands({}))
      if (s->get_name() == a && !sub) sub = s;
  for (const auto& [raw, value] : cfg) {
    const std::string flag = "--" + normalize_key(raw);
    if (flag == "--config") throw ValidationError("config: nested config files are not supported");
    const bool known_here =
        app.get_option_no_throw(flag) != nullptr || (sub && sub->get_option_no_throw(flag) != nullptr);
    if (!known_here) {
      bool elsewhere = false;
      for (const CLI::App* s : app.get_subcommands({})) elsewhere = elsewhere || s->get_option_no_throw(flag);
      if (!elsewhere) throw ValidationError("config: unknown key '" + raw + "'");
      continue;  // belongs to another subcommand
    }
    if (!given(args, flag)) {
      args.push_back(flag);
      args.push_back(value);
    }
  }
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"liospec: Liouvillian spectra and semiclassical dynamics of dissipative spin and boson models",
               "liospec"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out", g.out, "CSV path; <stem>.run.json and <stem>.plot.py are written next to it");
  app.add_option("--seed", g.seed, "seed for randomized starting vectors");
  app.add_option("--workers", g.workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config, "file of key = value defaults; command-line flags take precedence");

  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };

  SpinSpectrumArgs ss;
  CLI::App* c_ss = sub("spin-spectrum", "block-diagonalized Lindblad spectrum of the driven-dissipative spin");
  c_ss->add_option("--spin-length", ss.S, "S (integer or half-integer)")->required();
  c_ss->add_option("--gamma", ss.gamma, "nonlinear damping ratio")->required();
  c_ss->add_option("--l-max", ss.l_max, "largest winding block");
  c_ss->add_option("--count", ss.count, "slowest eigenvalues kept per block; 0 keeps all");

  ScalingArgs sc;
  CLI::App* c_sc = sub("scaling", "gap or branch-curvature sweep over S with a fitted scaling law");
  c_sc->add_option("--quantity", sc.quantity, "delta_c | delta_p | delta_pi | branch_curvature");
  c_sc->add_option("--gamma", sc.gamma)->required();
  c_sc->add_option("--spin-lengths", sc.spin_lengths, "comma list of S")->delimiter(',')->required();
  c_sc->add_option("--l-max", sc.l_max, "harmonics in the branch fit");

  ClassicalArgs cl;
  CLI::App* c_cl = sub("classical", "mean-field trajectory");
  c_cl->add_option("--model", cl.model, "spin | dimer");
  c_cl->add_option("--gamma", cl.gamma);
  c_cl->add_option("--sz0", cl.sz0, "initial s_z (spin)");
  c_cl->add_option("--phi0", cl.phi0, "initial azimuth (spin)");
  c_cl->add_option("--t-max", cl.t_max, "final time (units of 1/kappa for the dimer)");
  c_cl->add_option("--samples", cl.samples, "rows in the trajectory CSV");
  add_dimer_flags(c_cl, cl.dimer);

  FpSpectrumArgs fs;
  CLI::App* c_fs = sub("fp-spectrum", "spectrum of the theta Fokker-Planck operator per winding l");
  c_fs->add_option("--spin-length", fs.S)->required();
  c_fs->add_option("--gamma", fs.gamma)->required();
  c_fs->add_option("--l-max", fs.l_max);
  c_fs->add_option("--n-grid", fs.n_grid);
  c_fs->add_option("--count", fs.count, "slowest eigenvalues per l");

  FpEvolveArgs fe;
  CLI::App* c_fe = sub("fp-evolve", "evolve a quasiprobability on the sphere");
  c_fe->add_option("--spin-length", fe.S);
  c_fe->add_option("--gamma", fe.gamma);
  c_fe->add_option("--initial", fe.initial, "gaussian:theta0,phi0,sigma");
  c_fe->add_option("--t-max", fe.t_max);
  c_fe->add_option("--dt", fe.dt);
  c_fe->add_option("--sample-every", fe.sample_every);
  c_fe->add_option("--n-grid", fe.n_grid);
  c_fe->add_option("--l-max", fe.l_max, "azimuthal modes kept; 0 picks ceil(sqrt(160 S))");

  BifurcationArgs bf;
  CLI::App* c_bf = sub("bifurcation", "wavepacket evolution under the critical-point operator");
  c_bf->add_option("--x0", bf.x0, "initial packet center");
  c_bf->add_option("--tau-max", bf.tau_max);
  c_bf->add_option("--samples", bf.samples);
  c_bf->add_option("--n-grid", bf.n_grid);
  c_bf->add_option("--dt", bf.dt);
  c_bf->add_option("--x-max", bf.x_max);

  DimerSpectrumArgs ds;
  CLI::App* c_ds = sub("dimer-spectrum", "low-lying Liouvillian spectrum of the driven Bose-Hubbard dimer");
  add_dimer_flags(c_ds, ds.dimer);
  c_ds->add_option("--n-max", ds.dimer.n_max, "Fock cutoff per site");
  c_ds->add_option("--num-eigs", ds.num_eigs, "eigenvalues per shift");
  c_ds->add_option("--harmonics", ds.harmonics);
  c_ds->add_option("--dimension-cap", ds.cap, "refuse Liouvillians larger than this")->check(CLI::PositiveNumber);

  ReportArgs rp;
  CLI::App* c_rp = sub("report", "summary table of run records");
  c_rp->add_option("--inputs", rp.inputs, "run-record files or directories")->required();

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    detail::inject_config(args, app);
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* chosen = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    out << chosen->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* chosen = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << chosen->help();
    return kExitValidation;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string cmd = chosen->get_name();
  RunRecord rec;
  rec.command = cmd;
  rec.parameters = detail::parameters_of(*chosen);
  for (const auto& [k, v] : detail::parameters_of(app)) rec.parameters[k] = v;
  rec.seed = g.seed;
  rec.started = utc_timestamp();
  const Artifacts art = Artifacts::from(g.out, cmd);
  const std::string csv_name = art.csv.filename().string();
  std::string plot;
  try {
    std::string csv;
    if (cmd == "spin-spectrum") {
      csv = spin_spectrum(ss, g, rec);
      plot = plot_script(csv_name, "re", "im", art.csv.stem().string() + ".png");
    } else if (cmd == "scaling") {
      csv = scaling(sc, g, rec);
      const bool semilog = sc.quantity == "delta_pi";
      plot = plot_script(csv_name, "S", sc.quantity, art.csv.stem().string() + ".png", !semilog, true);
    } else if (cmd == "classical") {
      csv = classical(cl, g, rec);
      plot = cl.model == "spin" ? plot_script(csv_name, "t", "one_minus_sz", art.csv.stem().string() + ".png", true, true)
                                : plot_script(csv_name, "re_a1", "im_a1", art.csv.stem().string() + ".png");
    } else if (cmd == "fp-spectrum") {
      csv = fp_spectrum_cmd(fs, g, rec);
      plot = plot_script(csv_name, "re", "im", art.csv.stem().string() + ".png");
    } else if (cmd == "fp-evolve") {
      csv = fp_evolve(fe, g, rec);
      plot = plot_script(csv_name, "t", "azimuthal_variance", art.csv.stem().string() + ".png");
    } else if (cmd == "bifurcation") {
      csv = bifurcation(bf, g, rec);
      plot = plot_script(csv_name, "tau", "peak", art.csv.stem().string() + ".png");
    } else if (cmd == "dimer-spectrum") {
      csv = dimer_spectrum(ds, g, rec);
      plot = plot_script(csv_name, "re", "im", art.csv.stem().string() + ".png");
    } else {
      csv = report(rp, g, rec);
    }
    detail::write_file(art.csv, csv);
    rec.outputs.push_back(art.csv.string());
    if (!plot.empty()) {
      detail::write_file(art.plot, plot);
      rec.outputs.push_back(art.plot.string());
    }
    rec.finished = utc_timestamp();
    detail::write_file(art.record, nlohmann::json(rec).dump(2) + "\n");
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n\n" << chosen->help();
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }

  out << cmd << ": wrote " << art.csv.string() << ", " << art.record.string();
  if (!plot.empty()) out << ", " << art.plot.string();
  out << "\n";
  if (!rec.results.empty()) out << rec.results.dump() << "\n";
  if (cmd == "dimer-spectrum" && !rec.results.value("complete", true)) {
    err << "numerical failure: some shifts did not converge\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace liospec::cli

#endif  // LIOSPEC_CLI_HPP
