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


#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "liospec/cli.hpp"

using namespace liospec;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "liospec");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli::cli_main(static_cast<int>(argv.size()), argv.data(), o, e);
  return {code, o.str(), e.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("liospec-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const std::string& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const std::string& p) {
  std::ifstream f(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    std::vector<std::string> r;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) r.push_back(c);
    if (!line.empty() && line.back() == ',') r.emplace_back();
    rows.push_back(r);
  }
  return rows;
}

nlohmann::json record(const std::string& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("scaling writes the sweep, the fit and a run record", "[cli]") {
  TempDir d;
  const auto r = run({"scaling", "--quantity", "delta_c", "--gamma", "2", "--spin-lengths", "25,50,100,200,400",
                      "--out", d / "dc.csv"});
  REQUIRE(r.code == 0);
  const auto rows = read_csv(d / "dc.csv");
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"S", "delta_c"});
  Points pts;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double S = std::stod(rows[i][0]), v = std::stod(rows[i][1]);
    CHECK(v == spin_gaps({S, 2.0}).delta_c);  // 17 digits round-trip
    pts.emplace_back(S, v);
  }
  const auto rec = record(d / "dc.run.json");
  CHECK(rec["command"] == "scaling");
  CHECK(rec["parameters"]["spin-lengths"] == "25,50,100,200,400");
  CHECK(rec["parameters"]["gamma"] == "2");
  CHECK(rec["code_version"] == LIOSPEC_VERSION);
  CHECK(rec["results"]["exponent"].get<double>() == fit_power_law(pts).value);
  CHECK(rec["outputs"].size() == 2);
  CHECK(fs::exists(d / "dc.plot.py"));
  CHECK_THAT(slurp(d / "dc.plot.py"), ContainsSubstring("'dc.csv'"));

  const auto pi = run({"scaling", "--quantity", "delta_pi", "--gamma", "2", "--spin-lengths", "10,12,14,16",
                       "--out", d / "pi.csv"});
  REQUIRE(pi.code == 0);
  const auto rp = record(d / "pi.run.json");
  CHECK(rp["results"]["fit"] == "exponential");
  CHECK(rp["results"]["rate"].get<double>() < 0.0);

  CHECK(run({"scaling", "--quantity", "delta_pi", "--gamma", "0.5", "--spin-lengths", "10,12,14"}).code == 2);
  CHECK(run({"scaling", "--quantity", "gap", "--gamma", "2", "--spin-lengths", "10,12,14"}).code == 2);
}

TEST_CASE("spin-spectrum reproduces the block spectra with labels", "[cli]") {
  TempDir d;
  REQUIRE(run({"spin-spectrum", "--spin-length", "300", "--gamma", "0.5", "--l-max", "5", "--count", "3", "--out",
               d / "w.csv"})
              .code == 0);
  const auto rows = read_csv(d / "w.csv");
  CHECK(rows[0] == std::vector<std::string>{"re", "im", "l", "j", "S", "gamma"});
  REQUIRE(rows.size() == 1 + 3 * 11);
  BlockSpectrumOptions o;
  o.vectors = false;
  double prev = 1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const int l = std::stoi(rows[i][2]), j = std::stoi(rows[i][3]);
    const cplx z(std::stod(rows[i][0]), std::stod(rows[i][1]));
    const cplx ref = block_spectrum(build_block({300.0, 0.5}, std::abs(l)), o).values[static_cast<std::size_t>(j)];
    CHECK(z == (l < 0 ? std::conj(ref) : ref));
    CHECK(z.real() <= prev);
    prev = z.real();
    CHECK(rows[i][4] == "300");
    CHECK(rows[i][5] == "0.5");
    if (j == 0 && l != 0) CHECK_THAT(z.real(), WithinAbs(-0.5 * std::abs(l), 0.05));  // wedge edge
  }
}

TEST_CASE("classical spin trajectory decays algebraically at the bifurcation", "[cli]") {
  TempDir d;
  REQUIRE(run({"classical", "--model", "spin", "--gamma", "1", "--t-max", "100", "--out", d / "c.csv"}).code == 0);
  const auto rows = read_csv(d / "c.csv");
  CHECK(rows[0] == std::vector<std::string>{"t", "s_z", "phi", "one_minus_sz"});
  REQUIRE(rows.size() == 1002);
  // oracle: d eps/dt = -4 eps^2 + O(eps^3) gives eps -> 1/(4t)
  const auto& last = rows.back();
  CHECK(std::stod(last[0]) == 100.0);
  CHECK_THAT(4.0 * 100.0 * std::stod(last[3]), WithinAbs(1.0, 0.03));
  CHECK_THAT(std::stod(last[2]), WithinAbs(-100.0, 1e-8));
  const auto rec = record(d / "c.run.json");
  CHECK(rec["results"]["attractors"].size() == 2);

  REQUIRE(run({"classical", "--model", "dimer", "--t-max", "20", "--samples", "3", "--out", d / "dm.csv"}).code == 0);
  CHECK(read_csv(d / "dm.csv")[0] == std::vector<std::string>{"t", "re_a1", "im_a1", "re_a2", "im_a2"});
  CHECK_THAT(record(d / "dm.run.json")["results"]["omega"].get<double>(), WithinRel(2.0 * kPi / 1.80273, 1e-3));
  CHECK(run({"classical", "--model", "spin", "--t-max", "10"}).code == 2);  // gamma missing
  CHECK(run({"classical", "--model", "rotor", "--gamma", "1"}).code == 2);
}

TEST_CASE("Fokker-Planck, bifurcation and dimer subcommands", "[cli]") {
  TempDir d;
  REQUIRE(run({"fp-spectrum", "--spin-length", "100", "--gamma", "0.5", "--l-max", "1", "--count", "3", "--out",
               d / "f.csv"})
              .code == 0);
  const auto f = read_csv(d / "f.csv");
  REQUIRE(f.size() == 7);
  CHECK(std::stod(f[4][0]) == fp_spectrum(discretize_fp(100.0, 0.5, 1, 2000), 3).values[0].real());

  REQUIRE(run({"fp-evolve", "--spin-length", "20", "--gamma", "2", "--t-max", "1", "--n-grid", "300", "--l-max", "16",
               "--initial", "gaussian:1.2,0.5,0.2", "--out", d / "e.csv"})
              .code == 0);
  const auto e = read_csv(d / "e.csv");
  REQUIRE(e.size() == 6);
  for (std::size_t i = 1; i < e.size(); ++i) CHECK_THAT(std::stod(e[i][4]), WithinAbs(1.0, 1e-6));
  CHECK_THAT(std::stod(e[1][2]), WithinAbs(0.5, 1e-12));
  CHECK(run({"fp-evolve", "--initial", "gauss:1,2,3"}).code == 2);
  CHECK(run({"fp-evolve", "--initial", "gaussian:1,2"}).code == 2);
  CHECK(run({"fp-evolve", "--initial", "gaussian:1,2,x"}).code == 2);

  REQUIRE(run({"bifurcation", "--x0", "8", "--tau-max", "0.2", "--samples", "3", "--out", d / "b.csv"}).code == 0);
  const auto b = read_csv(d / "b.csv");
  REQUIRE(b.size() == 4);
  CHECK(b[1][3] == "nan");
  CHECK(std::stod(b[3][3]) == 2.5);
  CHECK(std::stod(b[3][1]) < std::stod(b[2][1]));

  REQUIRE(run({"dimer-spectrum", "--n-max", "4", "--workers", "2", "--out", d / "ds.csv"}).code == 0);
  const auto ds = read_csv(d / "ds.csv");
  CHECK(ds[0] == std::vector<std::string>{"re", "im", "mu", "n_max"});
  CHECK(ds[1][3] == "4");
  const auto rec = record(d / "ds.run.json");
  CHECK(rec["results"]["complete"] == true);
  CHECK(rec["seed"] == 7);
  CHECK(run({"dimer-spectrum", "--n-max", "1"}).code == 2);
  const auto big = run({"dimer-spectrum", "--n-max", "4", "--dimension-cap", "600"});
  CHECK(big.code == 2);
  CHECK_THAT(big.err, ContainsSubstring("raise the cap"));
}

TEST_CASE("identical inputs give identical payloads", "[cli]") {
  TempDir d;
  const std::vector<std::string> base{"dimer-spectrum", "--n-max", "4", "--seed", "11"};
  auto a = base, b = base;
  a.insert(a.end(), {"--workers", "1", "--out", d / "a.csv"});
  b.insert(b.end(), {"--workers", "3", "--out", d / "b.csv"});
  REQUIRE(run(a).code == 0);
  REQUIRE(run(b).code == 0);
  CHECK(slurp(d / "a.csv") == slurp(d / "b.csv"));
  auto ra = record(d / "a.run.json"), rb = record(d / "b.run.json");
  CHECK(ra["results"] == rb["results"]);
  CHECK(ra["seed"] == 11);

  REQUIRE(run({"scaling", "--gamma", "2", "--spin-lengths", "20,30,40", "--workers", "3", "--out", d / "s1.csv"}).code == 0);
  REQUIRE(run({"scaling", "--gamma", "2", "--spin-lengths", "20,30,40", "--out", d / "s2.csv"}).code == 0);
  CHECK(slurp(d / "s1.csv") == slurp(d / "s2.csv"));
}

TEST_CASE("flags override the config file, which overrides defaults", "[cli]") {
  TempDir d;
  {
    std::ofstream c(d / "run.cfg");
    c << "# sweep\nquantity = delta_p\ngamma = 2\nspin_lengths = 10, 12, 14\nmu = 3   # dimer only\n";
  }
  REQUIRE(run({"scaling", "--config", d / "run.cfg", "--gamma", "0.5", "--out", d / "x.csv"}).code == 0);
  const auto rec = record(d / "x.run.json");
  CHECK(rec["parameters"]["gamma"] == "0.5");
  CHECK(rec["parameters"]["quantity"] == "delta_p");
  CHECK(rec["parameters"]["l-max"] == "10");
  CHECK(read_csv(d / "x.csv")[0][1] == "delta_p");
  CHECK(std::stod(read_csv(d / "x.csv")[1][1]) == spin_gaps({10.0, 0.5}).delta_p);

  {
    std::ofstream c(d / "bad.cfg");
    c << "no_such_key = 1\n";
  }
  CHECK(run({"scaling", "--config", d / "bad.cfg", "--gamma", "1", "--spin-lengths", "10,12,14"}).code == 2);
  CHECK(run({"scaling", "--config", d / "missing.cfg", "--gamma", "1", "--spin-lengths", "10,12,14"}).code == 2);
}

TEST_CASE("exit codes and usage", "[cli]") {
  const auto unknown = run({"spin-spectrum", "--spin-length", "10", "--gamma", "1", "--frobnicate", "2"});
  CHECK(unknown.code == 2);
  CHECK_THAT(unknown.err, ContainsSubstring("Usage"));
  CHECK(run({}).code == 2);
  CHECK(run({"no-such-command"}).code == 2);
  CHECK(run({"spin-spectrum", "--spin-length", "ten", "--gamma", "1"}).code == 2);
  CHECK(run({"spin-spectrum", "--spin-length", "0.3", "--gamma", "1"}).code == 2);
  CHECK(run({"spin-spectrum", "--spin-length", "2", "--gamma", "1", "--l-max", "9"}).code == 2);
  CHECK(run({"--workers", "0", "spin-spectrum", "--spin-length", "2", "--gamma", "1"}).code == 2);
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK_THAT(help.out, ContainsSubstring("dimer-spectrum"));
  // unresolvable grid is a numerical failure
  TempDir d;
  const auto bad = run({"fp-spectrum", "--spin-length", "5000", "--gamma", "2", "--n-grid", "100", "--l-max", "0",
                        "--out", d / "f.csv"});
  CHECK(bad.code == 3);
  CHECK_FALSE(fs::exists(d / "f.csv"));
  CHECK(run({"report", "--inputs", d / "nothing-here"}).code == 2);
}

TEST_CASE("report aggregates run records", "[cli]") {
  TempDir d;
  REQUIRE(run({"spin-spectrum", "--spin-length", "2", "--gamma", "1", "--l-max", "1", "--out", d / "runs/a.csv"}).code == 0);
  REQUIRE(run({"scaling", "--gamma", "2", "--spin-lengths", "5,6,7", "--out", d / "runs/b.csv"}).code == 0);
  REQUIRE(run({"report", "--inputs", d / "runs", "--out", d / "summary.csv"}).code == 0);
  const auto rows = read_csv(d / "summary.csv");
  REQUIRE(rows.size() >= 3);
  CHECK(rows[0][0] == "record");
  CHECK_THAT(rows[1][0], ContainsSubstring("a.run.json"));
  CHECK(rows[1][1] == "spin-spectrum");
  CHECK(rows[2][1] == "scaling");
  CHECK(record(d / "summary.run.json")["results"]["records"] == 2);
  {
    std::ofstream junk(d / "runs/c.run.json");
    junk << "{ not json";
  }
  CHECK(run({"report", "--inputs", d / "runs"}).code == 2);
}
