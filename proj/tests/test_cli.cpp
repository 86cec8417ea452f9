#include <doctest.h>

#include <json.hpp>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sdvar/dataset.hpp"
#include "sdvar/manifest.hpp"
#include "sdvar/simulate.hpp"

using namespace sdvar;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int exit_code;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliRun run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path errfile = scratch / "stderr.txt";
  const std::string cmd =
      std::string(SDVAR_CLI_PATH) + " " + args + " 2>" + errfile.string();
  const int raw = std::system(cmd.c_str());
  CliRun r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.err = slurp(errfile);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::path("cli_scratch") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void put(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  out << body;
}

std::string study_model_json() {
  return R"("model": {"n": 3, "lag_mode": "plain", "p": 2,
    "densities": [{"delta": -0.7, "nu": 5.0}, {"delta": -0.6, "nu": 6.0},
                  {"delta": 0.7, "nu": 5.5}]})";
}

std::string theta0_json() {
  const ModelSpec spec = study_spec();
  const Vector t0 = study_theta0(spec);
  std::string s = "[";
  for (int i = 0; i < t0.size(); ++i)
    s += (i ? "," : "") + format_double(t0(i));
  return s + "]";
}

}  // namespace

TEST_CASE("shortest-form numbers survive a write and re-ingest bitwise") {
  const fs::path dir = fresh_dir("roundtrip");
  Dataset ds;
  ds.dates = {"2001-01", "2001-02", "2001-03"};
  ds.names = {"a", "b"};
  ds.values = Matrix(3, 2);
  ds.values << 1.0 / 3.0, 1e-17, 12345.678901234567, -2.5e300, 0.1,
      -7.000000000000001;
  ds.column_means = Vector::Zero(2);
  write_csv((dir / "x.csv").string(), ds);

  const Dataset back = ingest((dir / "x.csv").string(), false);
  REQUIRE(back.values.rows() == 3);
  for (int t = 0; t < 3; ++t)
    for (int j = 0; j < 2; ++j) {
      const double a = ds.values(t, j), b = back.values(t, j);
      CHECK(std::memcmp(&a, &b, sizeof a) == 0);
    }
  CHECK(back.dates == ds.dates);
  CHECK(back.names == ds.names);
}

TEST_CASE("centering removes the column means and records them") {
  const fs::path dir = fresh_dir("centering");
  std::string body = "date,u,v,w\n";
  RngStream rng(5);
  int year = 1960, month = 1;
  for (int t = 0; t < 786; ++t) {
    char stamp[24];
    std::snprintf(stamp, sizeof stamp, "%04d-%02d", year, month);
    if (++month == 13) {
      month = 1;
      ++year;
    }
    body += std::string(stamp) + "," +
            format_double(3.5 + standard_normal(rng)) + "," +
            format_double(-1.25 + standard_normal(rng)) + "," +
            format_double(standard_normal(rng)) + "\n";
  }
  put(dir / "macro.csv", body);

  const Dataset ds = ingest((dir / "macro.csv").string(), true);
  REQUIRE(ds.values.rows() == 786);
  REQUIRE(ds.values.cols() == 3);
  for (int j = 0; j < 3; ++j)
    CHECK(std::abs(ds.values.col(j).mean()) < 1e-12);
  CHECK(ds.column_means(0) == doctest::Approx(3.5).epsilon(0.2));
  CHECK(ds.column_means(1) == doctest::Approx(-1.25).epsilon(0.2));
  CHECK(!ds.source_sha256.empty());
}

TEST_CASE("malformed inputs are rejected with their row numbers") {
  const fs::path dir = fresh_dir("badcsv");

  put(dir / "missing.csv", "date,a,b\n2001-01,1.0,2.0\n2001-02,,2.5\n");
  CHECK_THROWS_WITH_AS(ingest((dir / "missing.csv").string(), true),
                       doctest::Contains("row 3"), std::runtime_error);

  put(dir / "order.csv", "date,a\n2001-05,1.0\n2001-04,2.0\n");
  CHECK_THROWS_WITH_AS(ingest((dir / "order.csv").string(), true),
                       doctest::Contains("row 3"), std::runtime_error);

  put(dir / "text.csv", "date,a\n2001-05,1.0\n2001-06,oops\n");
  CHECK_THROWS_WITH_AS(ingest((dir / "text.csv").string(), true),
                       doctest::Contains("non-numeric"), std::runtime_error);

  put(dir / "date.csv", "date,a\nJanuary,1.0\n");
  CHECK_THROWS_WITH_AS(ingest((dir / "date.csv").string(), true),
                       doctest::Contains("row 2"), std::runtime_error);

  put(dir / "width.csv", "date,a,b\n2001-01,1.0,2.0\n2001-02,1.5\n");
  CHECK_THROWS_WITH_AS(ingest((dir / "width.csv").string(), true),
                       doctest::Contains("row 3"), std::runtime_error);
}

TEST_CASE("simulate runs are reproducible byte for byte") {
  const fs::path dir = fresh_dir("sim_repro");
  put(dir / "sim.json", R"({"schema_version": 1,
    "dgp": {"kind": "score_driven", "t_len": 160}})");

  const std::string base = "simulate --config " + (dir / "sim.json").string();
  const CliRun a = run_cli(
      base + " --seed 42 --out " + (dir / "a").string(), dir);
  REQUIRE(a.exit_code == 0);
  const CliRun b = run_cli(
      base + " --seed 42 --out " + (dir / "b").string(), dir);
  REQUIRE(b.exit_code == 0);
  const CliRun c = run_cli(
      base + " --seed 43 --out " + (dir / "c").string(), dir);
  REQUIRE(c.exit_code == 0);

  for (const char* name : {"y.csv", "truth.json", "manifest.json"})
    CHECK(sha256_file((dir / "a" / name).string()) ==
          sha256_file((dir / "b" / name).string()));
  CHECK(sha256_file((dir / "a" / "y.csv").string()) !=
        sha256_file((dir / "c" / "y.csv").string()));

  const json manifest = json::parse(slurp(dir / "a" / "manifest.json"));
  CHECK(manifest.at("command") == "simulate");
  CHECK(manifest.at("seed") == 42);
  CHECK(manifest.at("config_sha256") ==
        sha256_file((dir / "sim.json").string()));
  CHECK(manifest.at("outputs").contains("y.csv"));
  CHECK(manifest.at("outputs").contains("truth.json"));
}

TEST_CASE("filter replays the generator when handed the true setup") {
  const fs::path dir = fresh_dir("filter_replay");
  put(dir / "sim.json", R"({"schema_version": 1,
    "dgp": {"kind": "score_driven", "t_len": 150}})");
  REQUIRE(run_cli("simulate --config " + (dir / "sim.json").string() +
                      " --seed 7 --out " + (dir / "sim").string(),
                  dir)
              .exit_code == 0);

  put(dir / "filter.json",
      std::string(R"({"schema_version": 1,
    "data": {"path": ")") +
          (dir / "sim" / "y.csv").string() + R"(", "center": false},
    )" + study_model_json() +
          R"(,
    "statics": {"restrictions": "by_block",
                "alpha_free": [0.01, 0.01, 0.001, 0.001]},
    "theta0": )" +
          theta0_json() + R"(,
    "smooth": true})");
  const CliRun f = run_cli("filter --config " + (dir / "filter.json").string() +
                               " --seed 1 --out " + (dir / "flt").string(),
                           dir);
  REQUIRE(f.exit_code == 0);

  // compare the emitted path against the truth sidecar, both full precision
  const json truth = json::parse(slurp(dir / "sim" / "truth.json"));
  std::ifstream fcsv(dir / "flt" / "filtered.csv");
  std::string header;
  REQUIRE(std::getline(fcsv, header));
  CHECK(header.rfind("t,S11,", 0) == 0);
  CHECK(header.find(",eps_1") != std::string::npos);
  CHECK(header.find(",flag") != std::string::npos);

  std::string line;
  int t = 0;
  double worst = 0.0;
  while (std::getline(fcsv, line)) {
    std::stringstream ss(line);
    std::string cell;
    REQUIRE(std::getline(ss, cell, ','));
    CHECK(std::stoi(cell) == t);
    for (int k = 0; k < 27; ++k) {
      REQUIRE(std::getline(ss, cell, ','));
      const double got = std::strtod(cell.c_str(), nullptr);
      const double want =
          truth.at("theta_true")[static_cast<std::size_t>(t)]
                                [static_cast<std::size_t>(k)]
              .get<double>();
      worst = std::max(worst, std::abs(got - want));
    }
    ++t;
  }
  CHECK(t == 150);
  CHECK(worst == 0.0);

  const json summary = json::parse(slurp(dir / "flt" / "filter.json"));
  CHECK(summary.at("stability_violations") == 0);
  CHECK(fs::exists(dir / "flt" / "smoothed.csv"));
}

TEST_CASE("estimate emits the report table and machine-readable results") {
  const fs::path dir = fresh_dir("estimate_cli");
  put(dir / "sim.json", R"({"schema_version": 1,
    "dgp": {"kind": "score_driven", "t_len": 140}})");
  REQUIRE(run_cli("simulate --config " + (dir / "sim.json").string() +
                      " --seed 11 --out " + (dir / "sim").string(),
                  dir)
              .exit_code == 0);

  put(dir / "est.json",
      std::string(R"({"schema_version": 1,
    "data": {"path": ")") +
          (dir / "sim" / "y.csv").string() + R"(", "center": false},
    )" + study_model_json() +
          R"(,
    "restrictions": "by_block",
    "init_alpha": 0.005,
    "options": {"multistarts": 1, "simplex_max_iter": 60,
                "polish_max_iter": 8}})");
  const CliRun e = run_cli("estimate --config " + (dir / "est.json").string() +
                               " --seed 2 --out " + (dir / "est").string(),
                           dir);
  REQUIRE(e.exit_code == 0);

  const json est = json::parse(slurp(dir / "est" / "estimate.json"));
  CHECK(est.at("free_names").size() == 4);
  CHECK(est.at("free_values").size() == 4);
  CHECK(est.at("robust_se").size() == 4);
  CHECK(est.at("t_stats").size() == 4);
  CHECK(est.at("cov_free").size() == 4);
  CHECK(est.at("loglik").is_number());
  CHECK(est.at("convergence").is_string());

  const std::string report = slurp(dir / "est" / "report.txt");
  CHECK(report.find("Parameter") != std::string::npos);
  CHECK(report.find("Estimate") != std::string::npos);
  CHECK(report.find("Robust s.e.") != std::string::npos);
  CHECK(report.find("t-stat") != std::string::npos);
  CHECK(report.find("alpha_S") != std::string::npos);
  CHECK(fs::exists(dir / "est" / "filtered.csv"));

  // the fitted covariance feeds the impulse-response bands downstream
  put(dir / "irf.json",
      std::string(R"({"schema_version": 1,
    "data": {"path": ")") +
          (dir / "sim" / "y.csv").string() + R"(", "center": false},
    )" + study_model_json() +
          R"(,
    "statics": {"restrictions": "by_block", "estimate_path": ")" +
          (dir / "est" / "estimate.json").string() + R"("},
    "horizon": 4,
    "bands": {"repetitions": 3, "inner_draws": 32, "estimate_path": ")" +
          (dir / "est" / "estimate.json").string() + R"("}})");
  const CliRun ib = run_cli("irf --config " + (dir / "irf.json").string() +
                                " --seed 5 --out " + (dir / "irfb").string(),
                            dir);
  REQUIRE(ib.exit_code == 0);
  const json meta = json::parse(slurp(dir / "irfb" / "irf.json"));
  CHECK(meta.at("kept").get<int>() >= 2);
}

TEST_CASE("impulse responses arrive in long format with exact impact rows") {
  const fs::path dir = fresh_dir("irf_cli");
  put(dir / "sim.json", R"({"schema_version": 1,
    "dgp": {"kind": "score_driven", "t_len": 120}})");
  REQUIRE(run_cli("simulate --config " + (dir / "sim.json").string() +
                      " --seed 3 --out " + (dir / "sim").string(),
                  dir)
              .exit_code == 0);

  put(dir / "irf.json",
      std::string(R"({"schema_version": 1,
    "data": {"path": ")") +
          (dir / "sim" / "y.csv").string() + R"(", "center": false},
    )" + study_model_json() +
          R"(,
    "statics": {"restrictions": "by_block",
                "alpha_free": [0.01, 0.01, 0.001, 0.001]},
    "horizon": 6,
    "draws": 64})");
  const CliRun r = run_cli("irf --config " + (dir / "irf.json").string() +
                               " --seed 9 --out " + (dir / "irf").string(),
                           dir);
  REQUIRE(r.exit_code == 0);

  std::ifstream csv(dir / "irf" / "irf.csv");
  std::string line;
  REQUIRE(std::getline(csv, line));
  CHECK(line == "i,j,k,mean,half_width");
  int rows = 0, impact_rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string i, j, k, mean, hw;
    std::getline(ss, i, ',');
    std::getline(ss, j, ',');
    std::getline(ss, k, ',');
    std::getline(ss, mean, ',');
    std::getline(ss, hw, ',');
    if (k == "0") {
      ++impact_rows;
      CHECK(std::strtod(hw.c_str(), nullptr) == 0.0);
    }
  }
  CHECK(rows == 9 * 7);
  CHECK(impact_rows == 9);
}

TEST_CASE("replicated study summaries land in tidy tables") {
  const fs::path dir = fresh_dir("mc_cli");
  put(dir / "mc.json", R"({"schema_version": 1,
    "dgp": {"kind": "deterministic_sine", "t_len": 80},
    "replications": 4,
    "smooth": true})");
  const CliRun r = run_cli("mc-study --config " + (dir / "mc.json").string() +
                               " --seed 17 --out " + (dir / "mc").string(),
                           dir);
  REQUIRE(r.exit_code == 0);

  std::ifstream err(dir / "mc" / "mc_error.csv");
  std::string line;
  REQUIRE(std::getline(err, line));
  CHECK(line == "pass,t,component,median,p16,p84,abs_median");
  int rows = 0;
  while (std::getline(err, line)) ++rows;
  CHECK(rows == 2 * 80 * 27);

  std::ifstream path(dir / "mc" / "mc_path.csv");
  REQUIRE(std::getline(path, line));
  CHECK(line == "t,component,true_value,median,p16,p84");
  rows = 0;
  while (std::getline(path, line)) ++rows;
  CHECK(rows == 80 * 27);
}

TEST_CASE("schema violations name the offending field") {
  const fs::path dir = fresh_dir("schema");
  put(dir / "bad1.json", R"({"schema_version": 1,
    "dgp": {"kind": "warp_drive"}})");
  const CliRun a = run_cli("simulate --config " + (dir / "bad1.json").string() +
                               " --seed 1 --out " + (dir / "o1").string(),
                           dir);
  CHECK(a.exit_code == 1);
  CHECK(a.err.find("/dgp/kind") != std::string::npos);

  put(dir / "bad2.json", R"({"schema_version": 1,
    "data": {"path": "nope.csv"},
    "model": {"n": 3, "lag_mode": "plain", "p": 2, "densities": []}})");
  const CliRun b = run_cli("estimate --config " + (dir / "bad2.json").string() +
                               " --seed 1 --out " + (dir / "o2").string(),
                           dir);
  CHECK(b.exit_code == 1);
  CHECK(b.err.find("/model") != std::string::npos);

  put(dir / "bad3.json", R"({"schema_version": 2, "dgp": {"kind": "constant"}})");
  const CliRun c = run_cli("simulate --config " + (dir / "bad3.json").string() +
                               " --seed 1 --out " + (dir / "o3").string(),
                           dir);
  CHECK(c.exit_code == 1);
  CHECK(c.err.find("/schema_version") != std::string::npos);

  put(dir / "bad.csv", "date,a,b,c\n2001-01,1,2\n");
  put(dir / "bad4.json",
      std::string(R"({"schema_version": 1,
    "data": {"path": ")") +
          (dir / "bad.csv").string() + R"("},
    )" + study_model_json() +
          R"(,
    "statics": {"restrictions": "by_block", "alpha_free": 0.01}})");
  const CliRun d = run_cli("filter --config " + (dir / "bad4.json").string() +
                               " --seed 1 --out " + (dir / "o4").string(),
                           dir);
  CHECK(d.exit_code == 1);
  CHECK(d.err.find("row 2") != std::string::npos);
}
