// Acceptance gate: eight checks, one [PASS]/[FAIL] line each, nonzero exit
// on any failure. --only N runs a single check.

#include <sys/wait.h>

#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "companion_draws.hpp"
#include "oracles.hpp"
#include "sdvar/dataset.hpp"
#include "sdvar/estimate.hpp"
#include "sdvar/irf.hpp"
#include "sdvar/manifest.hpp"
#include "sdvar/parallel.hpp"
#include "sdvar/simulate.hpp"

using namespace sdvar;
namespace fs = std::filesystem;

namespace {

int g_workers = 1;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Vector random_state(const ModelSpec& spec, RngStream& rng, double phi_scale) {
  ThetaView v;
  const int n = spec.n;
  v.s = Matrix::Zero(n, n);
  v.a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    v.s(i, i) = -0.5 + 0.4 * standard_normal(rng);
    for (int j = 0; j < i; ++j) v.s(i, j) = 0.3 * standard_normal(rng);
    for (int j = i + 1; j < n; ++j) {
      v.a(i, j) = 0.3 * standard_normal(rng);
      v.a(j, i) = -v.a(i, j);
    }
  }
  v.phi.resize(static_cast<std::size_t>(spec.lag_blocks()));
  for (auto& block : v.phi) {
    block = Matrix(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        block(i, j) = phi_scale * standard_normal(rng);
  }
  return pack(v, spec);
}

Matrix mode_companion(const ThetaView& v, const ModelSpec& spec) {
  return spec.lag_mode == LagMode::plain
             ? companion_plain(v.phi)
             : companion_heterogeneous(v.phi[0], v.phi[1]);
}

// ---------------------------------------------------------------- check 1

bool gradient_gate(std::string& detail) {
  const auto t_start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const LagMode mode : {LagMode::plain, LagMode::heterogeneous}) {
    ModelSpec spec;
    spec.n = 3;
    spec.lag_mode = mode;
    spec.p = 2;
    spec.skewt = {{-0.7, 5.0}, {-0.6, 6.0}, {0.7, 5.5}};
    const int maxlag = spec.max_lag();
    const int d = spec.theta_dim();
    RngStream rng(mode == LagMode::plain ? 101 : 202);

    int done = 0;
    while (done < 50) {
      const bool want_unstable = done % 2 == 1;
      Vector theta = random_state(spec, rng, want_unstable ? 0.3 : 0.2);
      if (want_unstable) {
        ThetaView v = unpack(theta, spec);
        double rho = penalty_t(theta, spec).rho;
        int guard = 0;
        while (rho < 1.05 && ++guard < 40) {
          for (auto& block : v.phi) block *= 1.2;
          theta = pack(v, spec);
          rho = penalty_t(theta, spec).rho;
        }
        if (rho < 1.05 || rho > 2.5) continue;
        if (spectral_radius_gelfand(mode_companion(v, spec), spec.squaring_q)
                .degenerate)
          continue;
      } else {
        const double rho = penalty_t(theta, spec).rho;
        if (std::abs(rho - 1.0) < 1e-3) continue;
      }

      Matrix y(maxlag + 1, 3);
      for (int t = 0; t <= maxlag; ++t)
        for (int j = 0; j < 3; ++j) y(t, j) = 1.5 * standard_normal(rng);
      const int t = maxlag;

      const Vector raw = scores_t(y, t, theta, spec);
      const Vector pen = penalized_scores_t(y, t, theta, spec);
      for (int k = 0; k < d; ++k) {
        {
          const double h = 1e-6 * std::max(1.0, std::abs(theta(k)));
          Vector tp = theta, tm = theta;
          tp(k) += h;
          tm(k) -= h;
          const double fd = (log_likelihood_t(y, t, tp, spec) -
                             log_likelihood_t(y, t, tm, spec)) /
                            (2.0 * h);
          worst = std::max(
              worst, std::abs(raw(k) - fd) /
                         std::max(1e-5 * std::max(std::abs(fd),
                                                  std::abs(raw(k))),
                                  1e-7));
        }
        {
          const double h = 2e-6 * std::max(1.0, std::abs(theta(k)));
          Vector tp = theta, tm = theta;
          tp(k) += h;
          tm(k) -= h;
          const double fd = (penalized_log_likelihood_t(y, t, tp, spec) -
                             penalized_log_likelihood_t(y, t, tm, spec)) /
                            (2.0 * h);
          worst = std::max(
              worst, std::abs(pen(k) - fd) /
                         std::max(1e-5 * std::max(std::abs(fd),
                                                  std::abs(pen(k))),
                                  1e-7));
        }
      }
      ++done;
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    t_start)
          .count();
  detail = "worst error " + fmt(worst) +
           "x the allowance (rel 1e-5, floor 1e-7), " + fmt(secs) + "s";
  return worst <= 1.0 && secs < 60.0;
}

// ---------------------------------------------------------------- check 2

bool density_gate(std::string& detail) {
  RngStream rng(7);
  double worst_moment = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const SkewTParams p{-0.9 + 1.8 * rng.uniform(),
                        3.0 + 35.0 * rng.uniform()};
    const double mass =
        oracle::integrate_line([&](double x) { return std::exp(log_pdf(x, p)); });
    const double mean = oracle::integrate_line(
        [&](double x) { return x * std::exp(log_pdf(x, p)); });
    const double var = oracle::integrate_line([&](double x) {
      return (x - mean) * (x - mean) * std::exp(log_pdf(x, p));
    });
    worst_moment = std::max({worst_moment, std::abs(mass - 1.0),
                             std::abs(mean), std::abs(var - 1.0)});
  }

  double worst_point = 0.0;
  for (const double nu : {3.3, 5.0, 8.5, 17.0, 33.0}) {
    const boost::math::students_t dist(nu);
    const double v = std::sqrt((nu - 2.0) / nu);
    for (double x = -30.0; x <= 30.0; x += 0.25) {
      const double ref = boost::math::pdf(dist, x / v) / v;
      const double got = std::exp(log_pdf(x, {0.0, nu}));
      worst_point = std::max(worst_point, std::abs(got - ref));
    }
  }
  detail = "worst moment error " + fmt(worst_moment) +
           " (tol 1e-5), worst symmetric-case pointwise gap " +
           fmt(worst_point) + " (tol 1e-10)";
  return worst_moment <= 1e-5 && worst_point <= 1e-10;
}

// ---------------------------------------------------------------- check 3

bool spectral_gate(std::string& detail) {
  RngStream rng(33);
  double worst_rho = 0.0, worst_deriv = 0.0;
  int deriv_checked = 0, degenerate_skips = 0;
  for (int i = 0; i < 500; ++i) {
    const testgen::CompanionDraw cd = testgen::draw_planted_companion(rng);
    const GelfandPayload payload = spectral_radius_gelfand(cd.companion, 10);
    const double target = oracle::spectral_radius_eig(cd.companion);
    worst_rho = std::max(worst_rho, std::abs(payload.rho - target));

    const int lag = rng.uniform() < 0.5 ? 1 : 2;
    const int ii = static_cast<int>(rng.uniform() * 3.0) % 3;
    const int jj = static_cast<int>(rng.uniform() * 3.0) % 3;
    const Matrix dir = companion_direction_plain(3, 2, lag, ii, jj);
    if (payload.degenerate) {
      ++degenerate_skips;
      continue;
    }
    const double analytic = spectral_radius_derivative(payload, dir);
    const double h = 1e-6;
    const double fd = (spectral_radius_gelfand(cd.companion + h * dir, 10).rho -
                       spectral_radius_gelfand(cd.companion - h * dir, 10).rho) /
                      (2.0 * h);
    worst_deriv = std::max(worst_deriv,
                           std::abs(analytic - fd) / std::max(std::abs(fd),
                                                              1e-8));
    ++deriv_checked;
  }
  detail = "worst radius error " + fmt(worst_rho) +
           " (tol 1e-3 absolute), worst derivative error " + fmt(worst_deriv) +
           " (tol 1e-4) over " + std::to_string(deriv_checked) +
           " directions, " + std::to_string(degenerate_skips) +
           " degenerate skips";
  return worst_rho <= 1e-3 && worst_deriv <= 1e-4 && deriv_checked >= 400;
}

// ---------------------------------------------------------------- check 4

bool study_recovery(std::string& detail) {
  const int reps = 100;
  Matrix est(reps, 4);
  const auto blocks = partition_blocks(reps, 2);
  run_blocks(blocks, g_workers, [&](const BlockRange& b) {
    for (int r = b.begin; r < b.end; ++r) {
      const DgpConfig cfg = dgp_score_driven(derive_seed(9001, r));
      const SimOutput sim = simulate(cfg);
      const RestrictionMap map = alpha_groups_by_block(cfg.spec);
      FitOptions opts;
      opts.multistarts = 1;
      opts.simplex_max_iter = 200;
      opts.polish_max_iter = 15;
      opts.theta0 = cfg.theta0;  // generator start is part of this design
      opts.compute_se = false;
      const EstimateResult res =
          fit(sim.y, cfg.spec, map, Vector::Constant(4, 0.005), opts);
      est.row(r) = res.free_values.transpose();
    }
  });

  const double truth[4] = {0.01, 0.01, 0.001, 0.001};
  bool ok = true;
  std::string parts;
  for (int g = 0; g < 4; ++g) {
    std::vector<double> col(est.col(g).data(), est.col(g).data() + reps);
    const double q25 = oracle::quantile7(col, 0.25);
    const double q50 = oracle::quantile7(col, 0.50);
    const double q75 = oracle::quantile7(col, 0.75);
    const bool iqr_ok = q25 <= truth[g] && truth[g] <= q75;
    const bool med_ok = std::abs(q50 - truth[g]) <= 0.5 * truth[g];
    ok = ok && iqr_ok && med_ok;
    parts += (g ? "; " : "") + std::string("group ") + std::to_string(g) +
             " IQR [" + fmt(q25) + ", " + fmt(q75) + "] median " + fmt(q50) +
             " truth " + fmt(truth[g]);
  }
  detail = parts;
  return ok;
}

// ---------------------------------------------------------------- check 5

bool tracking_gate(std::string& detail) {
  const int burn = 100;

  const DgpConfig sine_cfg = dgp_deterministic_sine(777);
  const McStudyResult sine = mc_study(sine_cfg, 100, false, g_workers);
  const int t_len = sine_cfg.t_len;
  const int d = sine_cfg.spec.theta_dim();
  double worst_cover = 1.0;
  for (int k = 0; k < d; ++k) {
    int inside = 0, total = 0;
    for (int t = burn; t < t_len; ++t) {
      inside += (sine.filtered_abs_error.p16(t, k) <= 0.0 &&
                 0.0 <= sine.filtered_abs_error.p84(t, k))
                    ? 1
                    : 0;
      ++total;
    }
    worst_cover = std::min(worst_cover, double(inside) / total);
  }

  const DgpConfig rw_cfg = dgp_shock_driven(888);
  const McStudyResult rw = mc_study(rw_cfg, 100, true, g_workers);
  const int maxlag = rw_cfg.spec.max_lag();
  bool order_ok = true;
  double worst_gain = 1.0;
  for (const int k : {6, 7, 8}) {  // rotation components
    double filt = 0.0, smth = 0.0;
    for (int t = maxlag; t < maxlag + 100; ++t) {
      filt += rw.filtered_abs_median(t, k);
      smth += rw.smoothed_abs_median(t, k);
    }
    order_ok = order_ok && smth <= filt;
    worst_gain = std::min(worst_gain, filt > 0.0 ? smth / filt : 1.0);
  }
  double worst_zero = 1.0;
  for (const int k : {6, 7, 8}) {
    int inside = 0, total = 0;
    for (int t = burn; t < rw_cfg.t_len; ++t) {
      inside += (rw.filtered_abs_error.p16(t, k) <= 0.0 &&
                 0.0 <= rw.filtered_abs_error.p84(t, k))
                    ? 1
                    : 0;
      ++total;
    }
    worst_zero = std::min(worst_zero, double(inside) / total);
  }

  detail = "sine coverage min " + fmt(worst_cover) +
           " (need 0.60); smoothing gain " + fmt(worst_gain) +
           " (need <= 1); zero-in-band min " + fmt(worst_zero) +
           " (need 0.80)";
  return worst_cover >= 0.60 && order_ok && worst_zero >= 0.80;
}

// ---------------------------------------------------------------- check 6

bool irf_linear_gate(std::string& detail) {
  const ModelSpec spec = study_spec();
  const Vector theta_t = study_theta0(spec);
  const StaticParams frozen =
      integrated_statics(spec, Vector::Zero(spec.theta_dim()));
  DgpConfig hist_cfg = dgp_constant(4100);
  hist_cfg.t_len = 40;
  const Matrix hist = simulate(hist_cfg).y.bottomRows(6);

  const int horizon = 24;
  const IrfResult r =
      irf(hist, spec, frozen, theta_t, horizon, 20000, 616, g_workers);

  const ThetaView v = unpack(theta_t, spec);
  const Matrix c = mat_exp(v.s) * cayley(v.a);
  const Matrix f = companion_plain(v.phi);

  const bool impact_ok = (r.mean[0] - c).cwiseAbs().maxCoeff() == 0.0 &&
                         r.half_width[0].maxCoeff() == 0.0;
  Matrix power = Matrix::Identity(6, 6);
  double worst = 0.0;
  bool within = true;
  for (int k = 0; k <= horizon; ++k) {
    const Matrix linear = power.topLeftCorner(3, 3) * c;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double err =
            std::abs(r.mean[static_cast<std::size_t>(k)](i, j) -
                     linear(i, j));
        const double allow = std::max(
            3.0 * r.half_width[static_cast<std::size_t>(k)](i, j), 1e-9);
        within = within && err <= allow;
        worst = std::max(worst, err);
      }
    power = f * power;
  }
  detail = std::string("impact ") + (impact_ok ? "exact" : "WRONG") +
           ", worst deviation " + fmt(worst) +
           " against 3 Monte Carlo standard errors (floor 1e-9), " +
           std::to_string(r.clipped_pairs) + " clipped pairs";
  return impact_ok && within && r.clipped_pairs == 0;
}

// ---------------------------------------------------------------- check 7

bool identifiability_gate(std::string& detail) {
  const DgpConfig cfg = dgp_score_driven(555);
  const SimOutput sim = simulate(cfg);
  const SimOutput sim2 = simulate(cfg);
  const bool sim_identical =
      (sim.y - sim2.y).cwiseAbs().maxCoeff() == 0.0;

  const FilterOutput a =
      run_filter(sim.y, cfg.spec, cfg.statics, cfg.theta0);
  const FilterOutput a2 =
      run_filter(sim.y, cfg.spec, cfg.statics, cfg.theta0);
  const double same = (a.theta_path - a2.theta_path).cwiseAbs().maxCoeff();

  StaticParams other = cfg.statics;
  other.alpha *= 1.5;
  const FilterOutput b = run_filter(sim.y, cfg.spec, other, cfg.theta0);
  const double apart = (a.theta_path - b.theta_path).cwiseAbs().maxCoeff();

  detail = "identical setup max gap " + fmt(same) +
           " (need 0), distinct statics max gap " + fmt(apart) +
           " (need > 1e-8)";
  return sim_identical && same == 0.0 && apart > 1e-8;
}

// ---------------------------------------------------------------- check 8

struct CliRun {
  int exit_code;
  std::string err;
};

CliRun run_cli(const std::string& args, const fs::path& scratch) {
  const fs::path errfile = scratch / "stderr.txt";
  const std::string cmd =
      std::string(SDVAR_CLI_PATH) + " " + args + " 2>" + errfile.string();
  const int raw_rc = std::system(cmd.c_str());
  std::ifstream in(errfile, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(raw_rc) ? WEXITSTATUS(raw_rc) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool empirical_smoke(std::string& detail) {
  const fs::path dir = "acceptance_scratch";
  fs::remove_all(dir);
  fs::create_directories(dir);

  ModelSpec spec;
  spec.n = 3;
  spec.lag_mode = LagMode::heterogeneous;
  spec.skewt = {{-0.7, 5.0}, {-0.6, 6.0}, {0.7, 5.5}};
  spec.penalty_k = 200.0;
  const RestrictionMap map = alpha_groups_empirical(spec);
  if (map.free_count() != 13) {
    detail = "empirical restriction has " +
             std::to_string(map.free_count()) + " groups, want 13";
    return false;
  }
  Vector free0(13);
  free0 << 0.01, 0.01, 0.01, 0.01, 0.01, 0.001, 0.001, 0.001, 0.001, 0.001,
      0.001, 0.001, 0.001;

  DgpConfig cfg;
  cfg.kind = DgpKind::score_driven;
  cfg.t_len = 786;
  cfg.spec = spec;
  cfg.statics = integrated_statics(spec, map.unfold(free0, spec.theta_dim()));
  {
    ThetaView v;
    v.s = std::log(0.1) * Matrix::Identity(3, 3);
    v.a = Matrix::Zero(3, 3);
    v.a(0, 1) = -0.11;
    v.a(1, 0) = 0.11;
    v.a(0, 2) = 0.23;
    v.a(2, 0) = -0.23;
    v.a(1, 2) = -0.03;
    v.a(2, 1) = 0.03;
    v.phi = {0.3 * Matrix::Identity(3, 3), 0.2 * Matrix::Identity(3, 3)};
    cfg.theta0 = pack(v, spec);
  }
  cfg.seed = 20260817;
  const SimOutput sim = simulate(cfg);

  Dataset ds;
  ds.values = sim.y;
  ds.column_means = Vector::Zero(3);
  ds.names = {"infl", "gap", "rate"};
  int year = 1959, month = 7;
  for (int t = 0; t < cfg.t_len; ++t) {
    char stamp[24];
    std::snprintf(stamp, sizeof stamp, "%04d-%02d", year, month);
    ds.dates.emplace_back(stamp);
    if (++month == 13) {
      month = 1;
      ++year;
    }
  }
  write_csv((dir / "y.csv").string(), ds);

  const std::string model_json =
      R"("model": {"n": 3, "lag_mode": "heterogeneous",
      "densities": [{"delta": -0.7, "nu": 5.0}, {"delta": -0.6, "nu": 6.0},
                    {"delta": 0.7, "nu": 5.5}],
      "penalty_k": 200.0})";
  {
    std::ofstream cfg_out(dir / "est.json");
    cfg_out << R"({"schema_version": 1,
      "data": {"path": ")" << (dir / "y.csv").string()
            << R"(", "center": false},
      )" << model_json << R"(,
      "restrictions": "empirical",
      "init_alpha": 0.005,
      "options": {"multistarts": 1, "simplex_max_iter": 300,
                  "polish_max_iter": 15}})";
  }
  const CliRun est = run_cli("estimate --config " +
                                 (dir / "est.json").string() + " --seed 4 " +
                                 "--workers " + std::to_string(g_workers) +
                                 " --out " + (dir / "est").string(),
                             dir);
  if (est.exit_code != 0) {
    detail = "estimate failed: " + est.err;
    return false;
  }
  const nlohmann::json ej =
      nlohmann::json::parse(slurp(dir / "est" / "estimate.json"));
  const int violations = ej.at("stability_violations").get<int>();
  bool se_ok = ej.at("free_names").size() == 13;
  for (const auto& s : ej.at("robust_se"))
    se_ok = se_ok && s.is_number() && s.get<double>() >= 0.0;
  const std::string report = slurp(dir / "est" / "report.txt");
  const bool table_ok = report.find("Parameter") != std::string::npos &&
                        report.find("Estimate") != std::string::npos &&
                        report.find("Robust s.e.") != std::string::npos &&
                        report.find("t-stat") != std::string::npos &&
                        report.find("alpha_S11") != std::string::npos &&
                        report.find("alpha_Phisoff") != std::string::npos;

  {
    std::ofstream cfg_out(dir / "flt.json");
    cfg_out << R"({"schema_version": 1,
      "data": {"path": ")" << (dir / "y.csv").string()
            << R"(", "center": false},
      )" << model_json << R"(,
      "statics": {"restrictions": "empirical", "estimate_path": ")"
            << (dir / "est" / "estimate.json").string() << R"("},
      "smooth": true,
      "bands": {"draws": 48, "estimate_path": ")"
            << (dir / "est" / "estimate.json").string() << R"("}})";
  }
  const CliRun flt = run_cli("filter --config " +
                                 (dir / "flt.json").string() + " --seed 6 " +
                                 "--workers " + std::to_string(g_workers) +
                                 " --out " + (dir / "flt").string(),
                             dir);
  if (flt.exit_code != 0) {
    detail = "filter failed: " + flt.err;
    return false;
  }
  const bool bands_ok = fs::exists(dir / "flt" / "bands.csv") &&
                        fs::exists(dir / "flt" / "smoothed.csv");

  {
    std::ofstream cfg_out(dir / "irf.json");
    cfg_out << R"({"schema_version": 1,
      "data": {"path": ")" << (dir / "y.csv").string()
            << R"(", "center": false},
      )" << model_json << R"(,
      "statics": {"restrictions": "empirical", "estimate_path": ")"
            << (dir / "est" / "estimate.json").string() << R"("},
      "horizon": 24,
      "bands": {"repetitions": 6, "inner_draws": 200, "estimate_path": ")"
            << (dir / "est" / "estimate.json").string() << R"("}})";
  }
  const CliRun irf_run = run_cli("irf --config " +
                                     (dir / "irf.json").string() +
                                     " --seed 8 --workers " +
                                     std::to_string(g_workers) + " --out " +
                                     (dir / "irf").string(),
                                 dir);
  if (irf_run.exit_code != 0) {
    detail = "irf failed: " + irf_run.err;
    return false;
  }
  std::istringstream irf_csv(slurp(dir / "irf" / "irf.csv"));
  std::string line;
  std::getline(irf_csv, line);
  int rows = 0;
  while (std::getline(irf_csv, line)) ++rows;
  const bool irf_ok = rows == 9 * 25;

  detail = "13 free statics, " + std::to_string(violations) +
           " stability violations (need 0), report table " +
           (table_ok ? "ok" : "WRONG") + ", bands " +
           (bands_ok ? "ok" : "MISSING") + ", irf rows " +
           std::to_string(rows);
  return violations == 0 && se_ok && table_ok && bands_ok && irf_ok;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--only") && i + 1 < argc)
      only = std::atoi(argv[++i]);
    else if (!std::strcmp(argv[i], "--workers") && i + 1 < argc)
      g_workers = std::atoi(argv[++i]);
  }
  if (g_workers < 1) g_workers = 1;

  struct Check {
    int id;
    const char* label;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Check> checks = {
      {1, "score gradients match finite differences", gradient_gate},
      {2, "shock density normalized and standardized", density_gate},
      {3, "spectral radius estimate and derivative", spectral_gate},
      {4, "adjustment-speed recovery across replications", study_recovery},
      {5, "sine tracking and smoothing gain", tracking_gate},
      {6, "impulse responses reach the linear limit", irf_linear_gate},
      {7, "static parameters identified from the path", identifiability_gate},
      {8, "empirical-shape pipeline end to end", empirical_smoke},
  };

  int failures = 0;
  for (const Check& c : checks) {
    if (only != 0 && c.id != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %d %s: %s\n", ok ? "PASS" : "FAIL", c.id, c.label,
                detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
