#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdvar/dataset.hpp"
#include "sdvar/estimate.hpp"
#include "sdvar/irf.hpp"
#include "sdvar/manifest.hpp"
#include "sdvar/parallel.hpp"
#include "sdvar/simulate.hpp"

using json = nlohmann::ordered_json;
using namespace sdvar;

namespace {

[[noreturn]] void fail(const std::string& pointer, const std::string& why) {
  throw std::runtime_error("config error at " + pointer + ": " + why);
}

const json& require_key(const json& obj, const std::string& ptr,
                        const char* key) {
  if (!obj.is_object()) fail(ptr.empty() ? "/" : ptr, "must be an object");
  if (!obj.contains(key)) fail(ptr + "/" + key, "required field is missing");
  return obj.at(key);
}

double as_number(const json& v, const std::string& ptr) {
  if (!v.is_number()) fail(ptr, "must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& ptr) {
  if (!v.is_number_integer()) fail(ptr, "must be an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& ptr) {
  if (!v.is_boolean()) fail(ptr, "must be a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& ptr) {
  if (!v.is_string()) fail(ptr, "must be a string");
  return v.get<std::string>();
}

Vector as_vector(const json& v, const std::string& ptr, int expect) {
  if (!v.is_array()) fail(ptr, "must be an array of numbers");
  if (expect >= 0 && static_cast<int>(v.size()) != expect)
    fail(ptr, "expected " + std::to_string(expect) + " entries, got " +
                  std::to_string(v.size()));
  Vector out(static_cast<int>(v.size()));
  for (int i = 0; i < out.size(); ++i)
    out(i) = as_number(v[static_cast<std::size_t>(i)],
                       ptr + "/" + std::to_string(i));
  return out;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Matrix as_matrix(const json& v, const std::string& ptr, int rows, int cols) {
  if (!v.is_array() || static_cast<int>(v.size()) != rows)
    fail(ptr, "expected " + std::to_string(rows) + " rows");
  Matrix out(rows, cols);
  for (int i = 0; i < rows; ++i)
    out.row(i) = as_vector(v[static_cast<std::size_t>(i)],
                           ptr + "/" + std::to_string(i), cols)
                     .transpose();
  return out;
}

ModelSpec parse_model(const json& cfg) {
  const json& m = require_key(cfg, "", "model");
  ModelSpec spec;
  spec.n = as_int(require_key(m, "/model", "n"), "/model/n");
  const std::string mode =
      as_string(require_key(m, "/model", "lag_mode"), "/model/lag_mode");
  if (mode == "plain") {
    spec.lag_mode = LagMode::plain;
    spec.p = as_int(require_key(m, "/model", "p"), "/model/p");
  } else if (mode == "heterogeneous") {
    spec.lag_mode = LagMode::heterogeneous;
  } else {
    fail("/model/lag_mode", "must be \"plain\" or \"heterogeneous\"");
  }
  const json& dens = require_key(m, "/model", "densities");
  if (!dens.is_array()) fail("/model/densities", "must be an array");
  for (std::size_t i = 0; i < dens.size(); ++i) {
    const std::string ptr = "/model/densities/" + std::to_string(i);
    spec.skewt.push_back(
        {as_number(require_key(dens[i], ptr, "delta"), ptr + "/delta"),
         as_number(require_key(dens[i], ptr, "nu"), ptr + "/nu")});
  }
  if (m.contains("penalty_k"))
    spec.penalty_k = as_number(m.at("penalty_k"), "/model/penalty_k");
  if (m.contains("squaring_q"))
    spec.squaring_q = as_int(m.at("squaring_q"), "/model/squaring_q");
  try {
    spec.validate();
  } catch (const std::exception& e) {
    fail("/model", e.what());
  }
  return spec;
}

RestrictionMap parse_restrictions(const std::string& name,
                                  const std::string& ptr,
                                  const ModelSpec& spec) {
  if (name == "by_block") return alpha_groups_by_block(spec);
  if (name == "empirical") return alpha_groups_empirical(spec);
  fail(ptr, "must be \"by_block\" or \"empirical\"");
}

// scalar broadcasts across all tied groups
Vector parse_free_alpha(const json& v, const std::string& ptr,
                        const RestrictionMap& map) {
  if (v.is_number())
    return Vector::Constant(map.free_count(), as_number(v, ptr));
  return as_vector(v, ptr, map.free_count());
}

Dataset load_data(const json& cfg, std::string* path_out) {
  const json& d = require_key(cfg, "", "data");
  const std::string path =
      as_string(require_key(d, "/data", "path"), "/data/path");
  bool center = true;
  if (d.contains("center")) center = as_bool(d.at("center"), "/data/center");
  *path_out = path;
  return ingest(path, center);
}

DgpConfig parse_dgp(const json& cfg, std::uint64_t seed) {
  const json& d = require_key(cfg, "", "dgp");
  const std::string kind =
      as_string(require_key(d, "/dgp", "kind"), "/dgp/kind");
  DgpConfig dc;
  if (kind == "score_driven")
    dc = dgp_score_driven(seed);
  else if (kind == "deterministic_sine")
    dc = dgp_deterministic_sine(seed);
  else if (kind == "shock_driven_rw")
    dc = dgp_shock_driven(seed);
  else if (kind == "constant")
    dc = dgp_constant(seed);
  else
    fail("/dgp/kind",
         "must be one of \"score_driven\", \"deterministic_sine\", "
         "\"shock_driven_rw\", \"constant\"");
  dc.seed = seed;
  if (d.contains("t_len")) {
    dc.t_len = as_int(d.at("t_len"), "/dgp/t_len");
    if (dc.t_len <= dc.spec.max_lag())
      fail("/dgp/t_len", "sample too short for the lag order");
  }
  if (d.contains("shock_alpha"))
    dc.shock_alpha = as_number(d.at("shock_alpha"), "/dgp/shock_alpha");
  if (d.contains("alpha_by_block")) {
    const RestrictionMap map = alpha_groups_by_block(dc.spec);
    dc.statics.alpha = map.unfold(
        parse_free_alpha(d.at("alpha_by_block"), "/dgp/alpha_by_block", map),
        dc.spec.theta_dim());
  }
  if (d.contains("theta0"))
    dc.theta0 = as_vector(d.at("theta0"), "/dgp/theta0", dc.spec.theta_dim());
  return dc;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
}

void write_json_file(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string filtered_csv_body(const FilterOutput& fo, const ModelSpec& spec) {
  std::string body = "t";
  for (const std::string& name : theta_component_names(spec))
    body += "," + name;
  for (int i = 1; i <= spec.n; ++i) body += ",eps_" + std::to_string(i);
  body += ",flag";
  for (int i = 1; i <= spec.n; ++i) body += ",var_" + std::to_string(i);
  body += "\n";
  for (int t = 0; t < fo.theta_path.rows(); ++t) {
    body += std::to_string(t);
    for (int k = 0; k < fo.theta_path.cols(); ++k)
      body += "," + format_double(fo.theta_path(t, k));
    for (int i = 0; i < spec.n; ++i)
      body += "," + format_double(fo.shocks(t, i));
    body += "," + std::to_string(
                      int(fo.stability_flag[static_cast<std::size_t>(t)]));
    for (int i = 0; i < spec.n; ++i)
      body += "," + format_double(fo.var_diag(t, i));
    body += "\n";
  }
  return body;
}

std::string irf_csv_body(const std::vector<Matrix>& mean,
                         const std::vector<Matrix>& half_width) {
  std::string body = "i,j,k,mean,half_width\n";
  const int n = static_cast<int>(mean.front().rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (std::size_t k = 0; k < mean.size(); ++k) {
        body += std::to_string(i + 1) + "," + std::to_string(j + 1) + "," +
                std::to_string(k) + "," + format_double(mean[k](i, j)) + "," +
                format_double(half_width[k](i, j)) + "\n";
      }
  return body;
}

int count_flags(const FilterOutput& fo, const ModelSpec& spec) {
  int violations = 0;
  for (std::size_t t = static_cast<std::size_t>(spec.max_lag());
       t < fo.stability_flag.size(); ++t)
    violations += fo.stability_flag[t] ? 1 : 0;
  return violations;
}

struct CommandFiles {
  std::vector<std::string> inputs;   // paths as given
  std::vector<std::string> outputs;  // file names inside out_dir
};

struct RunContext {
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int workers = 1;
};

std::string joined(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

CommandFiles cmd_simulate(const json& cfg, const RunContext& rc) {
  const DgpConfig dc = parse_dgp(cfg, rc.seed);
  const SimOutput sim = simulate(dc);

  Dataset ds;
  ds.values = sim.y;
  ds.column_means = Vector::Zero(dc.spec.n);
  for (int i = 1; i <= dc.spec.n; ++i)
    ds.names.push_back("y" + std::to_string(i));
  int year = 2000, month = 1;
  for (int t = 0; t < dc.t_len; ++t) {
    char stamp[24];
    std::snprintf(stamp, sizeof stamp, "%04d-%02d", year, month);
    ds.dates.emplace_back(stamp);
    if (++month == 13) {
      month = 1;
      ++year;
    }
  }
  const std::string y_path = joined(rc.out_dir, "y.csv");
  write_csv(y_path, ds);

  json truth;
  truth["schema_version"] = 1;
  truth["theta_names"] = theta_component_names(dc.spec);
  truth["theta_true"] = matrix_to_json(sim.theta_true);
  truth["eps_true"] = matrix_to_json(sim.eps_true);
  truth["config"] = cfg;
  const std::string truth_path = joined(rc.out_dir, "truth.json");
  write_json_file(truth_path, truth);
  return {{}, {"y.csv", "truth.json"}};
}

struct FilterSetup {
  Dataset data;
  ModelSpec spec;
  RestrictionMap map;
  Vector free_alpha;
  StaticParams statics;
  Vector theta0;
  std::string data_path;
  std::vector<std::string> extra_inputs;
};

FilterSetup filter_setup(const json& cfg) {
  FilterSetup fs;
  fs.spec = parse_model(cfg);
  fs.data = load_data(cfg, &fs.data_path);
  if (fs.data.values.cols() != fs.spec.n)
    fail("/model/n", "data has " + std::to_string(fs.data.values.cols()) +
                         " columns");
  const json& st = require_key(cfg, "", "statics");
  fs.map = parse_restrictions(
      as_string(require_key(st, "/statics", "restrictions"),
                "/statics/restrictions"),
      "/statics/restrictions", fs.spec);
  if (st.contains("estimate_path")) {
    const std::string path =
        as_string(st.at("estimate_path"), "/statics/estimate_path");
    std::ifstream in(path);
    if (!in) fail("/statics/estimate_path", "cannot read " + path);
    const json est = json::parse(in);
    fs.free_alpha = as_vector(require_key(est, "", "free_values"),
                              "/statics/estimate_path:free_values",
                              fs.map.free_count());
    fs.extra_inputs.push_back(path);
  } else {
    fs.free_alpha =
        parse_free_alpha(require_key(st, "/statics", "alpha_free"),
                         "/statics/alpha_free", fs.map);
  }
  fs.statics = integrated_statics(
      fs.spec, fs.map.unfold(fs.free_alpha, fs.spec.theta_dim()));

  int window = static_cast<int>(fs.data.values.rows());
  if (cfg.contains("init_window")) {
    window = as_int(cfg.at("init_window"), "/init_window");
    if (window <= 0 || window > fs.data.values.rows())
      fail("/init_window", "must be in [1, T]");
  }
  fs.theta0 = cfg.contains("theta0")
                  ? as_vector(cfg.at("theta0"), "/theta0",
                              fs.spec.theta_dim())
                  : init_theta(fs.data.values, fs.spec, window);
  return fs;
}

Matrix load_cov(const json& b, const std::string& ptr,
                const RestrictionMap& map, Vector* center,
                std::vector<std::string>* inputs) {
  const int m = map.free_count();
  if (b.contains("estimate_path")) {
    const std::string path =
        as_string(b.at("estimate_path"), ptr + "/estimate_path");
    std::ifstream in(path);
    if (!in) fail(ptr + "/estimate_path", "cannot read " + path);
    const json est = json::parse(in);
    if (center)
      *center = as_vector(require_key(est, "", "free_values"),
                          ptr + "/estimate_path:free_values", m);
    inputs->push_back(path);
    return as_matrix(require_key(est, "", "cov_free"),
                     ptr + "/estimate_path:cov_free", m, m);
  }
  return as_matrix(require_key(b, ptr, "cov_free"), ptr + "/cov_free", m, m);
}

CommandFiles cmd_filter(const json& cfg, const RunContext& rc) {
  FilterSetup fs = filter_setup(cfg);
  const FilterOutput fo =
      run_filter(fs.data.values, fs.spec, fs.statics, fs.theta0);
  if (fo.diverged)
    throw std::runtime_error("filter diverged at row " +
                             std::to_string(fo.diverged_t));

  CommandFiles files;
  files.inputs = {fs.data_path};
  for (const std::string& p : fs.extra_inputs) files.inputs.push_back(p);

  const std::string filtered_path = joined(rc.out_dir, "filtered.csv");
  write_text(filtered_path, filtered_csv_body(fo, fs.spec));
  files.outputs.push_back("filtered.csv");

  json summary;
  summary["loglik"] = fo.loglik;
  summary["penalized_loglik"] = fo.penalized_loglik;
  summary["stability_violations"] = count_flags(fo, fs.spec);
  summary["theta0"] = vector_to_json(fs.theta0);
  summary["column_means"] = vector_to_json(fs.data.column_means);

  if (cfg.contains("smooth") && as_bool(cfg.at("smooth"), "/smooth")) {
    const FilterOutput sm =
        run_smoother(fs.data.values, fs.spec, fs.statics, fo);
    const std::string smoothed_path = joined(rc.out_dir, "smoothed.csv");
    write_text(smoothed_path, filtered_csv_body(sm, fs.spec));
    files.outputs.push_back("smoothed.csv");
  }

  if (cfg.contains("bands")) {
    const json& b = cfg.at("bands");
    const int draws = as_int(require_key(b, "/bands", "draws"),
                             "/bands/draws");
    const Matrix cov =
        load_cov(b, "/bands", fs.map, nullptr, &files.inputs);
    const BandOutput bo = bands(fs.data.values, fs.spec, fs.statics, fs.map,
                                cov, fs.theta0, draws, rc.seed, rc.workers);
    const auto names = theta_component_names(fs.spec);
    std::string body = "t,component,half_width\n";
    for (int t = 0; t < bo.half_width.rows(); ++t)
      for (int k = 0; k < bo.half_width.cols(); ++k)
        body += std::to_string(t) + "," + names[static_cast<std::size_t>(k)] +
                "," + format_double(bo.half_width(t, k)) + "\n";
    const std::string bands_path = joined(rc.out_dir, "bands.csv");
    write_text(bands_path, body);
    files.outputs.push_back("bands.csv");
    summary["band_floor"] = vector_to_json(bo.floor_per_component);
  }

  const std::string summary_path = joined(rc.out_dir, "filter.json");
  write_json_file(summary_path, summary);
  files.outputs.push_back("filter.json");
  return files;
}

std::string report_table(const EstimateResult& res,
                         const RestrictionMap& map) {
  std::string body = "Parameter            Estimate   Robust s.e.      t-stat\n";
  for (int i = 0; i < map.free_count(); ++i) {
    char line[128];
    std::snprintf(line, sizeof line, "%-16s %12.6g  %12.6g  %10.3f\n",
                  map.names[static_cast<std::size_t>(i)].c_str(),
                  res.free_values(i), res.robust_se(i), res.t_stats(i));
    body += line;
  }
  return body;
}

CommandFiles cmd_estimate(const json& cfg, const RunContext& rc) {
  ModelSpec spec = parse_model(cfg);
  std::string data_path;
  const Dataset data = load_data(cfg, &data_path);
  if (data.values.cols() != spec.n)
    fail("/model/n",
         "data has " + std::to_string(data.values.cols()) + " columns");
  const RestrictionMap map = parse_restrictions(
      as_string(require_key(cfg, "", "restrictions"), "/restrictions"),
      "/restrictions", spec);
  const Vector init = parse_free_alpha(require_key(cfg, "", "init_alpha"),
                                       "/init_alpha", map);

  FitOptions opts;
  opts.workers = rc.workers;
  if (cfg.contains("options")) {
    const json& o = cfg.at("options");
    if (o.contains("multistarts"))
      opts.multistarts = as_int(o.at("multistarts"), "/options/multistarts");
    if (o.contains("simplex_max_iter"))
      opts.simplex_max_iter =
          as_int(o.at("simplex_max_iter"), "/options/simplex_max_iter");
    if (o.contains("polish_max_iter"))
      opts.polish_max_iter =
          as_int(o.at("polish_max_iter"), "/options/polish_max_iter");
    if (o.contains("simplex_tol"))
      opts.simplex_tol = as_number(o.at("simplex_tol"), "/options/simplex_tol");
    if (o.contains("init_window"))
      opts.init_window = as_int(o.at("init_window"), "/options/init_window");
  }
  if (cfg.contains("theta0"))
    opts.theta0 =
        as_vector(cfg.at("theta0"), "/theta0", spec.theta_dim());

  EstimateResult res = fit(data.values, spec, map, init, opts);
  json step1;
  const bool two_step =
      cfg.contains("two_step") && as_bool(cfg.at("two_step"), "/two_step");
  if (two_step) {
    const FilterOutput fo =
        run_filter(data.values, spec, res.statics, res.theta0);
    const TwoStepResult ts =
        two_step_densities(spec, fo.shocks, spec.max_lag());
    step1["free_values"] = vector_to_json(res.free_values);
    step1["densities"] = json::array();
    for (const SkewTParams& p : spec.skewt)
      step1["densities"].push_back({{"delta", p.delta}, {"nu", p.nu}});
    spec = ts.spec;
    EstimateResult second = fit(data.values, spec, map, res.free_values, opts);
    for (const std::string& w : ts.warnings)
      second.warnings.push_back(w);
    res = std::move(second);
  }

  const FilterOutput fitted =
      run_filter(data.values, spec, res.statics, res.theta0);

  json out;
  out["schema_version"] = 1;
  out["free_names"] = map.names;
  out["free_values"] = vector_to_json(res.free_values);
  out["robust_se"] = vector_to_json(res.robust_se);
  out["t_stats"] = vector_to_json(res.t_stats);
  out["cov_free"] = matrix_to_json(res.cov_free);
  out["loglik"] = res.loglik;
  out["penalized_loglik"] = res.penalized_loglik;
  out["convergence"] = res.convergence;
  out["hessian_pseudo_inverse"] = res.hessian_pseudo_inverse;
  out["stability_violations"] = count_flags(fitted, spec);
  out["theta0"] = vector_to_json(res.theta0);
  out["densities"] = json::array();
  for (const SkewTParams& p : spec.skewt)
    out["densities"].push_back({{"delta", p.delta}, {"nu", p.nu}});
  if (two_step) out["step1"] = step1;
  out["warnings"] = res.warnings;

  CommandFiles files;
  files.inputs = {data_path};
  const std::string est_path = joined(rc.out_dir, "estimate.json");
  write_json_file(est_path, out);
  files.outputs.push_back("estimate.json");
  const std::string report_path = joined(rc.out_dir, "report.txt");
  write_text(report_path, report_table(res, map));
  files.outputs.push_back("report.txt");
  const std::string filtered_path = joined(rc.out_dir, "filtered.csv");
  write_text(filtered_path, filtered_csv_body(fitted, spec));
  files.outputs.push_back("filtered.csv");
  return files;
}

CommandFiles cmd_irf(const json& cfg, const RunContext& rc) {
  FilterSetup fs = filter_setup(cfg);
  int horizon = 60;
  if (cfg.contains("horizon")) horizon = as_int(cfg.at("horizon"), "/horizon");
  if (horizon < 1) fail("/horizon", "must be >= 1");
  int draws = 20000;
  if (cfg.contains("draws")) draws = as_int(cfg.at("draws"), "/draws");
  if (draws < 2) fail("/draws", "must be >= 2");

  CommandFiles files;
  files.inputs = {fs.data_path};
  for (const std::string& p : fs.extra_inputs) files.inputs.push_back(p);

  json summary;
  summary["horizon"] = horizon;
  std::string csv;
  if (cfg.contains("bands")) {
    const json& b = cfg.at("bands");
    const int reps = as_int(require_key(b, "/bands", "repetitions"),
                            "/bands/repetitions");
    const int inner = as_int(require_key(b, "/bands", "inner_draws"),
                             "/bands/inner_draws");
    Vector center = fs.free_alpha;
    const Matrix cov = load_cov(b, "/bands", fs.map,
                                b.contains("estimate_path") ? &center : nullptr,
                                &files.inputs);
    const IrfBands bands = irf_bands(fs.data.values, fs.spec, fs.map, center,
                                     cov, horizon, reps, inner, rc.seed,
                                     rc.workers);
    csv = irf_csv_body(bands.mean, bands.half_width);
    summary["repetitions"] = bands.repetitions;
    summary["kept"] = bands.kept;
    summary["inner_draws"] = inner;
    summary["half_width_meaning"] =
        "standard deviation across repetition-level means";
  } else {
    const Vector origin =
        forecast_state(fs.data.values, fs.spec, fs.statics, fs.theta0);
    const IrfResult r = irf(fs.data.values, fs.spec, fs.statics, origin,
                            horizon, draws, rc.seed, rc.workers);
    csv = irf_csv_body(r.mean, r.half_width);
    summary["draws"] = r.draws;
    summary["clipped_pairs"] = r.clipped_pairs;
    summary["half_width_meaning"] = "one Monte Carlo standard error";
  }

  const std::string irf_path = joined(rc.out_dir, "irf.csv");
  write_text(irf_path, csv);
  files.outputs.push_back("irf.csv");
  const std::string summary_path = joined(rc.out_dir, "irf.json");
  write_json_file(summary_path, summary);
  files.outputs.push_back("irf.json");
  return files;
}

CommandFiles cmd_mc_study(const json& cfg, const RunContext& rc) {
  const DgpConfig dc = parse_dgp(cfg, rc.seed);
  const int reps = as_int(require_key(cfg, "", "replications"),
                          "/replications");
  if (reps < 2) fail("/replications", "must be >= 2");
  const bool smooth =
      !cfg.contains("smooth") || as_bool(cfg.at("smooth"), "/smooth");

  const McStudyResult mc = mc_study(dc, reps, smooth, rc.workers);
  const auto names = theta_component_names(dc.spec);

  auto quantile_rows = [&](const std::string& pass, const McQuantiles& q,
                           const Matrix& abs_median) {
    std::string rows;
    for (int t = 0; t < q.median.rows(); ++t)
      for (int k = 0; k < q.median.cols(); ++k)
        rows += pass + "," + std::to_string(t) + "," +
                names[static_cast<std::size_t>(k)] + "," +
                format_double(q.median(t, k)) + "," +
                format_double(q.p16(t, k)) + "," +
                format_double(q.p84(t, k)) + "," +
                format_double(abs_median(t, k)) + "\n";
    return rows;
  };

  std::string err_csv = "pass,t,component,median,p16,p84,abs_median\n";
  err_csv += quantile_rows("filtered", mc.filtered_abs_error,
                           mc.filtered_abs_median);
  if (smooth)
    err_csv += quantile_rows("smoothed", mc.smoothed_abs_error,
                             mc.smoothed_abs_median);

  std::string path_csv = "t,component,true_value,median,p16,p84\n";
  for (int t = 0; t < mc.filtered_path.median.rows(); ++t)
    for (int k = 0; k < mc.filtered_path.median.cols(); ++k)
      path_csv += std::to_string(t) + "," +
                  names[static_cast<std::size_t>(k)] + "," +
                  format_double(mc.theta_true(t, k)) + "," +
                  format_double(mc.filtered_path.median(t, k)) + "," +
                  format_double(mc.filtered_path.p16(t, k)) + "," +
                  format_double(mc.filtered_path.p84(t, k)) + "\n";

  CommandFiles files;
  const std::string err_path = joined(rc.out_dir, "mc_error.csv");
  write_text(err_path, err_csv);
  files.outputs.push_back("mc_error.csv");
  const std::string path_path = joined(rc.out_dir, "mc_path.csv");
  write_text(path_path, path_csv);
  files.outputs.push_back("mc_path.csv");
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"score-driven structural VAR toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int workers = default_workers();

  const char* names[] = {"simulate", "estimate", "filter", "irf", "mc-study"};
  const char* blurbs[] = {
      "draw a synthetic sample from a configured generator",
      "fit the adjustment speeds by penalized pseudo-likelihood",
      "run the observation-driven filter (and optional smoother, bands)",
      "Monte Carlo conditional impulse responses from the forecast origin",
      "replicated simulate-filter studies with error quantiles"};
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
    sub->add_option("--config", config_path, "JSON configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "random seed")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--workers", workers, "worker thread cap");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    if (workers < 1) throw std::runtime_error("--workers must be >= 1");
    std::ifstream in(config_path);
    json cfg;
    try {
      cfg = json::parse(in);
    } catch (const json::parse_error& e) {
      throw std::runtime_error("config parse error: " + std::string(e.what()));
    }
    const int version = as_int(require_key(cfg, "", "schema_version"),
                               "/schema_version");
    if (version != 1) fail("/schema_version", "unsupported version");

    std::filesystem::create_directories(out_dir);
    RunContext rc{config_path, out_dir, seed, workers};

    CommandFiles files;
    if (command == "simulate")
      files = cmd_simulate(cfg, rc);
    else if (command == "estimate")
      files = cmd_estimate(cfg, rc);
    else if (command == "filter")
      files = cmd_filter(cfg, rc);
    else if (command == "irf")
      files = cmd_irf(cfg, rc);
    else
      files = cmd_mc_study(cfg, rc);

    write_manifest(out_dir, command, config_path, seed, workers, files.inputs,
                   files.outputs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
