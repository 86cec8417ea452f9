#pragma once

#include <cstdint>
#include <vector>

#include "sdvar/filter.hpp"
#include "sdvar/model.hpp"

namespace sdvar {

enum class DgpKind { score_driven, deterministic_sine, shock_driven_rw, constant };

struct DgpConfig {
  DgpKind kind = DgpKind::score_driven;
  int t_len = 750;
  ModelSpec spec;
  StaticParams statics;  // used by score_driven
  Vector theta0;
  // shock_driven_rw: per-block loading matrices mapping the shock vector into
  // vec updates (column-major), one for S, one for A, one per lag block
  std::vector<Matrix> loadings;
  double shock_alpha = 0.01;
  std::uint64_t seed = 1;
};

struct SimOutput {
  Matrix y;           // t_len x n
  Matrix theta_true;  // t_len x d
  Matrix eps_true;    // t_len x n
};

SimOutput simulate(const DgpConfig& cfg);

// The three-variable lag-2 setting shared by the simulation studies: shock
// asymmetries (-0.7, -0.6, 0.7), tails (5, 6, 5.5), S0 = log(0.1) I,
// A0 upper triangle (-0.11, 0.23, -0.03), Phi1 = 0.3 I, Phi2 = 0.2 I.
ModelSpec study_spec();
Vector study_theta0(const ModelSpec& spec);
DgpConfig dgp_score_driven(std::uint64_t seed);      // alphas 0.01/0.01/0.001/0.001
DgpConfig dgp_deterministic_sine(std::uint64_t seed);
DgpConfig dgp_shock_driven(std::uint64_t seed);      // printed loadings, alpha 0.01
DgpConfig dgp_constant(std::uint64_t seed);

struct McQuantiles {
  Matrix median, p16, p84;  // t_len x d
};

// Errors are signed (filtered minus true); "abs" refers to absolute units,
// "rel" divides by the true value.
struct McStudyResult {
  McQuantiles filtered_abs_error, filtered_rel_error;
  McQuantiles smoothed_abs_error, smoothed_rel_error;
  McQuantiles filtered_path;    // raw filtered values across replications
  Matrix filtered_abs_median;   // per-t median of |error|
  Matrix smoothed_abs_median;
  Matrix theta_true;            // from the first replication (sine: common truth)
};

// Replicated simulate + filter (+ backward smoothing pass) with per-t
// type-7 quantiles across replications.
McStudyResult mc_study(const DgpConfig& cfg, int replications, bool smooth,
                       int workers);

double quantile_type7(std::vector<double> values, double prob);

}  // namespace sdvar
