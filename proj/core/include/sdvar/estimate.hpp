#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdvar/filter.hpp"
#include "sdvar/model.hpp"

namespace sdvar {

struct FitOptions {
  int multistarts = 3;
  int simplex_max_iter = 400;
  int polish_max_iter = 60;
  double simplex_tol = 1e-7;
  int init_window = 0;  // 0: full sample for the OLS start
  Vector theta0;        // nonempty: overrides the OLS start
  bool compute_se = true;
  int workers = 1;
};

struct EstimateResult {
  StaticParams statics;
  Vector free_values;   // alpha per tied group, natural scale
  Vector robust_se;
  Vector t_stats;
  Matrix cov_free;      // sandwich covariance of the free alphas
  double loglik = 0.0;            // raw at the optimum
  double penalized_loglik = 0.0;  // optimized objective
  Vector theta0;
  std::string convergence;  // converged | max-iter | line-search-failure
  bool hessian_pseudo_inverse = false;
  std::vector<std::string> warnings;
};

// Penalized pseudo-likelihood over the tied alpha groups (integrated
// recursions: omega 0, beta 1), free values optimized in log space.
EstimateResult fit(const Matrix& y, const ModelSpec& spec,
                   const RestrictionMap& map, const Vector& alpha_init,
                   const FitOptions& opts = {});

// Sandwich H^; J H^ over free alphas in natural scale at the optimum;
// H from central second differences, J from per-observation score
// contributions.
struct RobustSe {
  Vector se;
  Matrix cov;
  Matrix cov_hessian;  // (-H)^; the classical variance, for diagnostics
  bool pseudo_inverse = false;
};
RobustSe robust_se(const Matrix& y, const ModelSpec& spec,
                   const RestrictionMap& map, const Vector& free_alpha,
                   const Vector& theta0);

// Refits the per-component shock densities to the skewness and kurtosis of
// the filtered residuals; keeps the old density (with a warning) when the
// moments fall outside the family.
struct TwoStepResult {
  ModelSpec spec;
  std::vector<std::string> warnings;
};
TwoStepResult two_step_densities(const ModelSpec& spec, const Matrix& shocks,
                                 int first_scored_row);

}  // namespace sdvar
