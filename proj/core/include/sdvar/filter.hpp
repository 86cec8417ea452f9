#pragma once

#include <cstdint>
#include <vector>

#include "sdvar/model.hpp"

namespace sdvar {

struct FilterOutput {
  Matrix theta_path;  // T x d; rows before the first scored index repeat theta0
  Matrix shocks;      // T x n; zero rows before the first scored index
  Vector loglik_t;    // raw per-observation contributions
  Vector penalty_ts;  // spectral penalty values per observation
  double loglik = 0.0;            // sum of loglik_t
  double penalized_loglik = 0.0;  // loglik minus penalties
  std::vector<std::uint8_t> stability_flag;  // rho >= 1 before penalization
  Matrix var_diag;    // T x n, diagonal of C C^T
  bool diverged = false;
  int diverged_t = -1;
};

FilterOutput run_filter(const Matrix& y, const ModelSpec& spec,
                        const StaticParams& statics, const Vector& theta0);

// Backward pass: the same recursion on time-reversed data, started from the
// end of the forward filtered path; the last max_lag observations keep the
// forward values.
FilterOutput run_smoother(const Matrix& y, const ModelSpec& spec,
                          const StaticParams& statics,
                          const FilterOutput& forward);

// OLS over the initial window: lag blocks from least squares, S from the
// principal log of the lower Cholesky factor of the residual covariance,
// rotation started at zero.
Vector init_theta(const Matrix& y, const ModelSpec& spec, int init_window);

struct BandOutput {
  Matrix half_width;          // T x d, one standard deviation
  Vector floor_per_component; // constant filtering variance floor
};

// Total variance = constant filtering floor (alpha^2 times the mean squared
// score step) + across-draw variance of paths re-filtered under parameter
// draws from N(free_values, cov_free).
BandOutput bands(const Matrix& y, const ModelSpec& spec,
                 const StaticParams& statics, const RestrictionMap& map,
                 const Matrix& cov_free, const Vector& theta0, int draws,
                 std::uint64_t seed, int workers);

}  // namespace sdvar
