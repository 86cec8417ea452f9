#pragma once

#include <cstdint>
#include <vector>

#include "sdvar/filter.hpp"

namespace sdvar {

// Conditional impulse responses by paired antithetic simulation. Entry (i, j)
// of mean[k] is the response of variable i at horizon k to a unit structural
// shock in component j at horizon 0. Shocked and baseline branches share the
// uniforms of every post-impact draw. The impact row is the instantaneous
// loading matrix itself with zero half-width.
struct IrfResult {
  std::vector<Matrix> mean;        // horizon + 1 entries, each n x n
  std::vector<Matrix> half_width;  // one Monte Carlo standard error
  int horizon = 0;
  int draws = 0;
  long clipped_pairs = 0;
  std::uint64_t seed = 0;
};

IrfResult irf(const Matrix& y_hist, const ModelSpec& spec,
              const StaticParams& statics, const Vector& theta_t, int horizon,
              int draws, std::uint64_t seed, int workers = 1);

// State one step past the final observation, the natural forecast origin.
Vector forecast_state(const Matrix& y, const ModelSpec& spec,
                      const StaticParams& statics, const Vector& theta0);

// Responses under static-parameter uncertainty: each repetition draws the
// tied coefficients from N(alpha_center, cov_free), re-filters the sample to
// its own forecast origin, and averages an inner simulation. half_width is
// the across-repetition standard deviation.
struct IrfBands {
  std::vector<Matrix> mean;
  std::vector<Matrix> half_width;
  int horizon = 0;
  int repetitions = 0;
  int kept = 0;
};

IrfBands irf_bands(const Matrix& y, const ModelSpec& spec,
                   const RestrictionMap& map, const Vector& alpha_center,
                   const Matrix& cov_free, int horizon, int repetitions,
                   int inner_draws, std::uint64_t seed, int workers = 1);

}  // namespace sdvar
