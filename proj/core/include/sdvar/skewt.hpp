#pragma once

#include <stdexcept>
#include <string>

#include "sdvar/rng.hpp"

namespace sdvar {

struct SkewTParams {
  double delta = 0.0;  // asymmetry, |delta| < 1
  double nu = 5.0;     // tail exponent, > 2
};

// Derived constants of the standardized family. m is the mean of the raw
// skew-t variate, v rescales it to unit variance.
struct SkewTConstants {
  double c, v, m;
  static SkewTConstants from(const SkewTParams& p);
};

void validate(const SkewTParams& p);

double log_pdf(double eps, const SkewTParams& p);

// d log_pdf / d eps; bounded in the tails.
double score_factor_g(double eps, const SkewTParams& p);

// One standardized draw; consumes exactly three uniforms.
double sample(const SkewTParams& p, UniformSource& u);

struct MomentPair {
  double skewness, kurtosis;
};

// Closed-form skewness and excess-free kurtosis of the standardized family.
// Skewness needs nu > 3, kurtosis nu > 4.
MomentPair family_moments(const SkewTParams& p);

struct InfeasibleMoments : std::runtime_error {
  double nearest_skewness, nearest_kurtosis;
  InfeasibleMoments(const std::string& what, double s, double k)
      : std::runtime_error(what), nearest_skewness(s), nearest_kurtosis(k) {}
};

// Inverts family_moments by damped Newton with a grid fallback; throws
// InfeasibleMoments (carrying the nearest attainable pair) outside the
// family's reachable region.
SkewTParams target_moments(double skewness, double kurtosis);

}  // namespace sdvar
