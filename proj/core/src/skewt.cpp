#include "sdvar/skewt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/log1p.hpp>

namespace sdvar {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

double lgamma_half_ratio(double a, double b) {
  // log Gamma(a) - log Gamma(b)
  return std::lgamma(a) - std::lgamma(b);
}
}  // namespace

void validate(const SkewTParams& p) {
  if (!(p.nu > 2.0)) throw std::invalid_argument("tail exponent must exceed 2");
  if (!(std::abs(p.delta) < 1.0))
    throw std::invalid_argument("asymmetry must lie in (-1, 1)");
}

SkewTConstants SkewTConstants::from(const SkewTParams& p) {
  validate(p);
  const double nu = p.nu;
  const double c =
      std::exp(lgamma_half_ratio(0.5 * (nu + 1.0), 0.5 * nu)) / std::sqrt(nu * kPi);
  const double m = p.delta * std::sqrt(nu / kPi) *
                   std::exp(lgamma_half_ratio(0.5 * (nu - 1.0), 0.5 * nu));
  const double var_raw = nu / (nu - 2.0) - m * m;
  return {c, 1.0 / std::sqrt(var_raw), m};
}

double log_pdf(double eps, const SkewTParams& p) {
  const SkewTConstants k = SkewTConstants::from(p);
  const double nu = p.nu;
  const double u = eps + k.m * k.v;
  boost::math::students_t t1(nu + 1.0);
  const double slope =
      p.delta / std::sqrt(1.0 - p.delta * p.delta) * std::sqrt(nu + 1.0);
  if (std::abs(u) > 1e100) {
    // u^2 would overflow; drop the 1 in 1 + u^2/(v^2 nu) and take the
    // limiting argument of the tilt cdf
    const double x = u > 0.0 ? slope : -slope;
    return std::log(2.0 * k.c / k.v) -
           (nu + 1.0) * (std::log(std::abs(u)) -
                         std::log(k.v * std::sqrt(nu))) +
           std::log(boost::math::cdf(t1, x));
  }
  const double r2 = u * u + nu * k.v * k.v;
  const double x = slope * u / std::sqrt(r2);
  const double log_t1_cdf = std::log(boost::math::cdf(t1, x));
  return std::log(2.0 * k.c / k.v) -
         0.5 * (nu + 1.0) * boost::math::log1p(u * u / (k.v * k.v * nu)) +
         log_t1_cdf;
}

double score_factor_g(double eps, const SkewTParams& p) {
  const SkewTConstants k = SkewTConstants::from(p);
  const double nu = p.nu;
  const double u = eps + k.m * k.v;
  // far tail: the tilt term decays one order faster than the power term
  if (std::abs(u) > 1e100) return -(1.0 + nu) / u;
  const double r2 = u * u + nu * k.v * k.v;
  const double r = std::sqrt(r2);
  const double slope = p.delta / std::sqrt(1.0 - p.delta * p.delta) *
                       std::sqrt(nu + 1.0);
  const double x = slope * u / r;
  const double dx = slope * nu * k.v * k.v / (r2 * r);
  boost::math::students_t t1(nu + 1.0);
  const double cdf = boost::math::cdf(t1, x);
  const double hazard = boost::math::pdf(t1, x) / cdf;
  return dx * hazard - (1.0 + nu) * u / r2;
}

double sample(const SkewTParams& p, UniformSource& u) {
  const SkewTConstants k = SkewTConstants::from(p);
  const double z0 = standard_normal(u);
  const double z1 = standard_normal(u);
  const double w = chi_squared(p.nu, u);
  const double z =
      p.delta * std::abs(z0) + std::sqrt(1.0 - p.delta * p.delta) * z1;
  const double raw = z / std::sqrt(w / p.nu);
  return k.v * (raw - k.m);
}

MomentPair family_moments(const SkewTParams& p) {
  validate(p);
  if (!(p.nu > 4.0))
    throw std::invalid_argument("moment targeting needs tail exponent > 4");
  const SkewTConstants k = SkewTConstants::from(p);
  const double nu = p.nu, d2 = p.delta * p.delta, m = k.m, v = k.v;
  const double zeta =
      m * (nu * (3.0 - d2) / (nu - 3.0) - 3.0 * nu / (nu - 2.0) + 2.0 * m * m) *
      v * v * v;
  const double kappa = (3.0 * nu * nu / ((nu - 2.0) * (nu - 4.0)) -
                        4.0 * m * m * nu * (3.0 - d2) / (nu - 3.0) +
                        6.0 * m * m * nu / (nu - 2.0) - 3.0 * m * m * m * m) *
                       v * v * v * v;
  return {zeta, kappa};
}

namespace {

struct GridPoint {
  double delta, nu, zeta, kappa;
};

const std::vector<GridPoint>& moment_grid() {
  static const std::vector<GridPoint> grid = [] {
    std::vector<GridPoint> g;
    for (double delta = -0.98; delta < 0.985; delta += 0.02) {
      for (double step = 0.0; step < 60.0; step += 1.0) {
        const double nu = 4.05 * std::pow(1.12, step);
        if (nu > 400.0) break;
        MomentPair mp = family_moments({delta, nu});
        g.push_back({delta, nu, mp.skewness, mp.kurtosis});
      }
    }
    return g;
  }();
  return grid;
}

}  // namespace

SkewTParams target_moments(double skewness, double kurtosis) {
  auto residual = [&](double delta, double nu, double* f0, double* f1) {
    MomentPair mp = family_moments({delta, nu});
    *f0 = mp.skewness - skewness;
    *f1 = mp.kurtosis - kurtosis;
  };

  auto near_boundary = [&]() -> InfeasibleMoments {
    double best = std::numeric_limits<double>::infinity();
    double bs = 0.0, bk = 3.0;
    for (const GridPoint& gp : moment_grid()) {
      const double d0 = gp.zeta - skewness, d1 = gp.kappa - kurtosis;
      const double dist = d0 * d0 + d1 * d1;
      if (dist < best) {
        best = dist;
        bs = gp.zeta;
        bk = gp.kappa;
      }
    }
    return InfeasibleMoments("moment pair outside the attainable region", bs, bk);
  };

  // start from the stated guess, fall back to the best grid point
  double delta = skewness == 0.0 ? 0.0 : (skewness > 0.0 ? 0.5 : -0.5);
  double nu = 8.0;
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (attempt == 1) {
      double best = std::numeric_limits<double>::infinity();
      for (const GridPoint& gp : moment_grid()) {
        const double d0 = gp.zeta - skewness, d1 = gp.kappa - kurtosis;
        const double dist = d0 * d0 + d1 * d1;
        if (dist < best) {
          best = dist;
          delta = gp.delta;
          nu = gp.nu;
        }
      }
    }
    for (int iter = 0; iter < 200; ++iter) {
      double f0, f1;
      residual(delta, nu, &f0, &f1);
      if (f0 * f0 + f1 * f1 < 1e-16) return {delta, nu};
      const double hd = 1e-6 * std::max(1.0, std::abs(delta));
      const double hn = 1e-6 * std::max(1.0, std::abs(nu));
      double a0, a1, b0, b1;
      const double dp = std::min(delta + hd, 0.995);
      const double dm = std::max(delta - hd, -0.995);
      residual(dp, nu, &a0, &a1);
      residual(dm, nu, &b0, &b1);
      const double j00 = (a0 - b0) / (dp - dm), j10 = (a1 - b1) / (dp - dm);
      residual(delta, std::max(nu + hn, 4.05), &a0, &a1);
      residual(delta, std::max(nu - hn, 4.05), &b0, &b1);
      const double denom = std::max(nu + hn, 4.05) - std::max(nu - hn, 4.05);
      const double j01 = (a0 - b0) / denom, j11 = (a1 - b1) / denom;
      const double det = j00 * j11 - j01 * j10;
      if (std::abs(det) < 1e-14) break;
      double sd = -(j11 * f0 - j01 * f1) / det;
      double sn = -(-j10 * f0 + j00 * f1) / det;
      double lambda = 1.0;
      const double base = f0 * f0 + f1 * f1;
      bool moved = false;
      for (int half = 0; half < 30; ++half) {
        double nd = std::clamp(delta + lambda * sd, -0.995, 0.995);
        double nn = std::clamp(nu + lambda * sn, 4.05, 1e4);
        double g0, g1;
        residual(nd, nn, &g0, &g1);
        if (g0 * g0 + g1 * g1 < base) {
          delta = nd;
          nu = nn;
          moved = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!moved) break;
    }
    double f0, f1;
    residual(delta, nu, &f0, &f1);
    if (f0 * f0 + f1 * f1 < 1e-16) return {delta, nu};
  }
  throw near_boundary();
}

}  // namespace sdvar
