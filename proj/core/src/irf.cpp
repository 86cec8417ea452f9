#include "sdvar/irf.hpp"

#include <cmath>
#include <stdexcept>

#include "sdvar/parallel.hpp"

namespace sdvar {

namespace {

constexpr double kPathClip = 1e8;

Vector lag_mean(const Matrix& buf, Eigen::Index t, const ThetaView& view,
                const ModelSpec& spec) {
  Vector mu = Vector::Zero(spec.n);
  for (int b = 0; b < spec.lag_blocks(); ++b) {
    Vector reg;
    if (spec.lag_mode == LagMode::heterogeneous && b == 1) {
      reg = Vector::Zero(spec.n);
      for (int l = 2; l <= kSemesterMaxLag; ++l)
        reg += buf.row(t - l).transpose();
      reg /= 5.0;
    } else {
      reg = buf.row(t - (b + 1)).transpose();
    }
    mu += view.phi[static_cast<std::size_t>(b)] * reg;
  }
  return mu;
}

struct Branch {
  Vector theta;
  Matrix buf;  // max_lag history rows followed by simulated rows
};

// Simulates baseline plus n shocked branches over the horizon, writing
// shocked-minus-baseline differences into diff. Returns false when any path
// leaves the clip region.
bool pair_member(UniformSource& u, const Matrix& hist, const ModelSpec& spec,
                 const StaticParams& statics, const Vector& theta_t,
                 int horizon, std::vector<Matrix>& diff) {
  const int n = spec.n;
  const int maxlag = spec.max_lag();
  std::vector<Branch> br(static_cast<std::size_t>(n) + 1);
  for (auto& b : br) {
    b.theta = theta_t;
    b.buf = Matrix::Zero(maxlag + horizon + 1, n);
    b.buf.topRows(maxlag) = hist.bottomRows(maxlag);
  }

  Vector eps(n);
  for (int k = 0; k <= horizon; ++k) {
    const Eigen::Index t = maxlag + k;
    for (int i = 0; i < n; ++i)
      eps(i) = sample(spec.skewt[static_cast<std::size_t>(i)], u);
    for (int j = 0; j <= n; ++j) {
      Branch& b = br[static_cast<std::size_t>(j)];
      const ThetaView view = unpack(b.theta, spec);
      const Matrix c = mat_exp(view.s) * cayley(view.a);
      Vector e = eps;
      if (k == 0 && j > 0) e = Vector::Unit(n, j - 1);
      const Vector yt = lag_mean(b.buf, t, view, spec) + c * e;
      if (!yt.allFinite() || yt.cwiseAbs().maxCoeff() > kPathClip)
        return false;
      b.buf.row(t) = yt.transpose();
      const Vector sc = penalized_scores_t(b.buf, static_cast<int>(t),
                                           b.theta, spec);
      b.theta = step(b.theta, sc, statics);
    }
    for (int j = 0; j < n; ++j)
      diff[static_cast<std::size_t>(k)].col(j) =
          br[static_cast<std::size_t>(j) + 1].buf.row(t) - br[0].buf.row(t);
  }
  return true;
}

// Running per-cell mean and squared-deviation sum. The centered update keeps
// the spread at exactly zero when every sample is identical, which the naive
// sum-of-squares formula cannot do.
struct Moments {
  std::vector<Matrix> mean, m2;
  long count = 0;

  void init(int slots, int n) {
    mean.assign(static_cast<std::size_t>(slots), Matrix::Zero(n, n));
    m2 = mean;
    count = 0;
  }

  void add(const std::vector<Matrix>& x) {
    ++count;
    for (std::size_t k = 0; k < mean.size(); ++k) {
      const Matrix delta = x[k] - mean[k];
      mean[k] += delta / static_cast<double>(count);
      m2[k] += delta.cwiseProduct(x[k] - mean[k]);
    }
  }

  void merge(const Moments& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    for (std::size_t k = 0; k < mean.size(); ++k) {
      const Matrix delta = other.mean[k] - mean[k];
      mean[k] += delta * (nb / (na + nb));
      m2[k] += other.m2[k] + delta.cwiseProduct(delta) * (na * nb / (na + nb));
    }
    count += other.count;
  }

  Matrix variance(std::size_t k) const {
    return (m2[k] / (static_cast<double>(count) - 1.0)).cwiseMax(0.0);
  }
};

struct Partial {
  Moments mom;
  long clipped = 0;
};

}  // namespace

IrfResult irf(const Matrix& y_hist, const ModelSpec& spec,
              const StaticParams& statics, const Vector& theta_t, int horizon,
              int draws, std::uint64_t seed, int workers) {
  spec.validate();
  const int n = spec.n;
  const int maxlag = spec.max_lag();
  if (y_hist.rows() < maxlag)
    throw std::invalid_argument("impulse responses need max_lag history rows");
  if (horizon < 0) throw std::invalid_argument("negative horizon");
  if (draws < 2 || draws % 2 != 0)
    throw std::invalid_argument("draw count must be even and at least 2");
  const int pairs = draws / 2;

  const auto blocks = partition_blocks(pairs, 16);
  std::vector<Partial> partials(blocks.size());
  run_blocks(blocks, workers, [&](const BlockRange& blk) {
    Partial& acc = partials[blk.index];
    acc.mom.init(horizon + 1, n);
    std::vector<Matrix> d_a(static_cast<std::size_t>(horizon) + 1,
                            Matrix::Zero(n, n));
    std::vector<Matrix> d_b = d_a;
    std::vector<Matrix> pm = d_a;
    for (long p = blk.begin; p < blk.end; ++p) {
      const std::uint64_t ps =
          derive_seed(seed, static_cast<std::uint64_t>(p));
      RngStream primary(ps);
      const bool ok_a =
          pair_member(primary, y_hist, spec, statics, theta_t, horizon, d_a);
      RngStream mirror_base(ps);
      AntitheticSource mirror(mirror_base);
      const bool ok_b =
          ok_a &&
          pair_member(mirror, y_hist, spec, statics, theta_t, horizon, d_b);
      if (!ok_a || !ok_b) {
        ++acc.clipped;
        continue;
      }
      for (int k = 0; k <= horizon; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        pm[ks] = 0.5 * (d_a[ks] + d_b[ks]);
      }
      acc.mom.add(pm);
    }
  });

  Moments total;
  total.init(horizon + 1, n);
  long clipped = 0;
  for (const Partial& p : partials) {
    clipped += p.clipped;
    total.merge(p.mom);
  }
  if (total.count < 2)
    throw std::runtime_error("all impulse response pairs clipped");

  IrfResult res;
  res.horizon = horizon;
  res.draws = draws;
  res.clipped_pairs = clipped;
  res.seed = seed;
  res.mean.resize(static_cast<std::size_t>(horizon) + 1);
  res.half_width.resize(static_cast<std::size_t>(horizon) + 1);
  const double dn = static_cast<double>(total.count);
  for (int k = 0; k <= horizon; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    res.mean[ks] = total.mean[ks];
    res.half_width[ks] = (total.variance(ks) / dn).cwiseSqrt();
  }

  // the impact response is available in closed form
  const ThetaView view = unpack(theta_t, spec);
  res.mean[0] = mat_exp(view.s) * cayley(view.a);
  res.half_width[0].setZero();
  return res;
}

Vector forecast_state(const Matrix& y, const ModelSpec& spec,
                      const StaticParams& statics, const Vector& theta0) {
  const FilterOutput fo = run_filter(y, spec, statics, theta0);
  if (fo.diverged)
    throw std::runtime_error("filter diverged before the forecast origin");
  const int t_last = static_cast<int>(y.rows()) - 1;
  const Vector th = fo.theta_path.row(t_last).transpose();
  const Vector sc = penalized_scores_t(y, t_last, th, spec);
  return step(th, sc, statics);
}

IrfBands irf_bands(const Matrix& y, const ModelSpec& spec,
                   const RestrictionMap& map, const Vector& alpha_center,
                   const Matrix& cov_free, int horizon, int repetitions,
                   int inner_draws, std::uint64_t seed, int workers) {
  const int n = spec.n;
  const int m = map.free_count();
  if (alpha_center.size() != m || cov_free.rows() != m || cov_free.cols() != m)
    throw std::invalid_argument("free coefficient shapes disagree");

  Eigen::SelfAdjointEigenSolver<Matrix> es(cov_free);
  if (es.eigenvalues().minCoeff() <
      -1e-10 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()))
    throw std::invalid_argument("coefficient covariance is not positive "
                                "semidefinite");
  const Matrix cov_root =
      es.eigenvectors() *
      es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  const Vector theta0 = init_theta(y, spec, static_cast<int>(y.rows()));
  const auto blocks = partition_blocks(repetitions, 4);

  std::vector<Moments> partials(blocks.size());
  run_blocks(blocks, workers, [&](const BlockRange& blk) {
    Moments& acc = partials[blk.index];
    acc.init(horizon + 1, n);
    for (long r = blk.begin; r < blk.end; ++r) {
      const std::uint64_t rs =
          derive_seed(seed, static_cast<std::uint64_t>(r));
      RngStream stream(rs);
      Vector z(m);
      for (int i = 0; i < m; ++i) z(i) = standard_normal(stream);
      const Vector alpha_free =
          (alpha_center + cov_root * z).cwiseMax(0.0);
      const StaticParams statics =
          integrated_statics(spec, map.unfold(alpha_free, spec.theta_dim()));
      Vector origin;
      try {
        origin = forecast_state(y, spec, statics, theta0);
      } catch (const std::runtime_error&) {
        continue;  // diverged repetition
      }
      const IrfResult inner = irf(y, spec, statics, origin, horizon,
                                  inner_draws, derive_seed(rs, 1), 1);
      acc.add(inner.mean);
    }
  });

  Moments total;
  total.init(horizon + 1, n);
  for (const Moments& p : partials) total.merge(p);
  if (total.count < 2)
    throw std::runtime_error("too few repetitions survived filtering");

  IrfBands out;
  out.horizon = horizon;
  out.repetitions = repetitions;
  out.kept = static_cast<int>(total.count);
  out.mean.resize(static_cast<std::size_t>(horizon) + 1);
  out.half_width.resize(static_cast<std::size_t>(horizon) + 1);
  for (int k = 0; k <= horizon; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    out.mean[ks] = total.mean[ks];
    out.half_width[ks] = total.variance(ks).cwiseSqrt();
  }
  return out;
}

}  // namespace sdvar
