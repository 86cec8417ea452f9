#include "sdvar/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdvar/parallel.hpp"
#include "sdvar/rng.hpp"

namespace sdvar {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

Vector draw_shocks(const ModelSpec& spec, UniformSource& u) {
  Vector eps(spec.n);
  for (int i = 0; i < spec.n; ++i)
    eps(i) = sample(spec.skewt[static_cast<std::size_t>(i)], u);
  return eps;
}

Vector emit(const Matrix& y, int t, const Vector& theta, const Vector& eps,
            const ModelSpec& spec) {
  const ThetaView v = unpack(theta, spec);
  Vector mean = Vector::Zero(spec.n);
  if (spec.lag_mode == LagMode::plain) {
    for (int l = 1; l <= spec.p; ++l)
      mean += v.phi[static_cast<std::size_t>(l - 1)] * y.row(t - l).transpose();
  } else {
    mean += v.phi[0] * y.row(t - 1).transpose();
    Vector avg = Vector::Zero(spec.n);
    for (int l = 2; l <= kSemesterMaxLag; ++l) avg += y.row(t - l).transpose();
    mean += v.phi[1] * (avg / 5.0);
  }
  return mean + mat_exp(v.s) * (cayley(v.a) * eps);
}

Vector sine_theta(const Vector& theta0, int t, int t_len,
                  const ModelSpec& spec) {
  const ThetaView base = unpack(theta0, spec);
  const double tau = static_cast<double>(t);
  const double len = static_cast<double>(t_len);
  ThetaView v = base;
  v.s = base.s * (1.0 + 0.25 * std::sin(kTwoPi * tau / len));
  v.a = base.a * (1.0 + 5.0 * std::sin(kTwoPi * (tau + 4.0 * len) / (4.0 * len)));
  v.phi[0] = base.phi[0] * (1.0 + 0.95 * std::sin(kTwoPi * tau / len));
  v.phi[1] = base.phi[1] * (1.0 + 0.95 * std::sin(kTwoPi * tau / len));
  return pack(v, spec);
}

Vector shock_step(const Vector& theta, const Vector& eps,
                  const DgpConfig& cfg) {
  const ModelSpec& spec = cfg.spec;
  ThetaView v = unpack(theta, spec);
  const int n = spec.n;
  auto apply = [&](Matrix& m, const Matrix& loading) {
    Eigen::Map<Vector> flat(m.data(), n * n);  // column-major
    flat += cfg.shock_alpha * (loading * eps);
  };
  apply(v.s, cfg.loadings[0]);
  apply(v.a, cfg.loadings[1]);
  for (std::size_t b = 0; b < v.phi.size(); ++b)
    apply(v.phi[b], cfg.loadings[2 + b]);
  return pack(v, spec);
}
}  // namespace

SimOutput simulate(const DgpConfig& cfg) {
  const ModelSpec& spec = cfg.spec;
  spec.validate();
  const int maxlag = spec.max_lag();
  const int t_len = cfg.t_len;
  if (t_len <= maxlag) throw std::invalid_argument("sample too short");
  const int d = spec.theta_dim();
  const int n = spec.n;
  if (cfg.theta0.size() != d) throw std::invalid_argument("theta0 length mismatch");
  if (cfg.kind == DgpKind::shock_driven_rw) {
    if (cfg.loadings.size() != 2 + static_cast<std::size_t>(spec.lag_blocks()))
      throw std::invalid_argument("one loading matrix per block required");
    for (const auto& l : cfg.loadings)
      if (l.rows() != n * n || l.cols() != n)
        throw std::invalid_argument("loading matrix shape mismatch");
  }
  if (cfg.kind == DgpKind::constant &&
      penalty_t(cfg.theta0, spec).rho >= 1.0)
    throw std::invalid_argument("constant generator requires a stable state");

  SimOutput out;
  out.y = Matrix::Zero(t_len, n);
  out.theta_true = Matrix::Zero(t_len, d);
  out.eps_true = Matrix::Zero(t_len, n);

  RngStream stream(cfg.seed);
  Vector theta = cfg.theta0;
  for (int t = 0; t < maxlag; ++t) {
    const Vector pre = cfg.kind == DgpKind::deterministic_sine
                           ? sine_theta(cfg.theta0, t, t_len, spec)
                           : theta;
    out.theta_true.row(t) = pre.transpose();
  }

  for (int t = maxlag; t < t_len; ++t) {
    if (cfg.kind == DgpKind::deterministic_sine)
      theta = sine_theta(cfg.theta0, t, t_len, spec);
    out.theta_true.row(t) = theta.transpose();
    const Vector eps = draw_shocks(spec, stream);
    out.eps_true.row(t) = eps.transpose();
    out.y.row(t) = emit(out.y, t, theta, eps, spec).transpose();
    switch (cfg.kind) {
      case DgpKind::score_driven: {
        const Vector score = penalized_scores_t(out.y, t, theta, spec);
        theta = step(theta, score, cfg.statics);
        break;
      }
      case DgpKind::shock_driven_rw:
        theta = shock_step(theta, eps, cfg);
        break;
      case DgpKind::deterministic_sine:
      case DgpKind::constant:
        break;
    }
  }
  return out;
}

ModelSpec study_spec() {
  ModelSpec spec;
  spec.n = 3;
  spec.lag_mode = LagMode::plain;
  spec.p = 2;
  spec.skewt = {{-0.7, 5.0}, {-0.6, 6.0}, {0.7, 5.5}};
  spec.penalty_k = 200.0;
  spec.squaring_q = 10;
  return spec;
}

Vector study_theta0(const ModelSpec& spec) {
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
  return pack(v, spec);
}

namespace {
StaticParams study_statics(const ModelSpec& spec) {
  Vector alpha(spec.theta_dim());
  alpha.segment(0, 6).setConstant(0.01);    // S block
  alpha.segment(6, 3).setConstant(0.01);    // A block
  alpha.segment(9, 9).setConstant(0.001);   // Phi1
  alpha.segment(18, 9).setConstant(0.001);  // Phi2
  return integrated_statics(spec, alpha);
}
}  // namespace

DgpConfig dgp_score_driven(std::uint64_t seed) {
  DgpConfig cfg;
  cfg.kind = DgpKind::score_driven;
  cfg.t_len = 750;
  cfg.spec = study_spec();
  cfg.theta0 = study_theta0(cfg.spec);
  cfg.statics = study_statics(cfg.spec);
  cfg.seed = seed;
  return cfg;
}

DgpConfig dgp_deterministic_sine(std::uint64_t seed) {
  DgpConfig cfg = dgp_score_driven(seed);
  cfg.kind = DgpKind::deterministic_sine;
  return cfg;
}

DgpConfig dgp_shock_driven(std::uint64_t seed) {
  DgpConfig cfg = dgp_score_driven(seed);
  cfg.kind = DgpKind::shock_driven_rw;
  cfg.shock_alpha = 0.01;
  Matrix ls(9, 3), la(9, 3);
  ls << 0, 0, 1,
      -0.5, 0, 0,
      0, 0.5, 0,
      0, 0, 0,
      -1, 0, 0,
      0, 0, 0.5,
      0, 0, 0,
      0, 0, 0,
      0, 1, 0;
  la << 0, 0, 0,
      1, 0, 0,
      0, 1, 0,
      -1, 0, 0,
      0, 0, 0,
      0, 0, 1,
      0, -1, 0,
      0, 0, -1,
      0, 0, 0;
  cfg.loadings = {ls, la, la, la};
  return cfg;
}

DgpConfig dgp_constant(std::uint64_t seed) {
  DgpConfig cfg = dgp_score_driven(seed);
  cfg.kind = DgpKind::constant;
  return cfg;
}

double quantile_type7(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - std::floor(h);
  return values[lo] + frac * (values[hi] - values[lo]);
}

McStudyResult mc_study(const DgpConfig& cfg, int replications, bool smooth,
                       int workers) {
  if (replications < 2) throw std::invalid_argument("need >= 2 replications");
  const ModelSpec& spec = cfg.spec;
  const int d = spec.theta_dim();
  const int t_len = cfg.t_len;

  std::vector<Matrix> filt_err(static_cast<std::size_t>(replications));
  std::vector<Matrix> smooth_err(static_cast<std::size_t>(replications));
  std::vector<Matrix> filt_path(static_cast<std::size_t>(replications));
  std::vector<Matrix> truths(static_cast<std::size_t>(replications));

  const auto blocks = partition_blocks(replications, 4);
  run_blocks(blocks, workers, [&](const BlockRange& b) {
    for (int r = b.begin; r < b.end; ++r) {
      DgpConfig local = cfg;
      local.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r));
      const SimOutput sim = simulate(local);
      const Vector theta0 = init_theta(sim.y, spec, t_len);
      const FilterOutput fo = run_filter(sim.y, spec, cfg.statics, theta0);
      const auto idx = static_cast<std::size_t>(r);
      truths[idx] = sim.theta_true;
      filt_path[idx] = fo.theta_path;
      filt_err[idx] = fo.theta_path - sim.theta_true;
      if (smooth) {
        const FilterOutput so = run_smoother(sim.y, spec, cfg.statics, fo);
        smooth_err[idx] = so.theta_path - sim.theta_true;
      }
    }
  });

  McStudyResult res;
  res.theta_true = truths[0];
  auto summarize = [&](const std::vector<Matrix>& samples, McQuantiles& q) {
    q.median = Matrix::Zero(t_len, d);
    q.p16 = Matrix::Zero(t_len, d);
    q.p84 = Matrix::Zero(t_len, d);
    std::vector<double> buf(static_cast<std::size_t>(replications));
    for (int t = 0; t < t_len; ++t) {
      for (int k = 0; k < d; ++k) {
        for (int r = 0; r < replications; ++r)
          buf[static_cast<std::size_t>(r)] =
              samples[static_cast<std::size_t>(r)](t, k);
        q.median(t, k) = quantile_type7(buf, 0.5);
        q.p16(t, k) = quantile_type7(buf, 0.16);
        q.p84(t, k) = quantile_type7(buf, 0.84);
      }
    }
  };
  summarize(filt_err, res.filtered_abs_error);
  summarize(filt_path, res.filtered_path);
  auto abs_median = [&](const std::vector<Matrix>& err) {
    Matrix med = Matrix::Zero(t_len, d);
    std::vector<double> buf(static_cast<std::size_t>(replications));
    for (int t = 0; t < t_len; ++t)
      for (int k = 0; k < d; ++k) {
        for (int r = 0; r < replications; ++r)
          buf[static_cast<std::size_t>(r)] =
              std::abs(err[static_cast<std::size_t>(r)](t, k));
        med(t, k) = quantile_type7(buf, 0.5);
      }
    return med;
  };
  res.filtered_abs_median = abs_median(filt_err);
  std::vector<Matrix> rel(static_cast<std::size_t>(replications));
  auto to_rel = [&](const std::vector<Matrix>& err, std::vector<Matrix>& out) {
    for (int r = 0; r < replications; ++r) {
      const auto idx = static_cast<std::size_t>(r);
      out[idx] = err[idx].array() /
                 truths[idx].array().abs().max(1e-12);
    }
  };
  to_rel(filt_err, rel);
  summarize(rel, res.filtered_rel_error);
  if (smooth) {
    summarize(smooth_err, res.smoothed_abs_error);
    res.smoothed_abs_median = abs_median(smooth_err);
    to_rel(smooth_err, rel);
    summarize(rel, res.smoothed_rel_error);
  }
  return res;
}

}  // namespace sdvar
