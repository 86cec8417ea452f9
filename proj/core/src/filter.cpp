#include "sdvar/filter.hpp"

#include <cmath>
#include <stdexcept>

#include "sdvar/parallel.hpp"
#include "sdvar/rng.hpp"

namespace sdvar {

namespace {
constexpr double kDivergenceBound = 1e6;
}

FilterOutput run_filter(const Matrix& y, const ModelSpec& spec,
                        const StaticParams& statics, const Vector& theta0) {
  spec.validate();
  const int maxlag = spec.max_lag();
  const auto t_count = y.rows();
  if (t_count < maxlag + 1)
    throw std::invalid_argument("series shorter than the lag window");
  const int d = spec.theta_dim();
  const int n = spec.n;

  FilterOutput out;
  out.theta_path = Matrix::Zero(t_count, d);
  out.shocks = Matrix::Zero(t_count, n);
  out.loglik_t = Vector::Zero(t_count);
  out.penalty_ts = Vector::Zero(t_count);
  out.stability_flag.assign(static_cast<std::size_t>(t_count), 0);
  out.var_diag = Matrix::Zero(t_count, n);

  Vector theta = theta0;
  for (int t = 0; t < maxlag; ++t) out.theta_path.row(t) = theta.transpose();
  for (int t = maxlag; t < t_count; ++t) {
    if (theta.cwiseAbs().maxCoeff() > kDivergenceBound || !theta.allFinite()) {
      out.diverged = true;
      out.diverged_t = t;
      break;
    }
    out.theta_path.row(t) = theta.transpose();
    const MixingState st = mixing_state(y, t, theta, spec);
    const Matrix c = mat_exp(st.view.s) * st.o;
    // exp can overflow long before the state bound trips
    if (!st.eps.allFinite() || !c.allFinite()) {
      out.diverged = true;
      out.diverged_t = t;
      break;
    }
    out.shocks.row(t) = st.eps.transpose();
    out.var_diag.row(t) = (c * c.transpose()).diagonal().transpose();
    double ll = -st.view.s.trace();
    for (int i = 0; i < n; ++i)
      ll += log_pdf(st.eps(i), spec.skewt[static_cast<std::size_t>(i)]);
    out.loglik_t(t) = ll;
    PenaltyInfo pen;
    const Vector score = penalized_scores_t(y, t, theta, spec, &pen);
    out.penalty_ts(t) = pen.value;
    out.stability_flag[static_cast<std::size_t>(t)] = pen.active ? 1 : 0;
    theta = step(theta, score, statics);
  }
  out.loglik = out.loglik_t.sum();
  out.penalized_loglik = out.loglik - out.penalty_ts.sum();
  return out;
}

FilterOutput run_smoother(const Matrix& y, const ModelSpec& spec,
                          const StaticParams& statics,
                          const FilterOutput& forward) {
  const auto t_count = y.rows();
  const int maxlag = spec.max_lag();
  Matrix rev(t_count, y.cols());
  for (Eigen::Index t = 0; t < t_count; ++t) rev.row(t) = y.row(t_count - 1 - t);
  const Vector theta_end = forward.theta_path.row(t_count - 1).transpose();
  FilterOutput back = run_filter(rev, spec, statics, theta_end);

  FilterOutput out = forward;
  if (back.diverged) {
    out.diverged = true;
    out.diverged_t = back.diverged_t;
    return out;
  }
  // reversed index r covers original time T-1-r; the last maxlag original
  // rows stay at the forward values
  for (Eigen::Index t = 0; t + maxlag < t_count; ++t) {
    const Eigen::Index r = t_count - 1 - t;
    out.theta_path.row(t) = back.theta_path.row(r);
    out.shocks.row(t) = back.shocks.row(r);
    out.var_diag.row(t) = back.var_diag.row(r);
    out.loglik_t(t) = back.loglik_t(r);
    out.penalty_ts(t) = back.penalty_ts(r);
    out.stability_flag[static_cast<std::size_t>(t)] =
        back.stability_flag[static_cast<std::size_t>(r)];
  }
  out.loglik = out.loglik_t.sum();
  out.penalized_loglik = out.loglik - out.penalty_ts.sum();
  return out;
}

Vector init_theta(const Matrix& y, const ModelSpec& spec, int init_window) {
  spec.validate();
  const int maxlag = spec.max_lag();
  const int n = spec.n;
  const int blocks = spec.lag_blocks();
  const int cols = blocks * n;
  const auto t_total = y.rows();
  const int window = std::min<Eigen::Index>(init_window, t_total);
  const int rows = window - maxlag;
  if (rows < cols + 1)
    throw std::invalid_argument("initialization window too short");

  Matrix x(rows, cols);
  Matrix target(rows, n);
  for (int r = 0; r < rows; ++r) {
    const int t = maxlag + r;
    target.row(r) = y.row(t);
    if (spec.lag_mode == LagMode::plain) {
      for (int l = 1; l <= spec.p; ++l)
        x.block(r, (l - 1) * n, 1, n) = y.row(t - l);
    } else {
      x.block(r, 0, 1, n) = y.row(t - 1);
      Eigen::RowVectorXd avg = Eigen::RowVectorXd::Zero(n);
      for (int l = 2; l <= kSemesterMaxLag; ++l) avg += y.row(t - l);
      x.block(r, n, 1, n) = avg / 5.0;
    }
  }
  const Matrix gram = x.transpose() * x;
  Eigen::LDLT<Matrix> solver(gram);
  if (solver.info() != Eigen::Success || !solver.isPositive())
    throw std::invalid_argument("singular design matrix in initialization");
  const Matrix beta = solver.solve(x.transpose() * target);  // cols x n
  const Matrix resid = target - x * beta;
  const Matrix cov =
      resid.transpose() * resid / static_cast<double>(rows - cols);
  const Matrix chol = Eigen::LLT<Matrix>(cov).matrixL();

  ThetaView view;
  view.s = principal_log(chol);
  view.a = Matrix::Zero(n, n);
  view.phi.resize(static_cast<std::size_t>(blocks));
  for (int b = 0; b < blocks; ++b)
    view.phi[static_cast<std::size_t>(b)] =
        beta.block(b * n, 0, n, n).transpose();
  return pack(view, spec);
}

BandOutput bands(const Matrix& y, const ModelSpec& spec,
                 const StaticParams& statics, const RestrictionMap& map,
                 const Matrix& cov_free, const Vector& theta0, int draws,
                 std::uint64_t seed, int workers) {
  if (draws < 2) throw std::invalid_argument("need at least two draws");
  const int m = map.free_count();
  if (cov_free.rows() != m || cov_free.cols() != m)
    throw std::invalid_argument("covariance dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov_free);
  if (es.eigenvalues().minCoeff() < -1e-10 * std::abs(es.eigenvalues().maxCoeff()))
    throw std::invalid_argument("covariance must be positive semidefinite");
  const Matrix cov_root =
      es.eigenvectors() *
      es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  const auto t_count = y.rows();
  const int d = spec.theta_dim();
  const int maxlag = spec.max_lag();

  const FilterOutput base = run_filter(y, spec, statics, theta0);
  if (base.diverged) throw std::runtime_error("filter diverged at the point estimate");

  // constant filtering floor: alpha^2 times the average squared score step
  Vector mean_sq = Vector::Zero(d);
  int scored = 0;
  for (int t = maxlag; t < t_count; ++t) {
    const Vector s =
        penalized_scores_t(y, t, base.theta_path.row(t).transpose(), spec);
    mean_sq += s.cwiseProduct(s);
    ++scored;
  }
  mean_sq /= std::max(1, scored);
  const Vector floor = statics.alpha.cwiseProduct(statics.alpha).cwiseProduct(mean_sq);

  const Vector free_center = map.fold(statics.alpha);
  const auto blocks = partition_blocks(draws, 8);
  std::vector<Matrix> block_sum(blocks.size());
  std::vector<Matrix> block_sumsq(blocks.size());
  std::vector<int> block_kept(blocks.size(), 0);
  run_blocks(blocks, workers, [&](const BlockRange& b) {
    RngStream stream(derive_seed(seed, static_cast<std::uint64_t>(b.index)));
    Matrix sum = Matrix::Zero(t_count, d);
    Matrix sumsq = Matrix::Zero(t_count, d);
    int kept = 0;
    for (int k = b.begin; k < b.end; ++k) {
      Vector z(m);
      for (int i = 0; i < m; ++i) z(i) = standard_normal(stream);
      const Vector alpha_free = (free_center + cov_root * z).cwiseMax(0.0);
      StaticParams drawn = statics;
      drawn.alpha = map.unfold(alpha_free, d);
      const FilterOutput fo = run_filter(y, spec, drawn, theta0);
      if (fo.diverged) continue;  // excluded; bands report the stable draws
      sum += fo.theta_path;
      sumsq += fo.theta_path.cwiseProduct(fo.theta_path);
      ++kept;
    }
    block_sum[static_cast<std::size_t>(b.index)] = sum;
    block_sumsq[static_cast<std::size_t>(b.index)] = sumsq;
    block_kept[static_cast<std::size_t>(b.index)] = kept;
  });
  Matrix sum = Matrix::Zero(t_count, d);
  Matrix sumsq = Matrix::Zero(t_count, d);
  int kept_total = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    sum += block_sum[i];
    sumsq += block_sumsq[i];
    kept_total += block_kept[i];
  }
  if (kept_total < 2) throw std::runtime_error("all band draws diverged");
  const double dn = kept_total;
  const Matrix mean = sum / dn;
  Matrix var = (sumsq / dn - mean.cwiseProduct(mean)) * (dn / (dn - 1.0));

  BandOutput out;
  out.floor_per_component = floor;
  out.half_width = Matrix::Zero(t_count, d);
  for (Eigen::Index t = 0; t < t_count; ++t)
    out.half_width.row(t) =
        (var.row(t).transpose().cwiseMax(0.0) + floor).cwiseSqrt().transpose();
  return out;
}

}  // namespace sdvar
