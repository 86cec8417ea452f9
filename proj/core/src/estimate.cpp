#include "sdvar/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace sdvar {

namespace {

struct Objective {
  const Matrix& y;
  const ModelSpec& spec;
  const RestrictionMap& map;
  const Vector& theta0;

  // maximizes the penalized log-likelihood; returns the negative for the
  // minimizers, +inf on divergence
  double operator()(const Vector& log_alpha) const {
    const Vector alpha_free = log_alpha.array().exp();
    const StaticParams statics =
        integrated_statics(spec, map.unfold(alpha_free, spec.theta_dim()));
    const FilterOutput fo = run_filter(y, spec, statics, theta0);
    if (fo.diverged || !std::isfinite(fo.penalized_loglik))
      return std::numeric_limits<double>::infinity();
    return -fo.penalized_loglik;
  }
};

double gsl_adapter(const gsl_vector* x, void* params) {
  const auto* obj = static_cast<const Objective*>(params);
  Vector v(static_cast<Eigen::Index>(x->size));
  for (std::size_t i = 0; i < x->size; ++i)
    v(static_cast<Eigen::Index>(i)) = gsl_vector_get(x, i);
  const double f = (*obj)(v);
  return std::isfinite(f) ? f : 1e12;
}

struct SimplexResult {
  Vector x;
  double f;
  bool converged;
};

SimplexResult nelder_mead(const Objective& obj, const Vector& start,
                          int max_iter, double tol) {
  const auto m = start.size();
  gsl_multimin_function func;
  func.n = static_cast<std::size_t>(m);
  func.f = &gsl_adapter;
  func.params = const_cast<Objective*>(&obj);

  gsl_vector* x0 = gsl_vector_alloc(func.n);
  gsl_vector* step = gsl_vector_alloc(func.n);
  for (Eigen::Index i = 0; i < m; ++i) {
    gsl_vector_set(x0, static_cast<std::size_t>(i), start(i));
    gsl_vector_set(step, static_cast<std::size_t>(i), 0.5);
  }
  gsl_multimin_fminimizer* solver = gsl_multimin_fminimizer_alloc(
      gsl_multimin_fminimizer_nmsimplex2, func.n);
  gsl_multimin_fminimizer_set(solver, &func, x0, step);

  SimplexResult res;
  res.converged = false;
  int iter = 0;
  while (iter++ < max_iter) {
    if (gsl_multimin_fminimizer_iterate(solver) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver), tol) ==
        GSL_SUCCESS) {
      res.converged = true;
      break;
    }
  }
  res.x = Vector(m);
  for (Eigen::Index i = 0; i < m; ++i)
    res.x(i) = gsl_vector_get(solver->x, static_cast<std::size_t>(i));
  res.f = solver->fval;
  gsl_multimin_fminimizer_free(solver);
  gsl_vector_free(x0);
  gsl_vector_free(step);
  return res;
}

Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Vector& x, double rel_step) {
  const auto m = x.size();
  Vector g(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x(i)));
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

struct PolishResult {
  Vector x;
  double f;
  std::string status;
};

// BFGS with finite-difference gradients and Armijo backtracking.
PolishResult bfgs_polish(const std::function<double(const Vector&)>& f,
                         const Vector& start, int max_iter) {
  const auto m = start.size();
  Matrix h_inv = Matrix::Identity(m, m);
  Vector x = start;
  double fx = f(x);
  Vector g = fd_gradient(f, x, 1e-6);
  std::string status = "max-iter";
  for (int iter = 0; iter < max_iter; ++iter) {
    Vector dir = -h_inv * g;
    double slope = g.dot(dir);
    if (slope >= 0.0) {  // curvature update went bad, fall back to descent
      h_inv = Matrix::Identity(m, m);
      dir = -g;
      slope = -g.squaredNorm();
      if (slope == 0.0) {
        status = "converged";
        break;
      }
    }
    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half < 40; ++half) {
      const Vector cand = x + lambda * dir;
      const double fc = f(cand);
      if (fc <= fx + 1e-4 * lambda * slope) {
        const Vector gn = fd_gradient(f, cand, 1e-6);
        const Vector s = cand - x;
        const Vector yv = gn - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12) {
          const Matrix i = Matrix::Identity(m, m);
          const Matrix left = i - s * yv.transpose() / sy;
          h_inv = left * h_inv * left.transpose() + s * s.transpose() / sy;
        }
        if (std::abs(fx - fc) < 1e-10 * (1.0 + std::abs(fx))) {
          x = cand;
          fx = fc;
          g = gn;
          status = "converged";
          return {x, fx, status};
        }
        x = cand;
        fx = fc;
        g = gn;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      status = "line-search-failure";
      break;
    }
  }
  return {x, fx, status};
}

}  // namespace

EstimateResult fit(const Matrix& y, const ModelSpec& spec,
                   const RestrictionMap& map, const Vector& alpha_init,
                   const FitOptions& opts) {
  spec.validate();
  const int m = map.free_count();
  if (alpha_init.size() != m)
    throw std::invalid_argument("one starting alpha per tied group required");
  const int window = opts.init_window > 0
                         ? opts.init_window
                         : static_cast<int>(y.rows());
  if (opts.theta0.size() != 0 && opts.theta0.size() != spec.theta_dim())
    throw std::invalid_argument("starting state has the wrong dimension");
  const Vector theta0 = opts.theta0.size() != 0 ? opts.theta0
                                                : init_theta(y, spec, window);
  const Objective obj{y, spec, map, theta0};

  // starts bracket the initial guess from below and above in log space
  const Vector base = alpha_init.cwiseMax(1e-8).array().log();
  std::vector<Vector> starts = {base};
  if (opts.multistarts > 1)
    starts.push_back(base + Vector::Constant(m, std::log(3.0)));
  if (opts.multistarts > 2)
    starts.push_back(base - Vector::Constant(m, std::log(3.0)));

  SimplexResult best{Vector(), std::numeric_limits<double>::infinity(), false};
  for (const Vector& s : starts) {
    const SimplexResult r =
        nelder_mead(obj, s, opts.simplex_max_iter, opts.simplex_tol);
    if (r.f < best.f) best = r;
  }
  auto wrapped = [&obj](const Vector& x) { return obj(x); };
  const PolishResult polished = bfgs_polish(wrapped, best.x, opts.polish_max_iter);
  const bool polish_won = polished.f <= best.f;
  const Vector log_opt = polish_won ? polished.x : best.x;
  const double obj_opt = polish_won ? polished.f : best.f;

  EstimateResult res;
  res.free_values = log_opt.array().exp();
  res.statics = integrated_statics(
      spec, map.unfold(res.free_values, spec.theta_dim()));
  res.theta0 = theta0;
  const FilterOutput fo = run_filter(y, spec, res.statics, theta0);
  res.loglik = fo.loglik;
  res.penalized_loglik = -obj_opt;
  res.convergence = polish_won ? polished.status
                               : (best.converged ? "converged" : "max-iter");
  bool all_flagged = !fo.stability_flag.empty();
  for (std::size_t t = static_cast<std::size_t>(spec.max_lag());
       t < fo.stability_flag.size(); ++t)
    all_flagged = all_flagged && fo.stability_flag[t];
  if (all_flagged) res.warnings.push_back("entire fitted path is stability-flagged");

  if (opts.compute_se) {
    const RobustSe se = robust_se(y, spec, map, res.free_values, theta0);
    res.robust_se = se.se;
    res.cov_free = se.cov;
    res.hessian_pseudo_inverse = se.pseudo_inverse;
    if (se.pseudo_inverse)
      res.warnings.push_back(
          "singular Hessian, covariance from pseudo-inverse");
    res.t_stats = Vector(m);
    for (int i = 0; i < m; ++i)
      res.t_stats(i) = res.robust_se(i) > 0.0
                           ? res.free_values(i) / res.robust_se(i)
                           : std::numeric_limits<double>::quiet_NaN();
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    res.robust_se = Vector::Constant(m, nan);
    res.t_stats = Vector::Constant(m, nan);
    res.cov_free = Matrix::Constant(m, m, nan);
  }
  return res;
}

RobustSe robust_se(const Matrix& y, const ModelSpec& spec,
                   const RestrictionMap& map, const Vector& free_alpha,
                   const Vector& theta0) {
  const int m = map.free_count();
  const int maxlag = spec.max_lag();
  const auto t_count = y.rows();

  auto per_t = [&](const Vector& alpha_free) -> Vector {
    const StaticParams statics =
        integrated_statics(spec, map.unfold(alpha_free, spec.theta_dim()));
    const FilterOutput fo = run_filter(y, spec, statics, theta0);
    return fo.loglik_t - fo.penalty_ts;
  };
  auto total = [&](const Vector& alpha_free) -> double {
    return per_t(alpha_free).sum();
  };

  // J: outer products of per-observation score contributions
  Matrix per_t_grad(t_count, m);
  for (int i = 0; i < m; ++i) {
    const double h = 1e-4 * std::max(1e-3, std::abs(free_alpha(i)));
    Vector xp = free_alpha, xm = free_alpha;
    xp(i) += h;
    xm(i) = std::max(xm(i) - h, 0.0);
    const Vector fp = per_t(xp);
    const Vector fm = per_t(xm);
    per_t_grad.col(i) = (fp - fm) / (xp(i) - xm(i));
  }
  Matrix j = Matrix::Zero(m, m);
  for (int t = maxlag; t < t_count; ++t)
    j += per_t_grad.row(t).transpose() * per_t_grad.row(t);

  // H: central second differences of the total objective
  Matrix h_mat(m, m);
  const double f0 = total(free_alpha);
  Vector steps(m);
  for (int i = 0; i < m; ++i)
    steps(i) = 1e-4 * std::max(1e-3, std::abs(free_alpha(i)));
  for (int i = 0; i < m; ++i) {
    Vector xp = free_alpha, xm = free_alpha;
    xp(i) += steps(i);
    xm(i) = std::max(xm(i) - steps(i), 0.0);
    const double hp = xp(i) - free_alpha(i), hm = free_alpha(i) - xm(i);
    h_mat(i, i) =
        (total(xp) - 2.0 * f0 + total(xm)) / (0.5 * (hp + hm) * (hp + hm));
    for (int k = i + 1; k < m; ++k) {
      Vector xpp = free_alpha, xpm = free_alpha, xmp = free_alpha,
             xmm = free_alpha;
      xpp(i) += steps(i);
      xpp(k) += steps(k);
      xpm(i) += steps(i);
      xpm(k) = std::max(xpm(k) - steps(k), 0.0);
      xmp(i) = std::max(xmp(i) - steps(i), 0.0);
      xmp(k) += steps(k);
      xmm(i) = std::max(xmm(i) - steps(i), 0.0);
      xmm(k) = std::max(xmm(k) - steps(k), 0.0);
      const double di = steps(i) + (free_alpha(i) - xmp(i));
      const double dk = steps(k) + (free_alpha(k) - xpm(k));
      h_mat(i, k) =
          (total(xpp) - total(xpm) - total(xmp) + total(xmm)) / (di * dk);
      h_mat(k, i) = h_mat(i, k);
    }
  }

  RobustSe out;
  Eigen::FullPivLU<Matrix> lu(h_mat);
  Matrix h_inv;
  if (lu.isInvertible()) {
    h_inv = lu.inverse();
  } else {
    Eigen::JacobiSVD<Matrix> svd(h_mat,
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector inv_s = svd.singularValues();
    for (int i = 0; i < m; ++i)
      inv_s(i) = inv_s(i) > 1e-12 * svd.singularValues()(0)
                     ? 1.0 / inv_s(i)
                     : 0.0;
    h_inv = svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose();
    out.pseudo_inverse = true;
  }
  out.cov = h_inv * j * h_inv;
  out.cov_hessian = -h_inv;
  out.se = out.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

TwoStepResult two_step_densities(const ModelSpec& spec, const Matrix& shocks,
                                 int first_scored_row) {
  TwoStepResult res;
  res.spec = spec;
  const int n = spec.n;
  const auto t_count = shocks.rows();
  for (int i = 0; i < n; ++i) {
    double m1 = 0.0;
    int count = 0;
    for (int t = first_scored_row; t < t_count; ++t) {
      m1 += shocks(t, i);
      ++count;
    }
    m1 /= count;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (int t = first_scored_row; t < t_count; ++t) {
      const double c = shocks(t, i) - m1;
      m2 += c * c;
      m3 += c * c * c;
      m4 += c * c * c * c;
    }
    m2 /= count;
    m3 /= count;
    m4 /= count;
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2);
    auto& target = res.spec.skewt[static_cast<std::size_t>(i)];
    try {
      target = target_moments(skew, kurt);
    } catch (const InfeasibleMoments&) {
      res.warnings.push_back("component " + std::to_string(i + 1) +
                             ": moments infeasible, keeping previous density");
      continue;
    }
    if (std::abs(target.delta) < 0.02) {
      target.delta = skew >= 0.0 ? 0.05 : -0.05;
      res.warnings.push_back("component " + std::to_string(i + 1) +
                             ": asymmetry jittered away from zero");
    }
  }
  // identification requires pairwise distinct parameters
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      auto& a = res.spec.skewt[static_cast<std::size_t>(i)];
      auto& b = res.spec.skewt[static_cast<std::size_t>(j)];
      if (std::abs(a.nu - b.nu) < 1e-6) {
        b.nu += 0.1;
        res.warnings.push_back("tied tail exponents, second perturbed");
      }
      if (std::abs(a.delta - b.delta) < 1e-6) {
        b.delta += b.delta >= 0.0 ? 0.02 : -0.02;
        res.warnings.push_back("tied asymmetries, second perturbed");
      }
    }
  return res;
}

}  // namespace sdvar
