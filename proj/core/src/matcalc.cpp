#include "sdvar/matcalc.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace sdvar {

Matrix mat_exp(const Matrix& s) { return s.exp(); }

Matrix mat_exp_frechet(const Matrix& s, const Matrix& e) {
  const auto n = s.rows();
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = s;
  aug.bottomRightCorner(n, n) = s;
  aug.topRightCorner(n, n) = e;
  return aug.exp().topRightCorner(n, n);
}

Matrix principal_log(const Matrix& m) { return m.log(); }

Matrix cayley(const Matrix& a) {
  // (I+a) and (I-a)^{-1} commute, so one solve suffices
  const auto n = a.rows();
  const Matrix i = Matrix::Identity(n, n);
  return (i - a).lu().solve(Matrix(i + a));
}

CayleyDerivFactors cayley_derivative_factors(const Matrix& a, const Matrix& o,
                                             int i, int j) {
  if (j <= i) throw std::invalid_argument("cayley direction needs j > i");
  const auto n = a.rows();
  const Matrix id = Matrix::Identity(n, n);
  Matrix d = Matrix::Zero(n, n);
  d(i, j) = 1.0;
  d(j, i) = -1.0;
  const Matrix ip_inv = (id + a).inverse();
  const Matrix im_inv = (id - a).inverse();
  return {o.transpose() * d * ip_inv, d * im_inv * o.transpose()};
}

GelfandPayload spectral_radius_gelfand(const Matrix& phi, int q) {
  if (q < 1) throw std::invalid_argument("squaring depth must be >= 1");
  if (!phi.allFinite()) throw std::invalid_argument("non-finite matrix");
  GelfandPayload p;
  p.q = q;
  p.chain.reserve(q);
  p.gammas.reserve(q);
  Matrix n = phi;
  double log_scale = 0.0;
  for (int s = 0; s < q; ++s) {
    p.chain.push_back(n);
    Matrix sq = n * n;
    const double g = sq.cwiseAbs().maxCoeff();
    if (g == 0.0) {
      // nilpotent: all further powers vanish, radius 0
      p.nq = sq;
      p.log_scale = 0.0;
      p.svals = Vector::Zero(phi.rows());
      p.u = Matrix::Identity(phi.rows(), phi.rows());
      p.v = p.u;
      p.rho = 0.0;
      p.gammas.push_back(1.0);
      p.chain.resize(static_cast<std::size_t>(q), Matrix::Zero(phi.rows(), phi.cols()));
      p.gammas.resize(static_cast<std::size_t>(q), 1.0);
      return p;
    }
    p.gammas.push_back(g);
    n = sq / g;
    log_scale = 2.0 * log_scale + std::log(g);
  }
  p.nq = n;
  p.log_scale = log_scale;
  Eigen::JacobiSVD<Matrix> svd(n, Eigen::ComputeThinU | Eigen::ComputeThinV);
  p.svals = svd.singularValues();
  p.u = svd.matrixU();
  p.v = svd.matrixV();
  if (p.svals.size() > 1 && p.svals(0) - p.svals(1) < 1e-8) p.degenerate = true;
  const double r = std::pow(2.0, q);
  p.rho = std::exp((std::log(p.svals(0)) + log_scale) / r);
  return p;
}

double spectral_radius_derivative(const GelfandPayload& p,
                                  const Matrix& direction) {
  if (p.chain.empty()) throw std::invalid_argument("payload has no chain");
  if (p.svals(0) == 0.0) return 0.0;
  // d[n_{s+1}] = (d[n_s] n_s + n_s d[n_s]) / gamma_s keeps the derivative in
  // the same normalization as the chain, so scales cancel in d log sigma.
  Matrix d = direction;
  for (int s = 0; s < p.q; ++s) {
    const Matrix& n = p.chain[static_cast<std::size_t>(s)];
    d = (d * n + n * d) / p.gammas[static_cast<std::size_t>(s)];
  }
  const double dsigma =
      p.u.col(0).dot(d * p.v.col(0));  // Giles contraction for simple sigma_1
  const double r = std::pow(2.0, p.q);
  return p.rho / r * dsigma / p.svals(0);
}

Matrix companion_plain(const std::vector<Matrix>& phis) {
  if (phis.empty()) throw std::invalid_argument("no lag matrices");
  const auto n = phis[0].rows();
  const auto pl = static_cast<Eigen::Index>(phis.size());
  Matrix c = Matrix::Zero(n * pl, n * pl);
  for (Eigen::Index l = 0; l < pl; ++l)
    c.block(0, l * n, n, n) = phis[static_cast<std::size_t>(l)];
  if (pl > 1)
    c.block(n, 0, n * (pl - 1), n * (pl - 1)) =
        Matrix::Identity(n * (pl - 1), n * (pl - 1));
  return c;
}

Matrix companion_heterogeneous(const Matrix& phi_m, const Matrix& phi_s) {
  const auto n = phi_m.rows();
  Matrix c = Matrix::Zero(6 * n, 6 * n);
  c.block(0, 0, n, n) = phi_m;
  for (int l = 1; l <= 5; ++l) c.block(0, l * n, n, n) = phi_s / 5.0;
  c.block(n, 0, 5 * n, 5 * n) = Matrix::Identity(5 * n, 5 * n);
  return c;
}

Matrix companion_direction_plain(int n, int p, int lag, int i, int j) {
  Matrix d = Matrix::Zero(n * p, n * p);
  d(i, (lag - 1) * n + j) = 1.0;
  return d;
}

Matrix companion_direction_heterogeneous(int n, bool semester, int i, int j) {
  Matrix d = Matrix::Zero(6 * n, 6 * n);
  if (semester) {
    for (int l = 1; l <= 5; ++l) d(i, l * n + j) = 0.2;
  } else {
    d(i, j) = 1.0;
  }
  return d;
}

}  // namespace sdvar
