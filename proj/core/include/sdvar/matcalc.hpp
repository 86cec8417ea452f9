#pragma once

#include <Eigen/Dense>
#include <vector>

namespace sdvar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

Matrix mat_exp(const Matrix& s);

// Directional derivative of the matrix exponential at s along e, computed
// from the upper-right block of exp([[s, e], [0, s]]).
Matrix mat_exp_frechet(const Matrix& s, const Matrix& e);

// Principal branch; callers pass matrices with no eigenvalues on the closed
// negative real axis (Cholesky factors in practice).
Matrix principal_log(const Matrix& m);

// (I + a)(I - a)^{-1} for skew-symmetric a; always orthogonal.
Matrix cayley(const Matrix& a);

// The two factor matrices o^T d (I+a)^{-1} and d (I-a)^{-1} o^T with
// d = E_ij - E_ji, entering the gradient of the de-mixing in a.
struct CayleyDerivFactors {
  Matrix f1, f2;
};
CayleyDerivFactors cayley_derivative_factors(const Matrix& a, const Matrix& o,
                                             int i, int j);

// Power-iteration estimate rho ~ sigma_max(phi^(2^q))^(1/2^q) with the
// squaring chain renormalized by max-abs entries; scale tracked in logs so
// unstable matrices do not overflow.
struct GelfandPayload {
  double rho = 0.0;
  int q = 0;
  std::vector<Matrix> chain;    // normalized phi^(2^s), s = 0..q-1
  std::vector<double> gammas;   // per-squaring max-abs normalizers
  Matrix nq;                    // normalized phi^(2^q)
  double log_scale = 0.0;       // log of the scale factored out of nq
  Vector svals;                 // singular values of nq
  Matrix u, v;
  bool degenerate = false;      // leading singular pair closer than 1e-8
};

GelfandPayload spectral_radius_gelfand(const Matrix& phi, int q);

// d rho / d direction, from the chain rule through the squaring recursion
// and the (1,1) contraction of the leading singular pair.
double spectral_radius_derivative(const GelfandPayload& p,
                                  const Matrix& direction);

// Stacked first-order form of a VAR(p): top block row carries the lag
// matrices, shifted identity below.
Matrix companion_plain(const std::vector<Matrix>& phis);

// Heterogeneous form: monthly block at lag 1, semester block spread as
// phi_s/5 over lags 2..6 (the semester regressor is the 5-lag average).
Matrix companion_heterogeneous(const Matrix& phi_m, const Matrix& phi_s);

Matrix companion_direction_plain(int n, int p, int lag, int i, int j);
Matrix companion_direction_heterogeneous(int n, bool semester, int i, int j);

}  // namespace sdvar
