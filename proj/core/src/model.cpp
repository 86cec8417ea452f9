#include "sdvar/model.hpp"

#include <cmath>
#include <stdexcept>

namespace sdvar {

void ModelSpec::validate() const {
  if (n < 2) throw std::invalid_argument("need at least two variables");
  if (lag_mode == LagMode::plain && p < 1)
    throw std::invalid_argument("plain mode needs at least one lag");
  if (static_cast<int>(skewt.size()) != n)
    throw std::invalid_argument("one shock density per variable required");
  for (const auto& q : skewt) sdvar::validate(q);
  // identification: asymmetries nonzero and pairwise distinct, tails distinct
  for (int i = 0; i < n; ++i) {
    if (skewt[static_cast<std::size_t>(i)].delta == 0.0)
      throw std::invalid_argument("zero asymmetry breaks identification");
    for (int j = i + 1; j < n; ++j) {
      if (skewt[static_cast<std::size_t>(i)].delta ==
          skewt[static_cast<std::size_t>(j)].delta)
        throw std::invalid_argument("tied asymmetries break identification");
      if (skewt[static_cast<std::size_t>(i)].nu ==
          skewt[static_cast<std::size_t>(j)].nu)
        throw std::invalid_argument("tied tail exponents break identification");
    }
  }
  if (penalty_k < 0.0) throw std::invalid_argument("penalty must be >= 0");
  if (squaring_q < 1) throw std::invalid_argument("squaring depth must be >= 1");
}

ThetaView unpack(const Vector& theta, const ModelSpec& spec) {
  if (theta.size() != spec.theta_dim())
    throw std::invalid_argument("state vector length mismatch");
  const int n = spec.n;
  ThetaView v;
  v.s = Matrix::Zero(n, n);
  v.a = Matrix::Zero(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) v.s(i, j) = theta(k++);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      v.a(i, j) = theta(k);
      v.a(j, i) = -theta(k);
      ++k;
    }
  v.phi.resize(static_cast<std::size_t>(spec.lag_blocks()));
  for (auto& block : v.phi) {
    block = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) block(i, j) = theta(k++);
  }
  return v;
}

Vector pack(const ThetaView& view, const ModelSpec& spec) {
  Vector theta(spec.theta_dim());
  const int n = spec.n;
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) theta(k++) = view.s(i, j);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) theta(k++) = view.a(i, j);
  for (const auto& block : view.phi)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) theta(k++) = block(i, j);
  return theta;
}

std::vector<std::string> theta_component_names(const ModelSpec& spec) {
  std::vector<std::string> names;
  const int n = spec.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      names.push_back("S" + std::to_string(i + 1) + std::to_string(j + 1));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      names.push_back("A" + std::to_string(i + 1) + std::to_string(j + 1));
  for (int b = 0; b < spec.lag_blocks(); ++b) {
    std::string tag = spec.lag_mode == LagMode::plain
                          ? "Phi" + std::to_string(b + 1)
                          : (b == 0 ? "Phim" : "Phis");
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        names.push_back(tag + "_" + std::to_string(i + 1) +
                        std::to_string(j + 1));
  }
  return names;
}

StaticParams integrated_statics(const ModelSpec& spec, const Vector& alpha) {
  const int d = spec.theta_dim();
  if (alpha.size() != d) throw std::invalid_argument("alpha length mismatch");
  return {Vector::Zero(d), Vector::Ones(d), alpha};
}

Vector RestrictionMap::fold(const Vector& full) const {
  Vector out(free_count());
  for (int g = 0; g < free_count(); ++g)
    out(g) = full(groups[static_cast<std::size_t>(g)].front());
  return out;
}

Vector RestrictionMap::unfold(const Vector& free_values, int dim) const {
  Vector out = Vector::Zero(dim);
  for (int g = 0; g < free_count(); ++g)
    for (int idx : groups[static_cast<std::size_t>(g)])
      out(idx) = free_values(g);
  return out;
}

RestrictionMap alpha_groups_by_block(const ModelSpec& spec) {
  RestrictionMap map;
  const int n = spec.n;
  const int n_s = n * (n + 1) / 2, n_a = n * (n - 1) / 2;
  std::vector<int> s_group(static_cast<std::size_t>(n_s));
  for (int i = 0; i < n_s; ++i) s_group[static_cast<std::size_t>(i)] = i;
  std::vector<int> a_group(static_cast<std::size_t>(n_a));
  for (int i = 0; i < n_a; ++i) a_group[static_cast<std::size_t>(i)] = n_s + i;
  map.groups.push_back(s_group);
  map.names.push_back("alpha_S");
  map.groups.push_back(a_group);
  map.names.push_back("alpha_A");
  int base = n_s + n_a;
  for (int b = 0; b < spec.lag_blocks(); ++b) {
    std::vector<int> g(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n * n; ++i) g[static_cast<std::size_t>(i)] = base + i;
    map.groups.push_back(g);
    map.names.push_back(spec.lag_mode == LagMode::plain
                            ? "alpha_Phi" + std::to_string(b + 1)
                            : (b == 0 ? "alpha_Phim" : "alpha_Phis"));
    base += n * n;
  }
  return map;
}

RestrictionMap alpha_groups_empirical(const ModelSpec& spec) {
  if (spec.n != 3) throw std::invalid_argument("empirical template expects n=3");
  RestrictionMap map;
  // S lower-triangle row-major: S11 S21 S22 S31 S32 S33 at 0..5
  map.groups.push_back({0});
  map.names.push_back("alpha_S11");
  map.groups.push_back({2});
  map.names.push_back("alpha_S22");
  map.groups.push_back({5});
  map.names.push_back("alpha_S33");
  map.groups.push_back({1, 3, 4});
  map.names.push_back("alpha_Soff");
  map.groups.push_back({6, 7, 8});
  map.names.push_back("alpha_A");
  const char* tags[2] = {"m", "s"};
  for (int b = 0; b < spec.lag_blocks(); ++b) {
    const int base = 9 + 9 * b;
    // column-major 3x3: diagonal at 0, 4, 8
    map.groups.push_back({base + 0});
    map.names.push_back(std::string("alpha_Phi") + tags[b] + "11");
    map.groups.push_back({base + 4});
    map.names.push_back(std::string("alpha_Phi") + tags[b] + "22");
    map.groups.push_back({base + 8});
    map.names.push_back(std::string("alpha_Phi") + tags[b] + "33");
    map.groups.push_back(
        {base + 1, base + 2, base + 3, base + 5, base + 6, base + 7});
    map.names.push_back(std::string("alpha_Phi") + tags[b] + "off");
  }
  return map;
}

MixingState mixing_state(const Matrix& y, int t, const Vector& theta,
                         const ModelSpec& spec) {
  if (t < spec.max_lag() || t >= y.rows())
    throw std::invalid_argument("insufficient history at requested time");
  MixingState st;
  st.view = unpack(theta, spec);
  st.o = cayley(st.view.a);
  st.exp_neg_s = mat_exp(-st.view.s);
  const int n = spec.n;
  if (spec.lag_mode == LagMode::plain) {
    st.lag_regressors.resize(static_cast<std::size_t>(spec.p));
    for (int l = 1; l <= spec.p; ++l)
      st.lag_regressors[static_cast<std::size_t>(l - 1)] =
          y.row(t - l).transpose();
  } else {
    st.lag_regressors.resize(2);
    st.lag_regressors[0] = y.row(t - 1).transpose();
    Vector avg = Vector::Zero(n);
    for (int l = 2; l <= kSemesterMaxLag; ++l) avg += y.row(t - l).transpose();
    st.lag_regressors[1] = avg / 5.0;
  }
  st.resid = y.row(t).transpose();
  for (std::size_t b = 0; b < st.view.phi.size(); ++b)
    st.resid -= st.view.phi[b] * st.lag_regressors[b];
  st.eps = st.o.transpose() * (st.exp_neg_s * st.resid);
  return st;
}

Vector structural_shock(const Matrix& y, int t, const Vector& theta,
                        const ModelSpec& spec) {
  return mixing_state(y, t, theta, spec).eps;
}

double log_likelihood_t(const Matrix& y, int t, const Vector& theta,
                        const ModelSpec& spec) {
  const MixingState st = mixing_state(y, t, theta, spec);
  double ll = -st.view.s.trace();
  for (int i = 0; i < spec.n; ++i)
    ll += log_pdf(st.eps(i), spec.skewt[static_cast<std::size_t>(i)]);
  return ll;
}

PenaltyInfo penalty_t(const Vector& theta, const ModelSpec& spec) {
  const ThetaView v = unpack(theta, spec);
  const Matrix comp = spec.lag_mode == LagMode::plain
                          ? companion_plain(v.phi)
                          : companion_heterogeneous(v.phi[0], v.phi[1]);
  const GelfandPayload payload = spectral_radius_gelfand(comp, spec.squaring_q);
  PenaltyInfo info;
  info.rho = payload.rho;
  info.active = payload.rho >= 1.0;
  info.value = info.active ? spec.penalty_k * (1.0 + payload.rho) : 0.0;
  return info;
}

double penalized_log_likelihood_t(const Matrix& y, int t, const Vector& theta,
                                  const ModelSpec& spec) {
  return log_likelihood_t(y, t, theta, spec) - penalty_t(theta, spec).value;
}

Vector scores_t(const Matrix& y, int t, const Vector& theta,
                const ModelSpec& spec) {
  const MixingState st = mixing_state(y, t, theta, spec);
  const int n = spec.n;
  Vector g(n);
  for (int i = 0; i < n; ++i)
    g(i) = score_factor_g(st.eps(i), spec.skewt[static_cast<std::size_t>(i)]);

  Vector grad(spec.theta_dim());
  int k = 0;
  // S block: d eps / dS_ij = O^T d(e^{-S}) resid; trace term contributes
  // -1 on the diagonal
  const Vector og = st.o * g;  // appears as g^T O^T (..) resid
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      Matrix e = Matrix::Zero(n, n);
      e(i, j) = 1.0;
      const Matrix dexp = -mat_exp_frechet(-st.view.s, e);
      grad(k) = og.dot(dexp * st.resid) - (i == j ? 1.0 : 0.0);
      ++k;
    }
  }
  // A block
  const Vector m = st.exp_neg_s * st.resid;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const CayleyDerivFactors f = cayley_derivative_factors(st.view.a, st.o, i, j);
      grad(k) = -g.dot((f.f1 + f.f2) * m);
      ++k;
    }
  }
  // Phi blocks: gradient is the outer product -(e^{-S})^T O g z^T
  const Vector w = st.exp_neg_s.transpose() * og;
  for (std::size_t b = 0; b < st.lag_regressors.size(); ++b) {
    const Vector& z = st.lag_regressors[b];
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) grad(k++) = -w(i) * z(j);
  }
  return grad;
}

Vector penalized_scores_t(const Matrix& y, int t, const Vector& theta,
                          const ModelSpec& spec, PenaltyInfo* info) {
  Vector grad = scores_t(y, t, theta, spec);
  const ThetaView v = unpack(theta, spec);
  const Matrix comp = spec.lag_mode == LagMode::plain
                          ? companion_plain(v.phi)
                          : companion_heterogeneous(v.phi[0], v.phi[1]);
  const GelfandPayload payload = spectral_radius_gelfand(comp, spec.squaring_q);
  if (info) {
    info->rho = payload.rho;
    info->active = payload.rho >= 1.0;
    info->value = info->active ? spec.penalty_k * (1.0 + payload.rho) : 0.0;
  }
  if (payload.rho < 1.0) return grad;
  const int n = spec.n;
  int k = n * (n + 1) / 2 + n * (n - 1) / 2;
  for (int b = 0; b < spec.lag_blocks(); ++b) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const Matrix dir =
            spec.lag_mode == LagMode::plain
                ? companion_direction_plain(n, spec.p, b + 1, i, j)
                : companion_direction_heterogeneous(n, b == 1, i, j);
        grad(k++) -= spec.penalty_k * spectral_radius_derivative(payload, dir);
      }
    }
  }
  return grad;
}

Vector step(const Vector& theta, const Vector& score,
            const StaticParams& statics) {
  if (theta.size() != score.size() || theta.size() != statics.alpha.size())
    throw std::invalid_argument("state update dimension mismatch");
  return statics.omega + statics.beta.cwiseProduct(theta) +
         statics.alpha.cwiseProduct(score);
}

}  // namespace sdvar
