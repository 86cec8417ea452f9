#pragma once

#include <string>
#include <vector>

#include "sdvar/matcalc.hpp"
#include "sdvar/skewt.hpp"

namespace sdvar {

enum class LagMode { plain, heterogeneous };

// Monthly block at lag 1 plus a semester block multiplying the average of
// lags 2..6.
constexpr int kSemesterMaxLag = 6;

struct ModelSpec {
  int n = 3;
  LagMode lag_mode = LagMode::plain;
  int p = 2;  // lag count in plain mode
  std::vector<SkewTParams> skewt;
  double penalty_k = 200.0;
  int squaring_q = 10;

  int lag_blocks() const { return lag_mode == LagMode::plain ? p : 2; }
  int max_lag() const {
    return lag_mode == LagMode::plain ? p : kSemesterMaxLag;
  }
  int theta_dim() const {
    return n * (n + 1) / 2 + n * (n - 1) / 2 + lag_blocks() * n * n;
  }
  void validate() const;
};

// theta layout: vech of S by rows of the lower triangle, then the strict
// upper triangle of A by rows, then each lag block column-major.
struct ThetaView {
  Matrix s;  // lower triangular
  Matrix a;  // skew-symmetric
  std::vector<Matrix> phi;
};

ThetaView unpack(const Vector& theta, const ModelSpec& spec);
Vector pack(const ThetaView& view, const ModelSpec& spec);
std::vector<std::string> theta_component_names(const ModelSpec& spec);

struct StaticParams {
  Vector omega, beta, alpha;  // each of length theta_dim
};

StaticParams integrated_statics(const ModelSpec& spec, const Vector& alpha);

// Tied parameter groups; each group shares one free value.
struct RestrictionMap {
  std::vector<std::vector<int>> groups;
  std::vector<std::string> names;

  int free_count() const { return static_cast<int>(groups.size()); }
  Vector fold(const Vector& full) const;     // first member representative
  Vector unfold(const Vector& free_values, int dim) const;
};

// alpha groups (S, A, Phi^1, .., Phi^p) as used in the first simulation
// study.
RestrictionMap alpha_groups_by_block(const ModelSpec& spec);
// the 13-group empirical restriction: per-diagonal S, shared S off-diagonal,
// one A group, per-diagonal and shared off-diagonal for both lag blocks
RestrictionMap alpha_groups_empirical(const ModelSpec& spec);

// Per-observation quantities reused by likelihood and scores.
struct MixingState {
  ThetaView view;
  Matrix o, exp_neg_s;
  Vector resid;        // y_t minus lag predictions
  Vector eps;          // structural shocks
  std::vector<Vector> lag_regressors;  // z_l entering the Phi blocks
};

MixingState mixing_state(const Matrix& y, int t, const Vector& theta,
                         const ModelSpec& spec);

Vector structural_shock(const Matrix& y, int t, const Vector& theta,
                        const ModelSpec& spec);
double log_likelihood_t(const Matrix& y, int t, const Vector& theta,
                        const ModelSpec& spec);

// Spectral penalty at the current lag matrices: k (1 + rho) when rho >= 1.
struct PenaltyInfo {
  double rho = 0.0;
  bool active = false;
  double value = 0.0;
};
PenaltyInfo penalty_t(const Vector& theta, const ModelSpec& spec);

double penalized_log_likelihood_t(const Matrix& y, int t, const Vector& theta,
                                  const ModelSpec& spec);

Vector scores_t(const Matrix& y, int t, const Vector& theta,
                const ModelSpec& spec);
// Phi scores shifted by -k d rho when the stability indicator is on; S and A
// scores are untouched.
Vector penalized_scores_t(const Matrix& y, int t, const Vector& theta,
                          const ModelSpec& spec, PenaltyInfo* info = nullptr);

Vector step(const Vector& theta, const Vector& score,
            const StaticParams& statics);

}  // namespace sdvar
