#pragma once

#include "covplan/dataset.hpp"

#include <span>
#include <vector>

namespace covplan {

// Full-row-rank c x g matrix with zero row sums mapping group means to
// treatment comparisons.
class ContrastMatrix {
 public:
  explicit ContrastMatrix(MatrixXd entries);

  // Rows separated by ';', entries by ',' e.g. "1,-1,0;0,1,-1".
  static ContrastMatrix parse(const std::string& text);
  // Rows e_1 - e_j for j = 2..g (first group against each other group).
  static ContrastMatrix against_first(int g);

  const MatrixXd& entries() const { return entries_; }
  int rows() const { return static_cast<int>(entries_.rows()); }
  int groups() const { return static_cast<int>(entries_.cols()); }

 private:
  MatrixXd entries_;
};

struct FitResult {
  VectorXd effect;
  MatrixXd effect_variance;
  VectorXd intercepts;  // per-group means (adjusted when covariates are used)
  VectorXd residuals;
  double sse = 0.0;
  int residual_df = 0;
  double sigma2 = 0.0;
  double r2_zx = 0.0;  // two-group path only

  double effect_se(int i = 0) const;
};

// Treatment effect without covariates: difference in arm means with the
// pooled residual variance on n - 2 df.
FitResult fit_unadjusted(const TrialDataset& data);

// ANCOVA on the selected covariate columns (grand-mean centered). The effect is
// computed from the residuals of the auxiliary regression of z on the
// covariates, its variance through 1 / (1 - R^2_{z:X}).
FitResult fit_adjusted(const TrialDataset& data, std::span<const int> selection);

// Cell-means ANCOVA for g groups; effect = C * mu_hat.
FitResult fit_groups(const TrialDataset& data, std::span<const int> selection,
                     const ContrastMatrix& contrasts);

struct RidgeFit {
  VectorXd weights;
  double intercept = 0.0;
};

// Ridge with an unpenalized intercept.
RidgeFit fit_ridge(const MatrixXd& x, const VectorXd& u, double lambda);

// Singular value decomposition of a centered design, reusable across
// penalties. Used for generalized cross-validation.
class RidgePath {
 public:
  RidgePath(const MatrixXd& x, const VectorXd& u);

  // Throws RankDeficient when lambda == 0 and the centered design is singular.
  RidgeFit solve(double lambda) const;
  double residual_ss(double lambda) const;
  // Effective number of parameters including the intercept.
  double effective_df(double lambda) const;
  double gcv(double lambda) const;
  double gram_trace() const;

  int rows() const { return m_; }
  int cols() const { return p_; }

 private:
  int m_ = 0;
  int p_ = 0;
  VectorXd x_mean_;
  double u_mean_ = 0.0;
  VectorXd singular_;
  MatrixXd v_;
  VectorXd ut_u_;  // U^T (u - mean)
  double total_ss_ = 0.0;
  bool full_rank_ = true;
};

// Relative singular-value tolerance below which a covariate block is singular.
inline constexpr double kRankTolerance = 1e-10;

// Empty when the block has full column rank; otherwise the columns that carry
// the near-null direction.
std::vector<int> rank_deficient_columns(const MatrixXd& block);

}  // namespace covplan
