#pragma once

#include "covplan/dataset.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace covplan {

// Gauss hypergeometric F(1, 1; c; x) for 0 <= x <= 1 by direct summation of
// sum_k k! x^k / (c)_k. At x = 1 the closed form (c - 1) / (c - 2) is used.
double hyp2f1_11c(double c, double x);

inline constexpr int kHypergeometricMaxTerms = 10000;
inline constexpr double kHypergeometricTolerance = 1e-12;

// Olkin-Pratt estimate of the population R^2 from a sample R^2 of an OLS fit
// with intercept on p predictors over m rows. May be negative.
double olkin_pratt_nu(double r2, int m, int p);

struct HistoricalEstimate {
  int m = 0;
  int effective_m = 0;  // m minus the group structure that was regressed out
  std::vector<std::string> ranked_covariates;
  std::vector<double> r2_hat;        // index = prefix size p
  std::vector<double> nu_hat;        // raw, may be negative
  std::vector<double> predicted_re;  // +inf where the target design cannot hold p
  int optimal_p = 0;
};

// Nu curve for every prefix of the ranking, with relative efficiencies for a
// target trial of target_n patients in target_g groups.
HistoricalEstimate estimate_nu_curve(const TrialDataset& historical,
                                     std::span<const std::string> ranking, int target_n,
                                     int target_g = 2);

struct CompositeModel {
  std::vector<std::string> covariate_names;
  VectorXd center;
  VectorXd weights;  // on the original covariate scale
  VectorXd scale;    // standard deviations used during training
  double lambda = 0.0;
  int m = 0;
  double trained_nu_w = 0.0;
};

// Ridge penalty: a fixed value, or nullopt to select it by generalized
// cross-validation.
using LambdaPolicy = std::optional<double>;

inline constexpr int kGcvGridSize = 25;
inline constexpr double kGcvGridLow = 1e-4;
inline constexpr double kGcvGridHigh = 1e4;

CompositeModel train_composite(const TrialDataset& historical,
                               std::span<const std::string> covariates, LambdaPolicy lambda);

// W_i = (x_i - center)' weights. Throws MissingColumn.
VectorXd apply_composite(const CompositeModel& model, const TrialDataset& data);
VectorXd apply_composite(const CompositeModel& model, const MatrixXd& covariates,
                         std::span<const std::string> names);

// Outcome with the group means removed, and covariates centered within group.
VectorXd residualize_outcome(const TrialDataset& data);
MatrixXd within_group_centered(const TrialDataset& data, std::span<const int> columns);

}  // namespace covplan
