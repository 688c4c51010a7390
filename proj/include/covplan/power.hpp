#pragma once

#include <vector>

namespace covplan {

// Two-group power inputs. nu is the outcome variance share explained by the
// adjustment (covariates or composite); sigma_u the unadjusted residual SD.
struct PowerSpec {
  int n = 0;
  int g = 2;
  std::vector<int> per_group;  // empty = balanced
  double alpha = 0.05;
  double gamma = 0.0;
  double sigma_u = 1.0;
  int p = 0;
  double nu = 0.0;
  bool two_sided = true;

  static PowerSpec balanced(int n, double gamma, double sigma_u = 1.0, double alpha = 0.05);
  // n1 * n2 / n, i.e. sum of (z - zbar)^2.
  double treatment_ss() const;
};

// P(T <= t) for the noncentral t with df degrees of freedom.
double noncentral_t_cdf(double t, double df, double delta);

// Rejection probability of the level-alpha t-test with the given df and
// noncentrality.
double t_test_power(double df, double delta, double alpha, bool two_sided);

double unadjusted_power(const PowerSpec& spec);

// Power averaged over the Beta(p/2, (n-p-g+1)/2) law of R^2_{z:X}; p = 0
// falls back to unadjusted_power.
double adjusted_expected_power(const PowerSpec& spec);

// Conditional power given the realised R^2_{z:X} = b.
double adjusted_conditional_power(const PowerSpec& spec, double b);

inline constexpr double kQuadratureTolerance = 1e-7;
inline constexpr int kMaxQuadratureOrder = 1024;

// Effect size giving the target unadjusted power (gamma is ignored in spec).
double solve_gamma_for_power(double target_power, const PowerSpec& spec);

}  // namespace covplan
