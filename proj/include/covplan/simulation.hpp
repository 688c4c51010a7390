#pragma once

#include "covplan/dataset.hpp"
#include "covplan/historical.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace covplan {

struct SimProtocol {
  int n = 50;
  int m = 100;
  int g = 2;
  double nu_infinity = 0.5;
  double alpha = 0.05;
  int n_sim = 10000;
  int k_max = 60;
  std::uint64_t seed = 0;
  std::vector<int> p_grid;  // empty = 1..n-4
  LambdaPolicy lambda;      // nullopt = GCV
  double target_power = 0.80;
  std::optional<double> gamma;  // overrides the solved effect size

  // Throws DomainError on an invalid protocol.
  void validate() const;
  std::vector<int> resolved_grid() const;
  double resolved_gamma() const;
};

// Raw logistic weights 1 - 1 / (1 + exp(-(k - 15) / 2)), k = 1..k_max.
std::vector<double> beta_weights(int k_max);

// Share of variance explained by the first p covariates, normalised so that
// all k_max covariates explain nu_infinity.
double nu_of_p(int p, int k_max, double nu_infinity);

// Study with `rows` patients: k_max standard normal covariates, outcome
// gamma * z + beta' x + eps with sum(beta^2) = nu_infinity and
// var(eps) = 1 - nu_infinity. Groups are balanced, label 1 first.
TrialDataset generate_study(const SimProtocol& protocol, int rows, double gamma, std::mt19937_64& stream);

enum class SeKind { Proportion, Variance };

// Monte Carlo standard error of a rejection rate (0/1 estimates) or of the
// empirical variance of the estimates.
double monte_carlo_se(std::span<const double> estimates, SeKind kind);

// Delta-method SE of var(numerator) / var(denominator), treating the two arms
// as independent. Conservative when they are positively correlated.
double variance_ratio_se(std::span<const double> numerator, std::span<const double> denominator);

double empirical_variance(std::span<const double> values);

struct Interval {
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct SimPoint {
  int p = 0;
  Interval re_p;
  Interval re_w;
  Interval power_a;
  Interval power_b;
  Interval power_c;
  double re_p_theory = 0.0;
  double re_w_ideal = 0.0;
  double power_a_theory = 0.0;
  double power_b_theory = 0.0;
  double power_c_ideal = 0.0;
  double nu_p = 0.0;
  double mean_gamma_b = 0.0;
  double se_gamma_b = 0.0;
  double mean_gamma_c = 0.0;
  double se_gamma_c = 0.0;
  double mean_nu_w = 0.0;  // average in-sample nu_w of the trained composites
  int replicates = 0;      // used for this p
  int failures = 0;        // excluded replicates
};

struct SimSummary {
  SimProtocol protocol;
  double gamma = 0.0;
  double mean_gamma_a = 0.0;
  double se_gamma_a = 0.0;
  double variance_a = 0.0;
  int failures_a = 0;
  std::vector<SimPoint> points;
};

inline constexpr double kCiZ = 1.96;

// threads = 0 uses the hardware concurrency. Output does not depend on it.
SimSummary run_simulation(const SimProtocol& protocol, int threads = 0);

}  // namespace covplan
