#pragma once

#include <array>
#include <optional>
#include <string>

namespace covplan {

// Population-level design description. nu_w is the share of outcome variance
// (after treatment) explained by a single composite covariate.
struct DesignParams {
  int n = 0;
  int g = 2;
  int p = 0;
  double nu_p = 0.0;
  std::optional<double> nu_w;
};

// E[1 / (1 - B)] for B ~ Beta(p/2, (n - p - g + 1)/2): (n-g-1)/(n-p-g-1).
double expected_inverse_one_minus_r2(int n, int p, int g = 2);

// Expected variance of the adjusted estimator relative to the unadjusted one.
double relative_efficiency(const DesignParams& params);
double relative_efficiency(int n, int g, int p, double nu_p);

// Largest p with p < (n - g - 1) * nu_p, floored at 0.
int max_beneficial_covariates(int n, int g, double nu_p);

struct NuThreshold {
  double nu = 0.0;                     // p / (n - g - 1)
  double screening_correlation = 0.0;  // sqrt(1 / (n - g - 1)), single covariate
  bool feasible = false;               // some nu < 1 gives a benefit
};

NuThreshold min_nu_for_benefit(int n, int g, int p);

// Composite covariate beats p covariates iff nu_w is strictly above this.
double composite_benefit_threshold(int n, int p, double nu_p, int g = 2);

enum class Estimator { Unadjusted, Covariates, Composite };

// Estimators from most to least efficient; tied[i] is true when position i
// and i + 1 have equal efficiency.
struct Ordering {
  std::array<Estimator, 3> order{};
  std::array<bool, 2> tied{};

  // "W > p > 0", "W = p > 0", ...
  std::string label() const;
  bool operator==(const Ordering&) const = default;
};

struct EfficiencyReport {
  double re_p = 0.0;
  double re_w = 0.0;
  int max_p = 0;
  double threshold_nu = 0.0;
  Ordering ordering;
};

// Relative tolerance used to report two efficiencies as a tie.
inline constexpr double kTieTolerance = 1e-12;

EfficiencyReport classify_region(const DesignParams& params);

// The three boundaries of the (p, nu_w) diagram for fixed n and nu_p, with
// their pairwise intersections computed separately.
struct RegionBoundaries {
  double horizontal_nu_w = 0.0;  // composite vs none
  double vertical_p = 0.0;       // p covariates vs none
  // composite vs p covariates, as a function of p (real-valued)
  double curve(double p) const;

  struct Point {
    double p = 0.0;
    double nu_w = 0.0;
  };
  Point horizontal_vertical;
  Point curve_vertical;
  Point curve_horizontal;

  int n = 0;
  int g = 2;
  double nu_p = 0.0;
};

RegionBoundaries region_boundaries(int n, double nu_p, int g = 2);

}  // namespace covplan
