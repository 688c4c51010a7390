#include "covplan/efficiency.hpp"

#include "covplan/error.hpp"

#include <algorithm>
#include <cmath>

namespace covplan {
namespace {

void require_design(int n, int p, int g) {
  if (g < 1) fail(ErrorKind::DomainError, "group count must be >= 1");
  if (p < 0) fail(ErrorKind::DomainError, "covariate count must be >= 0");
  if (n - p - g - 1 < 1) {
    fail(ErrorKind::DomainError, "n - p - g - 1 must be >= 1 (n=" + std::to_string(n) +
                                     ", p=" + std::to_string(p) + ", g=" + std::to_string(g) + ")");
  }
}

void require_nu(double nu, const char* what) {
  if (!(nu >= 0.0 && nu < 1.0)) fail(ErrorKind::DomainError, std::string(what) + " must lie in [0, 1)");
}

const char* symbol(Estimator e) {
  switch (e) {
    case Estimator::Unadjusted: return "0";
    case Estimator::Covariates: return "p";
    case Estimator::Composite: return "W";
  }
  return "?";
}

bool ties(double a, double b) { return std::abs(a - b) <= kTieTolerance * std::max(std::abs(a), std::abs(b)); }

}  // namespace

double expected_inverse_one_minus_r2(int n, int p, int g) {
  require_design(n, p, g);
  if (p == 0) return 1.0;
  return static_cast<double>(n - g - 1) / static_cast<double>(n - p - g - 1);
}

double relative_efficiency(int n, int g, int p, double nu_p) {
  require_nu(nu_p, "nu_p");
  return expected_inverse_one_minus_r2(n, p, g) * (1.0 - nu_p);
}

double relative_efficiency(const DesignParams& params) {
  return relative_efficiency(params.n, params.g, params.p, params.nu_p);
}

int max_beneficial_covariates(int n, int g, double nu_p) {
  require_nu(nu_p, "nu_p");
  const int dof = n - g - 1;
  if (dof < 1) return 0;
  const double bound = dof * nu_p;
  // A bound that is an integer up to rounding is an equality case, which does
  // not count as a benefit.
  const double nearest = std::round(bound);
  const double limit = std::abs(bound - nearest) <= 1e-12 * std::max(1.0, bound) ? nearest : bound;
  return std::max(0, static_cast<int>(std::ceil(limit)) - 1);
}

NuThreshold min_nu_for_benefit(int n, int g, int p) {
  if (p < 1) fail(ErrorKind::DomainError, "threshold needs p >= 1");
  const int dof = n - g - 1;
  if (dof < 1) fail(ErrorKind::DomainError, "n - g - 1 must be >= 1");
  NuThreshold t;
  t.nu = static_cast<double>(p) / dof;
  t.screening_correlation = std::sqrt(1.0 / dof);
  t.feasible = n - p - g - 1 >= 1 && t.nu < 1.0;
  return t;
}

double composite_benefit_threshold(int n, int p, double nu_p, int g) {
  if (n < g + 3) fail(ErrorKind::DomainError, "composite comparison needs n >= g + 3");
  require_design(n, p, g);
  require_nu(nu_p, "nu_p");
  return 1.0 - static_cast<double>(n - g - 2) / static_cast<double>(n - p - g - 1) * (1.0 - nu_p);
}

std::string Ordering::label() const {
  std::string out = symbol(order[0]);
  for (int i = 0; i < 2; ++i) {
    out += tied[i] ? " = " : " > ";
    out += symbol(order[i + 1]);
  }
  return out;
}

EfficiencyReport classify_region(const DesignParams& params) {
  if (!params.nu_w) fail(ErrorKind::DomainError, "classification needs nu_w");
  const double nu_w = *params.nu_w;
  require_nu(nu_w, "nu_w");
  if (nu_w > params.nu_p) {
    fail(ErrorKind::DomainError,
         "nu_w exceeds nu_p: a linear composite of the p covariates cannot explain more variance than the covariates");
  }
  if (params.p < 1) fail(ErrorKind::DomainError, "classification needs p >= 1");

  EfficiencyReport report;
  report.re_p = relative_efficiency(params.n, params.g, params.p, params.nu_p);
  report.re_w = relative_efficiency(params.n, params.g, 1, nu_w);
  report.max_p = max_beneficial_covariates(params.n, params.g, params.nu_p);
  report.threshold_nu = min_nu_for_benefit(params.n, params.g, params.p).nu;

  struct Entry {
    Estimator who;
    double re;
  };
  // Stable on the listed order so ties print in a fixed order.
  std::array<Entry, 3> entries{{{Estimator::Composite, report.re_w},
                                {Estimator::Covariates, report.re_p},
                                {Estimator::Unadjusted, 1.0}}};
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.re < b.re && !ties(a.re, b.re);
  });
  for (int i = 0; i < 3; ++i) report.ordering.order[i] = entries[i].who;
  for (int i = 0; i < 2; ++i) report.ordering.tied[i] = ties(entries[i].re, entries[i + 1].re);
  return report;
}

double RegionBoundaries::curve(double p) const {
  return 1.0 - (n - g - 2.0) / (n - p - g - 1.0) * (1.0 - nu_p);
}

RegionBoundaries region_boundaries(int n, double nu_p, int g) {
  if (n < g + 3) fail(ErrorKind::DomainError, "diagram needs n >= g + 3");
  if (!(nu_p > 0.0 && nu_p < 1.0)) fail(ErrorKind::DomainError, "nu_p must lie in (0, 1)");
  RegionBoundaries b;
  b.n = n;
  b.g = g;
  b.nu_p = nu_p;
  const double dof = n - g - 1.0;
  b.horizontal_nu_w = 1.0 / dof;
  b.vertical_p = nu_p * dof;

  b.horizontal_vertical = {b.vertical_p, b.horizontal_nu_w};
  b.curve_vertical = {b.vertical_p, b.curve(b.vertical_p)};
  // curve(p) = 1/dof  <=>  n - p - g - 1 = dof * (1 - nu_p)
  b.curve_horizontal = {n - g - 1.0 - dof * (1.0 - nu_p), b.horizontal_nu_w};
  return b;
}

}  // namespace covplan
