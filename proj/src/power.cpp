#include "covplan/power.hpp"

#include "covplan/error.hpp"
#include "covplan/quadrature.hpp"

#include <boost/math/distributions/non_central_t.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>

namespace covplan {
namespace {

void require_power_spec(const PowerSpec& spec) {
  if (spec.g != 2) fail(ErrorKind::DomainError, "power calculations cover two-group designs only");
  if (spec.n < 3) fail(ErrorKind::DomainError, "power needs n >= 3");
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) fail(ErrorKind::DomainError, "alpha must lie in (0, 1)");
  if (!(spec.sigma_u > 0.0) || !std::isfinite(spec.sigma_u)) fail(ErrorKind::DomainError, "sigma_u must be positive");
  if (!std::isfinite(spec.gamma)) fail(ErrorKind::DomainError, "gamma must be finite");
  if (!spec.per_group.empty()) {
    if (spec.per_group.size() != 2 || spec.per_group[0] < 1 || spec.per_group[1] < 1 ||
        spec.per_group[0] + spec.per_group[1] != spec.n) {
      fail(ErrorKind::DomainError, "per-group sizes must be two positive counts summing to n");
    }
  }
}

double beta_function(double a, double b) { return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)); }

}  // namespace

PowerSpec PowerSpec::balanced(int n, double gamma, double sigma_u, double alpha) {
  PowerSpec spec;
  spec.n = n;
  spec.gamma = gamma;
  spec.sigma_u = sigma_u;
  spec.alpha = alpha;
  return spec;
}

double PowerSpec::treatment_ss() const {
  const double n1 = per_group.empty() ? n / 2 : per_group[0];
  const double n2 = per_group.empty() ? n - n / 2 : per_group[1];
  return n1 * n2 / n;
}

double noncentral_t_cdf(double t, double df, double delta) {
  if (!(df >= 1.0)) fail(ErrorKind::DomainError, "noncentral t needs df >= 1");
  if (std::isnan(t) || !std::isfinite(delta)) fail(ErrorKind::DomainError, "noncentral t arguments must be finite");
  if (t == std::numeric_limits<double>::infinity()) return 1.0;
  if (t == -std::numeric_limits<double>::infinity()) return 0.0;
  try {
    if (delta == 0.0) return boost::math::cdf(boost::math::students_t_distribution<double>(df), t);
    return boost::math::cdf(boost::math::non_central_t_distribution<double>(df, delta), t);
  } catch (const std::exception& e) {
    fail(ErrorKind::NonConvergence, std::string("noncentral t evaluation failed: ") + e.what());
  }
}

double t_test_power(double df, double delta, double alpha, bool two_sided) {
  if (!(df >= 1.0)) fail(ErrorKind::DomainError, "t-test needs df >= 1");
  try {
    const boost::math::students_t_distribution<double> central(df);
    const double crit = boost::math::quantile(boost::math::complement(central, two_sided ? alpha / 2 : alpha));
    if (delta == 0.0) {
      const double upper = boost::math::cdf(boost::math::complement(central, crit));
      return two_sided ? upper + boost::math::cdf(central, -crit) : upper;
    }
    const boost::math::non_central_t_distribution<double> shifted(df, delta);
    const double upper = boost::math::cdf(boost::math::complement(shifted, crit));
    return two_sided ? upper + boost::math::cdf(shifted, -crit) : upper;
  } catch (const std::exception& e) {
    fail(ErrorKind::NonConvergence, std::string("power evaluation failed: ") + e.what());
  }
}

double unadjusted_power(const PowerSpec& spec) {
  require_power_spec(spec);
  const double delta = spec.gamma * std::sqrt(spec.treatment_ss()) / spec.sigma_u;
  return t_test_power(spec.n - 2.0, delta, spec.alpha, spec.two_sided);
}

double adjusted_conditional_power(const PowerSpec& spec, double b) {
  const double sigma_e = spec.sigma_u * std::sqrt(1.0 - spec.nu);
  const double delta = spec.gamma * std::sqrt((1.0 - b) * spec.treatment_ss()) / sigma_e;
  return t_test_power(spec.n - spec.p - 2.0, delta, spec.alpha, spec.two_sided);
}

double adjusted_expected_power(const PowerSpec& spec) {
  if (spec.p == 0) return unadjusted_power(spec);
  require_power_spec(spec);
  if (spec.p < 0) fail(ErrorKind::DomainError, "covariate count must be >= 0");
  if (spec.n - spec.p - spec.g - 1 < 1) fail(ErrorKind::DomainError, "n - p - g - 1 must be >= 1");
  if (!(spec.nu >= 0.0 && spec.nu < 1.0)) fail(ErrorKind::DomainError, "nu must lie in [0, 1)");

  const double a = spec.p / 2.0;
  const double b = (spec.n - spec.p - spec.g + 1) / 2.0;
  const double norm = beta_function(a, b);

  // For a < 1 the Beta density is unbounded at 0; B = u^(1/a) removes the
  // singularity.
  auto integrate = [&](int order) {
    const GaussLegendreRule rule = gauss_legendre(order, 0.0, 1.0);
    double sum = 0.0;
    for (int i = 0; i < order; ++i) {
      const double x = rule.nodes[i];
      if (a < 1.0) {
        const double beta = std::pow(x, 1.0 / a);
        sum += rule.weights[i] * adjusted_conditional_power(spec, beta) * std::pow(1.0 - beta, b - 1.0);
      } else {
        sum += rule.weights[i] * adjusted_conditional_power(spec, x) * std::pow(x, a - 1.0) *
               std::pow(1.0 - x, b - 1.0);
      }
    }
    return a < 1.0 ? sum / (a * norm) : sum / norm;
  };

  double previous = integrate(16);
  for (int order = 32; order <= kMaxQuadratureOrder; order *= 2) {
    const double current = integrate(order);
    if (std::abs(current - previous) < kQuadratureTolerance) return current;
    previous = current;
  }
  fail(ErrorKind::NonConvergence, "expected power quadrature did not converge");
}

double solve_gamma_for_power(double target_power, const PowerSpec& spec) {
  if (!(target_power > 0.0 && target_power < 1.0)) fail(ErrorKind::DomainError, "target power must lie in (0, 1)");
  PowerSpec probe = spec;
  probe.gamma = 0.0;
  const double size = unadjusted_power(probe);
  if (std::abs(target_power - size) <= 1e-12) return 0.0;
  if (target_power < size) fail(ErrorKind::DomainError, "target power is below the test size");

  auto power_at = [&](double gamma) {
    probe.gamma = gamma;
    return unadjusted_power(probe);
  };
  double lo = 0.0;
  double hi = spec.sigma_u / std::sqrt(spec.treatment_ss());
  int expansions = 0;
  while (power_at(hi) < target_power) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 200) fail(ErrorKind::NonConvergence, "could not bracket the effect size");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double value = power_at(mid);
    if (value < target_power) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double gamma = 0.5 * (lo + hi);
  if (std::abs(power_at(gamma) - target_power) > 1e-9) {
    fail(ErrorKind::NonConvergence, "effect size root-solve missed the target power");
  }
  return gamma;
}

}  // namespace covplan
