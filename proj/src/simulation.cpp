#include "covplan/simulation.hpp"

#include "covplan/efficiency.hpp"
#include "covplan/error.hpp"
#include "covplan/power.hpp"
#include "covplan/regression.hpp"
#include "covplan/rng.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

namespace covplan {

void SimProtocol::validate() const {
  if (g != 2) fail(ErrorKind::DomainError, "the simulation protocol is defined for two groups");
  if (n < 8) fail(ErrorKind::DomainError, "trial size n must be >= 8");
  if (m < 5) fail(ErrorKind::DomainError, "historical size m must be >= 5");
  if (!(nu_infinity > 0.0 && nu_infinity < 1.0)) fail(ErrorKind::DomainError, "nu_infinity must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::DomainError, "alpha must lie in (0, 1)");
  if (n_sim < 2) fail(ErrorKind::DomainError, "at least 2 replicates are required");
  if (k_max < 1) fail(ErrorKind::DomainError, "k_max must be >= 1");
  if (lambda && !(*lambda >= 0.0)) fail(ErrorKind::DomainError, "ridge penalty must be >= 0");
  const auto grid = resolved_grid();
  if (grid.empty()) fail(ErrorKind::DomainError, "empty covariate grid");
  for (int p : grid) {
    if (p < 1 || p > n - 3) {
      fail(ErrorKind::DomainError, "grid value " + std::to_string(p) + " outside 1.." + std::to_string(n - 3));
    }
    if (p > k_max) fail(ErrorKind::DomainError, "grid value " + std::to_string(p) + " exceeds k_max");
    if (p > m - 2) fail(ErrorKind::DomainError, "grid value " + std::to_string(p) + " too large for m");
  }
}

std::vector<int> SimProtocol::resolved_grid() const {
  if (!p_grid.empty()) return p_grid;
  std::vector<int> grid(std::max(0, n - 4));
  std::iota(grid.begin(), grid.end(), 1);
  return grid;
}

double SimProtocol::resolved_gamma() const {
  if (gamma) return *gamma;
  const double sigma_u = 1.0;
  return solve_gamma_for_power(target_power, PowerSpec::balanced(n, 0.0, sigma_u, alpha));
}

std::vector<double> beta_weights(int k_max) {
  std::vector<double> beta(std::max(0, k_max));
  for (int k = 1; k <= k_max; ++k) {
    // 1 - 1/(1 + e^{-t}) written as 1/(1 + e^{t}) to keep the tail accurate.
    beta[k - 1] = 1.0 / (1.0 + std::exp((k - 15.0) / 2.0));
  }
  return beta;
}

double nu_of_p(int p, int k_max, double nu_infinity) {
  if (p < 0 || p > k_max) fail(ErrorKind::DomainError, "p must lie in 0..k_max");
  const auto beta = beta_weights(k_max);
  double head = 0.0;
  double total = 0.0;
  for (int k = 0; k < k_max; ++k) {
    total += beta[k] * beta[k];
    if (k < p) head += beta[k] * beta[k];
  }
  return nu_infinity * head / total;
}

TrialDataset generate_study(const SimProtocol& protocol, int rows, double gamma, std::mt19937_64& stream) {
  const int g = protocol.g;
  if (rows < 2 * g) fail(ErrorKind::DomainError, "a study needs at least two patients per group");
  const int k = protocol.k_max;

  auto beta = beta_weights(k);
  double total = 0.0;
  for (double b : beta) total += b * b;
  const double rescale = std::sqrt(protocol.nu_infinity / total);
  for (double& b : beta) b *= rescale;
  const double sigma_eps = std::sqrt(1.0 - protocol.nu_infinity);

  std::vector<int> group(rows);
  int row = 0;
  for (int j = 1; j <= g; ++j) {
    const int size = rows / g + (j <= rows % g ? 1 : 0);
    for (int i = 0; i < size; ++i) group[row++] = j;
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd x(rows, k);
  VectorXd y(rows);
  for (int i = 0; i < rows; ++i) {
    double signal = group[i] == 1 ? gamma : 0.0;
    for (int c = 0; c < k; ++c) {
      x(i, c) = normal(stream);
      signal += beta[c] * x(i, c);
    }
    y(i) = signal + sigma_eps * normal(stream);
  }

  std::vector<std::string> names(k);
  for (int c = 0; c < k; ++c) names[c] = "x" + std::to_string(c + 1);
  return TrialDataset(std::move(y), std::move(group), std::move(x), std::move(names));
}

double empirical_variance(std::span<const double> values) {
  const auto n = values.size();
  if (n < 2) fail(ErrorKind::DomainError, "variance needs at least 2 values");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / (n - 1);
}

double monte_carlo_se(std::span<const double> estimates, SeKind kind) {
  const auto n = estimates.size();
  if (n < 2) fail(ErrorKind::DomainError, "Monte Carlo SE needs at least 2 estimates");
  if (kind == SeKind::Proportion) {
    const double rate = std::accumulate(estimates.begin(), estimates.end(), 0.0) / n;
    return std::sqrt(std::max(0.0, rate * (1.0 - rate)) / n);
  }
  return empirical_variance(estimates) * std::sqrt(2.0 / (n - 1.0));
}

double variance_ratio_se(std::span<const double> numerator, std::span<const double> denominator) {
  if (numerator.size() < 2 || denominator.size() < 2) fail(ErrorKind::DomainError, "variance ratio needs at least 2 estimates per arm");
  const double den = empirical_variance(denominator);
  if (den == 0.0) fail(ErrorKind::DomainError, "reference arm has zero variance");
  const double ratio = empirical_variance(numerator) / den;
  return ratio * std::sqrt(2.0 / (numerator.size() - 1.0) + 2.0 / (denominator.size() - 1.0));
}

namespace {

struct ArmRecord {
  bool ok = false;
  bool reject = false;
  double gamma = 0.0;
};

struct ReplicateRecord {
  ArmRecord a;
  std::vector<ArmRecord> b;
  std::vector<ArmRecord> c;
  std::vector<double> nu_w;
};

Interval proportion_interval(std::span<const double> outcomes) {
  Interval out;
  out.estimate = std::accumulate(outcomes.begin(), outcomes.end(), 0.0) / outcomes.size();
  const double se = monte_carlo_se(outcomes, SeKind::Proportion);
  out.lo = std::max(0.0, out.estimate - kCiZ * se);
  out.hi = std::min(1.0, out.estimate + kCiZ * se);
  return out;
}

Interval ratio_interval(std::span<const double> arm, std::span<const double> reference) {
  Interval out;
  out.estimate = empirical_variance(arm) / empirical_variance(reference);
  const double se = variance_ratio_se(arm, reference);
  out.lo = std::max(0.0, out.estimate - kCiZ * se);
  out.hi = out.estimate + kCiZ * se;
  return out;
}

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double mean_se(std::span<const double> v) { return std::sqrt(empirical_variance(v) / v.size()); }

class Analyzer {
 public:
  Analyzer(const SimProtocol& protocol, std::vector<int> grid, double gamma)
      : protocol_(protocol), grid_(std::move(grid)), gamma_(gamma) {
    crit_.assign(protocol.n + 1, 0.0);
    for (int df = 1; df <= protocol.n; ++df) {
      const boost::math::students_t_distribution<double> t(df);
      crit_[df] = boost::math::quantile(boost::math::complement(t, protocol.alpha / 2));
    }
    for (int c = 0; c < protocol.k_max; ++c) names_.push_back("x" + std::to_string(c + 1));
  }

  ReplicateRecord run(int replicate) const {
    ReplicateRecord rec;
    rec.b.resize(grid_.size());
    rec.c.resize(grid_.size());
    rec.nu_w.assign(grid_.size(), 0.0);

    auto hist_stream = substream(protocol_.seed, replicate, StreamPurpose::Historical);
    auto trial_stream = substream(protocol_.seed, replicate, StreamPurpose::Trial);
    const TrialDataset historical = generate_study(protocol_, protocol_.m, gamma_, hist_stream);
    const TrialDataset trial = generate_study(protocol_, protocol_.n, gamma_, trial_stream);

    rec.a = record([&] { return fit_unadjusted(trial); });
    std::vector<int> selection;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      const int p = grid_[i];
      selection.resize(p);
      std::iota(selection.begin(), selection.end(), 0);
      rec.b[i] = record([&] { return fit_adjusted(trial, selection); });
      rec.c[i] = record([&] {
        const std::span<const std::string> names(names_.data(), p);
        const CompositeModel model = train_composite(historical, names, protocol_.lambda);
        rec.nu_w[i] = model.trained_nu_w;
        const VectorXd w = apply_composite(model, trial);
        const TrialDataset composite(trial.outcome(), trial.group(), w, {"W"});
        const int only[] = {0};
        return fit_adjusted(composite, only);
      });
    }
    return rec;
  }

 private:
  template <class Fit>
  ArmRecord record(Fit&& fit) const {
    ArmRecord arm;
    try {
      const FitResult result = fit();
      arm.gamma = result.effect(0);
      const double se = result.effect_se();
      arm.reject = se > 0.0 ? std::abs(arm.gamma / se) > crit_[result.residual_df] : arm.gamma != 0.0;
      arm.ok = std::isfinite(arm.gamma);
    } catch (const Error&) {
      arm.ok = false;
    }
    return arm;
  }

  const SimProtocol& protocol_;
  std::vector<int> grid_;
  double gamma_;
  std::vector<double> crit_;
  std::vector<std::string> names_;
};

}  // namespace

SimSummary run_simulation(const SimProtocol& protocol, int threads) {
  protocol.validate();
  const std::vector<int> grid = protocol.resolved_grid();

  SimSummary summary;
  summary.protocol = protocol;
  summary.protocol.p_grid = grid;
  summary.gamma = protocol.resolved_gamma();

  const Analyzer analyzer(protocol, grid, summary.gamma);
  std::vector<ReplicateRecord> records(protocol.n_sim);

  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, protocol.n_sim);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int r = next++; r < protocol.n_sim; r = next++) records[r] = analyzer.run(r);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  // Reduction in replicate order keeps the summary independent of scheduling.
  std::vector<double> gamma_a;
  std::vector<double> reject_a;
  for (const auto& rec : records) {
    if (!rec.a.ok) {
      ++summary.failures_a;
      continue;
    }
    gamma_a.push_back(rec.a.gamma);
    reject_a.push_back(rec.a.reject ? 1.0 : 0.0);
  }
  if (gamma_a.size() < 2) fail(ErrorKind::NonConvergence, "too few successful unadjusted fits");
  summary.mean_gamma_a = mean_of(gamma_a);
  summary.se_gamma_a = mean_se(gamma_a);
  summary.variance_a = empirical_variance(gamma_a);
  const Interval power_a = proportion_interval(reject_a);

  PowerSpec spec = PowerSpec::balanced(protocol.n, summary.gamma, 1.0, protocol.alpha);
  const double power_a_theory = unadjusted_power(spec);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const int p = grid[i];
    SimPoint point;
    point.p = p;
    point.nu_p = nu_of_p(p, protocol.k_max, protocol.nu_infinity);

    std::vector<double> ga, gb, gc, rb, rc, nu_w;
    for (const auto& rec : records) {
      if (!rec.a.ok || !rec.b[i].ok || !rec.c[i].ok) {
        ++point.failures;
        continue;
      }
      ga.push_back(rec.a.gamma);
      gb.push_back(rec.b[i].gamma);
      gc.push_back(rec.c[i].gamma);
      rb.push_back(rec.b[i].reject ? 1.0 : 0.0);
      rc.push_back(rec.c[i].reject ? 1.0 : 0.0);
      nu_w.push_back(rec.nu_w[i]);
    }
    point.replicates = static_cast<int>(ga.size());
    if (point.replicates < 2) fail(ErrorKind::NonConvergence, "too few successful fits at p = " + std::to_string(p));

    point.re_p = ratio_interval(gb, ga);
    point.re_w = ratio_interval(gc, ga);
    point.power_a = power_a;
    point.power_b = proportion_interval(rb);
    point.power_c = proportion_interval(rc);
    point.mean_gamma_b = mean_of(gb);
    point.se_gamma_b = mean_se(gb);
    point.mean_gamma_c = mean_of(gc);
    point.se_gamma_c = mean_se(gc);
    point.mean_nu_w = mean_of(nu_w);

    const bool feasible = protocol.n - p - 3 >= 1;
    point.re_p_theory = feasible ? relative_efficiency(protocol.n, 2, p, point.nu_p)
                                 : std::numeric_limits<double>::infinity();
    point.re_w_ideal = relative_efficiency(protocol.n, 2, 1, point.nu_p);
    point.power_a_theory = power_a_theory;
    spec.p = p;
    spec.nu = point.nu_p;
    point.power_b_theory = feasible ? adjusted_expected_power(spec) : nan;
    spec.p = 1;
    point.power_c_ideal = adjusted_expected_power(spec);
    summary.points.push_back(point);
  }
  return summary;
}

}  // namespace covplan
