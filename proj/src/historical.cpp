#include "covplan/historical.hpp"

#include "covplan/efficiency.hpp"
#include "covplan/error.hpp"
#include "covplan/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace covplan {

double hyp2f1_11c(double c, double x) {
  if (!(x >= 0.0 && x <= 1.0)) fail(ErrorKind::DomainError, "hypergeometric argument must lie in [0, 1]");
  if (!(c > 0.0)) fail(ErrorKind::DomainError, "hypergeometric parameter c must be positive");
  if (x == 1.0) {
    if (!(c > 2.0)) fail(ErrorKind::DomainError, "F(1,1;c;1) diverges for c <= 2");
    return (c - 1.0) / (c - 2.0);
  }
  if (x == 0.0) return 1.0;

  // term_{k+1} / term_k = (k + 1) x / (c + k); for c >= 1 the ratio rises
  // towards x, otherwise it falls towards x, which bounds the tail.
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < kHypergeometricMaxTerms; ++k) {
    const double ratio = (k + 1.0) * x / (c + k);
    term *= ratio;
    sum += term;
    const double next = (k + 2.0) * x / (c + k + 1.0);
    const double q = c >= 1.0 ? x : next;
    if (q < 1.0 && term * q / (1.0 - q) < kHypergeometricTolerance) return sum;
  }
  fail(ErrorKind::NonConvergence, "F(1,1;c;x) series did not converge (c=" + std::to_string(c) +
                                      ", x=" + std::to_string(x) + ")");
}

double olkin_pratt_nu(double r2, int m, int p) {
  if (!(r2 >= 0.0 && r2 <= 1.0)) fail(ErrorKind::DomainError, "R^2 must lie in [0, 1]");
  if (p < 0) fail(ErrorKind::DomainError, "predictor count must be >= 0");
  if (m - p - 1 < 1) fail(ErrorKind::DomainError, "Olkin-Pratt needs m - p - 1 >= 1");
  if (r2 == 0.0 && m - p - 3 < 1) fail(ErrorKind::DomainError, "Olkin-Pratt at R^2 = 0 needs m - p - 3 >= 1");
  if (r2 == 1.0) return 1.0;
  const double x = 1.0 - r2;
  const double c = (m - p + 1) / 2.0;
  return 1.0 - static_cast<double>(m - 3) / (m - p - 1) * x * hyp2f1_11c(c, x);
}

VectorXd residualize_outcome(const TrialDataset& data) {
  const int g = data.g();
  VectorXd means = VectorXd::Zero(g);
  for (int i = 0; i < data.n(); ++i) means(data.group()[i] - 1) += data.outcome()(i);
  for (int j = 0; j < g; ++j) means(j) /= data.group_sizes()[j];
  VectorXd out(data.n());
  for (int i = 0; i < data.n(); ++i) out(i) = data.outcome()(i) - means(data.group()[i] - 1);
  return out;
}

MatrixXd within_group_centered(const TrialDataset& data, std::span<const int> columns) {
  const int g = data.g();
  const auto p = static_cast<Eigen::Index>(columns.size());
  MatrixXd x(data.n(), p);
  for (Eigen::Index j = 0; j < p; ++j) x.col(j) = data.covariates().col(columns[j]);
  MatrixXd means = MatrixXd::Zero(g, p);
  for (int i = 0; i < data.n(); ++i) means.row(data.group()[i] - 1) += x.row(i);
  for (int j = 0; j < g; ++j) means.row(j) /= data.group_sizes()[j];
  for (int i = 0; i < data.n(); ++i) x.row(i) -= means.row(data.group()[i] - 1);
  return x;
}

HistoricalEstimate estimate_nu_curve(const TrialDataset& historical,
                                     std::span<const std::string> ranking, int target_n,
                                     int target_g) {
  const std::vector<int> cols = historical.columns(ranking);
  const int big_p = static_cast<int>(cols.size());

  HistoricalEstimate est;
  est.m = historical.n();
  est.effective_m = historical.n() - (historical.g() - 1);
  est.ranked_covariates.assign(ranking.begin(), ranking.end());
  if (est.effective_m <= big_p + 3) {
    fail(ErrorKind::DomainError, "historical data needs more than " + std::to_string(big_p + 3) +
                                     " effective rows for " + std::to_string(big_p) + " covariates");
  }

  const VectorXd y = residualize_outcome(historical);
  const double sst = y.squaredNorm();
  if (sst == 0.0) fail(ErrorKind::DegenerateDesign, "historical outcome is constant within groups");

  VectorXd qty = VectorXd::Zero(big_p);
  MatrixXd r;
  MatrixXd x;
  if (big_p > 0) {
    x = within_group_centered(historical, cols);
    const Eigen::HouseholderQR<MatrixXd> qr(x);
    qty = (qr.householderQ().transpose() * y).head(big_p);
    r = qr.matrixQR().topLeftCorner(big_p, big_p).triangularView<Eigen::Upper>();
  }

  double explained = 0.0;
  for (int p = 0; p <= big_p; ++p) {
    if (p > 0) {
      // Singular values of the leading p x p block of R are those of the prefix.
      Eigen::JacobiSVD<MatrixXd> svd(r.topLeftCorner(p, p));
      const VectorXd& s = svd.singularValues();
      if (s(0) == 0.0 || s(p - 1) < kRankTolerance * s(0)) {
        std::string names;
        for (int b : rank_deficient_columns(x.leftCols(p))) names += " " + ranking[b];
        fail(ErrorKind::RankDeficient,
             "covariate prefix of size " + std::to_string(p) + " is singular; offending columns:" + names);
      }
      explained += qty(p - 1) * qty(p - 1);
    }
    const double r2 = std::clamp(explained / sst, 0.0, 1.0);
    const double r2_monotone = est.r2_hat.empty() ? r2 : std::max(r2, est.r2_hat.back());
    est.r2_hat.push_back(r2_monotone);
    const double nu = olkin_pratt_nu(r2_monotone, est.effective_m, p);
    est.nu_hat.push_back(nu);

    double re = std::numeric_limits<double>::infinity();
    if (target_n - p - target_g - 1 >= 1) {
      const double nu_for_re = std::clamp(nu, 0.0, std::nextafter(1.0, 0.0));
      re = relative_efficiency(target_n, target_g, p, nu_for_re);
    }
    est.predicted_re.push_back(re);
  }
  est.optimal_p = static_cast<int>(
      std::min_element(est.predicted_re.begin(), est.predicted_re.end()) - est.predicted_re.begin());
  return est;
}

namespace {

double in_sample_r2(const VectorXd& y, const VectorXd& w) {
  const VectorXd yc = y.array() - y.mean();
  const VectorXd wc = w.array() - w.mean();
  const double sww = wc.squaredNorm();
  const double syy = yc.squaredNorm();
  if (sww == 0.0 || syy == 0.0) return 0.0;
  const double syw = yc.dot(wc);
  return syw * syw / (sww * syy);
}

}  // namespace

CompositeModel train_composite(const TrialDataset& historical,
                               std::span<const std::string> covariates, LambdaPolicy lambda) {
  const int m = historical.n();
  if (m < 5) fail(ErrorKind::InsufficientData, "composite training needs at least 5 historical rows");
  const std::vector<int> cols = historical.columns(covariates);
  const auto p = static_cast<Eigen::Index>(cols.size());

  CompositeModel model;
  model.covariate_names.assign(covariates.begin(), covariates.end());
  model.m = m;
  model.center = VectorXd(p);
  model.scale = VectorXd(p);
  for (Eigen::Index j = 0; j < p; ++j) model.center(j) = historical.covariates().col(cols[j]).mean();

  const VectorXd y = residualize_outcome(historical);
  MatrixXd x = within_group_centered(historical, cols);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double sd = std::sqrt(x.col(j).squaredNorm() / (m - 1));
    model.scale(j) = sd > 0.0 ? sd : 1.0;
    x.col(j) /= model.scale(j);
  }

  const RidgePath path(x, y);
  if (lambda) {
    model.lambda = *lambda;
  } else if (p == 0) {
    model.lambda = 0.0;
  } else {
    const double base = path.gram_trace() / (static_cast<double>(m) * p);
    double best = std::numeric_limits<double>::infinity();
    const double lo = std::log10(kGcvGridLow);
    const double hi = std::log10(kGcvGridHigh);
    for (int i = 0; i < kGcvGridSize; ++i) {
      const double candidate = base * std::pow(10.0, lo + (hi - lo) * i / (kGcvGridSize - 1));
      const double score = path.gcv(candidate);
      if (score < best) {
        best = score;
        model.lambda = candidate;
      }
    }
    if (!std::isfinite(best)) model.lambda = base * kGcvGridHigh;
  }

  const RidgeFit fit = path.solve(model.lambda);
  model.weights = fit.weights.cwiseQuotient(model.scale);
  model.trained_nu_w = in_sample_r2(y, apply_composite(model, historical));
  return model;
}

VectorXd apply_composite(const CompositeModel& model, const MatrixXd& covariates,
                         std::span<const std::string> names) {
  VectorXd w = VectorXd::Zero(covariates.rows());
  for (std::size_t j = 0; j < model.covariate_names.size(); ++j) {
    const auto it = std::find(names.begin(), names.end(), model.covariate_names[j]);
    if (it == names.end()) fail(ErrorKind::MissingColumn, "missing column '" + model.covariate_names[j] + "'");
    const auto c = it - names.begin();
    w += model.weights(j) * (covariates.col(c).array() - model.center(j)).matrix();
  }
  return w;
}

VectorXd apply_composite(const CompositeModel& model, const TrialDataset& data) {
  return apply_composite(model, data.covariates(), data.names());
}

}  // namespace covplan
