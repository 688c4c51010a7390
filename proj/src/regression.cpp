#include "covplan/regression.hpp"

#include "covplan/error.hpp"

#include <cmath>
#include <sstream>

namespace covplan {
namespace {

MatrixXd centered_selection(const TrialDataset& data, std::span<const int> selection) {
  MatrixXd x(data.n(), static_cast<Eigen::Index>(selection.size()));
  for (std::size_t j = 0; j < selection.size(); ++j) {
    const int c = selection[j];
    if (c < 0 || c >= data.k()) fail(ErrorKind::MissingColumn, "covariate index out of range");
    x.col(j) = data.covariates().col(c).array() - data.covariates().col(c).mean();
  }
  return x;
}

[[noreturn]] void throw_rank(const TrialDataset& data, std::span<const int> selection,
                             const std::vector<int>& bad, const char* block) {
  std::ostringstream msg;
  msg << block << " is singular; offending columns:";
  for (int b : bad) {
    const int c = selection[b];
    msg << ' ' << (c < static_cast<int>(data.names().size()) ? data.names()[c] : std::to_string(c));
  }
  fail(ErrorKind::RankDeficient, msg.str());
}

void symmetrize(MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

std::vector<int> rank_deficient_columns(const MatrixXd& block) {
  if (block.cols() == 0) return {};
  Eigen::JacobiSVD<MatrixXd> svd(block);
  const VectorXd& s = svd.singularValues();
  const bool singular = block.cols() > block.rows() || s(0) == 0.0 ||
                        s(s.size() - 1) < kRankTolerance * s(0);
  if (!singular) return {};

  std::vector<int> bad;
  if (s(0) == 0.0) {
    for (int j = 0; j < block.cols(); ++j) bad.push_back(j);
    return bad;
  }
  Eigen::JacobiSVD<MatrixXd> full(block, Eigen::ComputeFullV);
  const VectorXd null = full.matrixV().col(block.cols() - 1);
  const double top = null.cwiseAbs().maxCoeff();
  for (int j = 0; j < block.cols(); ++j) {
    if (std::abs(null(j)) > 1e-6 * top) bad.push_back(j);
  }
  return bad;
}

double FitResult::effect_se(int i) const { return std::sqrt(std::max(0.0, effect_variance(i, i))); }

ContrastMatrix::ContrastMatrix(MatrixXd entries) : entries_(std::move(entries)) {
  const auto c = entries_.rows();
  const auto g = entries_.cols();
  if (c < 1 || g < 2) fail(ErrorKind::InvalidContrast, "invalid contrast: empty matrix");
  if (!entries_.allFinite()) fail(ErrorKind::InvalidContrast, "invalid contrast: non-finite entry");
  if (c > g - 1) {
    fail(ErrorKind::InvalidContrast, "invalid contrast: more than g - 1 rows");
  }
  for (Eigen::Index r = 0; r < c; ++r) {
    const double scale = std::max(1.0, entries_.row(r).cwiseAbs().sum());
    if (std::abs(entries_.row(r).sum()) > 1e-12 * scale) {
      fail(ErrorKind::InvalidContrast,
           "invalid contrast: row " + std::to_string(r + 1) + " does not sum to zero");
    }
  }
  Eigen::JacobiSVD<MatrixXd> svd(entries_);
  const VectorXd& s = svd.singularValues();
  if (s(0) == 0.0 || s(c - 1) < 1e-10 * s(0)) {
    fail(ErrorKind::InvalidContrast, "invalid contrast: rows are not linearly independent");
  }
}

ContrastMatrix ContrastMatrix::parse(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream all(text);
  std::string row;
  while (std::getline(all, row, ';')) {
    std::vector<double> values;
    std::stringstream cells(row);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        fail(ErrorKind::InvalidContrast, "invalid contrast: cannot parse '" + cell + "'");
      }
    }
    if (!values.empty()) rows.push_back(std::move(values));
  }
  if (rows.empty()) fail(ErrorKind::InvalidContrast, "invalid contrast: no rows");
  MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows[0].size()) fail(ErrorKind::InvalidContrast, "invalid contrast: ragged rows");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return ContrastMatrix(std::move(m));
}

ContrastMatrix ContrastMatrix::against_first(int g) {
  MatrixXd m = MatrixXd::Zero(g - 1, g);
  for (int j = 1; j < g; ++j) {
    m(j - 1, 0) = 1.0;
    m(j - 1, j) = -1.0;
  }
  return ContrastMatrix(std::move(m));
}

FitResult fit_unadjusted(const TrialDataset& data) {
  const int n = data.n();
  if (n < 3) fail(ErrorKind::InsufficientData, "at least 3 patients are required");
  if (data.g() > 2) fail(ErrorKind::DomainError, "two-group fit called with more than two groups");

  const VectorXd z = data.treatment_indicator();
  const VectorXd zc = z.array() - z.mean();
  const double szz = zc.squaredNorm();
  if (data.g() < 2 || szz == 0.0) fail(ErrorKind::DegenerateDesign, "all patients are in the same arm");

  const VectorXd& y = data.outcome();
  const double ybar = y.mean();
  const VectorXd yc = y.array() - ybar;

  FitResult fit;
  const double gamma = zc.dot(yc) / szz;
  const double mu = ybar - gamma * z.mean();
  fit.residuals = y.array() - mu - gamma * z.array();
  fit.sse = fit.residuals.squaredNorm();
  fit.residual_df = n - 2;
  fit.sigma2 = fit.sse / fit.residual_df;
  fit.effect = VectorXd::Constant(1, gamma);
  fit.effect_variance = MatrixXd::Constant(1, 1, fit.sigma2 / szz);
  fit.intercepts = VectorXd(2);
  fit.intercepts << mu + gamma, mu;
  fit.r2_zx = 0.0;
  return fit;
}

FitResult fit_adjusted(const TrialDataset& data, std::span<const int> selection) {
  const int p = static_cast<int>(selection.size());
  if (p == 0) return fit_unadjusted(data);

  const int n = data.n();
  if (n <= p + 2) {
    fail(ErrorKind::InsufficientData, "need more than p + 2 = " + std::to_string(p + 2) + " patients");
  }
  if (data.g() > 2) fail(ErrorKind::DomainError, "two-group fit called with more than two groups");

  const VectorXd z = data.treatment_indicator();
  const VectorXd zc = z.array() - z.mean();
  const double szz = zc.squaredNorm();
  if (data.g() < 2 || szz == 0.0) fail(ErrorKind::DegenerateDesign, "all patients are in the same arm");

  const MatrixXd x = centered_selection(data, selection);
  if (auto bad = rank_deficient_columns(x); !bad.empty()) {
    throw_rank(data, selection, bad, "centered covariate block");
  }
  const Eigen::HouseholderQR<MatrixXd> qr(x);

  // Auxiliary regression of z on the covariates (intercept implied by centering).
  const VectorXd r = zc - x * qr.solve(zc);
  const double rss_z = r.squaredNorm();
  const double one_minus_r2 = rss_z / szz;
  if (one_minus_r2 < kRankTolerance) {
    std::vector<int> all(selection.size());
    for (int j = 0; j < p; ++j) all[j] = j;
    throw_rank(data, selection, all, "treatment indicator spanned by covariates;");
  }

  const VectorXd& y = data.outcome();
  const double ybar = y.mean();
  const VectorXd yc = y.array() - ybar;
  const double gamma = r.dot(yc) / rss_z;

  const VectorXd partial = yc - gamma * zc;
  const VectorXd beta = qr.solve(partial);

  FitResult fit;
  fit.residuals = partial - x * beta;
  fit.sse = fit.residuals.squaredNorm();
  fit.residual_df = n - p - 2;
  fit.sigma2 = fit.sse / fit.residual_df;
  fit.effect = VectorXd::Constant(1, gamma);
  fit.effect_variance = MatrixXd::Constant(1, 1, fit.sigma2 / (one_minus_r2 * szz));
  const double mu = ybar - gamma * z.mean();
  fit.intercepts = VectorXd(2);
  fit.intercepts << mu + gamma, mu;
  fit.r2_zx = 1.0 - one_minus_r2;
  return fit;
}

FitResult fit_groups(const TrialDataset& data, std::span<const int> selection,
                     const ContrastMatrix& contrasts) {
  const int n = data.n();
  const int g = data.g();
  const int p = static_cast<int>(selection.size());
  if (g < 2) fail(ErrorKind::DegenerateDesign, "at least two groups are required");
  if (contrasts.groups() != g) {
    fail(ErrorKind::InvalidContrast, "invalid contrast: " + std::to_string(contrasts.groups()) +
                                         " columns for " + std::to_string(g) + " groups");
  }
  if (n <= p + g) {
    fail(ErrorKind::InsufficientData, "need more than p + g = " + std::to_string(p + g) + " patients");
  }

  const auto& group = data.group();
  const auto& sizes = data.group_sizes();
  const VectorXd& y = data.outcome();

  VectorXd ybar = VectorXd::Zero(g);
  for (int i = 0; i < n; ++i) ybar(group[i] - 1) += y(i);
  for (int j = 0; j < g; ++j) ybar(j) /= sizes[j];

  VectorXd yw(n);
  for (int i = 0; i < n; ++i) yw(i) = y(i) - ybar(group[i] - 1);

  FitResult fit;
  MatrixXd m = MatrixXd::Zero(g, g);
  for (int j = 0; j < g; ++j) m(j, j) = 1.0 / sizes[j];

  if (p == 0) {
    fit.intercepts = ybar;
    fit.residuals = yw;
  } else {
    const MatrixXd x = centered_selection(data, selection);
    MatrixXd xbar = MatrixXd::Zero(p, g);
    for (int i = 0; i < n; ++i) xbar.col(group[i] - 1) += x.row(i).transpose();
    for (int j = 0; j < g; ++j) xbar.col(j) /= sizes[j];

    MatrixXd xw(n, p);
    for (int i = 0; i < n; ++i) xw.row(i) = x.row(i) - xbar.col(group[i] - 1).transpose();
    if (auto bad = rank_deficient_columns(xw); !bad.empty()) {
      throw_rank(data, selection, bad, "within-group covariate block");
    }

    const Eigen::HouseholderQR<MatrixXd> qr(xw);
    const VectorXd beta = qr.solve(yw);
    fit.intercepts = ybar - xbar.transpose() * beta;
    fit.residuals = yw - xw * beta;

    // S_XX = R^T R, so Xbar^T S_XX^{-1} Xbar = A^T A with A = R^{-T} Xbar.
    const MatrixXd r = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const MatrixXd a = r.transpose().triangularView<Eigen::Lower>().solve(xbar);
    m += a.transpose() * a;
  }

  fit.sse = fit.residuals.squaredNorm();
  fit.residual_df = n - p - g;
  fit.sigma2 = fit.sse / fit.residual_df;
  const MatrixXd& c = contrasts.entries();
  fit.effect = c * fit.intercepts;
  fit.effect_variance = fit.sigma2 * c * m * c.transpose();
  symmetrize(fit.effect_variance);
  fit.r2_zx = 0.0;
  return fit;
}

RidgePath::RidgePath(const MatrixXd& x, const VectorXd& u) : m_(static_cast<int>(x.rows())), p_(static_cast<int>(x.cols())) {
  if (m_ < 2) fail(ErrorKind::InsufficientData, "ridge needs at least 2 rows");
  if (u.size() != m_) fail(ErrorKind::InvalidData, "ridge response length differs from design rows");
  if (!x.allFinite() || !u.allFinite()) fail(ErrorKind::InvalidData, "non-finite ridge input");

  x_mean_ = x.colwise().mean().transpose();
  u_mean_ = u.mean();
  const VectorXd uc = u.array() - u_mean_;
  total_ss_ = uc.squaredNorm();
  if (p_ == 0) {
    singular_ = VectorXd(0);
    v_ = MatrixXd(0, 0);
    ut_u_ = VectorXd(0);
    return;
  }
  const MatrixXd xc = x.rowwise() - x_mean_.transpose();
  Eigen::JacobiSVD<MatrixXd> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  singular_ = svd.singularValues();
  v_ = svd.matrixV();
  ut_u_ = svd.matrixU().transpose() * uc;
  const auto k = singular_.size();
  full_rank_ = p_ <= k && singular_(0) > 0.0 && singular_(k - 1) >= kRankTolerance * singular_(0);
}

RidgeFit RidgePath::solve(double lambda) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail(ErrorKind::DomainError, "ridge penalty must be finite and >= 0");
  if (lambda == 0.0 && !full_rank_) {
    fail(ErrorKind::RankDeficient, "ridge design is singular and lambda = 0");
  }
  RidgeFit fit;
  fit.weights = VectorXd::Zero(p_);
  if (p_ > 0) {
    VectorXd shrunk(singular_.size());
    for (Eigen::Index k = 0; k < singular_.size(); ++k) {
      const double s = singular_(k);
      shrunk(k) = s == 0.0 ? 0.0 : s / (s * s + lambda) * ut_u_(k);
    }
    fit.weights = v_ * shrunk;
  }
  fit.intercept = u_mean_ - x_mean_.dot(fit.weights);
  return fit;
}

double RidgePath::residual_ss(double lambda) const {
  double rss = total_ss_ - ut_u_.squaredNorm();
  for (Eigen::Index k = 0; k < singular_.size(); ++k) {
    const double s2 = singular_(k) * singular_(k);
    const double shrink = s2 == 0.0 ? 1.0 : lambda / (s2 + lambda);
    rss += ut_u_(k) * ut_u_(k) * shrink * shrink;
  }
  return std::max(0.0, rss);
}

double RidgePath::effective_df(double lambda) const {
  double df = 1.0;
  for (Eigen::Index k = 0; k < singular_.size(); ++k) {
    const double s2 = singular_(k) * singular_(k);
    if (s2 > 0.0) df += s2 / (s2 + lambda);
  }
  return df;
}

double RidgePath::gcv(double lambda) const {
  const double resid_df = m_ - effective_df(lambda);
  if (resid_df <= 0.0) return std::numeric_limits<double>::infinity();
  return m_ * residual_ss(lambda) / (resid_df * resid_df);
}

double RidgePath::gram_trace() const { return singular_.squaredNorm(); }

RidgeFit fit_ridge(const MatrixXd& x, const VectorXd& u, double lambda) {
  return RidgePath(x, u).solve(lambda);
}

}  // namespace covplan
