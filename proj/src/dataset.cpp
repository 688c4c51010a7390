#include "covplan/dataset.hpp"

#include "covplan/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace covplan {

TrialDataset::TrialDataset(VectorXd outcome, std::vector<int> group, MatrixXd covariates,
                           std::vector<std::string> names)
    : outcome_(std::move(outcome)),
      group_(std::move(group)),
      covariates_(std::move(covariates)),
      names_(std::move(names)) {
  const auto n = outcome_.size();
  if (static_cast<Eigen::Index>(group_.size()) != n || covariates_.rows() != n) {
    fail(ErrorKind::InvalidData, "outcome, group and covariate rows differ in length");
  }
  if (static_cast<Eigen::Index>(names_.size()) != covariates_.cols()) {
    fail(ErrorKind::InvalidData, "covariate names do not match covariate columns");
  }
  std::set<std::string> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second) fail(ErrorKind::InvalidData, "duplicate column name '" + name + "'");
  }
  if (!outcome_.allFinite()) fail(ErrorKind::InvalidData, "non-finite outcome value");
  if (!covariates_.allFinite()) fail(ErrorKind::InvalidData, "non-finite covariate value");

  if (group_.empty()) fail(ErrorKind::InvalidData, "empty dataset");
  const int lo = *std::min_element(group_.begin(), group_.end());
  if (lo < 1) fail(ErrorKind::InvalidData, "group labels must be in 1..g");
  g_ = *std::max_element(group_.begin(), group_.end());
  sizes_.assign(g_, 0);
  for (int label : group_) ++sizes_[label - 1];
  for (int j = 0; j < g_; ++j) {
    if (sizes_[j] < 2) {
      fail(ErrorKind::InvalidData,
           "group " + std::to_string(j + 1) + " has " + std::to_string(sizes_[j]) +
               " patients (at least 2 required)");
    }
  }
}

TrialDataset::TrialDataset(VectorXd outcome, std::vector<int> group)
    : TrialDataset(outcome, std::move(group), MatrixXd(outcome.size(), 0), {}) {}

int TrialDataset::column(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) fail(ErrorKind::MissingColumn, "missing column '" + name + "'");
  return static_cast<int>(it - names_.begin());
}

std::vector<int> TrialDataset::columns(std::span<const std::string> names) const {
  std::vector<int> out;
  out.reserve(names.size());
  for (const auto& name : names) out.push_back(column(name));
  return out;
}

VectorXd TrialDataset::treatment_indicator() const {
  VectorXd z(n());
  for (int i = 0; i < n(); ++i) z(i) = group_[i] == 1 ? 1.0 : 0.0;
  return z;
}

TrialDataset TrialDataset::with_column(const std::string& name, const VectorXd& values) const {
  MatrixXd x(n(), k() + 1);
  x.leftCols(k()) = covariates_;
  x.col(k()) = values;
  auto names = names_;
  names.push_back(name);
  return TrialDataset(outcome_, group_, std::move(x), std::move(names));
}

}  // namespace covplan
