#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace covplan {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Outcome, group labels (1..g) and named covariate columns for n patients.
// Validated on construction and immutable afterwards.
//
// Two-group convention: label 1 is the treatment arm (z = 1), label 2 is the
// placebo arm (z = 0), so the contrast [1, -1] reads "treatment minus placebo".
class TrialDataset {
 public:
  TrialDataset(VectorXd outcome, std::vector<int> group, MatrixXd covariates,
               std::vector<std::string> names);

  // Convenience for covariate-free data.
  TrialDataset(VectorXd outcome, std::vector<int> group);

  const VectorXd& outcome() const { return outcome_; }
  const std::vector<int>& group() const { return group_; }
  const MatrixXd& covariates() const { return covariates_; }
  const std::vector<std::string>& names() const { return names_; }

  int n() const { return static_cast<int>(outcome_.size()); }
  int g() const { return g_; }
  int k() const { return static_cast<int>(covariates_.cols()); }
  const std::vector<int>& group_sizes() const { return sizes_; }

  // Column index by name; throws MissingColumn.
  int column(const std::string& name) const;
  std::vector<int> columns(std::span<const std::string> names) const;

  // Treatment indicator for the two-group path (1 for label 1, else 0).
  VectorXd treatment_indicator() const;

  // Copy with one extra covariate column appended.
  TrialDataset with_column(const std::string& name, const VectorXd& values) const;

 private:
  VectorXd outcome_;
  std::vector<int> group_;
  MatrixXd covariates_;
  std::vector<std::string> names_;
  int g_ = 0;
  std::vector<int> sizes_;
};

}  // namespace covplan
