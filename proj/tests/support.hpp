#pragma once

#include "covplan/dataset.hpp"

#include <random>
#include <string>
#include <vector>

namespace covplan::test {

inline std::vector<std::string> names_for(int k, const std::string& stem = "x") {
  std::vector<std::string> out;
  for (int j = 1; j <= k; ++j) out.push_back(stem + std::to_string(j));
  return out;
}

inline MatrixXd normal_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  MatrixXd x(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) x(i, j) = z(rng);
  return x;
}

// Labels 1..g assigned round robin, with a random outcome depending on the
// covariates and the group.
inline TrialDataset random_groups(int n, int g, int p, std::mt19937_64& rng, double noise = 1.0) {
  std::normal_distribution<double> z;
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i % g + 1;
  std::shuffle(labels.begin(), labels.end(), rng);
  MatrixXd x = normal_matrix(n, p, rng);
  for (int j = 0; j < p; ++j) x.col(j).array() += 3.0 * j;  // nonzero means
  VectorXd beta(p);
  for (int j = 0; j < p; ++j) beta(j) = z(rng);
  VectorXd y(n);
  for (int i = 0; i < n; ++i) y(i) = 0.7 * labels[i] + (p ? x.row(i).dot(beta) : 0.0) + noise * z(rng);
  return TrialDataset(y, labels, x, names_for(p));
}

inline TrialDataset random_two_group(int n, int p, std::mt19937_64& rng) { return random_groups(n, 2, p, rng); }

inline std::vector<int> first_columns(int p) {
  std::vector<int> s(p);
  for (int j = 0; j < p; ++j) s[j] = j;
  return s;
}

inline double relative_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

}  // namespace covplan::test
