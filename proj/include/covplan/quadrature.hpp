#pragma once

#include <vector>

namespace covplan {

struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [a, b] (Newton iteration on the Legendre
// recurrence).
GaussLegendreRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

}  // namespace covplan
