#pragma once

#include <vector>

namespace abcre {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1]; rules are cached and shared
// between threads.
const QuadratureRule& gauss_legendre(int n);
// The same rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

}  // namespace abcre
