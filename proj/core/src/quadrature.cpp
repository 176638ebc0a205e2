#include "abcre/quadrature.hpp"

#include "abcre/error.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace abcre {
namespace {

QuadratureRule build(int n) {
  // Boost returns the nonnegative zeros in increasing order.
  const auto zeros = boost::math::legendre_p_zeros<double>(n);
  QuadratureRule r;
  for (double x : zeros) {
    const double dp = boost::math::legendre_p_prime<double>(n, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes.push_back(x);
    r.weights.push_back(w);
    if (x != 0.0) {
      r.nodes.push_back(-x);
      r.weights.push_back(w);
    }
  }
  std::vector<std::size_t> order(r.nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return r.nodes[a] < r.nodes[b]; });
  QuadratureRule sorted;
  for (auto i : order) {
    sorted.nodes.push_back(r.nodes[i]);
    sorted.weights.push_back(r.weights[i]);
  }
  return sorted;
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  if (n < 1) fail(Errc::invalid_parameter, "quadrature needs at least one node");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadratureRule>(build(n));
  return *slot;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule r = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    r.nodes[i] = mid + half * r.nodes[i];
    r.weights[i] *= half;
  }
  return r;
}

}  // namespace abcre
