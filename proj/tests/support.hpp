#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>

namespace abcre::testing {

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, tol);
}

// Nested adaptive integral over [a1, b1] x [a2(x), b2(x)].
inline double integrate2(const std::function<double(double, double)>& f, double a1, double b1,
                         const std::function<double(double)>& a2,
                         const std::function<double(double)>& b2, double tol = 1e-12) {
  return integrate(
      [&](double x) { return integrate([&](double y) { return f(x, y); }, a2(x), b2(x), tol); },
      a1, b1, tol);
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace abcre::testing
