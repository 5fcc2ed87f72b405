#pragma once

#include <vector>

#include "stressnet/signal.hpp"

namespace stressnet {

/// Natural cubic spline (zero second derivative at both end knots).
/// Evaluation outside the knot span clamps to the nearest end-knot value.
class CubicSpline {
 public:
  explicit CubicSpline(const Knots& knots);

  double operator()(double t) const;
  std::vector<double> operator()(const std::vector<double>& ts) const;

 private:
  std::vector<double> t_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at knots
};

/// One-shot natural-spline evaluation of `knots` at `query_times`.
std::vector<double> cubic_interpolate(const Knots& knots, const std::vector<double>& query_times);

}  // namespace stressnet
