#include "stressnet/spline.hpp"

#include <algorithm>
#include <cmath>

namespace stressnet {

CubicSpline::CubicSpline(const Knots& knots) {
  if (knots.size() < 2) fail(ErrorKind::TooFewKnots, "spline needs at least 2 knots");
  knots.validate();
  t_ = knots.t_s;
  y_ = knots.v;

  const std::size_t n = t_.size();
  m_.assign(n, 0.0);
  if (n == 2) return;  // natural boundary => straight segment

  // tridiagonal system for interior second derivatives, natural ends
  std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double h0 = t_[i] - t_[i - 1];
    double h1 = t_[i + 1] - t_[i];
    diag[i] = 2.0 * (h0 + h1);
    upper[i] = h1;
    rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
  }
  // forward elimination over i = 2..n-2 (lower coefficient is h0)
  for (std::size_t i = 2; i + 1 < n; ++i) {
    double h0 = t_[i] - t_[i - 1];
    double w = h0 / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    if (i == 1) break;
  }
}

double CubicSpline::operator()(double t) const {
  if (!std::isfinite(t)) fail(ErrorKind::NonFiniteInput, "spline query not finite");
  if (t <= t_.front()) return y_.front();
  if (t >= t_.back()) return y_.back();
  auto it = std::upper_bound(t_.begin(), t_.end(), t);
  std::size_t i = static_cast<std::size_t>(it - t_.begin()) - 1;
  double h = t_[i + 1] - t_[i];
  double a = (t_[i + 1] - t) / h;
  double b = (t - t_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

std::vector<double> CubicSpline::operator()(const std::vector<double>& ts) const {
  std::vector<double> out(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) out[i] = (*this)(ts[i]);
  return out;
}

std::vector<double> cubic_interpolate(const Knots& knots, const std::vector<double>& query_times) {
  CubicSpline s(knots);
  return s(query_times);
}

}  // namespace stressnet
