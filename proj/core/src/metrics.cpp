#include "stressnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stressnet {

double mse(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size()) fail(ErrorKind::LengthMismatch, "mse length mismatch");
  if (pred.empty()) fail(ErrorKind::LengthMismatch, "mse on empty arrays");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - truth[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail(ErrorKind::LengthMismatch, "pearson length mismatch");
  const std::size_t n = x.size();
  if (n < 2) fail(ErrorKind::LengthMismatch, "pearson needs >= 2 samples");
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) fail(ErrorKind::ZeroVariance, "pearson with constant input");
  return sxy / std::sqrt(sxx * syy);
}

double average_precision(const std::vector<ScoredLabel>& scored) {
  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scored[a].score > scored[b].score;
  });
  std::size_t positives = 0;
  double acc = 0.0;
  std::size_t rank = 0;
  for (std::size_t idx : order) {
    ++rank;
    if (scored[idx].positive) {
      ++positives;
      acc += static_cast<double>(positives) / static_cast<double>(rank);
    }
  }
  if (positives == 0) fail(ErrorKind::NoPositives, "average precision needs >= 1 positive");
  return acc / static_cast<double>(positives);
}

}  // namespace stressnet
