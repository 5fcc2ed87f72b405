#pragma once

#include <vector>

#include "stressnet/error.hpp"

namespace stressnet {

struct ScoredLabel {
  double score = 0.0;
  bool positive = false;
};

double mse(const std::vector<double>& pred, const std::vector<double>& truth);

/// Pearson correlation, population (1/N) convention.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Mean precision at the positives, ranking by descending score with stable
/// tie order.
double average_precision(const std::vector<ScoredLabel>& scored);

}  // namespace stressnet
