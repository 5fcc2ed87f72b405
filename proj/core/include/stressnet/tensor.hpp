#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "stressnet/error.hpp"

namespace stressnet {

/// Dense row-major array of doubles. All network math runs at 64-bit
/// precision; files store 32-bit.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(element_count(shape), 0.0);
  }

  static std::size_t element_count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
  }

  std::size_t size() const { return data.size(); }
  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  void check_same_shape(const Tensor& other, const char* what) const {
    if (shape != other.shape) fail(ErrorKind::ShapeMismatch, what);
  }
};

}  // namespace stressnet
