#pragma once

#include <cstdint>
#include <cstddef>
#include <span>
#include <vector>

#include "stressnet/error.hpp"

namespace stressnet {

struct Rect {
  std::size_t x0 = 0;
  std::size_t y0 = 0;
  std::size_t w = 0;
  std::size_t h = 0;
};

/// Raw 16-bit thermal video. Frames are stored contiguously, row-major.
struct ThermalClip {
  std::size_t width = 0;
  std::size_t height = 0;
  double fps = 1.0;
  double t0_seconds = 0.0;
  std::vector<std::uint16_t> data;  // num_frames * height * width

  std::size_t frame_count() const {
    std::size_t fs = width * height;
    return fs == 0 ? 0 : data.size() / fs;
  }
  std::span<const std::uint16_t> frame(std::size_t i) const {
    return {data.data() + i * width * height, width * height};
  }
  std::span<std::uint16_t> frame(std::size_t i) {
    return {data.data() + i * width * height, width * height};
  }
  double frame_time(std::size_t i) const { return t0_seconds + static_cast<double>(i) / fps; }
};

/// Real-valued preprocessed video, same layout as ThermalClip.
struct FeatureClip {
  std::size_t width = 0;
  std::size_t height = 0;
  double fps = 1.0;
  double t0_seconds = 0.0;
  std::vector<double> data;

  std::size_t frame_count() const {
    std::size_t fs = width * height;
    return fs == 0 ? 0 : data.size() / fs;
  }
  std::span<const double> frame(std::size_t i) const {
    return {data.data() + i * width * height, width * height};
  }
  std::span<double> frame(std::size_t i) {
    return {data.data() + i * width * height, width * height};
  }
  double frame_time(std::size_t i) const { return t0_seconds + static_cast<double>(i) / fps; }
};

/// Per-frame sub-rectangle copy; timestamps unchanged.
ThermalClip crop(const ThermalClip& clip, std::size_t x0, std::size_t y0, std::size_t w, std::size_t h);

}  // namespace stressnet
