#pragma once

#include <cstddef>
#include <vector>

#include "stressnet/error.hpp"

namespace stressnet {

/// Uniformly sampled real-valued time series. Sample i lives at
/// t0_seconds + i / sample_rate_hz.
struct Signal {
  std::vector<double> samples;
  double sample_rate_hz = 1.0;
  double t0_seconds = 0.0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double time_of(std::size_t i) const { return t0_seconds + static_cast<double>(i) / sample_rate_hz; }
  double end_time() const {
    return samples.empty() ? t0_seconds : time_of(samples.size() - 1);
  }
  double duration() const { return end_time() - t0_seconds; }

  /// Throws unless rate > 0 and all samples are finite.
  void validate() const;
};

/// Strictly increasing event timestamps (R-peaks, Z-points).
struct EventSeries {
  std::vector<double> times_s;

  std::size_t size() const { return times_s.size(); }
  bool empty() const { return times_s.empty(); }
  void validate() const;
};

/// (time, value) pairs with strictly increasing times; spline input.
struct Knots {
  std::vector<double> t_s;
  std::vector<double> v;

  std::size_t size() const { return t_s.size(); }
  void validate() const;
};

struct PeakThreshold {
  enum class Mode { Absolute, Adaptive };
  Mode mode = Mode::Adaptive;
  double value = 1.0;  // theta for Absolute, k for Adaptive (mean + k*stddev)

  static PeakThreshold absolute(double theta) { return {Mode::Absolute, theta}; }
  static PeakThreshold adaptive(double k) { return {Mode::Adaptive, k}; }
};

/// Strict local maxima above threshold, greedily pruned from largest
/// amplitude so that no two survivors lie within min_distance_s, each
/// refined to sub-sample timing with a 3-point parabola fit.
EventSeries detect_peaks(const Signal& sig, PeakThreshold threshold, double min_distance_s);

/// Linear interpolation of sig at n equally spaced times spanning
/// [t0, t_end].
std::vector<double> resample_fixed(const Signal& sig, std::size_t n);

}  // namespace stressnet
