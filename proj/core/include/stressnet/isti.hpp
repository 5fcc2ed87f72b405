#pragma once

#include <cstddef>
#include <vector>

#include "stressnet/clip.hpp"
#include "stressnet/signal.hpp"

namespace stressnet {

/// Time-overlapping ECG and dZ/dt recordings of one session.
struct CardiacPair {
  Signal ecg;
  Signal dzdt;
};

struct PeakDetectorConfig {
  PeakThreshold threshold = PeakThreshold::adaptive(1.0);
  double min_distance_s = 0.4;
};

struct IstiConfig {
  PeakDetectorConfig ecg;
  PeakDetectorConfig dzdt;
  double max_lag_s = 0.5;
};

struct IstiKnotsResult {
  Knots knots;          // t = R-peak time (s), v = ISTI (ms)
  std::size_t skipped;  // ECG peaks with no dZ/dt partner within max_lag_s
};

/// Pairs each ECG peak with the first dZ/dt peak within (t, t + max_lag_s];
/// the pair's time difference in milliseconds is one ISTI knot. Unmatched
/// beats are skipped and counted.
IstiKnotsResult compute_isti_knots(const CardiacPair& pair, const IstiConfig& config = {});

/// Natural-spline interpolation of ISTI knots onto a uniform frame grid.
Signal isti_continuous(const Knots& knots, double t0_seconds, double fps, std::size_t n_frames);

/// v -> clamp(v / isti_max_ms, 0, 1).
std::vector<double> normalize_isti(const std::vector<double>& ms_values, double isti_max_ms);
double normalize_isti(double ms_value, double isti_max_ms);

/// Inverse of normalize_isti on (0, isti_max_ms).
std::vector<double> denormalize_isti(const std::vector<double>& values01, double isti_max_ms);
double denormalize_isti(double value01, double isti_max_ms);

/// Beats-per-minute over sliding windows [t, t+window_s), sample placed at
/// the window end, rate 1/stride_s. The record span defaults to the peak
/// extremes; pass it explicitly for records with silent stretches.
Signal compute_hr(const EventSeries& peaks, double window_s = 15.0, double stride_s = 1.0);
Signal compute_hr(const EventSeries& peaks, double record_start_s, double record_end_s,
                  double window_s, double stride_s);

/// RMSSD of successive RR differences (ms) per window; windows with fewer
/// than 3 peaks emit 0.
Signal compute_hrv_rmssd(const EventSeries& peaks, double window_s = 15.0, double stride_s = 1.0);
Signal compute_hrv_rmssd(const EventSeries& peaks, double record_start_s, double record_end_s,
                         double window_s, double stride_s);

/// Per-frame mean of raw counts inside roi, at clip frame rate.
Signal roi_signal(const ThermalClip& clip, const Rect& roi);

/// roi_signal band-passed to 0.1-0.85 Hz.
Signal breathing_signal(const ThermalClip& clip, const Rect& roi);

}  // namespace stressnet
