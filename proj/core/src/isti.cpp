#include "stressnet/isti.hpp"

#include <algorithm>
#include <cmath>

#include "stressnet/filter.hpp"
#include "stressnet/spline.hpp"

namespace stressnet {

IstiKnotsResult compute_isti_knots(const CardiacPair& pair, const IstiConfig& config) {
  if (!(config.max_lag_s > 0.0)) fail(ErrorKind::InvalidArgument, "max_lag_s must be > 0");
  EventSeries r = detect_peaks(pair.ecg, config.ecg.threshold, config.ecg.min_distance_s);
  EventSeries z = detect_peaks(pair.dzdt, config.dzdt.threshold, config.dzdt.min_distance_s);
  if (r.empty() || z.empty()) fail(ErrorKind::NoPeaksDetected, "no peaks in ECG or dZ/dt");

  IstiKnotsResult out;
  out.skipped = 0;
  for (double tr : r.times_s) {
    auto it = std::upper_bound(z.times_s.begin(), z.times_s.end(), tr);
    if (it == z.times_s.end() || *it > tr + config.max_lag_s) {
      ++out.skipped;
      continue;
    }
    out.knots.t_s.push_back(tr);
    out.knots.v.push_back((*it - tr) * 1000.0);
  }
  if (out.knots.size() < 2) fail(ErrorKind::FewerThanTwoKnots, "fewer than two ISTI knots");
  return out;
}

Signal isti_continuous(const Knots& knots, double t0_seconds, double fps, std::size_t n_frames) {
  if (!(fps > 0.0)) fail(ErrorKind::InvalidArgument, "fps must be > 0");
  CubicSpline s(knots);
  Signal out;
  out.sample_rate_hz = fps;
  out.t0_seconds = t0_seconds;
  out.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    out.samples[i] = s(t0_seconds + static_cast<double>(i) / fps);
  }
  return out;
}

double normalize_isti(double ms_value, double isti_max_ms) {
  if (!(isti_max_ms > 0.0)) fail(ErrorKind::NonPositiveScale, "isti_max_ms must be > 0");
  return std::clamp(ms_value / isti_max_ms, 0.0, 1.0);
}

std::vector<double> normalize_isti(const std::vector<double>& ms_values, double isti_max_ms) {
  std::vector<double> out(ms_values.size());
  for (std::size_t i = 0; i < ms_values.size(); ++i) out[i] = normalize_isti(ms_values[i], isti_max_ms);
  return out;
}

double denormalize_isti(double value01, double isti_max_ms) {
  if (!(isti_max_ms > 0.0)) fail(ErrorKind::NonPositiveScale, "isti_max_ms must be > 0");
  return value01 * isti_max_ms;
}

std::vector<double> denormalize_isti(const std::vector<double>& values01, double isti_max_ms) {
  std::vector<double> out(values01.size());
  for (std::size_t i = 0; i < values01.size(); ++i) out[i] = denormalize_isti(values01[i], isti_max_ms);
  return out;
}

namespace {

Signal windowed_event_stat(const EventSeries& peaks, double start_s, double end_s,
                           double window_s, double stride_s, bool rmssd) {
  if (!(window_s > 0.0) || !(stride_s > 0.0)) {
    fail(ErrorKind::InvalidArgument, "window_s and stride_s must be > 0");
  }
  peaks.validate();
  if (end_s - start_s < window_s) {
    fail(ErrorKind::WindowLongerThanRecord, "window longer than record span");
  }

  Signal out;
  out.sample_rate_hz = 1.0 / stride_s;
  out.t0_seconds = start_s + window_s;  // sample sits at the window end
  const auto& t = peaks.times_s;
  for (double w0 = start_s; w0 + window_s <= end_s + 1e-12; w0 += stride_s) {
    double w1 = w0 + window_s;
    auto lo = std::lower_bound(t.begin(), t.end(), w0);
    auto hi = std::lower_bound(t.begin(), t.end(), w1);
    auto count = static_cast<std::size_t>(hi - lo);
    if (!rmssd) {
      out.samples.push_back(static_cast<double>(count) * 60.0 / window_s);
    } else if (count < 3) {
      out.samples.push_back(0.0);
    } else {
      double acc = 0.0;
      std::size_t terms = 0;
      for (auto it = lo; it + 2 != hi; ++it) {
        double rr0 = (*(it + 1) - *it) * 1000.0;
        double rr1 = (*(it + 2) - *(it + 1)) * 1000.0;
        acc += (rr1 - rr0) * (rr1 - rr0);
        ++terms;
      }
      out.samples.push_back(std::sqrt(acc / static_cast<double>(terms)));
    }
  }
  return out;
}

}  // namespace

Signal compute_hr(const EventSeries& peaks, double record_start_s, double record_end_s,
                  double window_s, double stride_s) {
  return windowed_event_stat(peaks, record_start_s, record_end_s, window_s, stride_s, false);
}

Signal compute_hr(const EventSeries& peaks, double window_s, double stride_s) {
  if (peaks.empty()) fail(ErrorKind::WindowLongerThanRecord, "no peaks and no record span given");
  return compute_hr(peaks, peaks.times_s.front(), peaks.times_s.back(), window_s, stride_s);
}

Signal compute_hrv_rmssd(const EventSeries& peaks, double record_start_s, double record_end_s,
                         double window_s, double stride_s) {
  return windowed_event_stat(peaks, record_start_s, record_end_s, window_s, stride_s, true);
}

Signal compute_hrv_rmssd(const EventSeries& peaks, double window_s, double stride_s) {
  if (peaks.empty()) fail(ErrorKind::WindowLongerThanRecord, "no peaks and no record span given");
  return compute_hrv_rmssd(peaks, peaks.times_s.front(), peaks.times_s.back(), window_s, stride_s);
}

Signal roi_signal(const ThermalClip& clip, const Rect& roi) {
  if (roi.w == 0 || roi.h == 0 || roi.x0 + roi.w > clip.width || roi.y0 + roi.h > clip.height) {
    fail(ErrorKind::RoiOutOfBounds, "roi outside frame");
  }
  Signal out;
  out.sample_rate_hz = clip.fps;
  out.t0_seconds = clip.t0_seconds;
  const std::size_t frames = clip.frame_count();
  out.samples.resize(frames);
  const double area = static_cast<double>(roi.w * roi.h);
  for (std::size_t f = 0; f < frames; ++f) {
    auto fr = clip.frame(f);
    double acc = 0.0;
    for (std::size_t y = roi.y0; y < roi.y0 + roi.h; ++y) {
      const std::uint16_t* row = fr.data() + y * clip.width;
      for (std::size_t x = roi.x0; x < roi.x0 + roi.w; ++x) acc += row[x];
    }
    out.samples[f] = acc / area;
  }
  return out;
}

Signal breathing_signal(const ThermalClip& clip, const Rect& roi) {
  return fir_bandpass(roi_signal(clip, roi), 0.1, 0.85);
}

}  // namespace stressnet
