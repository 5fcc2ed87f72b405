#include "stressnet/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stressnet {

void Signal::validate() const {
  if (!(sample_rate_hz > 0.0)) fail(ErrorKind::InvalidArgument, "sample_rate_hz must be > 0");
  if (!std::isfinite(t0_seconds)) fail(ErrorKind::NonFiniteInput, "t0_seconds not finite");
  for (double v : samples) {
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteInput, "signal sample not finite");
  }
}

void EventSeries::validate() const {
  for (std::size_t i = 0; i < times_s.size(); ++i) {
    if (!std::isfinite(times_s[i])) fail(ErrorKind::NonFiniteInput, "event time not finite");
    if (i > 0 && !(times_s[i] > times_s[i - 1])) {
      fail(ErrorKind::InvalidArgument, "event times must be strictly increasing");
    }
  }
}

void Knots::validate() const {
  if (t_s.size() != v.size()) fail(ErrorKind::LengthMismatch, "knot t/v size mismatch");
  for (std::size_t i = 0; i < t_s.size(); ++i) {
    if (!std::isfinite(t_s[i]) || !std::isfinite(v[i])) {
      fail(ErrorKind::NonFiniteInput, "knot not finite");
    }
    if (i > 0 && !(t_s[i] > t_s[i - 1])) {
      fail(ErrorKind::NonMonotonicKnots, "knot times must be strictly increasing");
    }
  }
}

EventSeries detect_peaks(const Signal& sig, PeakThreshold threshold, double min_distance_s) {
  if (sig.size() < 3) fail(ErrorKind::EmptySignal, "detect_peaks needs at least 3 samples");
  if (!(min_distance_s >= 0.0)) fail(ErrorKind::InvalidArgument, "min_distance_s must be >= 0");
  sig.validate();

  const std::vector<double>& x = sig.samples;
  double cut;
  if (threshold.mode == PeakThreshold::Mode::Absolute) {
    cut = threshold.value;
  } else {
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    cut = mean + threshold.value * std::sqrt(var);
  }

  struct Candidate {
    double time;
    double amplitude;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    // strictly above the left neighbor, at least the right one: a sampled
    // extremum can land exactly between two equal samples, and the
    // parabola fit then recovers the midpoint
    if (!(x[i] > x[i - 1] && x[i] >= x[i + 1])) continue;
    if (!(x[i] > cut)) continue;
    // parabola through the three samples around the maximum; vertex offset
    // is within (-0.5, 0.5) samples because x[i] is a strict maximum
    double denom = x[i - 1] - 2.0 * x[i] + x[i + 1];
    double delta = denom == 0.0 ? 0.0 : 0.5 * (x[i - 1] - x[i + 1]) / denom;
    double t = sig.t0_seconds + (static_cast<double>(i) + delta) / sig.sample_rate_hz;
    candidates.push_back({t, x[i]});
  }

  // prune from largest amplitude; refined times are what the min-distance
  // guarantee is measured on
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].amplitude > candidates[b].amplitude;
  });
  std::vector<double> kept;
  for (std::size_t idx : order) {
    double t = candidates[idx].time;
    bool blocked = false;
    for (double k : kept) {
      if (std::abs(k - t) < min_distance_s) {
        blocked = true;
        break;
      }
    }
    if (!blocked) kept.push_back(t);
  }
  std::sort(kept.begin(), kept.end());

  EventSeries out;
  out.times_s = std::move(kept);
  return out;
}

std::vector<double> resample_fixed(const Signal& sig, std::size_t n) {
  if (sig.empty()) fail(ErrorKind::EmptySignal, "resample_fixed on empty signal");
  if (n < 2) fail(ErrorKind::InvalidArgument, "resample_fixed needs n >= 2");
  sig.validate();

  const std::size_t m = sig.size();
  std::vector<double> out(n);
  if (m == 1) {
    std::fill(out.begin(), out.end(), sig.samples[0]);
    return out;
  }
  // positions in index space: exact when n == m
  for (std::size_t i = 0; i < n; ++i) {
    double pos = static_cast<double>(i) * static_cast<double>(m - 1) / static_cast<double>(n - 1);
    auto lo = static_cast<std::size_t>(pos);
    if (lo >= m - 1) {
      out[i] = sig.samples[m - 1];
      continue;
    }
    double frac = pos - static_cast<double>(lo);
    out[i] = sig.samples[lo] * (1.0 - frac) + sig.samples[lo + 1] * frac;
  }
  return out;
}

}  // namespace stressnet
