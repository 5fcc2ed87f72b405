#include "stressnet/filter.hpp"

#include <cmath>

namespace stressnet {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) fail(ErrorKind::NonPositiveSigma, "sigma must be > 0");
  const auto radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (long i = -radius; i <= radius; ++i) {
    double v = std::exp(-0.5 * (static_cast<double>(i) / sigma) * (static_cast<double>(i) / sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

std::vector<double> gaussian_smooth_1d(const std::vector<double>& values, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const long radius = static_cast<long>(k.size() / 2);
  const long n = static_cast<long>(values.size());
  std::vector<double> out(values.size());
  if (n == 0) return out;
  for (long i = 0; i < n; ++i) {
    double acc = 0.0;
    for (long j = -radius; j <= radius; ++j) {
      long idx = i + j;
      if (idx < 0) idx = 0;
      if (idx >= n) idx = n - 1;
      acc += k[static_cast<std::size_t>(j + radius)] * values[static_cast<std::size_t>(idx)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

std::vector<double> fir_bandpass_taps(double sample_rate_hz, double low_hz, double high_hz) {
  if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < sample_rate_hz / 2.0)) {
    fail(ErrorKind::InvalidBand, "need 0 < low < high < rate/2");
  }
  const auto n = static_cast<std::size_t>(4 * static_cast<long>(std::ceil(sample_rate_hz)) + 1);
  const long mid = static_cast<long>(n / 2);
  const double f1 = low_hz / sample_rate_hz;
  const double f2 = high_hz / sample_rate_hz;

  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    long k = static_cast<long>(i) - mid;
    double ideal;
    if (k == 0) {
      ideal = 2.0 * (f2 - f1);
    } else {
      double x = static_cast<double>(k);
      ideal = (std::sin(2.0 * kPi * f2 * x) - std::sin(2.0 * kPi * f1 * x)) / (kPi * x);
    }
    double w = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1));
    h[i] = ideal * w;
  }
  // null the DC gain exactly
  double mean = 0.0;
  for (double v : h) mean += v;
  mean /= static_cast<double>(n);
  for (double& v : h) v -= mean;
  return h;
}

Signal fir_bandpass(const Signal& sig, double low_hz, double high_hz) {
  sig.validate();
  const std::vector<double> h = fir_bandpass_taps(sig.sample_rate_hz, low_hz, high_hz);
  const std::size_t n = sig.size();
  if (n < h.size()) fail(ErrorKind::SignalTooShort, "signal shorter than filter");

  const long radius = static_cast<long>(h.size() / 2);
  const long len = static_cast<long>(n);
  Signal out;
  out.sample_rate_hz = sig.sample_rate_hz;
  out.t0_seconds = sig.t0_seconds;
  out.samples.resize(n);
  for (long i = 0; i < len; ++i) {
    double acc = 0.0;
    for (long j = -radius; j <= radius; ++j) {
      long idx = i + j;
      if (idx < 0) idx = 0;
      if (idx >= len) idx = len - 1;
      acc += h[static_cast<std::size_t>(radius - j)] * sig.samples[static_cast<std::size_t>(idx)];
    }
    out.samples[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

}  // namespace stressnet
