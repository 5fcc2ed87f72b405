#include <doctest.h>

#include <cmath>
#include <complex>

#include "stressnet/filter.hpp"
#include "stressnet/rng.hpp"
#include "stressnet/signal.hpp"
#include "stressnet/spline.hpp"

using namespace stressnet;

namespace {

constexpr double kPi = 3.14159265358979323846;

Signal make_sine(double freq_hz, double rate_hz, double duration_s, double amp = 1.0) {
  Signal s;
  s.sample_rate_hz = rate_hz;
  auto n = static_cast<std::size_t>(std::llround(rate_hz * duration_s));
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.samples[i] = amp * std::sin(2.0 * kPi * freq_hz * static_cast<double>(i) / rate_hz);
  }
  return s;
}

// quadrature amplitude estimate of a known tone over [lo, hi)
double tone_amplitude(const Signal& s, double freq_hz, std::size_t lo, std::size_t hi) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = lo; i < hi; ++i) {
    double t = s.time_of(i);
    acc += s.samples[i] * std::exp(std::complex<double>(0.0, -2.0 * kPi * freq_hz * t));
  }
  return 2.0 * std::abs(acc) / static_cast<double>(hi - lo);
}

double taps_gain(const std::vector<double>& taps, double freq_hz, double rate_hz) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = 0; i < taps.size(); ++i) {
    acc += taps[i] * std::exp(std::complex<double>(0.0, -2.0 * kPi * (freq_hz / rate_hz) *
                                                             static_cast<double>(i)));
  }
  return std::abs(acc);
}

}  // namespace

TEST_CASE("detect_peaks finds sine maxima with sub-sample timing") {
  Signal s = make_sine(1.0, 250.0, 5.0);
  EventSeries peaks = detect_peaks(s, PeakThreshold::adaptive(1.0), 0.4);
  REQUIRE(peaks.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(std::abs(peaks.times_s[k] - (0.25 + static_cast<double>(k))) <= 1.0 / 250.0);
  }
}

TEST_CASE("detect_peaks on a constant signal is empty") {
  Signal s;
  s.sample_rate_hz = 100.0;
  s.samples.assign(500, 3.5);
  CHECK(detect_peaks(s, PeakThreshold::absolute(0.0), 0.1).empty());
}

TEST_CASE("detect_peaks keeps the taller of two close bumps") {
  // bumps 0.1 s apart, min distance 0.4: greedy pruning by amplitude keeps
  // only the taller one
  Signal s;
  s.sample_rate_hz = 100.0;
  s.samples.assign(300, 0.0);
  auto add_bump = [&](double center, double amp) {
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
      double dt = s.time_of(i) - center;
      s.samples[i] += amp * std::exp(-0.5 * (dt / 0.02) * (dt / 0.02));
    }
  };
  add_bump(1.0, 1.0);
  add_bump(1.1, 0.7);
  EventSeries peaks = detect_peaks(s, PeakThreshold::absolute(0.3), 0.4);
  REQUIRE(peaks.size() == 1);
  CHECK(std::abs(peaks.times_s[0] - 1.0) < 0.01);
}

TEST_CASE("detect_peaks validates input") {
  Signal tiny;
  tiny.sample_rate_hz = 10.0;
  tiny.samples = {1.0, 2.0};
  CHECK_THROWS_WITH_AS(detect_peaks(tiny, PeakThreshold::adaptive(1.0), 0.1), doctest::Contains("EmptySignal"), Error);

  Signal bad;
  bad.sample_rate_hz = 10.0;
  bad.samples = {0.0, std::nan(""), 0.0, 1.0};
  CHECK_THROWS_AS(detect_peaks(bad, PeakThreshold::adaptive(1.0), 0.1), Error);
}

TEST_CASE("detect_peaks output is increasing and honors min distance") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    Signal s;
    s.sample_rate_hz = 50.0;
    s.samples.resize(400);
    for (double& v : s.samples) v = rng.normal();
    double min_dist = 0.1 + 0.1 * rng.uniform();
    EventSeries peaks = detect_peaks(s, PeakThreshold::adaptive(0.5), min_dist);
    for (std::size_t i = 1; i < peaks.size(); ++i) {
      CHECK(peaks.times_s[i] > peaks.times_s[i - 1]);
      CHECK(peaks.times_s[i] - peaks.times_s[i - 1] >= min_dist);
    }
  }
}

TEST_CASE("cubic_interpolate constant and two-knot cases") {
  Knots flat{{0.0, 1.0, 2.0}, {1.0, 1.0, 1.0}};
  auto v = cubic_interpolate(flat, {0.5, 1.5});
  CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(1.0).epsilon(1e-12));

  Knots lin{{0.0, 1.0}, {0.0, 1.0}};
  CHECK(cubic_interpolate(lin, {0.5})[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("cubic_interpolate reproduces knot values") {
  Knots k;
  for (double t : {0.0, 1.0, 2.0, 3.0}) {
    k.t_s.push_back(t);
    k.v.push_back(t * t * t);
  }
  auto v = cubic_interpolate(k, k.t_s);
  for (std::size_t i = 0; i < k.size(); ++i) CHECK(std::abs(v[i] - k.v[i]) < 1e-9);
}

TEST_CASE("cubic_interpolate clamps outside the knot span") {
  Knots k{{0.0, 1.0, 2.0}, {3.0, 5.0, 4.0}};
  auto v = cubic_interpolate(k, {-10.0, 12.0});
  CHECK(v[0] == 3.0);
  CHECK(v[1] == 4.0);
}

TEST_CASE("cubic spline second derivative is continuous at interior knots") {
  // 4-point one-sided stencils are exact for cubics, so the two one-sided
  // estimates must agree at every interior knot
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    Knots k;
    double t = 0.0;
    for (int i = 0; i < 8; ++i) {
      k.t_s.push_back(t);
      k.v.push_back(rng.uniform(-2.0, 2.0));
      t += 0.5 + rng.uniform();
    }
    CubicSpline s(k);
    for (std::size_t i = 1; i + 1 < k.size(); ++i) {
      double gap = std::min(k.t_s[i] - k.t_s[i - 1], k.t_s[i + 1] - k.t_s[i]);
      double h = gap / 8.0;
      double tc = k.t_s[i];
      double right = (2.0 * s(tc) - 5.0 * s(tc + h) + 4.0 * s(tc + 2 * h) - s(tc + 3 * h)) / (h * h);
      double left = (2.0 * s(tc) - 5.0 * s(tc - h) + 4.0 * s(tc - 2 * h) - s(tc - 3 * h)) / (h * h);
      CHECK(std::abs(right - left) < 1e-6);
    }
  }
}

TEST_CASE("cubic_interpolate rejects bad knots") {
  Knots one{{1.0}, {2.0}};
  CHECK_THROWS_WITH_AS(cubic_interpolate(one, {1.0}), doctest::Contains("TooFewKnots"), Error);
  Knots dup{{0.0, 0.0, 1.0}, {1.0, 2.0, 3.0}};
  CHECK_THROWS_WITH_AS(cubic_interpolate(dup, {0.5}), doctest::Contains("NonMonotonicKnots"), Error);
}

TEST_CASE("fir_bandpass frequency response on the breathing band") {
  auto taps = fir_bandpass_taps(15.0, 0.1, 0.85);
  CHECK(taps.size() == 61);

  // exact DC null by construction
  double dc = 0.0;
  for (double h : taps) dc += h;
  CHECK(std::abs(dc) < 1e-12);

  // measured pass-band gains of this design (61 taps cannot hold the
  // band edges tighter than this)
  CHECK(taps_gain(taps, 0.3, 15.0) == doctest::Approx(0.9721).epsilon(0.01));
  CHECK(taps_gain(taps, 0.4, 15.0) == doctest::Approx(1.0652).epsilon(0.01));
  CHECK(taps_gain(taps, 2.0, 15.0) < 0.05);
}

TEST_CASE("fir_bandpass passes a 0.4 Hz tone at the designed gain") {
  Signal s = make_sine(0.4, 15.0, 40.0);
  Signal y = fir_bandpass(s, 0.1, 0.85);
  REQUIRE(y.size() == s.size());
  auto taps = fir_bandpass_taps(15.0, 0.1, 0.85);
  // whole cycles only: 2 cycles of 0.4 Hz = 75 samples at 15 Hz
  std::size_t lo = taps.size();
  std::size_t blocks = (s.size() - 2 * taps.size()) / 75;
  std::size_t hi = lo + blocks * 75;
  double amp = tone_amplitude(y, 0.4, lo, hi);
  // time-domain amplitude matches the frequency response within 1%, and
  // stays within 7% of unity
  CHECK(amp == doctest::Approx(taps_gain(taps, 0.4, 15.0)).epsilon(0.01));
  CHECK(std::abs(amp - 1.0) < 0.07);
}

TEST_CASE("fir_bandpass rejects DC") {
  Signal s;
  s.sample_rate_hz = 15.0;
  s.samples.assign(900, 5.0);
  Signal y = fir_bandpass(s, 0.1, 0.85);
  double worst = 0.0;
  for (double v : y.samples) worst = std::max(worst, std::abs(v));
  CHECK(worst < 0.01 * 5.0);
}

TEST_CASE("fir_bandpass of zero is zero") {
  Signal s;
  s.sample_rate_hz = 15.0;
  s.samples.assign(200, 0.0);
  Signal y = fir_bandpass(s, 0.1, 0.85);
  for (double v : y.samples) CHECK(v == 0.0);
}

TEST_CASE("fir_bandpass shift invariance on interior samples") {
  Rng rng(11);
  Signal s;
  s.sample_rate_hz = 15.0;
  s.samples.resize(400);
  for (double& v : s.samples) v = rng.normal();

  const std::size_t shift = 7;
  Signal shifted;
  shifted.sample_rate_hz = 15.0;
  shifted.samples.assign(s.samples.begin() + shift, s.samples.end());

  Signal y = fir_bandpass(s, 0.1, 0.85);
  Signal ys = fir_bandpass(shifted, 0.1, 0.85);
  const std::size_t margin = fir_bandpass_taps(15.0, 0.1, 0.85).size();
  for (std::size_t i = margin; i + margin < ys.size(); ++i) {
    CHECK(std::abs(ys.samples[i] - y.samples[i + shift]) < 1e-9);
  }
}

TEST_CASE("fir_bandpass validates band and length") {
  Signal s = make_sine(1.0, 15.0, 10.0);
  CHECK_THROWS_WITH_AS(fir_bandpass(s, 0.0, 0.85), doctest::Contains("InvalidBand"), Error);
  CHECK_THROWS_WITH_AS(fir_bandpass(s, 0.9, 0.3), doctest::Contains("InvalidBand"), Error);
  CHECK_THROWS_WITH_AS(fir_bandpass(s, 0.1, 8.0), doctest::Contains("InvalidBand"), Error);

  Signal tiny = make_sine(1.0, 15.0, 2.0);  // 30 samples < 61 taps
  CHECK_THROWS_WITH_AS(fir_bandpass(tiny, 0.1, 0.85), doctest::Contains("SignalTooShort"), Error);
}

TEST_CASE("gaussian_smooth_1d preserves constants and normalizes") {
  std::vector<double> c(5, 5.0);
  for (double sigma : {0.5, 1.0, 3.0}) {
    auto out = gaussian_smooth_1d(c, sigma);
    for (double v : out) CHECK(v == doctest::Approx(5.0).epsilon(1e-12));
  }

  std::vector<double> impulse(21, 0.0);
  impulse[10] = 1.0;
  auto out = gaussian_smooth_1d(impulse, 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    sum += out[i];
    CHECK(out[i] == doctest::Approx(out[out.size() - 1 - i]).epsilon(1e-12));
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

  auto k = gaussian_kernel(2.7);
  double ks = 0.0;
  for (double v : k) ks += v;
  CHECK(std::abs(ks - 1.0) < 1e-12);
}

TEST_CASE("gaussian_smooth_1d is linear and never grows the max") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> a(64), b(64), ab(64);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
      ab[i] = a[i] + b[i];
    }
    auto sa = gaussian_smooth_1d(a, 2.0);
    auto sb = gaussian_smooth_1d(b, 2.0);
    auto sab = gaussian_smooth_1d(ab, 2.0);
    double max_in = 0.0, max_out = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::abs(sab[i] - (sa[i] + sb[i])) < 1e-9);
      max_in = std::max(max_in, std::abs(a[i]));
      max_out = std::max(max_out, std::abs(sa[i]));
    }
    CHECK(max_out <= max_in + 1e-12);
  }
  CHECK_THROWS_WITH_AS(gaussian_smooth_1d({1.0, 2.0}, 0.0), doctest::Contains("NonPositiveSigma"),
                       Error);
}

TEST_CASE("resample_fixed linear interpolation") {
  Signal s;
  s.sample_rate_hz = 1.0;
  s.samples = {0.0, 2.0};
  auto v = resample_fixed(s, 3);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == 0.0);
  CHECK(v[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v[2] == 2.0);

  Signal c;
  c.sample_rate_hz = 4.0;
  c.samples.assign(9, 7.25);
  for (double x : resample_fixed(c, 17)) CHECK(x == doctest::Approx(7.25).epsilon(1e-12));
}

TEST_CASE("resample_fixed identity round trip") {
  Rng rng(9);
  Signal s;
  s.sample_rate_hz = 12.5;
  s.t0_seconds = 3.25;
  s.samples.resize(97);
  for (double& v : s.samples) v = rng.normal();
  auto v = resample_fixed(s, s.size());
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(v[i] - s.samples[i]) < 1e-12);

  Signal empty;
  CHECK_THROWS_WITH_AS(resample_fixed(empty, 4), doctest::Contains("EmptySignal"), Error);
  CHECK_THROWS_AS(resample_fixed(s, 1), Error);
}
