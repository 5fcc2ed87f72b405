#include <doctest.h>

#include <cmath>

#include "stressnet/emission.hpp"
#include "stressnet/filter.hpp"
#include "stressnet/rng.hpp"

using namespace stressnet;

namespace {

ThermalClip random_clip(std::size_t w, std::size_t h, std::size_t frames, std::uint64_t seed) {
  ThermalClip c;
  c.width = w;
  c.height = h;
  c.fps = 15.0;
  c.data.resize(frames * w * h);
  Rng rng(seed);
  for (auto& v : c.data) v = static_cast<std::uint16_t>(rng.below(65536));
  return c;
}

}  // namespace

TEST_CASE("crop identity and centered arithmetic") {
  ThermalClip c = random_clip(16, 12, 3, 1);
  ThermalClip full = crop(c, 0, 0, 16, 12);
  CHECK(full.data == c.data);

  // the 640x240 -> centered 360x240 case: x0 = (640-360)/2 = 140
  PreprocessConfig cfg;
  cfg.crop_width = 360;
  cfg.crop_height = 240;
  auto rect = cfg.resolve_crop(640, 240);
  REQUIRE(rect.has_value());
  CHECK(rect->x0 == 140);
  CHECK(rect->y0 == 0);
  CHECK(rect->w == 360);
  CHECK(rect->h == 240);

  CHECK_THROWS_WITH_AS(crop(c, 0, 0, 0, 5), doctest::Contains("RectOutOfBounds"), Error);
  CHECK_THROWS_WITH_AS(crop(c, 10, 0, 8, 5), doctest::Contains("RectOutOfBounds"), Error);
}

TEST_CASE("crop takes the right pixels") {
  ThermalClip c = random_clip(6, 5, 2, 2);
  ThermalClip sub = crop(c, 2, 1, 3, 2);
  for (std::size_t f = 0; f < 2; ++f) {
    for (std::size_t y = 0; y < 2; ++y) {
      for (std::size_t x = 0; x < 3; ++x) {
        CHECK(sub.frame(f)[y * 3 + x] == c.frame(f)[(y + 1) * 6 + (x + 2)]);
      }
    }
  }
}

TEST_CASE("temporal_derivative basics and round trip") {
  ThermalClip flat = random_clip(4, 4, 1, 3);
  flat.data.assign(5 * 16, 1234);

  FeatureClip d = temporal_derivative(flat);
  CHECK(d.frame_count() == 4);
  for (double v : d.data) CHECK(v == 0.0);

  // +3 counts per frame everywhere -> uniform 3
  ThermalClip ramp;
  ramp.width = ramp.height = 3;
  ramp.fps = 15.0;
  for (std::uint16_t f = 0; f < 6; ++f) {
    for (int i = 0; i < 9; ++i) ramp.data.push_back(static_cast<std::uint16_t>(100 + 3 * f));
  }
  for (double v : temporal_derivative(ramp).data) CHECK(v == 3.0);

  // telescoping reconstruction is exact
  ThermalClip noisy = random_clip(5, 4, 7, 4);
  FeatureClip dv = temporal_derivative(noisy);
  for (std::size_t f = 0; f + 1 < noisy.frame_count(); ++f) {
    for (std::size_t i = 0; i < 20; ++i) {
      double rebuilt = static_cast<double>(noisy.frame(f)[i]) + dv.frame(f)[i];
      CHECK(rebuilt == doctest::Approx(static_cast<double>(noisy.frame(f + 1)[i])).epsilon(1e-12));
    }
  }

  ThermalClip single = random_clip(4, 4, 1, 5);
  CHECK_THROWS_WITH_AS(temporal_derivative(single), doctest::Contains("TooFewFrames"), Error);
}

TEST_CASE("sign_log fixed points, analytic values, oddness, monotonicity") {
  CHECK(sign_log(0.0) == 0.0);
  const double e1 = std::exp(1.0) - 1.0;
  CHECK(sign_log(e1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sign_log(-e1) == doctest::Approx(-1.0).epsilon(1e-12));

  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    double x = rng.normal(0.0, 100.0);
    CHECK(sign_log(-x) == -sign_log(x));  // exact oddness
    double y = x + std::abs(rng.normal(0.0, 10.0)) + 1e-9;
    CHECK(sign_log(x) < sign_log(y));
  }
}

TEST_CASE("spatiotemporal_gaussian equals dense 3-D convolution") {
  FeatureClip fc;
  fc.width = fc.height = 9;
  fc.fps = 15.0;
  fc.data.resize(9 * 9 * 9);
  Rng rng(8);
  for (double& v : fc.data) v = rng.normal();

  const double ss = 1.1, st = 0.9;  // radii 4 and 3: kernels overlap the block
  FeatureClip out = spatiotemporal_gaussian(fc, ss, st);

  auto ks = gaussian_kernel(ss);
  auto kt = gaussian_kernel(st);
  const long rs = static_cast<long>(ks.size() / 2);
  const long rt = static_cast<long>(kt.size() / 2);
  auto clampi = [](long v, long n) { return v < 0 ? 0L : (v >= n ? n - 1 : v); };

  // brute-force dense kernel = outer product of the three 1-D kernels
  for (long f = 0; f < 9; ++f) {
    for (long y = 0; y < 9; ++y) {
      for (long x = 0; x < 9; ++x) {
        double acc = 0.0;
        for (long dt = -rt; dt <= rt; ++dt) {
          for (long dy = -rs; dy <= rs; ++dy) {
            for (long dx = -rs; dx <= rs; ++dx) {
              double kv = kt[static_cast<std::size_t>(dt + rt)] *
                          ks[static_cast<std::size_t>(dy + rs)] *
                          ks[static_cast<std::size_t>(dx + rs)];
              long ff = clampi(f + dt, 9), yy = clampi(y + dy, 9), xx = clampi(x + dx, 9);
              acc += kv * fc.data[static_cast<std::size_t>(ff * 81 + yy * 9 + xx)];
            }
          }
        }
        CHECK(std::abs(out.data[static_cast<std::size_t>(f * 81 + y * 9 + x)] - acc) < 1e-9);
      }
    }
  }
}

TEST_CASE("spatiotemporal_gaussian preserves constants and impulse symmetry") {
  FeatureClip fc;
  fc.width = fc.height = 7;
  fc.fps = 15.0;
  fc.data.assign(5 * 49, 2.5);
  FeatureClip out = spatiotemporal_gaussian(fc);
  for (double v : out.data) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));

  FeatureClip impulse;
  impulse.width = impulse.height = 15;
  impulse.fps = 15.0;
  impulse.data.assign(15 * 15, 0.0);
  impulse.data[7 * 15 + 7] = 1.0;
  FeatureClip blur = spatiotemporal_gaussian(impulse, 2.0, 1.0);
  for (std::size_t y = 0; y < 15; ++y) {
    for (std::size_t x = 0; x < 15; ++x) {
      CHECK(blur.data[y * 15 + x] ==
            doctest::Approx(blur.data[x * 15 + y]).epsilon(1e-12));  // transpose symmetry
      CHECK(blur.data[y * 15 + x] ==
            doctest::Approx(blur.data[(14 - y) * 15 + (14 - x)]).epsilon(1e-12));
    }
  }
  CHECK_THROWS_WITH_AS(spatiotemporal_gaussian(impulse, -1.0, 2.0),
                       doctest::Contains("NonPositiveSigma"), Error);
}

TEST_CASE("preprocess pipeline toggles") {
  ThermalClip flat;
  flat.width = flat.height = 8;
  flat.fps = 15.0;
  flat.data.assign(30 * 64, 4321);
  FeatureClip out = preprocess(flat);
  CHECK(out.frame_count() == 29);
  for (double v : out.data) CHECK(v == 0.0);

  ThermalClip c = random_clip(8, 8, 10, 12);
  PreprocessConfig raw;
  raw.derivative = false;
  raw.signlog = false;
  raw.gaussian = false;
  FeatureClip asreal = preprocess(c, raw);
  REQUIRE(asreal.data.size() == c.data.size());
  for (std::size_t i = 0; i < c.data.size(); ++i) {
    CHECK(asreal.data[i] == static_cast<double>(c.data[i]));
  }
}

TEST_CASE("preprocess is deterministic and finite") {
  ThermalClip c = random_clip(12, 10, 40, 99);
  FeatureClip a = preprocess(c);
  FeatureClip b = preprocess(c);
  REQUIRE(a.data.size() == b.data.size());
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    CHECK(a.data[i] == b.data[i]);  // bitwise
    CHECK(std::isfinite(a.data[i]));
  }
}

TEST_CASE("preprocess is translation-equivariant in time") {
  ThermalClip c = random_clip(6, 6, 60, 31);
  const std::size_t k = 4;
  ThermalClip dropped = c;
  dropped.data.erase(dropped.data.begin(),
                     dropped.data.begin() + static_cast<long>(k * c.width * c.height));

  FeatureClip full = preprocess(c);
  FeatureClip part = preprocess(dropped);
  // interior of the temporal filter support: radius ceil(3*4) = 12
  const std::size_t margin = 13;
  for (std::size_t f = margin; f + margin < part.frame_count(); ++f) {
    for (std::size_t i = 0; i < 36; ++i) {
      CHECK(std::abs(part.frame(f)[i] - full.frame(f + k)[i]) < 1e-9);
    }
  }
}
