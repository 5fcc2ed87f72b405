#include "stressnet/emission.hpp"

#include <cmath>

#include "stressnet/filter.hpp"

namespace stressnet {

FeatureClip temporal_derivative(const ThermalClip& clip) {
  const std::size_t frames = clip.frame_count();
  if (frames < 2) fail(ErrorKind::TooFewFrames, "temporal derivative needs >= 2 frames");
  FeatureClip out;
  out.width = clip.width;
  out.height = clip.height;
  out.fps = clip.fps;
  out.t0_seconds = clip.t0_seconds;
  const std::size_t fs = clip.width * clip.height;
  out.data.resize((frames - 1) * fs);
  for (std::size_t f = 0; f + 1 < frames; ++f) {
    auto a = clip.frame(f);
    auto b = clip.frame(f + 1);
    double* dst = out.data.data() + f * fs;
    for (std::size_t i = 0; i < fs; ++i) {
      dst[i] = static_cast<double>(b[i]) - static_cast<double>(a[i]);
    }
  }
  return out;
}

double sign_log(double x) {
  return x >= 0.0 ? std::log1p(x) : -std::log1p(-x);
}

FeatureClip sign_log(const FeatureClip& fc) {
  FeatureClip out = fc;
  for (double& v : out.data) {
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteInput, "sign_log on non-finite value");
    v = sign_log(v);
  }
  return out;
}

namespace {

// 1-D Gaussian pass along one axis of the (frame, y, x) volume, replicate
// padding, fixed summation order.
void smooth_axis(std::vector<double>& data, std::size_t frames, std::size_t height,
                 std::size_t width, int axis, double sigma) {
  const std::vector<double> k = gaussian_kernel(sigma);
  const long radius = static_cast<long>(k.size() / 2);
  const std::size_t fs = width * height;
  std::vector<double> line;

  auto run_line = [&](std::size_t base, std::size_t stride, std::size_t count) {
    line.resize(count);
    for (std::size_t i = 0; i < count; ++i) line[i] = data[base + i * stride];
    for (std::size_t i = 0; i < count; ++i) {
      double acc = 0.0;
      for (long j = -radius; j <= radius; ++j) {
        long idx = static_cast<long>(i) + j;
        if (idx < 0) idx = 0;
        if (idx >= static_cast<long>(count)) idx = static_cast<long>(count) - 1;
        acc += k[static_cast<std::size_t>(j + radius)] * line[static_cast<std::size_t>(idx)];
      }
      data[base + i * stride] = acc;
    }
  };

  if (axis == 2) {  // along x (rows)
    for (std::size_t f = 0; f < frames; ++f)
      for (std::size_t y = 0; y < height; ++y) run_line(f * fs + y * width, 1, width);
  } else if (axis == 1) {  // along y (columns)
    for (std::size_t f = 0; f < frames; ++f)
      for (std::size_t x = 0; x < width; ++x) run_line(f * fs + x, width, height);
  } else {  // along the frame axis
    for (std::size_t p = 0; p < fs; ++p) run_line(p, fs, frames);
  }
}

}  // namespace

FeatureClip spatiotemporal_gaussian(const FeatureClip& fc, double sigma_spatial,
                                    double sigma_temporal) {
  if (!(sigma_spatial > 0.0) || !(sigma_temporal > 0.0)) {
    fail(ErrorKind::NonPositiveSigma, "sigmas must be > 0");
  }
  FeatureClip out = fc;
  const std::size_t frames = out.frame_count();
  if (frames == 0) return out;
  smooth_axis(out.data, frames, out.height, out.width, 2, sigma_spatial);
  smooth_axis(out.data, frames, out.height, out.width, 1, sigma_spatial);
  smooth_axis(out.data, frames, out.height, out.width, 0, sigma_temporal);
  return out;
}

std::optional<Rect> PreprocessConfig::resolve_crop(std::size_t width, std::size_t height) const {
  if (crop_rect) return crop_rect;
  if (!crop_width && !crop_height) return std::nullopt;
  std::size_t w = crop_width.value_or(width);
  std::size_t h = crop_height.value_or(height);
  if (w > width || h > height) fail(ErrorKind::RectOutOfBounds, "centered crop larger than frame");
  return Rect{(width - w) / 2, (height - h) / 2, w, h};
}

FeatureClip preprocess(const ThermalClip& clip, const PreprocessConfig& config) {
  const ThermalClip* src = &clip;
  ThermalClip cropped;
  if (auto rect = config.resolve_crop(clip.width, clip.height)) {
    cropped = crop(clip, rect->x0, rect->y0, rect->w, rect->h);
    src = &cropped;
  }

  FeatureClip fc;
  if (config.derivative) {
    fc = temporal_derivative(*src);
  } else {
    fc.width = src->width;
    fc.height = src->height;
    fc.fps = src->fps;
    fc.t0_seconds = src->t0_seconds;
    fc.data.assign(src->data.begin(), src->data.end());
  }
  if (config.signlog) fc = sign_log(fc);
  if (config.gaussian) fc = spatiotemporal_gaussian(fc, config.sigma_spatial, config.sigma_temporal);
  return fc;
}

}  // namespace stressnet
