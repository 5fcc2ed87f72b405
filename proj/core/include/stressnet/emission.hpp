#pragma once

#include <optional>

#include "stressnet/clip.hpp"

namespace stressnet {

/// Forward difference between consecutive frames, in counts/frame.
/// Output element t keeps the timestamp of input frame t.
FeatureClip temporal_derivative(const ThermalClip& clip);

/// Elementwise x -> sign(x) * ln(1 + |x|).
FeatureClip sign_log(const FeatureClip& fc);
double sign_log(double x);

/// Separable Gaussian filtering along rows, columns, then the frame axis,
/// replicate padding everywhere. Sigmas are in pixels / frames.
FeatureClip spatiotemporal_gaussian(const FeatureClip& fc, double sigma_spatial = 3.0,
                                    double sigma_temporal = 4.0);

struct PreprocessConfig {
  std::optional<Rect> crop_rect;          // explicit rectangle wins over centered size
  std::optional<std::size_t> crop_width;  // centered crop
  std::optional<std::size_t> crop_height;
  bool derivative = true;
  bool signlog = true;
  bool gaussian = true;
  double sigma_spatial = 3.0;
  double sigma_temporal = 4.0;

  /// Resolves the crop for a clip of the given size; nullopt = no crop.
  std::optional<Rect> resolve_crop(std::size_t width, std::size_t height) const;
};

/// crop -> temporal_derivative -> sign_log -> spatiotemporal_gaussian, each
/// stage toggleable. With the derivative disabled the raw counts pass
/// through as reals and the frame count is preserved.
FeatureClip preprocess(const ThermalClip& clip, const PreprocessConfig& config = {});

}  // namespace stressnet
