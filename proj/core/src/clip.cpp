#include "stressnet/clip.hpp"

namespace stressnet {

ThermalClip crop(const ThermalClip& clip, std::size_t x0, std::size_t y0, std::size_t w, std::size_t h) {
  if (w == 0 || h == 0 || x0 + w > clip.width || y0 + h > clip.height) {
    fail(ErrorKind::RectOutOfBounds, "crop rectangle outside frame");
  }
  ThermalClip out;
  out.width = w;
  out.height = h;
  out.fps = clip.fps;
  out.t0_seconds = clip.t0_seconds;
  const std::size_t frames = clip.frame_count();
  out.data.resize(frames * w * h);
  for (std::size_t f = 0; f < frames; ++f) {
    auto src = clip.frame(f);
    auto dst = out.frame(f);
    for (std::size_t y = 0; y < h; ++y) {
      const std::uint16_t* row = src.data() + (y0 + y) * clip.width + x0;
      std::uint16_t* orow = dst.data() + y * w;
      for (std::size_t x = 0; x < w; ++x) orow[x] = row[x];
    }
  }
  return out;
}

}  // namespace stressnet
