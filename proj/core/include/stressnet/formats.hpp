#pragma once

#include <filesystem>
#include <string>

#include "stressnet/clip.hpp"
#include "stressnet/net.hpp"
#include "stressnet/stress.hpp"

namespace stressnet {

// TVF: "TVF1" | u32 width | u32 height | u32 num_frames | f64 fps |
//      u16 bits_per_pixel (16) | 14 zero bytes   -- 40-byte header,
// then frames row-major as u16, everything little-endian.
//
// FVF: same header with magic "FVF1" and bits_per_pixel = 32; payload is
// f32 little-endian.
//
// SNW: "SNW1" | u32 tensor count | per tensor: u16 name length, name,
//      u8 rank, rank x u32 dims, row-major f32 data | u32 descriptor
//      length, ASCII key=value lines.

void write_tvf(const std::filesystem::path& path, const ThermalClip& clip);
ThermalClip read_tvf(const std::filesystem::path& path);

void write_fvf(const std::filesystem::path& path, const FeatureClip& clip);
FeatureClip read_fvf(const std::filesystem::path& path);

/// Weights are stored at 32-bit precision; in-memory doubles are rounded
/// to nearest on write.
void write_snw(const std::filesystem::path& path, const Model& model);
Model read_snw(const std::filesystem::path& path);

void write_snw(const std::filesystem::path& path, const StressModel& model);
StressModel read_snw_stress(const std::filesystem::path& path);

/// "isti" or "stress", from the descriptor block.
std::string snw_kind(const std::filesystem::path& path);

}  // namespace stressnet
