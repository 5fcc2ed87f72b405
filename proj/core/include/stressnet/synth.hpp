#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "stressnet/clip.hpp"
#include "stressnet/signal.hpp"

namespace stressnet {

/// Gaussian-bump ECG / dZ/dt wave trains with a programmed ISTI
/// trajectory.
struct CardiacProfile {
  double duration_s = 50.0;
  double cardiac_rate_hz = 250.0;
  double base_rr_s = 1.0;
  double rr_mod_amp_s = 0.0;     // sinusoidal RR modulation
  double rr_mod_period_s = 23.0;
  double first_beat_offset_s = 0.3;
  Knots isti_trajectory;         // ms, evaluated at beat times (clamped)
  double r_wave_width_s = 0.02;
  double z_wave_width_s = 0.03;
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CardiacSignals {
  Signal ecg;
  Signal dzdt;
  Knots truth;  // (beat time s, programmed ISTI ms)
};

/// Beat schedule with the programmed ISTI at each beat.
Knots beat_schedule(const CardiacProfile& profile);

CardiacSignals gen_cardiac(const CardiacProfile& profile);

/// Thermal forward model: static black-body field K plus pulse- and
/// motion-modulated emission, quantized to 16-bit counts. The pulse bump
/// after each beat is delayed by that beat's programmed ISTI, so the
/// frames carry the target timing.
struct EmissionProfile {
  std::size_t width = 32;
  std::size_t height = 32;
  double fps = 15.0;
  std::vector<double> face_mask;  // height*width in [0,1]; empty = default ellipse
  std::vector<double> e0_field;   // height*width base energy; empty = default field
  double eps_s = 0.96;
  double eps_b = 0.04;
  double f1_motion_coeff = 0.1;   // a1 in f1 = a1*m + b1*p
  double f1_pulse_coeff = 0.3;    // b1
  double f2_motion_coeff = 0.1;   // a2 in f2 = a2*m
  double motion_amplitude_px = 0.3;
  double motion_period_s = 9.0;
  double pulse_width_s = 0.18;
  double quant_gain = 14.0;
  double quant_offset = 1000.0;
  std::uint64_t seed = 0;  // default-field synthesis

  void validate() const;
};

std::vector<double> default_face_mask(std::size_t width, std::size_t height);
std::vector<double> default_e0_field(std::size_t width, std::size_t height, std::uint64_t seed);

struct ThermalResult {
  ThermalClip clip;
  Knots truth;
};

ThermalResult gen_thermal(const EmissionProfile& emission, const CardiacProfile& cardiac);

struct DatasetOptions {
  std::size_t width = 32;
  std::size_t height = 32;
  double fps = 15.0;
  double duration_s = 50.0;
  double cardiac_rate_hz = 250.0;
  double cardiac_noise_std = 0.01;
};

struct TrialPaths {
  std::string trial_id;
  std::filesystem::path tvf;
  std::filesystem::path ecg_csv;
  std::filesystem::path dzdt_csv;
  std::filesystem::path isti_csv;   // continuous truth at the frame grid (ms)
  std::filesystem::path knots_csv;  // truth knots as t_seconds,value
  std::filesystem::path phases_csv;
  bool stress = false;
};

struct DatasetManifest {
  std::filesystem::path manifest_csv;
  std::vector<TrialPaths> trials;
};

/// Writes n_clips trials (TVF + CSVs + phase annotations + manifest.csv)
/// under out_dir. Stress trials get an ISTI trajectory that dips during
/// prep+immersion; generation is deterministic per seed, one independent
/// generator per trial.
DatasetManifest gen_dataset(const std::filesystem::path& out_dir, std::size_t n_clips,
                            double stress_fraction, std::uint64_t seed,
                            const DatasetOptions& options = {});

}  // namespace stressnet
