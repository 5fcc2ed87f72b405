#include "stressnet/synth.hpp"

#include <algorithm>
#include <cmath>

#include "stressnet/csv.hpp"
#include "stressnet/filter.hpp"
#include "stressnet/formats.hpp"
#include "stressnet/isti.hpp"
#include "stressnet/rng.hpp"
#include "stressnet/spline.hpp"

namespace stressnet {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void CardiacProfile::validate() const {
  if (!(duration_s > 0.0 && cardiac_rate_hz > 0.0 && base_rr_s > 0.0)) {
    fail(ErrorKind::InvalidProfile, "durations and rates must be > 0");
  }
  if (!(r_wave_width_s > 0.0 && z_wave_width_s > 0.0)) {
    fail(ErrorKind::InvalidProfile, "wave widths must be > 0");
  }
  if (!(first_beat_offset_s >= 0.0) || !(noise_std >= 0.0) || !(rr_mod_amp_s >= 0.0)) {
    fail(ErrorKind::InvalidProfile, "offsets and noise must be >= 0");
  }
  if (rr_mod_amp_s > 0.0 && !(rr_mod_period_s > 0.0)) {
    fail(ErrorKind::InvalidProfile, "rr modulation period must be > 0");
  }
  if (isti_trajectory.size() < 2) fail(ErrorKind::InvalidProfile, "isti trajectory needs >= 2 knots");
  isti_trajectory.validate();
  for (double v : isti_trajectory.v) {
    if (!(v > 0.0) || !(v < 0.9 * base_rr_s * 1000.0)) {
      fail(ErrorKind::InvalidProfile, "isti values must lie in (0, 0.9*RR) ms");
    }
  }
}

Knots beat_schedule(const CardiacProfile& profile) {
  profile.validate();
  CubicSpline isti(profile.isti_trajectory);
  Knots out;
  // leave room for the z bump and its tail at the record end
  const double guard = 0.5 * profile.base_rr_s;
  double t = profile.first_beat_offset_s;
  while (t < profile.duration_s - guard) {
    out.t_s.push_back(t);
    out.v.push_back(isti(t));
    t += profile.base_rr_s + profile.rr_mod_amp_s * std::sin(kTwoPi * t / profile.rr_mod_period_s);
  }
  if (out.size() < 2) fail(ErrorKind::InvalidProfile, "record too short for two beats");
  return out;
}

namespace {

// sum of unit-height Gaussian bumps sampled on a uniform grid; each bump
// only touches +-5 sigma
void add_bumps(std::vector<double>& samples, double rate, const std::vector<double>& centers,
               double width) {
  const double reach = 5.0 * width;
  const long n = static_cast<long>(samples.size());
  for (double c : centers) {
    long lo = std::max(0L, static_cast<long>(std::floor((c - reach) * rate)));
    long hi = std::min(n - 1, static_cast<long>(std::ceil((c + reach) * rate)));
    for (long i = lo; i <= hi; ++i) {
      double dt = static_cast<double>(i) / rate - c;
      samples[static_cast<std::size_t>(i)] += std::exp(-0.5 * (dt / width) * (dt / width));
    }
  }
}

}  // namespace

CardiacSignals gen_cardiac(const CardiacProfile& profile) {
  Knots beats = beat_schedule(profile);

  const auto n = static_cast<std::size_t>(std::llround(profile.duration_s * profile.cardiac_rate_hz));
  CardiacSignals out;
  out.truth = beats;
  out.ecg.sample_rate_hz = profile.cardiac_rate_hz;
  out.ecg.t0_seconds = 0.0;
  out.ecg.samples.assign(n, 0.0);
  out.dzdt = out.ecg;

  std::vector<double> z_centers(beats.size());
  for (std::size_t k = 0; k < beats.size(); ++k) z_centers[k] = beats.t_s[k] + beats.v[k] / 1000.0;

  add_bumps(out.ecg.samples, profile.cardiac_rate_hz, beats.t_s, profile.r_wave_width_s);
  add_bumps(out.dzdt.samples, profile.cardiac_rate_hz, z_centers, profile.z_wave_width_s);

  if (profile.noise_std > 0.0) {
    Rng rng(profile.seed);
    for (double& v : out.ecg.samples) v += profile.noise_std * rng.normal();
    for (double& v : out.dzdt.samples) v += profile.noise_std * rng.normal();
  }
  return out;
}

void EmissionProfile::validate() const {
  if (width == 0 || height == 0 || !(fps > 0.0)) {
    fail(ErrorKind::InvalidProfile, "frame size and fps must be positive");
  }
  if (!(eps_s > 0.0 && eps_s <= 1.0 && eps_b > 0.0 && eps_b <= 1.0)) {
    fail(ErrorKind::InvalidProfile, "emissivities must lie in (0,1]");
  }
  if (!(pulse_width_s > 0.0) || !(quant_gain > 0.0)) {
    fail(ErrorKind::InvalidProfile, "pulse width and gain must be > 0");
  }
  if (motion_amplitude_px != 0.0 && !(motion_period_s > 0.0)) {
    fail(ErrorKind::InvalidProfile, "motion period must be > 0");
  }
  if (!face_mask.empty() && face_mask.size() != width * height) {
    fail(ErrorKind::InvalidProfile, "face_mask size mismatch");
  }
  if (!e0_field.empty() && e0_field.size() != width * height) {
    fail(ErrorKind::InvalidProfile, "e0_field size mismatch");
  }
  for (double m : face_mask) {
    if (!(m >= 0.0 && m <= 1.0)) fail(ErrorKind::InvalidProfile, "mask values must lie in [0,1]");
  }
}

std::vector<double> default_face_mask(std::size_t width, std::size_t height) {
  std::vector<double> mask(width * height);
  const double cx = static_cast<double>(width) / 2.0;
  const double cy = static_cast<double>(height) / 2.0;
  const double rx = static_cast<double>(width) * 0.28;
  const double ry = static_cast<double>(height) * 0.30;
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double dx = (static_cast<double>(x) - cx) / rx;
      double dy = (static_cast<double>(y) - cy) / ry;
      mask[y * width + x] = std::exp(-(dx * dx + dy * dy));
    }
  }
  return mask;
}

std::vector<double> default_e0_field(std::size_t width, std::size_t height, std::uint64_t seed) {
  Rng rng(seed);
  const double kx = rng.uniform(0.8, 1.6);
  const double ky = rng.uniform(0.7, 1.3);
  std::vector<double> field(width * height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      field[y * width + x] = 900.0 +
                             140.0 * std::sin(kTwoPi * kx * static_cast<double>(x) /
                                              static_cast<double>(width)) +
                             120.0 * std::cos(kTwoPi * ky * static_cast<double>(y) /
                                              static_cast<double>(height)) +
                             rng.normal(0.0, 8.0);
    }
  }
  // smooth the speckle so sub-pixel motion stays sub-count
  std::vector<double> row(width), col(height);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) row[x] = field[y * width + x];
    row = gaussian_smooth_1d(row, 1.5);
    for (std::size_t x = 0; x < width; ++x) field[y * width + x] = row[x];
  }
  for (std::size_t x = 0; x < width; ++x) {
    for (std::size_t y = 0; y < height; ++y) col[y] = field[y * width + x];
    col = gaussian_smooth_1d(col, 1.5);
    for (std::size_t y = 0; y < height; ++y) field[y * width + x] = col[y];
  }
  return field;
}

ThermalResult gen_thermal(const EmissionProfile& emission, const CardiacProfile& cardiac) {
  emission.validate();
  Knots beats = beat_schedule(cardiac);

  const std::size_t w = emission.width;
  const std::size_t h = emission.height;
  const std::vector<double> mask =
      emission.face_mask.empty() ? default_face_mask(w, h) : emission.face_mask;
  const std::vector<double> e0 =
      emission.e0_field.empty() ? default_e0_field(w, h, emission.seed) : emission.e0_field;

  const auto frames = static_cast<std::size_t>(std::llround(cardiac.duration_s * emission.fps));
  if (frames == 0) fail(ErrorKind::InvalidProfile, "no frames to generate");

  // pulse bump train at beat + ISTI, per frame time
  std::vector<double> pulse(frames, 0.0);
  std::vector<double> z_centers(beats.size());
  for (std::size_t k = 0; k < beats.size(); ++k) z_centers[k] = beats.t_s[k] + beats.v[k] / 1000.0;
  add_bumps(pulse, emission.fps, z_centers, emission.pulse_width_s);

  ThermalResult out;
  out.truth = beats;
  out.clip.width = w;
  out.clip.height = h;
  out.clip.fps = emission.fps;
  out.clip.t0_seconds = 0.0;
  out.clip.data.resize(frames * w * h);

  std::vector<double> e0_t(w * h);
  std::size_t clipped = 0;
  for (std::size_t f = 0; f < frames; ++f) {
    const double t = static_cast<double>(f) / emission.fps;
    const double m = emission.motion_amplitude_px == 0.0
                         ? 0.0
                         : std::sin(kTwoPi * t / emission.motion_period_s);
    const double dx = emission.motion_amplitude_px * m;
    // horizontal sub-pixel translation of the base field, bilinear, clamped
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        double sx = std::clamp(static_cast<double>(x) + dx, 0.0, static_cast<double>(w - 1));
        auto x0 = static_cast<std::size_t>(sx);
        std::size_t x1 = std::min(x0 + 1, w - 1);
        double frac = sx - static_cast<double>(x0);
        e0_t[y * w + x] = e0[y * w + x0] * (1.0 - frac) + e0[y * w + x1] * frac;
      }
    }
    const double p = pulse[f];
    const double varying = (1.0 + emission.f1_pulse_coeff) * p + emission.f1_motion_coeff * m;
    auto dst = out.clip.frame(f);
    for (std::size_t i = 0; i < w * h; ++i) {
      double value = 2.0 * emission.eps_s * e0[i] +
                     e0_t[i] * emission.eps_b * mask[i] * varying +
                     e0_t[i] * emission.eps_s * emission.f2_motion_coeff * m;
      double counts = std::round(emission.quant_gain * value + emission.quant_offset);
      if (counts < 0.0) {
        counts = 0.0;
        ++clipped;
      } else if (counts > 65535.0) {
        counts = 65535.0;
        ++clipped;
      }
      dst[i] = static_cast<std::uint16_t>(counts);
    }
  }
  if (static_cast<double>(clipped) > 0.01 * static_cast<double>(frames * w * h)) {
    fail(ErrorKind::CountOverflowRisk, "gain/offset would clip more than 1% of pixels");
  }
  return out;
}

namespace {

// cubic ramp 0->1 over [t0, t1]
double smooth_step(double t, double t0, double t1) {
  if (t <= t0) return 0.0;
  if (t >= t1) return 1.0;
  double u = (t - t0) / (t1 - t0);
  return u * u * (3.0 - 2.0 * u);
}

}  // namespace

DatasetManifest gen_dataset(const std::filesystem::path& out_dir, std::size_t n_clips,
                            double stress_fraction, std::uint64_t seed,
                            const DatasetOptions& options) {
  if (n_clips < 2) fail(ErrorKind::InvalidArgument, "need at least 2 clips");
  if (!(stress_fraction > 0.0 && stress_fraction < 1.0)) {
    fail(ErrorKind::InvalidArgument, "stress_fraction must lie in (0,1) so both classes appear");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create " + out_dir.string());

  const double d = options.duration_s;
  const std::vector<Phase> phases = {
      {"base", 0.0, 0.2 * d},
      {"prep", 0.2 * d, 0.4 * d},
      {"immersion", 0.4 * d, 0.8 * d},
      {"recovery", 0.8 * d, d},
  };

  auto n_stress = static_cast<std::size_t>(std::llround(stress_fraction * static_cast<double>(n_clips)));
  n_stress = std::clamp<std::size_t>(n_stress, 1, n_clips - 1);
  std::size_t stress_left = n_stress;
  std::size_t nostress_left = n_clips - n_stress;

  DatasetManifest manifest;
  manifest.manifest_csv = out_dir / "manifest.csv";
  CsvTable table;
  table.columns = {"trial_id",  "tvf_path",   "ecg_csv_path", "dzdt_csv_path",
                   "isti_csv_path", "knots_csv_path", "phases_csv_path", "label"};

  for (std::size_t k = 0; k < n_clips; ++k) {
    bool stress;
    if (stress_left == 0) {
      stress = false;
    } else if (nostress_left == 0) {
      stress = true;
    } else {
      stress = (k % 2 == 0);
    }
    (stress ? stress_left : nostress_left) -= 1;

    const std::uint64_t trial_seed = seed + k + 1;
    Rng rng(trial_seed);

    // programmed trajectory: slow drift, plus a dip through prep+immersion
    // for stress trials
    const double base = 155.0 + rng.uniform(-10.0, 10.0);
    const double drift_amp = rng.uniform(8.0, 14.0);
    const double drift_period = rng.uniform(15.0, 25.0);
    const double drift_phase = rng.uniform(0.0, kTwoPi);
    const double dip = stress ? rng.uniform(30.0, 45.0) : 0.0;
    const double dip_on = phases[1].start_s;   // prep start
    const double dip_off = phases[2].end_s;    // immersion end
    Knots traj;
    for (double t = 0.0; t <= d + 1e-9; t += 2.5) {
      double v = base + drift_amp * std::sin(kTwoPi * t / drift_period + drift_phase);
      if (stress) {
        double gate = smooth_step(t, dip_on - 2.5, dip_on + 2.5) *
                      (1.0 - smooth_step(t, dip_off - 2.5, dip_off + 2.5));
        v -= dip * gate;
      }
      traj.t_s.push_back(t);
      traj.v.push_back(v);
    }

    CardiacProfile cardiac;
    cardiac.duration_s = d;
    cardiac.cardiac_rate_hz = options.cardiac_rate_hz;
    cardiac.isti_trajectory = traj;
    cardiac.noise_std = options.cardiac_noise_std;
    cardiac.seed = trial_seed;

    EmissionProfile emission;
    emission.width = options.width;
    emission.height = options.height;
    emission.fps = options.fps;
    emission.seed = trial_seed;

    CardiacSignals cardiac_out = gen_cardiac(cardiac);
    ThermalResult thermal = gen_thermal(emission, cardiac);

    TrialPaths tp;
    tp.trial_id = "trial_" + std::to_string(k);
    tp.stress = stress;
    tp.tvf = out_dir / (tp.trial_id + ".tvf");
    tp.ecg_csv = out_dir / (tp.trial_id + "_ecg.csv");
    tp.dzdt_csv = out_dir / (tp.trial_id + "_dzdt.csv");
    tp.isti_csv = out_dir / (tp.trial_id + "_isti_truth.csv");
    tp.knots_csv = out_dir / (tp.trial_id + "_isti_knots.csv");
    tp.phases_csv = out_dir / (tp.trial_id + "_phases.csv");

    write_tvf(tp.tvf, thermal.clip);
    write_signal_csv(tp.ecg_csv, cardiac_out.ecg);
    write_signal_csv(tp.dzdt_csv, cardiac_out.dzdt);

    const auto frames = static_cast<std::size_t>(std::llround(options.fps * d));
    Signal truth_cont = isti_continuous(thermal.truth, 0.0, options.fps, frames);
    write_signal_csv(tp.isti_csv, truth_cont);

    CsvTable knots_table;
    knots_table.columns = {"t_seconds", "isti_ms"};
    for (std::size_t i = 0; i < thermal.truth.size(); ++i) {
      char a[40], b[40];
      std::snprintf(a, sizeof(a), "%.12g", thermal.truth.t_s[i]);
      std::snprintf(b, sizeof(b), "%.12g", thermal.truth.v[i]);
      knots_table.rows.push_back({a, b});
    }
    write_table_csv(tp.knots_csv, knots_table);
    write_phases_csv(tp.phases_csv, phases);

    table.rows.push_back({tp.trial_id, tp.tvf.filename().string(), tp.ecg_csv.filename().string(),
                          tp.dzdt_csv.filename().string(), tp.isti_csv.filename().string(),
                          tp.knots_csv.filename().string(), tp.phases_csv.filename().string(),
                          stress ? "stress" : "no_stress"});
    manifest.trials.push_back(std::move(tp));
  }
  write_table_csv(manifest.manifest_csv, table);
  return manifest;
}

}  // namespace stressnet
