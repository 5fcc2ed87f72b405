#include "stressnet/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "stressnet/config.hpp"
#include "stressnet/csv.hpp"
#include "stressnet/emission.hpp"
#include "stressnet/filter.hpp"
#include "stressnet/formats.hpp"
#include "stressnet/isti.hpp"
#include "stressnet/metrics.hpp"
#include "stressnet/net.hpp"
#include "stressnet/stress.hpp"
#include "stressnet/synth.hpp"
#include "stressnet/train.hpp"

namespace fs = std::filesystem;

namespace stressnet {

namespace {

std::pair<std::size_t, std::size_t> parse_size(const std::string& s) {
  auto x = s.find('x');
  if (x == std::string::npos) fail(ErrorKind::InvalidArgument, "size must look like WxH");
  return {std::stoull(s.substr(0, x)), std::stoull(s.substr(x + 1))};
}

Rect parse_rect(const std::string& s) {
  std::vector<std::size_t> parts;
  std::string cur;
  for (char c : s + ",") {
    if (c == ',') {
      parts.push_back(std::stoull(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (parts.size() != 4) fail(ErrorKind::InvalidArgument, "rect must be x0,y0,w,h");
  return {parts[0], parts[1], parts[2], parts[3]};
}

// crop spec: "none", "WxH" (centered), or "x0,y0,w,h"
void apply_crop_spec(PreprocessConfig& cfg, const std::string& spec) {
  if (spec.empty() || spec == "none") return;
  if (spec.find(',') != std::string::npos) {
    cfg.crop_rect = parse_rect(spec);
  } else {
    auto [w, h] = parse_size(spec);
    cfg.crop_width = w;
    cfg.crop_height = h;
  }
}

Config load_config(const std::string& config_flag) {
  Config cfg;
  if (const char* env = std::getenv("STRESSNET_CONFIG")) {
    if (env[0] != '\0') cfg = Config::parse_file(env);
  }
  if (!config_flag.empty()) {
    Config c = Config::parse_file(config_flag);
    cfg.merge(c);
  }
  return cfg;
}

IstiConfig isti_config_from(const Config& cfg) {
  IstiConfig ic;
  ic.ecg.threshold = PeakThreshold::adaptive(cfg.get_real("gt.threshold_k", 1.0));
  ic.dzdt.threshold = PeakThreshold::adaptive(cfg.get_real("gt.threshold_k", 1.0));
  ic.ecg.min_distance_s = cfg.get_real("gt.min_distance_s", 0.4);
  ic.dzdt.min_distance_s = cfg.get_real("gt.min_distance_s", 0.4);
  ic.max_lag_s = cfg.get_real("gt.max_lag_s", 0.5);
  return ic;
}

void write_history_csv(const fs::path& path, const TrainingHistory& history) {
  std::string out = "epoch,loss,ce,mse,lr_head,lr_backbone\n";
  char buf[160];
  for (const EpochStats& e : history) {
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%.12g,%.12g,%.12g\n", e.epoch, e.loss,
                  e.classification, e.regression, e.lr_head, e.lr_backbone);
    out += buf;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorKind::IoError, "cannot open " + path.string());
  f << out;
}

// targets for one clip: continuous truth ISTI (ms) sampled at the frame
// grid, normalized; trimmed to the feature frame count
std::vector<double> targets_for(const Signal& truth, std::size_t frames, double isti_max_ms) {
  if (truth.size() < frames) {
    fail(ErrorKind::AlignmentError, "truth signal shorter than feature clip");
  }
  std::vector<double> t01(frames);
  for (std::size_t i = 0; i < frames; ++i) t01[i] = normalize_isti(truth.samples[i], isti_max_ms);
  return t01;
}

int cmd_synth(const std::string& out_dir, std::size_t clips, double stress_fraction,
              std::uint64_t seed, double fps, const std::string& size, double duration) {
  DatasetOptions opt;
  auto [w, h] = parse_size(size);
  opt.width = w;
  opt.height = h;
  opt.fps = fps;
  opt.duration_s = duration;
  DatasetManifest m = gen_dataset(out_dir, clips, stress_fraction, seed, opt);
  std::fprintf(stderr, "wrote %zu trials under %s\n", m.trials.size(), out_dir.c_str());
  return 0;
}

int cmd_preprocess(const Config& cfg, const std::string& in, const std::string& out,
                   const std::optional<std::string>& crop_flag,
                   std::optional<bool> derivative_flag, std::optional<bool> signlog_flag,
                   std::optional<bool> gaussian_flag, std::optional<double> sigma_spatial_flag,
                   std::optional<double> sigma_temporal_flag) {
  PreprocessConfig pc;
  pc.derivative = derivative_flag.value_or(cfg.get_bool("emission.derivative", true));
  pc.signlog = signlog_flag.value_or(cfg.get_bool("emission.signlog", true));
  pc.gaussian = gaussian_flag.value_or(cfg.get_bool("emission.gaussian", true));
  pc.sigma_spatial = sigma_spatial_flag.value_or(cfg.get_real("emission.sigma_spatial", 3.0));
  pc.sigma_temporal = sigma_temporal_flag.value_or(cfg.get_real("emission.sigma_temporal", 4.0));
  apply_crop_spec(pc, crop_flag.value_or(cfg.get_string("crop", "none")));

  ThermalClip clip = read_tvf(in);
  FeatureClip fc = preprocess(clip, pc);
  write_fvf(out, fc);
  return 0;
}

int cmd_gt(const Config& cfg, const std::string& ecg_path, const std::string& dzdt_path,
           double fps, double duration, double t0, const std::string& out,
           const std::string& out_norm, std::optional<double> isti_max_flag) {
  const double isti_max = isti_max_flag.value_or(cfg.get_real("isti.max_ms", 300.0));
  CardiacPair pair{read_signal_csv(ecg_path), read_signal_csv(dzdt_path)};
  IstiKnotsResult res = compute_isti_knots(pair, isti_config_from(cfg));
  std::fprintf(stderr, "skipped_beats=%zu\n", res.skipped);

  const auto frames = static_cast<std::size_t>(std::llround(fps * duration));
  Signal continuous = isti_continuous(res.knots, t0, fps, frames);
  write_signal_csv(out, continuous);
  if (!out_norm.empty()) {
    Signal norm = continuous;
    norm.samples = normalize_isti(continuous.samples, isti_max);
    write_signal_csv(out_norm, norm);
  }
  return 0;
}

int cmd_train(const Config& cfg, const std::string& manifest_path, const std::string& features_dir,
              const std::string& out, const std::string& history_path, const CLI::App* sub) {
  auto flag_given = [sub](const std::string& name) { return sub->count(name) > 0; };

  TrainConfig tc;
  tc.lr_backbone = cfg.get_real("train.lr_backbone", tc.lr_backbone);
  tc.lr_head = cfg.get_real("train.lr_head", tc.lr_head);
  tc.lr_decay_factor = cfg.get_real("train.lr_decay_factor", tc.lr_decay_factor);
  tc.decay_period_epochs =
      static_cast<std::size_t>(cfg.get_int("train.decay_period_epochs", static_cast<std::int64_t>(tc.decay_period_epochs)));
  tc.epochs = static_cast<std::size_t>(cfg.get_int("train.epochs", static_cast<std::int64_t>(tc.epochs)));
  tc.batch_frames = static_cast<std::size_t>(cfg.get_int("train.batch_frames", static_cast<std::int64_t>(tc.batch_frames)));
  tc.n_bins = static_cast<std::size_t>(cfg.get_int("train.n_bins", static_cast<std::int64_t>(tc.n_bins)));
  tc.alpha = cfg.get_real("train.alpha", tc.alpha);
  tc.seq_seconds = cfg.get_real("train.seq_seconds", tc.seq_seconds);
  tc.seed = static_cast<std::uint64_t>(cfg.get_int("train.seed", 0));
  tc.bin_loss = cfg.get_bool("train.bce_bins", false) ? BinLoss::PerBinBCE : BinLoss::CategoricalCE;
  tc.input_scale = cfg.get_real("train.input_scale", tc.input_scale);

  ModelDescriptor desc;
  desc.lstm_layers = static_cast<std::size_t>(cfg.get_int("train.lstm_layers", static_cast<std::int64_t>(desc.lstm_layers)));
  desc.lstm_hidden = static_cast<std::size_t>(cfg.get_int("train.lstm_hidden", static_cast<std::int64_t>(desc.lstm_hidden)));
  desc.head_hidden = static_cast<std::size_t>(cfg.get_int("train.head_hidden", static_cast<std::int64_t>(desc.head_hidden)));
  if (cfg.has("train.conv_channels")) {
    desc.conv_channels.clear();
    std::string spec = cfg.get_string("train.conv_channels", "");
    std::string cur;
    for (char c : spec + ",") {
      if (c == ',') {
        if (!cur.empty()) desc.conv_channels.push_back(std::stoull(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
  }

  // flags win over config
  if (flag_given("--epochs")) tc.epochs = static_cast<std::size_t>(sub->get_option("--epochs")->as<std::int64_t>());
  if (flag_given("--seed")) tc.seed = static_cast<std::uint64_t>(sub->get_option("--seed")->as<std::int64_t>());
  if (flag_given("--lr-head")) tc.lr_head = sub->get_option("--lr-head")->as<double>();
  if (flag_given("--lr-backbone")) tc.lr_backbone = sub->get_option("--lr-backbone")->as<double>();
  if (flag_given("--alpha")) tc.alpha = sub->get_option("--alpha")->as<double>();
  if (flag_given("--bins")) tc.n_bins = static_cast<std::size_t>(sub->get_option("--bins")->as<std::int64_t>());
  if (flag_given("--batch-frames")) tc.batch_frames = static_cast<std::size_t>(sub->get_option("--batch-frames")->as<std::int64_t>());
  if (flag_given("--decay-period")) tc.decay_period_epochs = static_cast<std::size_t>(sub->get_option("--decay-period")->as<std::int64_t>());
  if (flag_given("--decay-factor")) tc.lr_decay_factor = sub->get_option("--decay-factor")->as<double>();
  if (flag_given("--seq-seconds")) tc.seq_seconds = sub->get_option("--seq-seconds")->as<double>();
  if (flag_given("--input-scale")) tc.input_scale = sub->get_option("--input-scale")->as<double>();
  if (flag_given("--lstm-layers")) desc.lstm_layers = static_cast<std::size_t>(sub->get_option("--lstm-layers")->as<std::int64_t>());
  if (flag_given("--lstm-hidden")) desc.lstm_hidden = static_cast<std::size_t>(sub->get_option("--lstm-hidden")->as<std::int64_t>());

  const double isti_max = cfg.get_real("isti.max_ms", 300.0);

  CsvTable manifest = read_table_csv(manifest_path);
  const fs::path manifest_dir = fs::path(manifest_path).parent_path();
  const fs::path feat_dir = features_dir.empty() ? manifest_dir : fs::path(features_dir);

  std::vector<TrainingExample> dataset;
  for (std::size_t r = 0; r < manifest.rows.size(); ++r) {
    fs::path tvf = manifest_dir / manifest.field(r, "tvf_path");
    fs::path fvf = feat_dir / (tvf.stem().string() + ".fvf");
    fs::path isti_csv = manifest_dir / manifest.field(r, "isti_csv_path");
    TrainingExample ex;
    ex.clip = read_fvf(fvf);
    Signal truth = read_signal_csv(isti_csv);
    ex.targets01 = targets_for(truth, ex.clip.frame_count(), isti_max);
    dataset.push_back(std::move(ex));
  }

  TrainResult result = train(dataset, tc, desc);
  write_snw(out, result.model);
  if (!history_path.empty()) write_history_csv(history_path, result.history);
  if (!result.history.empty()) {
    std::fprintf(stderr, "final epoch loss=%.6g ce=%.6g mse=%.6g\n", result.history.back().loss,
                 result.history.back().classification, result.history.back().regression);
  }
  return 0;
}

int cmd_predict(const Config& cfg, const std::string& model_path, const std::string& in,
                const std::string& out, std::optional<double> isti_max_flag, double seq_seconds) {
  const double isti_max = isti_max_flag.value_or(cfg.get_real("isti.max_ms", 300.0));
  Model model = read_snw(model_path);
  FeatureClip fc = read_fvf(in);
  Signal pred = predict_isti(model, fc, isti_max, seq_seconds);
  write_signal_csv(out, pred);
  return 0;
}

StressTrainConfig stress_config_from(const Config& cfg) {
  StressTrainConfig sc;
  sc.lr = cfg.get_real("stress.lr", sc.lr);
  sc.epochs = static_cast<std::size_t>(cfg.get_int("stress.epochs", static_cast<std::int64_t>(sc.epochs)));
  sc.seed = static_cast<std::uint64_t>(cfg.get_int("stress.seed", static_cast<std::int64_t>(sc.seed)));
  sc.n_in = static_cast<std::size_t>(cfg.get_int("stress.n_in", static_cast<std::int64_t>(sc.n_in)));
  sc.hidden0 = static_cast<std::size_t>(cfg.get_int("stress.hidden0", static_cast<std::int64_t>(sc.hidden0)));
  sc.hidden1 = static_cast<std::size_t>(cfg.get_int("stress.hidden1", static_cast<std::int64_t>(sc.hidden1)));
  sc.isti_max_ms = cfg.get_real("isti.max_ms", sc.isti_max_ms);
  return sc;
}

bool parse_label(const std::string& s) {
  if (s == "stress" || s == "1") return true;
  if (s == "no_stress" || s == "0") return false;
  fail(ErrorKind::IoError, "label must be stress|no_stress|1|0, got '" + s + "'");
}

int cmd_stress_train(const Config& cfg, const std::string& manifest_path,
                     const std::string& column, const std::string& out, double input_min,
                     double input_max, const CLI::App* sub) {
  StressTrainConfig sc = stress_config_from(cfg);
  auto flag_given = [sub](const std::string& name) { return sub->count(name) > 0; };
  if (flag_given("--epochs")) sc.epochs = static_cast<std::size_t>(sub->get_option("--epochs")->as<std::int64_t>());
  if (flag_given("--lr")) sc.lr = sub->get_option("--lr")->as<double>();
  if (flag_given("--seed")) sc.seed = static_cast<std::uint64_t>(sub->get_option("--seed")->as<std::int64_t>());

  double vmin = input_min, vmax = input_max;
  if (!flag_given("--input-min")) vmin = cfg.get_real("stress.input_min", column == "isti_csv_path" ? 0.0 : -1.0);
  if (!flag_given("--input-max")) vmax = cfg.get_real("stress.input_max", column == "isti_csv_path" ? sc.isti_max_ms : 1.0);

  CsvTable manifest = read_table_csv(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();
  std::vector<StressExample> examples;
  for (std::size_t r = 0; r < manifest.rows.size(); ++r) {
    Signal sig = read_signal_csv(dir / manifest.field(r, column));
    StressExample ex;
    ex.features = featurize_signal(sig, sc.n_in, vmin, vmax);
    ex.stress = parse_label(manifest.field(r, "label"));
    examples.push_back(std::move(ex));
  }
  StressTrainResult result = stress_train(examples, sc);
  write_snw(out, result.model);
  if (!result.epoch_bce.empty()) {
    std::fprintf(stderr, "final bce=%.6g\n", result.epoch_bce.back());
  }
  return 0;
}

int cmd_stress_predict(const Config& cfg, const std::string& model_path,
                       const std::string& signal_path, const std::string& manifest_path,
                       const std::string& column, const std::string& out,
                       const std::string& breathing_model_path, const std::string& breathing_column,
                       double input_min, double input_max, double b_min, double b_max) {
  StressModel model = read_snw_stress(model_path);
  std::optional<StressModel> bmodel;
  if (!breathing_model_path.empty()) bmodel = read_snw_stress(breathing_model_path);

  auto score_one = [&](const Signal& sig, const std::optional<Signal>& breathing) {
    double p = stress_forward(model, featurize_signal(sig, model.n_in, input_min, input_max));
    if (bmodel && breathing) {
      double pb = stress_forward(*bmodel,
                                 featurize_signal(*breathing, bmodel->n_in, b_min, b_max));
      return fuse_breathing(p, pb);
    }
    return p;
  };
  (void)cfg;

  if (!manifest_path.empty()) {
    CsvTable manifest = read_table_csv(manifest_path);
    const fs::path dir = fs::path(manifest_path).parent_path();
    CsvTable scores;
    scores.columns = {"score", "label"};
    for (std::size_t r = 0; r < manifest.rows.size(); ++r) {
      Signal sig = read_signal_csv(dir / manifest.field(r, column));
      std::optional<Signal> breathing;
      if (bmodel && manifest.has_column(breathing_column)) {
        breathing = read_signal_csv(dir / manifest.field(r, breathing_column));
      }
      double s = score_one(sig, breathing);
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.12g", s);
      scores.rows.push_back({buf, parse_label(manifest.field(r, "label")) ? "1" : "0"});
    }
    if (out.empty()) fail(ErrorKind::InvalidArgument, "--out required with --manifest");
    write_table_csv(out, scores);
    return 0;
  }

  Signal sig = read_signal_csv(signal_path);
  double s = score_one(sig, std::nullopt);
  std::printf("score=%.6g\n", s);
  return 0;
}

int cmd_features(const Config& cfg, const std::string& ecg_path, const std::string& peaks_path,
                 const std::string& hr_out, const std::string& hrv_out, const std::string& tvf_path,
                 const std::string& roi_spec, const std::string& breathing_out, double window_s,
                 double stride_s) {
  EventSeries peaks;
  bool have_peaks = false;
  if (!peaks_path.empty()) {
    peaks = read_events_csv(peaks_path);
    have_peaks = true;
  } else if (!ecg_path.empty()) {
    Signal ecg = read_signal_csv(ecg_path);
    IstiConfig ic = isti_config_from(cfg);
    peaks = detect_peaks(ecg, ic.ecg.threshold, ic.ecg.min_distance_s);
    have_peaks = true;
  }
  if (!hr_out.empty() || !hrv_out.empty()) {
    if (!have_peaks) fail(ErrorKind::InvalidArgument, "HR/HRV need --ecg or --peaks");
    if (!hr_out.empty()) write_signal_csv(hr_out, compute_hr(peaks, window_s, stride_s));
    if (!hrv_out.empty()) write_signal_csv(hrv_out, compute_hrv_rmssd(peaks, window_s, stride_s));
  }
  if (!breathing_out.empty()) {
    if (tvf_path.empty() || roi_spec.empty()) {
      fail(ErrorKind::InvalidArgument, "breathing needs --tvf and --roi");
    }
    ThermalClip clip = read_tvf(tvf_path);
    write_signal_csv(breathing_out, breathing_signal(clip, parse_rect(roi_spec)));
  }
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gt_path,
             const std::string& scores_path) {
  if (!scores_path.empty()) {
    double ap = average_precision(read_scores_csv(scores_path));
    std::printf("ap=%.6g\n", ap);
    return 0;
  }
  Signal pred = read_signal_csv(pred_path);
  Signal gt = read_signal_csv(gt_path);
  double m = mse(pred.samples, gt.samples);
  double r = pearson(pred.samples, gt.samples);
  std::printf("mse=%.6g, pearson=%.6g\n", m, r);
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, double eps, std::size_t coords) {
  // small descriptor so the finite differences stay cheap
  ModelDescriptor desc;
  desc.input_height = 9;
  desc.input_width = 9;
  desc.conv_channels = {4, 6};
  desc.lstm_layers = 2;
  desc.lstm_hidden = 6;
  desc.head_hidden = 10;
  desc.n_bins = 7;

  Rng rng(seed);
  Model model = Model::init(desc, rng);

  FeatureClip clip;
  clip.width = desc.input_width;
  clip.height = desc.input_height;
  clip.fps = 5.0;
  clip.data.resize(10 * clip.width * clip.height);
  for (double& v : clip.data) v = rng.normal();
  std::vector<double> targets(10);
  for (double& t : targets) t = rng.uniform();

  std::vector<SequenceRef> batch = {
      {&clip, &targets, 0, 5},
      {&clip, &targets, 5, 5},
  };

  double worst = 0.0;
  {
    double err = grad_check(model, batch, 1.0, BinLoss::CategoricalCE, eps, coords, seed + 1);
    std::printf("multi-loss (softmax+CE + expectation MSE): max rel err %.3g\n", err);
    worst = std::max(worst, err);
  }
  {
    double err = grad_check(model, batch, 0.5, BinLoss::PerBinBCE, eps, coords, seed + 2);
    std::printf("multi-loss (per-bin BCE variant):           max rel err %.3g\n", err);
    worst = std::max(worst, err);
  }
  {
    Rng srng(seed + 3);
    StressModel smodel = StressModel::init(16, 8, 4, srng);
    std::vector<StressExample> examples;
    for (int i = 0; i < 6; ++i) {
      StressExample e;
      e.features.resize(16);
      for (double& v : e.features) v = srng.uniform();
      e.stress = (i % 2) == 0;
      examples.push_back(std::move(e));
    }
    double err = stress_grad_check(smodel, examples, 1e-6, coords, seed + 4);
    std::printf("stress network (sigmoid+BCE):               max rel err %.3g\n", err);
    worst = std::max(worst, err);
  }
  std::printf("max relative error: %.3g (threshold 1e-4)\n", worst);
  return worst < 1e-4 ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"thermal-video ISTI estimation and stress detection pipeline"};
  app.require_subcommand(1);

  std::string config_flag;
  app.add_option("--config", config_flag, "configuration file (overrides STRESSNET_CONFIG)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic trial dataset");
  std::string synth_out = "dataset";
  std::size_t synth_clips = 10;
  double synth_fraction = 0.5;
  std::int64_t synth_seed = 0;
  double synth_fps = 15.0;
  std::string synth_size = "32x32";
  double synth_duration = 50.0;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--clips", synth_clips, "number of trials");
  synth->add_option("--stress-fraction", synth_fraction, "fraction of stress trials");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--fps", synth_fps, "thermal frame rate");
  synth->add_option("--size", synth_size, "frame size WxH");
  synth->add_option("--duration", synth_duration, "trial length in seconds");

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "TVF -> FVF emission-model preprocessing");
  std::string prep_in, prep_out, prep_crop;
  bool prep_no_derivative = false, prep_no_signlog = false, prep_no_gaussian = false;
  double prep_sigma_s = 3.0, prep_sigma_t = 4.0;
  prep->add_option("--in", prep_in, "input .tvf")->required();
  prep->add_option("--out", prep_out, "output .fvf")->required();
  prep->add_option("--crop", prep_crop, "none | WxH (centered) | x0,y0,w,h");
  prep->add_flag("--no-derivative", prep_no_derivative, "skip the temporal derivative");
  prep->add_flag("--no-signlog", prep_no_signlog, "skip the sign-log nonlinearity");
  prep->add_flag("--no-gaussian", prep_no_gaussian, "skip spatio-temporal smoothing");
  prep->add_option("--sigma-spatial", prep_sigma_s, "spatial Gaussian sigma (px)");
  prep->add_option("--sigma-temporal", prep_sigma_t, "temporal Gaussian sigma (frames)");

  // gt
  auto* gt = app.add_subcommand("gt", "ISTI ground truth from ECG + dZ/dt CSVs");
  std::string gt_ecg, gt_dzdt, gt_out, gt_out_norm;
  double gt_fps = 15.0, gt_duration = 0.0, gt_t0 = 0.0, gt_isti_max = 300.0;
  gt->add_option("--ecg", gt_ecg, "ECG signal CSV")->required();
  gt->add_option("--dzdt", gt_dzdt, "dZ/dt signal CSV")->required();
  gt->add_option("--fps", gt_fps, "frame grid rate")->required();
  gt->add_option("--duration", gt_duration, "frame grid length in seconds")->required();
  gt->add_option("--t0", gt_t0, "frame grid origin");
  gt->add_option("--out", gt_out, "continuous ISTI CSV (ms)")->required();
  gt->add_option("--out-norm", gt_out_norm, "normalized ISTI CSV");
  gt->add_option("--isti-max", gt_isti_max, "normalization scale (ms)");

  // train
  auto* tr = app.add_subcommand("train", "train the ISTI network on FVF clips");
  std::string tr_manifest, tr_features_dir, tr_out = "model.snw", tr_history;
  std::int64_t tr_epochs = 0, tr_seed = 0, tr_bins = 0, tr_batch = 0, tr_decay_period = 0;
  std::int64_t tr_lstm_layers = 0, tr_lstm_hidden = 0;
  double tr_lr_head = 0.0, tr_lr_backbone = 0.0, tr_alpha = 0.0, tr_decay_factor = 0.0;
  double tr_seq_seconds = 0.0, tr_input_scale = 0.0;
  tr->add_option("--manifest", tr_manifest, "dataset manifest CSV")->required();
  tr->add_option("--features-dir", tr_features_dir, "directory with <trial>.fvf files");
  tr->add_option("--out", tr_out, "output model .snw");
  tr->add_option("--history", tr_history, "training history CSV");
  tr->add_option("--epochs", tr_epochs, "training epochs");
  tr->add_option("--seed", tr_seed, "random seed");
  tr->add_option("--lr-head", tr_lr_head, "LSTM/FC learning rate");
  tr->add_option("--lr-backbone", tr_lr_backbone, "conv learning rate");
  tr->add_option("--alpha", tr_alpha, "regression loss weight");
  tr->add_option("--bins", tr_bins, "number of ISTI bins");
  tr->add_option("--batch-frames", tr_batch, "frames per batch");
  tr->add_option("--decay-period", tr_decay_period, "epochs per lr decay step");
  tr->add_option("--decay-factor", tr_decay_factor, "lr decay factor");
  tr->add_option("--seq-seconds", tr_seq_seconds, "LSTM sequence length in seconds");
  tr->add_option("--input-scale", tr_input_scale, "input scale; 0 = standardize from data");
  tr->add_option("--lstm-layers", tr_lstm_layers, "stacked LSTM layers");
  tr->add_option("--lstm-hidden", tr_lstm_hidden, "LSTM hidden units");

  // predict
  auto* pr = app.add_subcommand("predict", "per-frame ISTI prediction from an FVF clip");
  std::string pr_model, pr_in, pr_out;
  double pr_isti_max = 300.0, pr_seq_seconds = 1.0;
  pr->add_option("--model", pr_model, "model .snw")->required();
  pr->add_option("--in", pr_in, "input .fvf")->required();
  pr->add_option("--out", pr_out, "prediction CSV (ms)")->required();
  pr->add_option("--isti-max", pr_isti_max, "denormalization scale (ms)");
  pr->add_option("--seq-seconds", pr_seq_seconds, "window length in seconds");

  // stress-train
  auto* st = app.add_subcommand("stress-train", "train the stress classifier");
  std::string st_manifest, st_out = "stress.snw", st_column = "isti_csv_path";
  std::int64_t st_epochs = 0, st_seed = 0;
  double st_lr = 0.0, st_input_min = 0.0, st_input_max = 0.0;
  st->add_option("--manifest", st_manifest, "trials manifest CSV")->required();
  st->add_option("--out", st_out, "output model .snw");
  st->add_option("--column", st_column, "manifest column with the input signal CSV");
  st->add_option("--epochs", st_epochs, "training epochs");
  st->add_option("--lr", st_lr, "learning rate");
  st->add_option("--seed", st_seed, "random seed");
  st->add_option("--input-min", st_input_min, "featurization range lower bound");
  st->add_option("--input-max", st_input_max, "featurization range upper bound");

  // stress-predict
  auto* sp = app.add_subcommand("stress-predict", "stress probability for trials");
  std::string sp_model, sp_signal, sp_manifest, sp_column = "isti_csv_path", sp_out;
  std::string sp_bmodel, sp_bcolumn = "breathing_csv_path";
  double sp_input_min = 0.0, sp_input_max = 300.0, sp_bmin = -1.0, sp_bmax = 1.0;
  sp->add_option("--model", sp_model, "stress model .snw")->required();
  sp->add_option("--signal", sp_signal, "single input signal CSV");
  sp->add_option("--manifest", sp_manifest, "score every manifest row");
  sp->add_option("--column", sp_column, "manifest column with the input signal CSV");
  sp->add_option("--out", sp_out, "scores CSV (score,label) for --manifest mode");
  sp->add_option("--breathing-model", sp_bmodel, "breathing model .snw for fusion");
  sp->add_option("--breathing-column", sp_bcolumn, "manifest column with breathing CSV");
  sp->add_option("--input-min", sp_input_min, "featurization range lower bound");
  sp->add_option("--input-max", sp_input_max, "featurization range upper bound");
  sp->add_option("--breathing-min", sp_bmin, "breathing featurization lower bound");
  sp->add_option("--breathing-max", sp_bmax, "breathing featurization upper bound");

  // features
  auto* ft = app.add_subcommand("features", "HR / HRV / breathing comparison signals");
  std::string ft_ecg, ft_peaks, ft_hr, ft_hrv, ft_tvf, ft_roi, ft_breathing;
  double ft_window = 15.0, ft_stride = 1.0;
  ft->add_option("--ecg", ft_ecg, "ECG CSV (peaks detected internally)");
  ft->add_option("--peaks", ft_peaks, "event CSV with peak times");
  ft->add_option("--hr", ft_hr, "HR output CSV");
  ft->add_option("--hrv", ft_hrv, "HRV (RMSSD) output CSV");
  ft->add_option("--tvf", ft_tvf, "thermal clip for breathing extraction");
  ft->add_option("--roi", ft_roi, "breathing ROI x0,y0,w,h");
  ft->add_option("--breathing", ft_breathing, "breathing output CSV");
  ft->add_option("--window", ft_window, "HR/HRV window seconds");
  ft->add_option("--stride", ft_stride, "HR/HRV stride seconds");

  // eval
  auto* ev = app.add_subcommand("eval", "mse/pearson for signals or AP for scores");
  std::string ev_pred, ev_gt, ev_scores;
  ev->add_option("--pred", ev_pred, "prediction signal CSV");
  ev->add_option("--gt", ev_gt, "ground-truth signal CSV");
  ev->add_option("--scores", ev_scores, "score,label CSV for AP");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  std::int64_t gc_seed = 0;
  double gc_eps = 1e-5;
  std::size_t gc_coords = 20;
  gc->add_option("--seed", gc_seed, "random seed");
  gc->add_option("--eps", gc_eps, "finite-difference step");
  gc->add_option("--coords", gc_coords, "coordinates sampled per tensor");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    Config cfg = load_config(config_flag);
    if (synth->parsed()) {
      return cmd_synth(synth_out, synth_clips, synth_fraction,
                       static_cast<std::uint64_t>(synth_seed), synth_fps, synth_size,
                       synth_duration);
    }
    if (prep->parsed()) {
      std::optional<std::string> crop =
          prep->count("--crop") ? std::optional<std::string>(prep_crop) : std::nullopt;
      std::optional<bool> deriv =
          prep_no_derivative ? std::optional<bool>(false) : std::nullopt;
      std::optional<bool> slog = prep_no_signlog ? std::optional<bool>(false) : std::nullopt;
      std::optional<bool> gauss = prep_no_gaussian ? std::optional<bool>(false) : std::nullopt;
      std::optional<double> ss =
          prep->count("--sigma-spatial") ? std::optional<double>(prep_sigma_s) : std::nullopt;
      std::optional<double> stt =
          prep->count("--sigma-temporal") ? std::optional<double>(prep_sigma_t) : std::nullopt;
      return cmd_preprocess(cfg, prep_in, prep_out, crop, deriv, slog, gauss, ss, stt);
    }
    if (gt->parsed()) {
      std::optional<double> isti_max =
          gt->count("--isti-max") ? std::optional<double>(gt_isti_max) : std::nullopt;
      return cmd_gt(cfg, gt_ecg, gt_dzdt, gt_fps, gt_duration, gt_t0, gt_out, gt_out_norm,
                    isti_max);
    }
    if (tr->parsed()) {
      return cmd_train(cfg, tr_manifest, tr_features_dir, tr_out, tr_history, tr);
    }
    if (pr->parsed()) {
      std::optional<double> isti_max =
          pr->count("--isti-max") ? std::optional<double>(pr_isti_max) : std::nullopt;
      return cmd_predict(cfg, pr_model, pr_in, pr_out, isti_max, pr_seq_seconds);
    }
    if (st->parsed()) {
      return cmd_stress_train(cfg, st_manifest, st_column, st_out, st_input_min, st_input_max, st);
    }
    if (sp->parsed()) {
      return cmd_stress_predict(cfg, sp_model, sp_signal, sp_manifest, sp_column, sp_out,
                                sp_bmodel, sp_bcolumn, sp_input_min, sp_input_max, sp_bmin,
                                sp_bmax);
    }
    if (ft->parsed()) {
      return cmd_features(cfg, ft_ecg, ft_peaks, ft_hr, ft_hrv, ft_tvf, ft_roi, ft_breathing,
                          ft_window, ft_stride);
    }
    if (ev->parsed()) {
      if (ev_scores.empty() && (ev_pred.empty() || ev_gt.empty())) {
        fail(ErrorKind::InvalidArgument, "eval needs --scores or both --pred and --gt");
      }
      return cmd_eval(ev_pred, ev_gt, ev_scores);
    }
    if (gc->parsed()) {
      return cmd_gradcheck(static_cast<std::uint64_t>(gc_seed), gc_eps, gc_coords);
    }
    fail(ErrorKind::UnknownSubcommand, "no subcommand given");
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.is_io() ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace stressnet
