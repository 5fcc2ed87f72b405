#include "stressnet/train.hpp"

#include <algorithm>
#include <cmath>

#include "stressnet/isti.hpp"

namespace stressnet {

void TrainConfig::validate() const {
  if (!(lr_backbone > 0.0 && lr_head > 0.0 && lr_decay_factor > 0.0)) {
    fail(ErrorKind::InvalidArgument, "learning rates must be > 0");
  }
  if (decay_period_epochs == 0) fail(ErrorKind::InvalidArgument, "decay period must be > 0");
  if (n_bins < 2) fail(ErrorKind::InvalidArgument, "n_bins must be >= 2");
  if (!(alpha >= 0.0)) fail(ErrorKind::InvalidArgument, "alpha must be >= 0");
  if (!(seq_seconds > 0.0)) fail(ErrorKind::InvalidArgument, "seq_seconds must be > 0");
  if (batch_frames == 0) fail(ErrorKind::InvalidArgument, "batch_frames must be > 0");
  if (!(input_scale >= 0.0)) fail(ErrorKind::InvalidArgument, "input_scale must be >= 0");
}

double TrainConfig::lr_at(std::size_t epoch, bool backbone) const {
  double base = backbone ? lr_backbone : lr_head;
  double decay = std::pow(lr_decay_factor, static_cast<double>(epoch / decay_period_epochs));
  return base * decay;
}

void sgd_step(Model& model, const Parameters& grads, std::size_t epoch, const TrainConfig& config) {
  auto refs = named_tensors(model.params);
  auto grefs = named_tensors(grads);
  if (grefs.size() != refs.size()) fail(ErrorKind::ShapeMismatch, "gradient layout mismatch");
  const double lr_b = config.lr_at(epoch, true);
  const double lr_h = config.lr_at(epoch, false);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (refs[i].tensor->shape != grefs[i].tensor->shape) {
      fail(ErrorKind::ShapeMismatch, "gradient shape mismatch: " + refs[i].name);
    }
    const double lr = refs[i].backbone ? lr_b : lr_h;
    double* t = refs[i].tensor->data.data();
    const double* gd = grefs[i].tensor->data.data();
    const std::size_t n = refs[i].tensor->size();
    for (std::size_t j = 0; j < n; ++j) t[j] -= lr * gd[j];
  }
}

namespace {

void zero_params(Parameters& p) {
  auto refs = named_tensors(p);
  for (auto& r : refs) std::fill(r.tensor->data.begin(), r.tensor->data.end(), 0.0);
}

std::size_t sequence_steps(double fps, double seq_seconds) {
  auto s = static_cast<std::size_t>(std::llround(fps * seq_seconds));
  return s == 0 ? 1 : s;
}

}  // namespace

TrainResult train(const std::vector<TrainingExample>& dataset, const TrainConfig& config,
                  ModelDescriptor descriptor) {
  config.validate();
  if (dataset.empty()) fail(ErrorKind::EmptyDataset, "train on empty dataset");
  const double fps = dataset.front().clip.fps;
  for (const auto& ex : dataset) {
    if (ex.clip.frame_count() == 0) fail(ErrorKind::EmptyDataset, "clip with no frames");
    if (ex.targets01.size() != ex.clip.frame_count()) {
      fail(ErrorKind::AlignmentError, "targets must cover every feature frame");
    }
    if (ex.clip.width != dataset.front().clip.width ||
        ex.clip.height != dataset.front().clip.height || ex.clip.fps != fps) {
      fail(ErrorKind::AlignmentError, "clips must share size and frame rate");
    }
    for (double t : ex.targets01) {
      if (!(t >= 0.0 && t <= 1.0)) fail(ErrorKind::TargetOutOfRange, "target outside [0,1]");
    }
  }

  descriptor.input_height = dataset.front().clip.height;
  descriptor.input_width = dataset.front().clip.width;
  descriptor.n_bins = config.n_bins;
  if (config.input_scale > 0.0) {
    descriptor.input_scale = config.input_scale;
  } else {
    // standardize: unit variance over the whole training input
    double sum = 0.0, sumsq = 0.0;
    std::size_t count = 0;
    for (const auto& ex : dataset) {
      for (double v : ex.clip.data) {
        sum += v;
        sumsq += v * v;
      }
      count += ex.clip.data.size();
    }
    double mean = sum / static_cast<double>(count);
    double var = sumsq / static_cast<double>(count) - mean * mean;
    descriptor.input_scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
  }
  descriptor.validate();

  Rng rng(config.seed);
  Model model = Model::init(descriptor, rng);

  const std::size_t steps = sequence_steps(fps, config.seq_seconds);
  std::vector<SequenceRef> pool;
  for (const auto& ex : dataset) {
    const std::size_t frames = ex.clip.frame_count();
    for (std::size_t s = 0; s + steps <= frames; s += steps) {
      pool.push_back({&ex.clip, &ex.targets01, s, steps});
    }
  }
  if (pool.empty()) fail(ErrorKind::EmptyDataset, "no full sequences in dataset");
  const std::size_t seqs_per_batch = std::max<std::size_t>(1, config.batch_frames / steps);

  Parameters grads = model.zero_like();
  TrainingHistory history;
  std::vector<SequenceRef> order = pool;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    EpochStats es;
    es.epoch = epoch;
    es.lr_head = config.lr_at(epoch, false);
    es.lr_backbone = config.lr_at(epoch, true);
    std::size_t batches = 0;
    for (std::size_t k = 0; k < order.size(); k += seqs_per_batch) {
      const std::size_t count = std::min(seqs_per_batch, order.size() - k);
      std::span<const SequenceRef> batch(order.data() + k, count);
      zero_params(grads);
      BatchStats bs = isti_forward_backward(model, batch, config.alpha, config.bin_loss, &grads);
      sgd_step(model, grads, epoch, config);
      es.loss += bs.loss;
      es.classification += bs.classification;
      es.regression += bs.regression;
      ++batches;
    }
    es.loss /= static_cast<double>(batches);
    es.classification /= static_cast<double>(batches);
    es.regression /= static_cast<double>(batches);
    history.push_back(es);
  }
  return {std::move(model), std::move(history)};
}

Signal predict_isti(const Model& model, const FeatureClip& fc, double isti_max_ms,
                    double seq_seconds) {
  if (!(isti_max_ms > 0.0)) fail(ErrorKind::NonPositiveScale, "isti_max_ms must be > 0");
  const std::size_t frames = fc.frame_count();
  if (frames == 0) fail(ErrorKind::EmptySignal, "predict on empty clip");
  const std::size_t steps = sequence_steps(fc.fps, seq_seconds);

  Signal out;
  out.sample_rate_hz = fc.fps;
  out.t0_seconds = fc.t0_seconds;
  out.samples.reserve(frames);
  std::size_t s = 0;
  while (s < frames) {
    const std::size_t len = std::min(steps, frames - s);
    auto stepsOut = isti_forward(model, fc, s, len);
    for (const auto& so : stepsOut) {
      out.samples.push_back(denormalize_isti(so.value01, isti_max_ms));
    }
    s += len;
  }
  return out;
}

double fd_compare(Model& model, std::span<const SequenceRef> batch, const Parameters& grads,
                  double alpha, BinLoss kind, double eps, std::size_t coords_per_tensor, Rng& rng) {
  auto grefs = named_tensors(grads);
  auto prefs = named_tensors(model.params);
  double max_rel = 0.0;
  for (std::size_t i = 0; i < prefs.size(); ++i) {
    Tensor& param = *prefs[i].tensor;
    const Tensor& grad = *grefs[i].tensor;
    const std::size_t n = param.size();
    const std::size_t coords = std::min(coords_per_tensor, n);
    for (std::size_t c = 0; c < coords; ++c) {
      std::size_t idx = n <= coords_per_tensor ? c : static_cast<std::size_t>(rng.below(n));
      const double keep = param.data[idx];
      param.data[idx] = keep + eps;
      double up = isti_forward_backward(model, batch, alpha, kind, nullptr).loss;
      param.data[idx] = keep - eps;
      double down = isti_forward_backward(model, batch, alpha, kind, nullptr).loss;
      param.data[idx] = keep;
      double numeric = (up - down) / (2.0 * eps);
      double analytic = grad.data[idx];
      double rel = std::abs(analytic - numeric) /
                   std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

double grad_check(Model& model, std::span<const SequenceRef> batch, double alpha, BinLoss kind,
                  double eps, std::size_t coords_per_tensor, std::uint64_t seed) {
  Parameters grads = model.zero_like();
  isti_forward_backward(model, batch, alpha, kind, &grads);
  Rng rng(seed);
  return fd_compare(model, batch, grads, alpha, kind, eps, coords_per_tensor, rng);
}

}  // namespace stressnet
