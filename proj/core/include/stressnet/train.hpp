#pragma once

#include <cstdint>
#include <vector>

#include "stressnet/net.hpp"
#include "stressnet/signal.hpp"

namespace stressnet {

struct TrainConfig {
  double lr_backbone = 0.001;
  double lr_head = 0.01;  // LSTM + fully connected layers
  double lr_decay_factor = 0.1;
  std::size_t decay_period_epochs = 10;
  std::size_t epochs = 60;
  std::size_t batch_frames = 500;
  std::size_t n_bins = 33;
  double alpha = 1.0;
  double seq_seconds = 1.0;
  std::uint64_t seed = 0;
  BinLoss bin_loss = BinLoss::CategoricalCE;
  /// 0 = standardize from training data (1 / global std of the inputs);
  /// any positive value is used as-is.
  double input_scale = 0.0;

  void validate() const;
  double lr_at(std::size_t epoch, bool backbone) const;
};

/// One clip plus its per-frame target in [0,1].
struct TrainingExample {
  FeatureClip clip;
  std::vector<double> targets01;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  double classification = 0.0;
  double regression = 0.0;
  double lr_head = 0.0;
  double lr_backbone = 0.0;
};
using TrainingHistory = std::vector<EpochStats>;

/// theta -= lr_group * decay^(epoch/period) * grad, plain SGD. Backbone
/// (conv) tensors use lr_backbone, everything else lr_head.
void sgd_step(Model& model, const Parameters& grads, std::size_t epoch, const TrainConfig& config);

struct TrainResult {
  Model model;
  TrainingHistory history;
};

/// Deterministic training: seeded init, contiguous seq_seconds windows
/// grouped into batches of ~batch_frames frames, per-frame losses averaged
/// within each batch, one SGD step per batch.
TrainResult train(const std::vector<TrainingExample>& dataset, const TrainConfig& config,
                  ModelDescriptor descriptor = {});

/// Per-frame ISTI prediction in ms at the clip frame rate.
Signal predict_isti(const Model& model, const FeatureClip& fc, double isti_max_ms,
                    double seq_seconds = 1.0);

/// Central finite differences of the batch loss against `grads` on
/// coords_per_tensor random coordinates of every parameter tensor; returns
/// the max relative error. Exposed separately from grad_check so tests can
/// diff deliberately corrupted gradients.
double fd_compare(Model& model, std::span<const SequenceRef> batch, const Parameters& grads,
                  double alpha, BinLoss kind, double eps, std::size_t coords_per_tensor, Rng& rng);

/// Analytic vs finite-difference gradients of the multi-loss on a sample
/// batch; returns the max relative error over >= coords_per_tensor random
/// coordinates of every tensor.
double grad_check(Model& model, std::span<const SequenceRef> batch, double alpha = 1.0,
                  BinLoss kind = BinLoss::CategoricalCE, double eps = 1e-5,
                  std::size_t coords_per_tensor = 20, std::uint64_t seed = 0);

}  // namespace stressnet
