#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "stressnet/clip.hpp"
#include "stressnet/rng.hpp"
#include "stressnet/tensor.hpp"

namespace stressnet {

/// Architecture of the ISTI network: stacked 3x3 stride-2 valid
/// convolutions with ReLU, global average pooling, a stacked LSTM, and a
/// two-layer detection head ending in softmax over n_bins.
struct ModelDescriptor {
  std::size_t input_height = 32;
  std::size_t input_width = 32;
  std::vector<std::size_t> conv_channels = {8, 16, 32};
  std::size_t lstm_layers = 2;
  std::size_t lstm_hidden = 32;
  std::size_t head_hidden = 64;
  std::size_t n_bins = 33;
  /// Input standardization absorbed into the first convolution; resolved
  /// from training data when TrainConfig::input_scale is 0 (auto).
  double input_scale = 1.0;

  void validate() const;
  /// Spatial size after the conv stack; throws if a layer underflows.
  std::pair<std::size_t, std::size_t> conv_output_hw() const;
};

struct ConvLayer {
  Tensor w;  // [out_ch, in_ch, 3, 3]
  Tensor b;  // [out_ch]
};

struct LstmLayer {
  Tensor w_ih;  // [4*hidden, in]   gate order i, f, g, o
  Tensor w_hh;  // [4*hidden, hidden]
  Tensor b;     // [4*hidden]
};

struct FcLayer {
  Tensor w;  // [out, in]
  Tensor b;  // [out]
};

struct Parameters {
  std::vector<ConvLayer> conv;
  std::vector<LstmLayer> lstm;
  FcLayer fc0;
  FcLayer fc1;
};

struct NamedTensorRef {
  std::string name;
  Tensor* tensor;
  bool backbone;  // true for conv parameters (separate learning-rate group)
};
struct NamedTensorCRef {
  std::string name;
  const Tensor* tensor;
  bool backbone;
};

std::vector<NamedTensorRef> named_tensors(Parameters& params);
std::vector<NamedTensorCRef> named_tensors(const Parameters& params);

struct Model {
  ModelDescriptor desc;
  Parameters params;

  /// Parameters uniform in [-a, a] with a = 1/sqrt(fan_in), drawn in a
  /// fixed order from the seeded generator.
  static Model init(const ModelDescriptor& desc, Rng& rng);

  /// Same structure, all zeros (gradient accumulator).
  Parameters zero_like() const;

  /// Zero-filled parameter set with the shapes the descriptor implies.
  static Parameters zero_parameters(const ModelDescriptor& desc);
};

/// Conv stack + ReLU + GAP for one frame; returns the feature vector f0.
std::vector<double> backbone_forward(const Model& model, std::span<const double> frame);

/// Stacked LSTM over a sequence of input vectors, fresh zero state.
/// Standalone so tests can drive hand-built layers.
std::vector<std::vector<double>> lstm_forward(const std::vector<LstmLayer>& layers,
                                              std::size_t hidden,
                                              const std::vector<std::vector<double>>& inputs);
std::vector<std::vector<double>> lstm_forward(const Model& model,
                                              const std::vector<std::vector<double>>& inputs);

/// FC -> ReLU -> FC -> softmax; returns bin probabilities summing to 1.
std::vector<double> detection_head(const Model& model, const std::vector<double>& l0);

/// Probability-weighted mean of bin centers c_j = (j + 0.5) / n_bins.
double bins_expectation(const std::vector<double>& probs, std::size_t n_bins);

enum class BinLoss { CategoricalCE, PerBinBCE };

struct MultiLossResult {
  double loss = 0.0;
  double classification = 0.0;
  double regression = 0.0;
  std::size_t target_bin = 0;
};

/// Binned classification term plus alpha-weighted squared error on the
/// decoded value.
MultiLossResult multi_loss(const std::vector<double>& probs, double pred_value,
                           double target_value01, double alpha,
                           BinLoss kind = BinLoss::CategoricalCE);

/// One (clip, start) training window with per-frame normalized targets.
struct SequenceRef {
  const FeatureClip* clip = nullptr;
  const std::vector<double>* targets01 = nullptr;
  std::size_t start = 0;
  std::size_t length = 0;
};

struct BatchStats {
  double loss = 0.0;
  double classification = 0.0;
  double regression = 0.0;
  std::size_t frames = 0;
};

/// Mean per-frame multi-loss over the batch; accumulates analytic gradients
/// into *grads when given.
BatchStats isti_forward_backward(const Model& model, std::span<const SequenceRef> batch,
                                 double alpha, BinLoss kind, Parameters* grads);

/// Per-step bin probabilities and decoded values for one window.
struct StepOutput {
  std::vector<double> probs;
  double value01 = 0.0;
};
std::vector<StepOutput> isti_forward(const Model& model, const FeatureClip& clip,
                                     std::size_t start, std::size_t length);

}  // namespace stressnet
