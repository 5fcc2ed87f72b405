#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stressnet/net.hpp"
#include "stressnet/signal.hpp"

namespace stressnet {

struct Phase {
  std::string name;  // base | prep | immersion | recovery
  double start_s = 0.0;
  double end_s = 0.0;
};

struct TrialRecord {
  Signal isti_ms;
  std::vector<Phase> phases;
  std::optional<bool> stress_label;
  std::optional<Signal> breathing;
};

/// Fully connected stress classifier ending in a logistic sigmoid.
struct StressModel {
  std::size_t n_in = 128;
  FcLayer fc0;  // [h0, n_in]
  FcLayer fc1;  // [h1, h0]
  FcLayer fc2;  // [1, h1]

  static StressModel init(std::size_t n_in, std::size_t h0, std::size_t h1, Rng& rng);
};

/// Whole signal resampled to n_in points, then mapped from [v_min, v_max]
/// to [0,1] with clamping.
std::vector<double> featurize_signal(const Signal& sig, std::size_t n_in, double v_min,
                                     double v_max);

/// Trial ISTI resampled to n_in points, normalized by isti_max_ms.
std::vector<double> featurize(const TrialRecord& trial, std::size_t n_in = 128,
                              double isti_max_ms = 300.0);

/// Probability in (0,1) that the trial is a stress trial.
double stress_forward(const StressModel& model, const std::vector<double>& x);

struct StressTrainConfig {
  double lr = 0.05;
  std::size_t epochs = 1500;
  std::uint64_t seed = 1;
  std::size_t n_in = 128;
  std::size_t hidden0 = 64;
  std::size_t hidden1 = 16;
  double isti_max_ms = 300.0;
};

struct StressExample {
  std::vector<double> features;
  bool stress = false;
};

struct StressTrainResult {
  StressModel model;
  std::vector<double> epoch_bce;
};

/// Binary cross-entropy, plain per-sample SGD in seeded shuffled order.
StressTrainResult stress_train(const std::vector<StressExample>& examples,
                               const StressTrainConfig& config);
StressTrainResult stress_train(const std::vector<TrialRecord>& trials,
                               const StressTrainConfig& config);

/// Product fusion of the ISTI-model and breathing-model probabilities,
/// used as a ranking score.
double fuse_breathing(double p_isti, double p_breath);

/// Analytic vs central-finite-difference gradients of the BCE loss; max
/// relative error over coords random coordinates per tensor.
double stress_grad_check(StressModel& model, const std::vector<StressExample>& examples,
                         double eps = 1e-6, std::size_t coords = 20, std::uint64_t seed = 0);

}  // namespace stressnet
