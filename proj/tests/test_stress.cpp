#include <doctest.h>

#include <cmath>

#include "stressnet/rng.hpp"
#include "stressnet/stress.hpp"

using namespace stressnet;

namespace {

Signal constant_signal(double value, std::size_t n, double rate = 15.0) {
  Signal s;
  s.sample_rate_hz = rate;
  s.samples.assign(n, value);
  return s;
}

// separable-by-construction trials: stress ISTI dips mid-trial
TrialRecord synth_trial(bool stress, Rng& rng) {
  TrialRecord t;
  t.isti_ms.sample_rate_hz = 15.0;
  const std::size_t n = 750;
  t.isti_ms.samples.resize(n);
  double base = 155.0 + rng.uniform(-8.0, 8.0);
  for (std::size_t i = 0; i < n; ++i) {
    double time = static_cast<double>(i) / 15.0;
    double v = base + 6.0 * std::sin(time / 3.0) + rng.normal(0.0, 1.0);
    if (stress && time > 10.0 && time < 40.0) v -= 38.0 + rng.uniform(-4.0, 4.0);
    t.isti_ms.samples[i] = v;
  }
  t.stress_label = stress;
  t.phases = {{"base", 0.0, 10.0}, {"prep", 10.0, 20.0}, {"immersion", 20.0, 40.0},
              {"recovery", 40.0, 50.0}};
  return t;
}

}  // namespace

TEST_CASE("featurize resamples and normalizes") {
  TrialRecord t;
  t.isti_ms = constant_signal(160.0, 300);
  auto v = featurize(t, 128, 300.0);
  REQUIRE(v.size() == 128);
  for (double x : v) CHECK(x == doctest::Approx(160.0 / 300.0).epsilon(1e-12));

  // a 128-sample input is reproduced exactly by the resampler
  Rng rng(2);
  Signal s;
  s.sample_rate_hz = 4.0;
  s.samples.resize(128);
  for (double& x : s.samples) x = rng.uniform(0.0, 300.0);
  auto f = featurize_signal(s, 128, 0.0, 300.0);
  for (std::size_t i = 0; i < 128; ++i) {
    CHECK(f[i] == doctest::Approx(s.samples[i] / 300.0).epsilon(1e-12));
  }

  TrialRecord empty;
  CHECK_THROWS_WITH_AS(featurize(empty), doctest::Contains("EmptySignal"), Error);
}

TEST_CASE("stress_forward: zero model outputs one half, range is (0,1)") {
  StressModel zero;
  zero.n_in = 8;
  zero.fc0.w = Tensor({4, 8});
  zero.fc0.b = Tensor({4});
  zero.fc1.w = Tensor({3, 4});
  zero.fc1.b = Tensor({3});
  zero.fc2.w = Tensor({1, 3});
  zero.fc2.b = Tensor({1});
  CHECK(stress_forward(zero, std::vector<double>(8, 0.3)) == doctest::Approx(0.5));

  Rng rng(3);
  StressModel m = StressModel::init(16, 8, 4, rng);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(16);
    for (double& v : x) v = rng.normal(0.0, 10.0);
    double p = stress_forward(m, x);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
  CHECK_THROWS_WITH_AS(stress_forward(m, std::vector<double>(7, 0.0)),
                       doctest::Contains("ShapeMismatch"), Error);
}

TEST_CASE("stress_forward matches a hand-evaluated 2-2-1 fixture") {
  StressModel m;
  m.n_in = 2;
  m.fc0.w = Tensor({2, 2});
  m.fc0.b = Tensor({2});
  m.fc1.w = Tensor({2, 2});
  m.fc1.b = Tensor({2});
  m.fc2.w = Tensor({1, 2});
  m.fc2.b = Tensor({1});
  m.fc0.w.data = {0.5, -0.25, 0.75, 0.1};
  m.fc0.b.data = {0.1, -0.2};
  m.fc1.w.data = {1.0, -1.0, 0.5, 0.5};
  m.fc1.b.data = {0.0, 0.05};
  m.fc2.w.data = {2.0, -1.5};
  m.fc2.b.data = {0.25};

  std::vector<double> x = {0.8, -0.6};
  double u0 = std::max(0.1 + 0.5 * 0.8 + -0.25 * -0.6, 0.0);
  double u1 = std::max(-0.2 + 0.75 * 0.8 + 0.1 * -0.6, 0.0);
  double v0 = std::max(0.0 + 1.0 * u0 - 1.0 * u1, 0.0);
  double v1 = std::max(0.05 + 0.5 * u0 + 0.5 * u1, 0.0);
  double logit = 0.25 + 2.0 * v0 - 1.5 * v1;
  double expect = 1.0 / (1.0 + std::exp(-logit));
  CHECK(stress_forward(m, x) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("stress_train separates synthetic trials and is deterministic") {
  Rng rng(5);
  std::vector<TrialRecord> trials;
  for (int i = 0; i < 12; ++i) trials.push_back(synth_trial(i % 2 == 0, rng));

  StressTrainConfig cfg;
  cfg.epochs = 400;
  cfg.seed = 9;
  StressTrainResult a = stress_train(trials, cfg);
  CHECK(a.epoch_bce.back() < 0.1);
  CHECK(a.epoch_bce.front() > a.epoch_bce.back());

  StressTrainResult b = stress_train(trials, cfg);
  for (std::size_t i = 0; i < a.model.fc0.w.size(); ++i) {
    CHECK(a.model.fc0.w.data[i] == b.model.fc0.w.data[i]);  // bitwise
  }

  std::vector<TrialRecord> one_class(trials.begin(), trials.begin() + 1);
  CHECK_THROWS_WITH_AS(stress_train(one_class, cfg), doctest::Contains("SingleClassDataset"),
                       Error);
}

TEST_CASE("BCE symmetry: negating the output layer flips the probability") {
  Rng rng(6);
  StressModel m = StressModel::init(12, 6, 3, rng);
  StressModel flipped = m;
  for (double& v : flipped.fc2.w.data) v = -v;
  for (double& v : flipped.fc2.b.data) v = -v;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(12);
    for (double& v : x) v = rng.normal();
    double p = stress_forward(m, x);
    double q = stress_forward(flipped, x);
    CHECK(q == doctest::Approx(1.0 - p).epsilon(1e-12));
    // hence BCE(p, y) == BCE(1-p, 1-y) exactly
    double bce_py = -std::log(p);
    double bce_flipped = -std::log(1.0 - q);
    CHECK(bce_py == doctest::Approx(bce_flipped).epsilon(1e-9));
  }
}

TEST_CASE("fuse_breathing product semantics") {
  CHECK(fuse_breathing(1.0, 1.0) == 1.0);
  CHECK(fuse_breathing(0.37, 1.0) == doctest::Approx(0.37));
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    double a = rng.uniform(), b = rng.uniform();
    double f = fuse_breathing(a, b);
    CHECK(f <= std::min(a, b) + 1e-15);
    CHECK(f == doctest::Approx(fuse_breathing(b, a)));  // commutative
    double a2 = std::min(1.0, a + 0.1);
    CHECK(fuse_breathing(a2, b) >= f);  // monotone
  }
  CHECK_THROWS_WITH_AS(fuse_breathing(1.2, 0.5), doctest::Contains("OutOfRangeProbability"),
                       Error);
  CHECK_THROWS_WITH_AS(fuse_breathing(0.5, -0.1), doctest::Contains("OutOfRangeProbability"),
                       Error);
}

TEST_CASE("stress gradient check") {
  Rng rng(8);
  StressModel m = StressModel::init(16, 8, 4, rng);
  std::vector<StressExample> examples;
  for (int i = 0; i < 8; ++i) {
    StressExample e;
    e.features.resize(16);
    for (double& v : e.features) v = rng.uniform();
    e.stress = (i % 2) == 0;
    examples.push_back(std::move(e));
  }
  CHECK(stress_grad_check(m, examples, 1e-6, 20, 12) < 1e-4);
}
