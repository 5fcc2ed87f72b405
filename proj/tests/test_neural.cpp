#include <doctest.h>

#include <cmath>

#include "stressnet/net.hpp"
#include "stressnet/rng.hpp"
#include "stressnet/train.hpp"

using namespace stressnet;

namespace {

ModelDescriptor tiny_descriptor() {
  ModelDescriptor d;
  d.input_height = 9;
  d.input_width = 9;
  d.conv_channels = {4, 6};
  d.lstm_layers = 2;
  d.lstm_hidden = 6;
  d.head_hidden = 10;
  d.n_bins = 7;
  return d;
}

FeatureClip random_feature_clip(const ModelDescriptor& d, std::size_t frames, Rng& rng) {
  FeatureClip clip;
  clip.width = d.input_width;
  clip.height = d.input_height;
  clip.fps = 5.0;
  clip.data.resize(frames * d.input_width * d.input_height);
  for (double& v : clip.data) v = rng.normal();
  return clip;
}

void zero_head(Model& m) {
  for (Tensor* t : {&m.params.fc0.w, &m.params.fc0.b, &m.params.fc1.w, &m.params.fc1.b}) {
    std::fill(t->data.begin(), t->data.end(), 0.0);
  }
}

}  // namespace

TEST_CASE("backbone_forward: zero input and zero biases give zero features") {
  Rng rng(1);
  Model m = Model::init(tiny_descriptor(), rng);
  for (auto& layer : m.params.conv) std::fill(layer.b.data.begin(), layer.b.data.end(), 0.0);
  std::vector<double> frame(81, 0.0);
  for (double v : backbone_forward(m, frame)) CHECK(v == 0.0);
}

TEST_CASE("backbone_forward matches a direct convolution oracle") {
  // single conv layer on a 5x5 input: oracle computes the strided sliding
  // dot product and the channel means directly
  ModelDescriptor d;
  d.input_height = 5;
  d.input_width = 5;
  d.conv_channels = {3};
  d.lstm_layers = 1;
  d.lstm_hidden = 4;
  d.head_hidden = 4;
  d.n_bins = 3;
  Rng rng(2);
  Model m = Model::init(d, rng);

  std::vector<double> frame(25);
  for (double& v : frame) v = rng.normal();

  auto f0 = backbone_forward(m, frame);
  REQUIRE(f0.size() == 3);
  // output spatial size (5-3)/2+1 = 2
  for (std::size_t oc = 0; oc < 3; ++oc) {
    double mean = 0.0;
    for (std::size_t oy = 0; oy < 2; ++oy) {
      for (std::size_t ox = 0; ox < 2; ++ox) {
        double acc = m.params.conv[0].b.data[oc];
        for (std::size_t ky = 0; ky < 3; ++ky) {
          for (std::size_t kx = 0; kx < 3; ++kx) {
            acc += m.params.conv[0].w.data[oc * 9 + ky * 3 + kx] *
                   frame[(oy * 2 + ky) * 5 + (ox * 2 + kx)];
          }
        }
        mean += std::max(acc, 0.0);
      }
    }
    CHECK(f0[oc] == doctest::Approx(mean / 4.0).epsilon(1e-12));
  }
}

TEST_CASE("lstm_forward: zero weights give zero outputs") {
  std::vector<LstmLayer> layers(1);
  layers[0].w_ih = Tensor({8, 3});
  layers[0].w_hh = Tensor({8, 2});
  layers[0].b = Tensor({8});
  std::vector<std::vector<double>> inputs = {{1.0, -2.0, 0.5}, {0.3, 0.0, 4.0}};
  auto hs = lstm_forward(layers, 2, inputs);
  REQUIRE(hs.size() == 2);
  for (const auto& h : hs) {
    for (double v : h) CHECK(v == 0.0);
  }
}

TEST_CASE("lstm_forward single step matches the scalar gate formulas") {
  // 2-unit LSTM, 1 layer, fixed small weights; oracle evaluates the
  // recurrence by hand
  const std::size_t hidden = 2, in = 2;
  LstmLayer L;
  L.w_ih = Tensor({4 * hidden, in});
  L.w_hh = Tensor({4 * hidden, hidden});
  L.b = Tensor({4 * hidden});
  for (std::size_t i = 0; i < L.w_ih.size(); ++i) L.w_ih.data[i] = 0.05 * static_cast<double>(i + 1);
  for (std::size_t i = 0; i < L.w_hh.size(); ++i) L.w_hh.data[i] = -0.03 * static_cast<double>(i + 1);
  for (std::size_t i = 0; i < L.b.size(); ++i) L.b.data[i] = 0.01 * static_cast<double>(i);

  std::vector<double> x = {0.7, -0.4};
  auto hs = lstm_forward({L}, hidden, {x});
  REQUIRE(hs.size() == 1);

  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  for (std::size_t u = 0; u < hidden; ++u) {
    auto gate = [&](std::size_t block) {
      std::size_t row = block * hidden + u;
      return L.b.data[row] + L.w_ih.data[row * in] * x[0] + L.w_ih.data[row * in + 1] * x[1];
    };
    double i = sig(gate(0));
    double f = sig(gate(1));
    double g = std::tanh(gate(2));
    double o = sig(gate(3));
    (void)f;  // no previous cell state on the first step
    double c = i * g;
    double expect = o * std::tanh(c);
    CHECK(hs[0][u] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("lstm hidden state stays within [-1, 1]") {
  Rng rng(3);
  std::vector<LstmLayer> layers(2);
  for (auto& L : layers) {
    L.w_ih = Tensor({12, 3});
    L.w_hh = Tensor({12, 3});
    L.b = Tensor({12});
    for (double& v : L.w_ih.data) v = rng.normal(0.0, 2.0);
    for (double& v : L.w_hh.data) v = rng.normal(0.0, 2.0);
    for (double& v : L.b.data) v = rng.normal(0.0, 2.0);
  }
  // layer 1 consumes layer 0's 3-wide hidden state
  std::vector<std::vector<double>> inputs(20, std::vector<double>(3));
  for (auto& x : inputs) {
    for (double& v : x) v = rng.normal(0.0, 5.0);
  }
  for (const auto& h : lstm_forward(layers, 3, inputs)) {
    for (double v : h) {
      CHECK(v <= 1.0);
      CHECK(v >= -1.0);
    }
  }
}

TEST_CASE("detection_head: zero weights give the uniform distribution") {
  Rng rng(4);
  Model m = Model::init(tiny_descriptor(), rng);
  zero_head(m);
  std::vector<double> l0(m.desc.lstm_hidden, 0.7);
  auto probs = detection_head(m, l0);
  REQUIRE(probs.size() == 7);
  for (double p : probs) CHECK(p == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("detection_head output is a distribution, invariant to logit shift") {
  Rng rng(5);
  Model m = Model::init(tiny_descriptor(), rng);
  std::vector<double> l0(m.desc.lstm_hidden);
  for (int trial = 0; trial < 20; ++trial) {
    for (double& v : l0) v = rng.normal();
    auto p = detection_head(m, l0);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    Model shifted = m;
    for (double& b : shifted.params.fc1.b.data) b += 3.7;
    auto ps = detection_head(shifted, l0);
    for (std::size_t j = 0; j < p.size(); ++j) {
      CHECK(ps[j] == doctest::Approx(p[j]).epsilon(1e-9));
    }
  }
}

TEST_CASE("bins_expectation on symmetric distributions") {
  std::vector<double> uniform(33, 1.0 / 33.0);
  CHECK(bins_expectation(uniform, 33) == doctest::Approx(0.5).epsilon(1e-12));

  std::vector<double> onehot(33, 0.0);
  onehot[0] = 1.0;
  CHECK(bins_expectation(onehot, 33) == doctest::Approx(0.5 / 33.0).epsilon(1e-12));

  std::vector<double> pair(33, 0.0);
  pair[0] = pair[32] = 0.5;
  CHECK(bins_expectation(pair, 33) == doctest::Approx(0.5).epsilon(1e-12));

  // always within the center span
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(9);
    double sum = 0.0;
    for (double& v : p) {
      v = rng.uniform();
      sum += v;
    }
    for (double& v : p) v /= sum;
    double e = bins_expectation(p, 9);
    CHECK(e >= 0.5 / 9.0);
    CHECK(e <= 8.5 / 9.0);
  }

  std::vector<double> bad(33, 0.1);
  CHECK_THROWS_WITH_AS(bins_expectation(bad, 33), doctest::Contains("NotADistribution"), Error);
}

TEST_CASE("multi_loss fixtures") {
  std::vector<double> onehot(33, 0.0);
  const double target = 10.5 / 33.0;  // center of bin 10
  onehot[10] = 1.0;
  MultiLossResult exact = multi_loss(onehot, target, target, 1.0);
  CHECK(exact.target_bin == 10);
  CHECK(exact.loss == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<double> uniform(33, 1.0 / 33.0);
  MultiLossResult u = multi_loss(uniform, target, target, 1.0);
  CHECK(u.loss == doctest::Approx(std::log(33.0)).epsilon(1e-12));

  MultiLossResult noreg = multi_loss(uniform, 0.9, target, 0.0);
  CHECK(noreg.loss == doctest::Approx(noreg.classification).epsilon(1e-12));
  CHECK(noreg.regression > 0.0);  // recorded but unweighted

  CHECK_THROWS_WITH_AS(multi_loss(uniform, 0.5, 1.5, 1.0), doctest::Contains("TargetOutOfRange"),
                       Error);

  // loss is zero only when the right bin has all the mass and the decoded
  // value equals the target
  MultiLossResult off = multi_loss(onehot, target + 0.01, target, 1.0);
  CHECK(off.loss > 0.0);
}

TEST_CASE("gradient check: analytic backward matches finite differences") {
  ModelDescriptor d = tiny_descriptor();
  Rng rng(7);
  Model m = Model::init(d, rng);
  FeatureClip clip = random_feature_clip(d, 10, rng);
  std::vector<double> targets(10);
  for (double& t : targets) t = rng.uniform();
  std::vector<SequenceRef> batch = {{&clip, &targets, 0, 5}, {&clip, &targets, 5, 5}};

  double err_ce = grad_check(m, batch, 1.0, BinLoss::CategoricalCE, 1e-5, 20, 100);
  CHECK(err_ce < 1e-4);

  double err_bce = grad_check(m, batch, 0.7, BinLoss::PerBinBCE, 1e-5, 20, 101);
  CHECK(err_bce < 1e-4);
}

TEST_CASE("gradient check passes trivially when the input is zero") {
  // conv weights see zero input, so analytic and numeric both vanish
  ModelDescriptor d = tiny_descriptor();
  Rng rng(8);
  Model m = Model::init(d, rng);
  FeatureClip clip = random_feature_clip(d, 5, rng);
  std::fill(clip.data.begin(), clip.data.end(), 0.0);
  std::vector<double> targets(5, 0.5);
  std::vector<SequenceRef> batch = {{&clip, &targets, 0, 5}};

  Parameters grads = m.zero_like();
  isti_forward_backward(m, batch, 1.0, BinLoss::CategoricalCE, &grads);
  for (const auto& layer : grads.conv) {
    for (double g : layer.w.data) CHECK(g == 0.0);
  }
  double err = grad_check(m, batch, 1.0, BinLoss::CategoricalCE, 1e-5, 10, 102);
  CHECK(err < 1e-4);
}

TEST_CASE("a corrupted backward pass is detected") {
  ModelDescriptor d = tiny_descriptor();
  Rng rng(9);
  Model m = Model::init(d, rng);
  FeatureClip clip = random_feature_clip(d, 5, rng);
  std::vector<double> targets(5);
  for (double& t : targets) t = rng.uniform();
  std::vector<SequenceRef> batch = {{&clip, &targets, 0, 5}};

  Parameters grads = m.zero_like();
  isti_forward_backward(m, batch, 1.0, BinLoss::CategoricalCE, &grads);
  for (double& g : grads.fc0.w.data) g *= 1.5;  // deliberate mutation

  Rng check_rng(103);
  double err = fd_compare(m, batch, grads, 1.0, BinLoss::CategoricalCE, 1e-5, 20, check_rng);
  CHECK(err > 1e-2);
}

TEST_CASE("sgd_step arithmetic and grouping") {
  ModelDescriptor d = tiny_descriptor();
  Rng rng(10);
  Model m = Model::init(d, rng);
  TrainConfig cfg;
  cfg.lr_head = 0.01;
  cfg.lr_backbone = 0.001;

  CHECK(cfg.lr_at(0, false) == doctest::Approx(0.01));
  CHECK(cfg.lr_at(9, false) == doctest::Approx(0.01));
  CHECK(cfg.lr_at(10, false) == doctest::Approx(0.001));
  CHECK(cfg.lr_at(25, true) == doctest::Approx(0.001 * 0.01));

  Parameters grads = m.zero_like();
  Model before = m;
  sgd_step(m, grads, 0, cfg);  // zero gradient: parameters unchanged
  for (std::size_t i = 0; i < m.params.fc1.w.size(); ++i) {
    CHECK(m.params.fc1.w.data[i] == before.params.fc1.w.data[i]);
  }

  m.params.fc1.b.data[0] = 1.0;
  grads.fc1.b.data[0] = 2.0;
  sgd_step(m, grads, 0, cfg);
  CHECK(m.params.fc1.b.data[0] == doctest::Approx(0.98).epsilon(1e-12));

  // backbone group uses its own rate
  m.params.conv[0].w.data[0] = 1.0;
  grads = m.zero_like();
  grads.conv[0].w.data[0] = 2.0;
  sgd_step(m, grads, 0, cfg);
  CHECK(m.params.conv[0].w.data[0] == doctest::Approx(1.0 - 0.001 * 2.0).epsilon(1e-12));
}

TEST_CASE("train is deterministic and records both loss terms") {
  ModelDescriptor d = tiny_descriptor();
  Rng rng(11);
  std::vector<TrainingExample> dataset;
  for (int c = 0; c < 2; ++c) {
    TrainingExample ex;
    ex.clip = random_feature_clip(d, 20, rng);
    ex.targets01.resize(20);
    for (double& t : ex.targets01) t = rng.uniform();
    dataset.push_back(std::move(ex));
  }
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.n_bins = d.n_bins;
  cfg.seed = 42;
  cfg.batch_frames = 20;
  cfg.seq_seconds = 1.0;  // 5 frames at fps 5

  TrainResult a = train(dataset, cfg, d);
  TrainResult b = train(dataset, cfg, d);
  auto ra = named_tensors(a.model.params);
  auto rb = named_tensors(b.model.params);
  for (std::size_t i = 0; i < ra.size(); ++i) {
    REQUIRE(ra[i].tensor->size() == rb[i].tensor->size());
    for (std::size_t j = 0; j < ra[i].tensor->size(); ++j) {
      CHECK(ra[i].tensor->data[j] == rb[i].tensor->data[j]);  // bitwise
    }
  }
  REQUIRE(a.history.size() == 3);
  for (const auto& e : a.history) {
    CHECK(std::isfinite(e.loss));
    CHECK(e.classification >= 0.0);
    CHECK(e.regression >= 0.0);
    CHECK(e.loss == doctest::Approx(e.classification + cfg.alpha * e.regression).epsilon(1e-9));
  }

  // alpha = 0 still records the regression term separately
  TrainConfig cfg0 = cfg;
  cfg0.alpha = 0.0;
  TrainResult z = train(dataset, cfg0, d);
  CHECK(z.history.back().regression > 0.0);
  CHECK(z.history.back().loss == doctest::Approx(z.history.back().classification).epsilon(1e-9));
}

TEST_CASE("train validates alignment") {
  ModelDescriptor d = tiny_descriptor();
  Rng rng(12);
  TrainingExample ex;
  ex.clip = random_feature_clip(d, 10, rng);
  ex.targets01.assign(7, 0.5);  // wrong length
  CHECK_THROWS_WITH_AS(train({ex}, TrainConfig{.n_bins = 7}, d),
                       doctest::Contains("AlignmentError"), Error);
  CHECK_THROWS_WITH_AS(train({}, TrainConfig{}, d), doctest::Contains("EmptyDataset"), Error);
}

TEST_CASE("predict_isti: uniform head predicts mid-range, length matches input") {
  ModelDescriptor d = tiny_descriptor();
  Rng rng(13);
  Model m = Model::init(d, rng);
  zero_head(m);
  FeatureClip clip = random_feature_clip(d, 12, rng);  // 12 = 2 windows of 5 + remainder 2
  Signal pred = predict_isti(m, clip, 300.0);
  REQUIRE(pred.size() == 12);
  CHECK(pred.sample_rate_hz == doctest::Approx(clip.fps));
  for (double v : pred.samples) CHECK(v == doctest::Approx(150.0).epsilon(1e-9));
}
