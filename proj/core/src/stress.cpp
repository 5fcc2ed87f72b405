#include "stressnet/stress.hpp"

#include <algorithm>
#include <cmath>

#include "stressnet/isti.hpp"

namespace stressnet {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void fc_forward(const FcLayer& L, const std::vector<double>& x, std::vector<double>& y) {
  const std::size_t rows = L.w.shape[0];
  const std::size_t in = L.w.shape[1];
  if (x.size() != in) fail(ErrorKind::ShapeMismatch, "fc input width mismatch");
  y.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = L.b.data[r];
    const double* row = L.w.data.data() + r * in;
    for (std::size_t c = 0; c < in; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

struct StressActs {
  std::vector<double> u0, u1;  // post-ReLU
  double logit = 0.0;
  double p = 0.5;
};

void stress_forward_cached(const StressModel& m, const std::vector<double>& x, StressActs& a) {
  fc_forward(m.fc0, x, a.u0);
  for (double& v : a.u0) v = std::max(v, 0.0);
  fc_forward(m.fc1, a.u0, a.u1);
  for (double& v : a.u1) v = std::max(v, 0.0);
  std::vector<double> out;
  fc_forward(m.fc2, a.u1, out);
  a.logit = out[0];
  a.p = sigmoid(a.logit);
}

struct StressGrads {
  Tensor w0, b0, w1, b1, w2, b2;
};

StressGrads zero_grads(const StressModel& m) {
  StressGrads g;
  g.w0 = Tensor(m.fc0.w.shape);
  g.b0 = Tensor(m.fc0.b.shape);
  g.w1 = Tensor(m.fc1.w.shape);
  g.b1 = Tensor(m.fc1.b.shape);
  g.w2 = Tensor(m.fc2.w.shape);
  g.b2 = Tensor(m.fc2.b.shape);
  return g;
}

// accumulate d(BCE)/d(params) for one example, scaled
void stress_backward(const StressModel& m, const std::vector<double>& x, const StressActs& a,
                     bool label, double scale, StressGrads& g) {
  const double y = label ? 1.0 : 0.0;
  const double dlogit = (a.p - y) * scale;

  const std::size_t h1 = m.fc1.w.shape[0];
  const std::size_t h0 = m.fc0.w.shape[0];
  const std::size_t in = m.fc0.w.shape[1];

  g.b2.data[0] += dlogit;
  std::vector<double> du1(h1, 0.0);
  for (std::size_t c = 0; c < h1; ++c) {
    g.w2.data[c] += dlogit * a.u1[c];
    du1[c] = a.u1[c] > 0.0 ? dlogit * m.fc2.w.data[c] : 0.0;
  }
  std::vector<double> du0(h0, 0.0);
  for (std::size_t r = 0; r < h1; ++r) {
    if (du1[r] == 0.0) continue;
    g.b1.data[r] += du1[r];
    double* wrow = g.w1.data.data() + r * h0;
    const double* mrow = m.fc1.w.data.data() + r * h0;
    for (std::size_t c = 0; c < h0; ++c) {
      wrow[c] += du1[r] * a.u0[c];
      du0[c] += du1[r] * mrow[c];
    }
  }
  for (std::size_t r = 0; r < h0; ++r) {
    double d = a.u0[r] > 0.0 ? du0[r] : 0.0;
    if (d == 0.0) continue;
    g.b0.data[r] += d;
    double* wrow = g.w0.data.data() + r * in;
    for (std::size_t c = 0; c < in; ++c) wrow[c] += d * x[c];
  }
}

void apply(StressModel& m, const StressGrads& g, double lr) {
  auto upd = [lr](Tensor& t, const Tensor& gt) {
    for (std::size_t i = 0; i < t.size(); ++i) t.data[i] -= lr * gt.data[i];
  };
  upd(m.fc0.w, g.w0);
  upd(m.fc0.b, g.b0);
  upd(m.fc1.w, g.w1);
  upd(m.fc1.b, g.b1);
  upd(m.fc2.w, g.w2);
  upd(m.fc2.b, g.b2);
}

double bce(double p, bool label) {
  const double eps = 1e-12;
  double pc = std::clamp(p, eps, 1.0 - eps);
  return label ? -std::log(pc) : -std::log(1.0 - pc);
}

}  // namespace

StressModel StressModel::init(std::size_t n_in, std::size_t h0, std::size_t h1, Rng& rng) {
  StressModel m;
  m.n_in = n_in;
  m.fc0.w = Tensor({h0, n_in});
  m.fc0.b = Tensor({h0});
  m.fc1.w = Tensor({h1, h0});
  m.fc1.b = Tensor({h1});
  m.fc2.w = Tensor({1, h1});
  m.fc2.b = Tensor({1});
  auto fill = [&rng](Tensor& t, double fan_in) {
    double a = 1.0 / std::sqrt(fan_in);
    for (double& v : t.data) v = rng.uniform(-a, a);
  };
  fill(m.fc0.w, static_cast<double>(n_in));
  fill(m.fc0.b, static_cast<double>(n_in));
  fill(m.fc1.w, static_cast<double>(h0));
  fill(m.fc1.b, static_cast<double>(h0));
  fill(m.fc2.w, static_cast<double>(h1));
  fill(m.fc2.b, static_cast<double>(h1));
  return m;
}

std::vector<double> featurize_signal(const Signal& sig, std::size_t n_in, double v_min,
                                     double v_max) {
  if (sig.empty()) fail(ErrorKind::EmptySignal, "featurize on empty signal");
  if (!(v_max > v_min)) fail(ErrorKind::InvalidArgument, "v_max must exceed v_min");
  std::vector<double> v = resample_fixed(sig, n_in);
  for (double& x : v) x = std::clamp((x - v_min) / (v_max - v_min), 0.0, 1.0);
  return v;
}

std::vector<double> featurize(const TrialRecord& trial, std::size_t n_in, double isti_max_ms) {
  if (!(isti_max_ms > 0.0)) fail(ErrorKind::NonPositiveScale, "isti_max_ms must be > 0");
  return featurize_signal(trial.isti_ms, n_in, 0.0, isti_max_ms);
}

double stress_forward(const StressModel& model, const std::vector<double>& x) {
  if (x.size() != model.n_in) fail(ErrorKind::ShapeMismatch, "stress input width mismatch");
  StressActs a;
  stress_forward_cached(model, x, a);
  return a.p;
}

StressTrainResult stress_train(const std::vector<StressExample>& examples,
                               const StressTrainConfig& config) {
  bool has_pos = false, has_neg = false;
  for (const auto& e : examples) (e.stress ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) fail(ErrorKind::SingleClassDataset, "need both classes to train");
  for (const auto& e : examples) {
    if (e.features.size() != config.n_in) fail(ErrorKind::ShapeMismatch, "feature width mismatch");
  }

  Rng rng(config.seed);
  StressModel model = StressModel::init(config.n_in, config.hidden0, config.hidden1, rng);
  StressGrads g = zero_grads(model);

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  StressTrainResult result{std::move(model), {}};
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t idx : order) {
      const StressExample& e = examples[idx];
      StressActs a;
      stress_forward_cached(result.model, e.features, a);
      epoch_loss += bce(a.p, e.stress);
      auto zero = [](Tensor& t) { std::fill(t.data.begin(), t.data.end(), 0.0); };
      zero(g.w0); zero(g.b0); zero(g.w1); zero(g.b1); zero(g.w2); zero(g.b2);
      stress_backward(result.model, e.features, a, e.stress, 1.0, g);
      apply(result.model, g, config.lr);
    }
    result.epoch_bce.push_back(epoch_loss / static_cast<double>(examples.size()));
  }
  return result;
}

StressTrainResult stress_train(const std::vector<TrialRecord>& trials,
                               const StressTrainConfig& config) {
  std::vector<StressExample> examples;
  examples.reserve(trials.size());
  for (const auto& t : trials) {
    if (!t.stress_label) fail(ErrorKind::InvalidArgument, "training trial without label");
    examples.push_back({featurize(t, config.n_in, config.isti_max_ms), *t.stress_label});
  }
  return stress_train(examples, config);
}

double fuse_breathing(double p_isti, double p_breath) {
  if (!(p_isti >= 0.0 && p_isti <= 1.0 && p_breath >= 0.0 && p_breath <= 1.0)) {
    fail(ErrorKind::OutOfRangeProbability, "fusion inputs must lie in [0,1]");
  }
  return p_isti * p_breath;
}

double stress_grad_check(StressModel& model, const std::vector<StressExample>& examples,
                         double eps, std::size_t coords, std::uint64_t seed) {
  if (examples.empty()) fail(ErrorKind::EmptyDataset, "grad check needs examples");
  const double scale = 1.0 / static_cast<double>(examples.size());

  StressGrads g = zero_grads(model);
  for (const auto& e : examples) {
    StressActs a;
    stress_forward_cached(model, e.features, a);
    stress_backward(model, e.features, a, e.stress, scale, g);
  }
  auto loss_of = [&]() {
    double acc = 0.0;
    for (const auto& e : examples) acc += bce(stress_forward(model, e.features), e.stress);
    return acc * scale;
  };

  Rng rng(seed);
  double max_rel = 0.0;
  Tensor* params[] = {&model.fc0.w, &model.fc0.b, &model.fc1.w,
                      &model.fc1.b, &model.fc2.w, &model.fc2.b};
  Tensor* grads[] = {&g.w0, &g.b0, &g.w1, &g.b1, &g.w2, &g.b2};
  for (std::size_t k = 0; k < 6; ++k) {
    const std::size_t n = params[k]->size();
    const std::size_t count = std::min(coords, n);
    for (std::size_t c = 0; c < count; ++c) {
      std::size_t idx = n <= coords ? c : static_cast<std::size_t>(rng.below(n));
      double keep = params[k]->data[idx];
      params[k]->data[idx] = keep + eps;
      double up = loss_of();
      params[k]->data[idx] = keep - eps;
      double down = loss_of();
      params[k]->data[idx] = keep;
      double numeric = (up - down) / (2.0 * eps);
      double analytic = grads[k]->data[idx];
      double rel = std::abs(analytic - numeric) /
                   std::max(1e-8, std::abs(analytic) + std::abs(numeric));
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace stressnet
