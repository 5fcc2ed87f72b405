#include "stressnet/net.hpp"

#include <algorithm>
#include <cmath>

namespace stressnet {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr double kTinyProb = 1e-300;

struct ConvDims {
  std::size_t in_c, in_h, in_w;
  std::size_t out_c, out_h, out_w;
};

std::vector<ConvDims> conv_plan(const ModelDescriptor& desc) {
  std::vector<ConvDims> plan;
  std::size_t c = 1, h = desc.input_height, w = desc.input_width;
  for (std::size_t oc : desc.conv_channels) {
    if (h < 3 || w < 3) fail(ErrorKind::ShapeMismatch, "frame too small for conv stack");
    ConvDims d;
    d.in_c = c;
    d.in_h = h;
    d.in_w = w;
    d.out_c = oc;
    d.out_h = (h - 3) / 2 + 1;
    d.out_w = (w - 3) / 2 + 1;
    plan.push_back(d);
    c = oc;
    h = d.out_h;
    w = d.out_w;
  }
  return plan;
}

// valid 3x3 convolution, stride 2, with bias
void conv_forward(const ConvDims& d, const double* in, const ConvLayer& layer, double* out) {
  const double* w = layer.w.data.data();
  const double* b = layer.b.data.data();
  const std::size_t in_hw = d.in_h * d.in_w;
  const std::size_t out_hw = d.out_h * d.out_w;
  for (std::size_t oc = 0; oc < d.out_c; ++oc) {
    double* omap = out + oc * out_hw;
    const double* wk = w + oc * d.in_c * 9;
    for (std::size_t oy = 0; oy < d.out_h; ++oy) {
      for (std::size_t ox = 0; ox < d.out_w; ++ox) {
        double acc = b[oc];
        const std::size_t iy = oy * 2, ix = ox * 2;
        for (std::size_t ic = 0; ic < d.in_c; ++ic) {
          const double* imap = in + ic * in_hw + iy * d.in_w + ix;
          const double* wc = wk + ic * 9;
          acc += wc[0] * imap[0] + wc[1] * imap[1] + wc[2] * imap[2] +
                 wc[3] * imap[d.in_w] + wc[4] * imap[d.in_w + 1] + wc[5] * imap[d.in_w + 2] +
                 wc[6] * imap[2 * d.in_w] + wc[7] * imap[2 * d.in_w + 1] +
                 wc[8] * imap[2 * d.in_w + 2];
        }
        omap[oy * d.out_w + ox] = acc;
      }
    }
  }
}

// din may be null for the first layer
void conv_backward(const ConvDims& d, const double* in, const ConvLayer& layer,
                   const double* act_out, const double* dout, ConvLayer& grad, double* din) {
  const double* w = layer.w.data.data();
  double* dw = grad.w.data.data();
  double* db = grad.b.data.data();
  const std::size_t in_hw = d.in_h * d.in_w;
  const std::size_t out_hw = d.out_h * d.out_w;
  for (std::size_t oc = 0; oc < d.out_c; ++oc) {
    const double* omap = act_out + oc * out_hw;
    const double* dmap = dout + oc * out_hw;
    const double* wk = w + oc * d.in_c * 9;
    double* dwk = dw + oc * d.in_c * 9;
    for (std::size_t oy = 0; oy < d.out_h; ++oy) {
      for (std::size_t ox = 0; ox < d.out_w; ++ox) {
        // ReLU mask from the stored post-activation
        if (omap[oy * d.out_w + ox] <= 0.0) continue;
        double g = dmap[oy * d.out_w + ox];
        if (g == 0.0) continue;
        db[oc] += g;
        const std::size_t iy = oy * 2, ix = ox * 2;
        for (std::size_t ic = 0; ic < d.in_c; ++ic) {
          const double* imap = in + ic * in_hw + iy * d.in_w + ix;
          const double* wc = wk + ic * 9;
          double* dwc = dwk + ic * 9;
          dwc[0] += g * imap[0];
          dwc[1] += g * imap[1];
          dwc[2] += g * imap[2];
          dwc[3] += g * imap[d.in_w];
          dwc[4] += g * imap[d.in_w + 1];
          dwc[5] += g * imap[d.in_w + 2];
          dwc[6] += g * imap[2 * d.in_w];
          dwc[7] += g * imap[2 * d.in_w + 1];
          dwc[8] += g * imap[2 * d.in_w + 2];
          if (din) {
            double* dimap = din + ic * in_hw + iy * d.in_w + ix;
            dimap[0] += g * wc[0];
            dimap[1] += g * wc[1];
            dimap[2] += g * wc[2];
            dimap[d.in_w] += g * wc[3];
            dimap[d.in_w + 1] += g * wc[4];
            dimap[d.in_w + 2] += g * wc[5];
            dimap[2 * d.in_w] += g * wc[6];
            dimap[2 * d.in_w + 1] += g * wc[7];
            dimap[2 * d.in_w + 2] += g * wc[8];
          }
        }
      }
    }
  }
}

void matvec_acc(const Tensor& w, const double* x, std::size_t in, double* out, std::size_t rows) {
  const double* wd = w.data.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = wd + r * in;
    double acc = 0.0;
    for (std::size_t c = 0; c < in; ++c) acc += row[c] * x[c];
    out[r] += acc;
  }
}

void matvec_t_acc(const Tensor& w, const double* dy, std::size_t in, double* dx, std::size_t rows) {
  const double* wd = w.data.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    const double* row = wd + r * in;
    for (std::size_t c = 0; c < in; ++c) dx[c] += g * row[c];
  }
}

void outer_acc(Tensor& dw, const double* dy, const double* x, std::size_t rows, std::size_t in) {
  double* d = dw.data.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dy[r];
    if (g == 0.0) continue;
    double* row = d + r * in;
    for (std::size_t c = 0; c < in; ++c) row[c] += g * x[c];
  }
}

// all per-step state one training sequence needs for BPTT
struct LstmCache {
  // [layer][step][hidden]
  std::vector<std::vector<std::vector<double>>> i, f, g, o, c, tanh_c, h;
};

void lstm_forward_cached(const std::vector<LstmLayer>& layers, std::size_t hidden,
                         const std::vector<std::vector<double>>& inputs, LstmCache& cache) {
  const std::size_t n_layers = layers.size();
  const std::size_t steps = inputs.size();
  auto alloc = [&](auto& v) {
    v.assign(n_layers, std::vector<std::vector<double>>(steps, std::vector<double>(hidden, 0.0)));
  };
  alloc(cache.i);
  alloc(cache.f);
  alloc(cache.g);
  alloc(cache.o);
  alloc(cache.c);
  alloc(cache.tanh_c);
  alloc(cache.h);

  std::vector<double> z(4 * hidden);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const LstmLayer& L = layers[l];
    const std::size_t in_dim = L.w_ih.shape[1];
    for (std::size_t t = 0; t < steps; ++t) {
      const double* x = l == 0 ? inputs[t].data() : cache.h[l - 1][t].data();
      const double* h_prev = t == 0 ? nullptr : cache.h[l][t - 1].data();
      const double* c_prev = t == 0 ? nullptr : cache.c[l][t - 1].data();
      std::copy(L.b.data.begin(), L.b.data.end(), z.begin());
      matvec_acc(L.w_ih, x, in_dim, z.data(), 4 * hidden);
      if (h_prev) matvec_acc(L.w_hh, h_prev, hidden, z.data(), 4 * hidden);
      for (std::size_t u = 0; u < hidden; ++u) {
        double iv = sigmoid(z[u]);
        double fv = sigmoid(z[hidden + u]);
        double gv = std::tanh(z[2 * hidden + u]);
        double ov = sigmoid(z[3 * hidden + u]);
        double cv = (c_prev ? fv * c_prev[u] : 0.0) + iv * gv;
        double tc = std::tanh(cv);
        cache.i[l][t][u] = iv;
        cache.f[l][t][u] = fv;
        cache.g[l][t][u] = gv;
        cache.o[l][t][u] = ov;
        cache.c[l][t][u] = cv;
        cache.tanh_c[l][t][u] = tc;
        cache.h[l][t][u] = ov * tc;
      }
    }
  }
}

}  // namespace

void ModelDescriptor::validate() const {
  if (n_bins < 2) fail(ErrorKind::ShapeMismatch, "n_bins must be >= 2");
  if (conv_channels.empty()) fail(ErrorKind::ShapeMismatch, "conv_channels must be non-empty");
  if (lstm_layers == 0 || lstm_hidden == 0 || head_hidden == 0) {
    fail(ErrorKind::ShapeMismatch, "lstm/head sizes must be positive");
  }
  if (!(input_scale > 0.0)) fail(ErrorKind::ShapeMismatch, "input_scale must be > 0");
  conv_output_hw();
}

std::pair<std::size_t, std::size_t> ModelDescriptor::conv_output_hw() const {
  auto plan = conv_plan(*this);
  return {plan.back().out_h, plan.back().out_w};
}

std::vector<NamedTensorRef> named_tensors(Parameters& params) {
  std::vector<NamedTensorRef> out;
  for (std::size_t i = 0; i < params.conv.size(); ++i) {
    out.push_back({"backbone.conv" + std::to_string(i) + ".w", &params.conv[i].w, true});
    out.push_back({"backbone.conv" + std::to_string(i) + ".b", &params.conv[i].b, true});
  }
  for (std::size_t i = 0; i < params.lstm.size(); ++i) {
    std::string base = "lstm.l" + std::to_string(i);
    out.push_back({base + ".w_ih", &params.lstm[i].w_ih, false});
    out.push_back({base + ".w_hh", &params.lstm[i].w_hh, false});
    out.push_back({base + ".b", &params.lstm[i].b, false});
  }
  out.push_back({"head.fc0.w", &params.fc0.w, false});
  out.push_back({"head.fc0.b", &params.fc0.b, false});
  out.push_back({"head.fc1.w", &params.fc1.w, false});
  out.push_back({"head.fc1.b", &params.fc1.b, false});
  return out;
}

std::vector<NamedTensorCRef> named_tensors(const Parameters& params) {
  auto refs = named_tensors(const_cast<Parameters&>(params));
  std::vector<NamedTensorCRef> out;
  out.reserve(refs.size());
  for (auto& r : refs) out.push_back({r.name, r.tensor, r.backbone});
  return out;
}

namespace {

Parameters make_parameters(const ModelDescriptor& desc) {
  Parameters p;
  std::size_t in_c = 1;
  for (std::size_t oc : desc.conv_channels) {
    ConvLayer layer;
    layer.w = Tensor({oc, in_c, 3, 3});
    layer.b = Tensor({oc});
    p.conv.push_back(std::move(layer));
    in_c = oc;
  }
  std::size_t in_dim = desc.conv_channels.back();
  for (std::size_t l = 0; l < desc.lstm_layers; ++l) {
    LstmLayer layer;
    layer.w_ih = Tensor({4 * desc.lstm_hidden, in_dim});
    layer.w_hh = Tensor({4 * desc.lstm_hidden, desc.lstm_hidden});
    layer.b = Tensor({4 * desc.lstm_hidden});
    p.lstm.push_back(std::move(layer));
    in_dim = desc.lstm_hidden;
  }
  p.fc0.w = Tensor({desc.head_hidden, desc.lstm_hidden});
  p.fc0.b = Tensor({desc.head_hidden});
  p.fc1.w = Tensor({desc.n_bins, desc.head_hidden});
  p.fc1.b = Tensor({desc.n_bins});
  return p;
}

// product of a weight tensor's trailing dims; biases reuse their layer's value
double weight_fan_in(const Tensor& t) {
  std::size_t f = 1;
  for (std::size_t i = 1; i < t.shape.size(); ++i) f *= t.shape[i];
  return static_cast<double>(f);
}

}  // namespace

Model Model::init(const ModelDescriptor& desc, Rng& rng) {
  desc.validate();
  Model m;
  m.desc = desc;
  m.params = make_parameters(desc);

  auto fill = [&rng](Tensor& t, double fan_in) {
    double a = 1.0 / std::sqrt(fan_in);
    for (double& v : t.data) v = rng.uniform(-a, a);
  };
  for (auto& layer : m.params.conv) {
    double fi = weight_fan_in(layer.w);
    fill(layer.w, fi);
    fill(layer.b, fi);
  }
  for (auto& layer : m.params.lstm) {
    fill(layer.w_ih, static_cast<double>(layer.w_ih.shape[1]));
    fill(layer.w_hh, static_cast<double>(layer.w_hh.shape[1]));
    fill(layer.b, static_cast<double>(layer.w_hh.shape[1]));
  }
  fill(m.params.fc0.w, static_cast<double>(m.params.fc0.w.shape[1]));
  fill(m.params.fc0.b, static_cast<double>(m.params.fc0.w.shape[1]));
  fill(m.params.fc1.w, static_cast<double>(m.params.fc1.w.shape[1]));
  fill(m.params.fc1.b, static_cast<double>(m.params.fc1.w.shape[1]));
  return m;
}

Parameters Model::zero_like() const {
  return make_parameters(desc);
}

Parameters Model::zero_parameters(const ModelDescriptor& desc) {
  return make_parameters(desc);
}

std::vector<double> backbone_forward(const Model& model, std::span<const double> frame) {
  const ModelDescriptor& desc = model.desc;
  if (frame.size() != desc.input_height * desc.input_width) {
    fail(ErrorKind::ShapeMismatch, "frame size does not match descriptor");
  }
  auto plan = conv_plan(desc);
  std::vector<double> cur(frame.begin(), frame.end());
  for (double& v : cur) v *= desc.input_scale;
  std::vector<double> next;
  for (std::size_t l = 0; l < plan.size(); ++l) {
    const ConvDims& d = plan[l];
    next.assign(d.out_c * d.out_h * d.out_w, 0.0);
    conv_forward(d, cur.data(), model.params.conv[l], next.data());
    for (double& v : next) v = std::max(v, 0.0);
    cur.swap(next);
  }
  const ConvDims& last = plan.back();
  const std::size_t hw = last.out_h * last.out_w;
  std::vector<double> f0(last.out_c);
  for (std::size_t c = 0; c < last.out_c; ++c) {
    double acc = 0.0;
    const double* map = cur.data() + c * hw;
    for (std::size_t i = 0; i < hw; ++i) acc += map[i];
    f0[c] = acc / static_cast<double>(hw);
  }
  return f0;
}

std::vector<std::vector<double>> lstm_forward(const std::vector<LstmLayer>& layers,
                                              std::size_t hidden,
                                              const std::vector<std::vector<double>>& inputs) {
  if (inputs.empty()) fail(ErrorKind::ShapeMismatch, "lstm_forward on empty sequence");
  for (const auto& layer : layers) {
    if (layer.w_ih.shape.size() != 2 || layer.w_ih.shape[0] != 4 * hidden ||
        layer.w_hh.shape[0] != 4 * hidden || layer.w_hh.shape[1] != hidden ||
        layer.b.size() != 4 * hidden) {
      fail(ErrorKind::ShapeMismatch, "lstm layer shapes inconsistent");
    }
  }
  if (!layers.empty() && inputs[0].size() != layers[0].w_ih.shape[1]) {
    fail(ErrorKind::ShapeMismatch, "lstm input width mismatch");
  }
  LstmCache cache;
  lstm_forward_cached(layers, hidden, inputs, cache);
  return cache.h.back();
}

std::vector<std::vector<double>> lstm_forward(const Model& model,
                                              const std::vector<std::vector<double>>& inputs) {
  return lstm_forward(model.params.lstm, model.desc.lstm_hidden, inputs);
}

namespace {

void head_forward(const Model& model, const double* h, std::vector<double>& u,
                  std::vector<double>& probs) {
  const ModelDescriptor& desc = model.desc;
  u.assign(desc.head_hidden, 0.0);
  std::copy(model.params.fc0.b.data.begin(), model.params.fc0.b.data.end(), u.begin());
  matvec_acc(model.params.fc0.w, h, desc.lstm_hidden, u.data(), desc.head_hidden);
  for (double& v : u) v = std::max(v, 0.0);

  probs.assign(desc.n_bins, 0.0);
  std::copy(model.params.fc1.b.data.begin(), model.params.fc1.b.data.end(), probs.begin());
  matvec_acc(model.params.fc1.w, u.data(), desc.head_hidden, probs.data(), desc.n_bins);
  double mx = *std::max_element(probs.begin(), probs.end());
  double sum = 0.0;
  for (double& v : probs) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : probs) v /= sum;
}

}  // namespace

std::vector<double> detection_head(const Model& model, const std::vector<double>& l0) {
  if (l0.size() != model.desc.lstm_hidden) fail(ErrorKind::ShapeMismatch, "head input width mismatch");
  std::vector<double> u, probs;
  head_forward(model, l0.data(), u, probs);
  return probs;
}

double bins_expectation(const std::vector<double>& probs, std::size_t n_bins) {
  if (probs.size() != n_bins || n_bins < 2) fail(ErrorKind::NotADistribution, "probs size != n_bins");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) fail(ErrorKind::NotADistribution, "negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) fail(ErrorKind::NotADistribution, "probabilities do not sum to 1");
  double acc = 0.0;
  for (std::size_t j = 0; j < n_bins; ++j) {
    acc += probs[j] * (static_cast<double>(j) + 0.5) / static_cast<double>(n_bins);
  }
  return acc;
}

MultiLossResult multi_loss(const std::vector<double>& probs, double pred_value,
                           double target_value01, double alpha, BinLoss kind) {
  if (!(target_value01 >= 0.0 && target_value01 <= 1.0)) {
    fail(ErrorKind::TargetOutOfRange, "target must lie in [0,1]");
  }
  const std::size_t n = probs.size();
  MultiLossResult r;
  r.target_bin = std::min(static_cast<std::size_t>(target_value01 * static_cast<double>(n)), n - 1);
  if (kind == BinLoss::CategoricalCE) {
    r.classification = -std::log(std::max(probs[r.target_bin], kTinyProb));
  } else {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double p = std::clamp(probs[j], kTinyProb, 1.0 - 1e-12);
      acc += j == r.target_bin ? -std::log(p) : -std::log(1.0 - p);
    }
    r.classification = acc;
  }
  double d = pred_value - target_value01;
  r.regression = d * d;
  r.loss = r.classification + alpha * r.regression;
  return r;
}

namespace {

// d(loss per frame)/d(logits), already scaled by `scale` (1/batch frames)
void loss_dlogits(const std::vector<double>& probs, std::size_t target_bin, double value,
                  double target, double alpha, BinLoss kind, std::size_t n_bins, double scale,
                  std::vector<double>& dlogits) {
  dlogits.assign(n_bins, 0.0);
  std::vector<double> dp(n_bins, 0.0);
  const double dvalue = 2.0 * alpha * (value - target) * scale;
  for (std::size_t j = 0; j < n_bins; ++j) {
    dp[j] = dvalue * (static_cast<double>(j) + 0.5) / static_cast<double>(n_bins);
  }
  if (kind == BinLoss::PerBinBCE) {
    for (std::size_t j = 0; j < n_bins; ++j) {
      double p = std::clamp(probs[j], kTinyProb, 1.0 - 1e-12);
      dp[j] += scale * (j == target_bin ? -1.0 / p : 1.0 / (1.0 - p));
    }
  }
  double s = 0.0;
  for (std::size_t j = 0; j < n_bins; ++j) s += probs[j] * dp[j];
  for (std::size_t j = 0; j < n_bins; ++j) dlogits[j] = probs[j] * (dp[j] - s);
  if (kind == BinLoss::CategoricalCE) {
    for (std::size_t j = 0; j < n_bins; ++j) {
      dlogits[j] += scale * (probs[j] - (j == target_bin ? 1.0 : 0.0));
    }
  }
}

}  // namespace

BatchStats isti_forward_backward(const Model& model, std::span<const SequenceRef> batch,
                                 double alpha, BinLoss kind, Parameters* grads) {
  const ModelDescriptor& desc = model.desc;
  auto plan = conv_plan(desc);
  const std::size_t conv_layers = plan.size();
  const std::size_t f0_dim = desc.conv_channels.back();
  const std::size_t hidden = desc.lstm_hidden;
  const std::size_t gap_hw = plan.back().out_h * plan.back().out_w;

  BatchStats stats;
  for (const SequenceRef& seq : batch) stats.frames += seq.length;
  if (stats.frames == 0) fail(ErrorKind::EmptyDataset, "empty batch");
  const double scale = 1.0 / static_cast<double>(stats.frames);

  // per-layer activation sizes for the conv cache
  std::vector<std::size_t> act_size(conv_layers);
  std::size_t act_total = 0;
  for (std::size_t l = 0; l < conv_layers; ++l) {
    act_size[l] = plan[l].out_c * plan[l].out_h * plan[l].out_w;
    act_total += act_size[l];
  }

  std::vector<double> dlogits, du, dh, dx, z(4 * hidden);
  std::vector<double> conv_acts;      // [step][layer acts concatenated]
  std::vector<double> scaled_frames;  // [step][input_scale * frame]
  std::vector<double> dmap, dmap2;    // conv backward scratch
  LstmCache cache;
  const std::size_t frame_px = desc.input_height * desc.input_width;

  for (const SequenceRef& seq : batch) {
    if (seq.clip == nullptr || seq.start + seq.length > seq.clip->frame_count()) {
      fail(ErrorKind::ShapeMismatch, "sequence outside clip");
    }
    const std::size_t steps = seq.length;
    conv_acts.assign(steps * act_total, 0.0);
    scaled_frames.resize(steps * frame_px);
    std::vector<std::vector<double>> f0s(steps);

    // backbone over each frame, keeping post-ReLU maps for backward
    for (std::size_t t = 0; t < steps; ++t) {
      auto frame = seq.clip->frame(seq.start + t);
      if (frame.size() != frame_px) {
        fail(ErrorKind::ShapeMismatch, "clip frame does not match descriptor");
      }
      double* sf = scaled_frames.data() + t * frame_px;
      for (std::size_t i = 0; i < frame_px; ++i) sf[i] = frame[i] * desc.input_scale;
      double* acts = conv_acts.data() + t * act_total;
      const double* in = sf;
      std::size_t off = 0;
      for (std::size_t l = 0; l < conv_layers; ++l) {
        double* out = acts + off;
        conv_forward(plan[l], in, model.params.conv[l], out);
        for (std::size_t i = 0; i < act_size[l]; ++i) out[i] = std::max(out[i], 0.0);
        in = out;
        off += act_size[l];
      }
      const double* last = acts + act_total - act_size[conv_layers - 1];
      std::vector<double>& f0 = f0s[t];
      f0.assign(f0_dim, 0.0);
      for (std::size_t c = 0; c < f0_dim; ++c) {
        double acc = 0.0;
        const double* map = last + c * gap_hw;
        for (std::size_t i = 0; i < gap_hw; ++i) acc += map[i];
        f0[c] = acc / static_cast<double>(gap_hw);
      }
    }

    lstm_forward_cached(model.params.lstm, hidden, f0s, cache);

    // head + loss per step
    std::vector<std::vector<double>> us(steps), probss(steps), dls(steps);
    std::vector<double> values(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      head_forward(model, cache.h.back()[t].data(), us[t], probss[t]);
      double value = 0.0;
      for (std::size_t j = 0; j < desc.n_bins; ++j) {
        value += probss[t][j] * (static_cast<double>(j) + 0.5) / static_cast<double>(desc.n_bins);
      }
      values[t] = value;
      double target = (*seq.targets01)[seq.start + t];
      MultiLossResult r = multi_loss(probss[t], value, target, alpha, kind);
      stats.loss += r.loss;
      stats.classification += r.classification;
      stats.regression += r.regression;
      if (grads) {
        loss_dlogits(probss[t], r.target_bin, value, target, alpha, kind, desc.n_bins, scale,
                     dlogits);
        dls[t] = dlogits;
      }
    }
    if (!grads) continue;

    // ----- backward -----
    const std::size_t n_layers = desc.lstm_layers;
    // dh per layer carried across time, plus dc carry
    std::vector<std::vector<double>> dh_carry(n_layers, std::vector<double>(hidden, 0.0));
    std::vector<std::vector<double>> dc_carry(n_layers, std::vector<double>(hidden, 0.0));
    std::vector<std::vector<double>> dxs(steps, std::vector<double>(f0_dim, 0.0));
    std::vector<double> dz(4 * hidden);

    for (std::size_t ti = steps; ti-- > 0;) {
      // head backward at step ti -> dh into top layer
      dh.assign(hidden, 0.0);
      {
        const std::vector<double>& u = us[ti];
        const std::vector<double>& dl = dls[ti];
        outer_acc(grads->fc1.w, dl.data(), u.data(), desc.n_bins, desc.head_hidden);
        for (std::size_t j = 0; j < desc.n_bins; ++j) grads->fc1.b.data[j] += dl[j];
        du.assign(desc.head_hidden, 0.0);
        matvec_t_acc(model.params.fc1.w, dl.data(), desc.head_hidden, du.data(), desc.n_bins);
        for (std::size_t j = 0; j < desc.head_hidden; ++j) {
          if (u[j] <= 0.0) du[j] = 0.0;
        }
        const double* htop = cache.h.back()[ti].data();
        outer_acc(grads->fc0.w, du.data(), htop, desc.head_hidden, hidden);
        for (std::size_t j = 0; j < desc.head_hidden; ++j) grads->fc0.b.data[j] += du[j];
        matvec_t_acc(model.params.fc0.w, du.data(), hidden, dh.data(), desc.head_hidden);
      }

      for (std::size_t l = n_layers; l-- > 0;) {
        // gradient into h[l][ti]: from head (top layer only), from the
        // recurrent carry, and from layer l+1's input gradient (dx already
        // deposited into dh when l+1 was processed)
        std::vector<double>& dhl = dh_carry[l];
        if (l == n_layers - 1) {
          for (std::size_t u = 0; u < hidden; ++u) dhl[u] += dh[u];
        }
        std::vector<double>& dcl = dc_carry[l];
        const double* iv = cache.i[l][ti].data();
        const double* fv = cache.f[l][ti].data();
        const double* gv = cache.g[l][ti].data();
        const double* ov = cache.o[l][ti].data();
        const double* tc = cache.tanh_c[l][ti].data();
        const double* c_prev = ti == 0 ? nullptr : cache.c[l][ti - 1].data();
        for (std::size_t u = 0; u < hidden; ++u) {
          double dhu = dhl[u];
          double do_ = dhu * tc[u];
          double dc = dcl[u] + dhu * ov[u] * (1.0 - tc[u] * tc[u]);
          double di = dc * gv[u];
          double dg = dc * iv[u];
          double df = c_prev ? dc * c_prev[u] : 0.0;
          dcl[u] = dc * fv[u];  // carry to step ti-1
          dz[u] = di * iv[u] * (1.0 - iv[u]);
          dz[hidden + u] = df * fv[u] * (1.0 - fv[u]);
          dz[2 * hidden + u] = dg * (1.0 - gv[u] * gv[u]);
          dz[3 * hidden + u] = do_ * ov[u] * (1.0 - ov[u]);
        }
        const double* x = l == 0 ? f0s[ti].data() : cache.h[l - 1][ti].data();
        const std::size_t in_dim = model.params.lstm[l].w_ih.shape[1];
        outer_acc(grads->lstm[l].w_ih, dz.data(), x, 4 * hidden, in_dim);
        if (ti > 0) {
          outer_acc(grads->lstm[l].w_hh, dz.data(), cache.h[l][ti - 1].data(), 4 * hidden, hidden);
        }
        for (std::size_t j = 0; j < 4 * hidden; ++j) grads->lstm[l].b.data[j] += dz[j];

        // dh_prev via recurrent weights replaces this layer's carry
        std::fill(dhl.begin(), dhl.end(), 0.0);
        matvec_t_acc(model.params.lstm[l].w_hh, dz.data(), hidden, dhl.data(), 4 * hidden);
        // dx: into layer below (same step) or into the backbone
        if (l == 0) {
          matvec_t_acc(model.params.lstm[l].w_ih, dz.data(), in_dim, dxs[ti].data(), 4 * hidden);
        } else {
          dx.assign(in_dim, 0.0);
          matvec_t_acc(model.params.lstm[l].w_ih, dz.data(), in_dim, dx.data(), 4 * hidden);
          for (std::size_t u = 0; u < hidden; ++u) dh_carry[l - 1][u] += dx[u];
        }
      }
      // note: dh_carry[l-1] additions above land on the SAME step ti; they
      // are consumed immediately by the l-1 iteration of this inner loop.
    }

    // conv backward per frame with df0 = dxs[t]
    for (std::size_t t = 0; t < steps; ++t) {
      const double* acts = conv_acts.data() + t * act_total;
      // GAP backward: spread df0 uniformly
      dmap.assign(act_size[conv_layers - 1], 0.0);
      for (std::size_t c = 0; c < f0_dim; ++c) {
        double g = dxs[t][c] / static_cast<double>(gap_hw);
        double* m = dmap.data() + c * gap_hw;
        for (std::size_t i = 0; i < gap_hw; ++i) m[i] = g;
      }
      const double* sf = scaled_frames.data() + t * frame_px;
      for (std::size_t l = conv_layers; l-- > 0;) {
        const double* in;
        if (l == 0) {
          in = sf;
        } else {
          std::size_t off = 0;
          for (std::size_t k = 0; k + 1 <= l - 1; ++k) off += act_size[k];
          in = acts + off;
        }
        const double* act_out;
        {
          std::size_t off = 0;
          for (std::size_t k = 0; k < l; ++k) off += act_size[k];
          act_out = acts + off;
        }
        double* din = nullptr;
        if (l > 0) {
          dmap2.assign(plan[l].in_c * plan[l].in_h * plan[l].in_w, 0.0);
          din = dmap2.data();
        }
        conv_backward(plan[l], in, model.params.conv[l], act_out, dmap.data(), grads->conv[l], din);
        // the ReLU mask of the layer below is applied by the next
        // conv_backward via its stored post-activation
        if (l > 0) dmap.swap(dmap2);
      }
    }
  }

  double inv = scale;
  stats.loss *= inv;
  stats.classification *= inv;
  stats.regression *= inv;
  return stats;
}

std::vector<StepOutput> isti_forward(const Model& model, const FeatureClip& clip,
                                     std::size_t start, std::size_t length) {
  if (start + length > clip.frame_count()) fail(ErrorKind::ShapeMismatch, "window outside clip");
  std::vector<std::vector<double>> f0s(length);
  for (std::size_t t = 0; t < length; ++t) {
    f0s[t] = backbone_forward(model, clip.frame(start + t));
  }
  auto hs = lstm_forward(model, f0s);
  std::vector<StepOutput> out(length);
  std::vector<double> u;
  for (std::size_t t = 0; t < length; ++t) {
    head_forward(model, hs[t].data(), u, out[t].probs);
    out[t].value01 = bins_expectation(out[t].probs, model.desc.n_bins);
  }
  return out;
}

}  // namespace stressnet
