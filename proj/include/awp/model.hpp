#ifndef AWP_MODEL_HPP
#define AWP_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "awp/logprob.hpp"
#include "awp/rng.hpp"
#include "awp/synth.hpp"

namespace awp {

// Windowed-context frame classifier: the concatenated feature window of
// past_context + 1 + future_context frames (zero-padded at the edges) goes
// through one tanh hidden layer to |V'| logits. future_context is the
// model's DCL in frames.
struct WindowModel {
  int past_context = 3;
  int future_context = 3;
  int feature_dim = 8;
  int hidden = 64;
  int n_out = 0;  // |V'|

  std::vector<double> w1;  // hidden x window_dim
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // n_out x hidden
  std::vector<double> b2;  // n_out

  int window_frames() const { return past_context + 1 + future_context; }
  int window_dim() const { return window_frames() * feature_dim; }

  void init(Rng rng) {
    const int wd = window_dim();
    w1.resize(static_cast<std::size_t>(hidden) * wd);
    b1.assign(static_cast<std::size_t>(hidden), 0.0);
    w2.resize(static_cast<std::size_t>(n_out) * hidden);
    b2.assign(static_cast<std::size_t>(n_out), 0.0);
    double s1 = 1.0 / std::sqrt(static_cast<double>(wd));
    double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    for (double& x : w1) x = s1 * rng.next_gaussian();
    for (double& x : w2) x = s2 * rng.next_gaussian();
  }

  std::size_t param_count() const {
    return w1.size() + b1.size() + w2.size() + b2.size();
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("WindowModel: cannot write " + path);
    std::int32_t hdr[5] = {static_cast<std::int32_t>(past_context),
                           static_cast<std::int32_t>(future_context),
                           static_cast<std::int32_t>(feature_dim),
                           static_cast<std::int32_t>(hidden),
                           static_cast<std::int32_t>(n_out)};
    f.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
    for (const auto* v : {&w1, &b1, &w2, &b2})
      f.write(reinterpret_cast<const char*>(v->data()),
              static_cast<std::streamsize>(v->size() * sizeof(double)));
  }

  static WindowModel load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("WindowModel: cannot read " + path);
    std::int32_t hdr[5];
    f.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
    WindowModel m;
    m.past_context = hdr[0];
    m.future_context = hdr[1];
    m.feature_dim = hdr[2];
    m.hidden = hdr[3];
    m.n_out = hdr[4];
    m.w1.resize(static_cast<std::size_t>(m.hidden) * m.window_dim());
    m.b1.resize(static_cast<std::size_t>(m.hidden));
    m.w2.resize(static_cast<std::size_t>(m.n_out) * m.hidden);
    m.b2.resize(static_cast<std::size_t>(m.n_out));
    for (auto* v : {&m.w1, &m.b1, &m.w2, &m.b2})
      f.read(reinterpret_cast<char*>(v->data()),
             static_cast<std::streamsize>(v->size() * sizeof(double)));
    if (!f) throw std::runtime_error("WindowModel: truncated file " + path);
    return m;
  }
};

// Activations kept for the backward pass.
struct ForwardCache {
  std::vector<double> window;  // T x window_dim
  std::vector<double> hidden;  // T x H, post-tanh
  LogProbMatrix log_probs;
};

inline ForwardCache forward_cached(const WindowModel& model,
                                   const SynthUtterance& u) {
  if (u.F != model.feature_dim)
    throw std::invalid_argument("forward: feature dim mismatch");
  const int T = u.T, wd = model.window_dim(), H = model.hidden,
            V = model.n_out;
  ForwardCache c;
  c.window.assign(static_cast<std::size_t>(T) * wd, 0.0);
  c.hidden.assign(static_cast<std::size_t>(T) * H, 0.0);
  c.log_probs = LogProbMatrix(T, V, u.frame_duration_ms);

  for (int t = 0; t < T; ++t) {
    double* win = c.window.data() + static_cast<std::size_t>(t) * wd;
    for (int w = 0; w < model.window_frames(); ++w) {
      int src = t - model.past_context + w;
      if (src < 0 || src >= T) continue;  // zero padding
      for (int f = 0; f < u.F; ++f)
        win[w * u.F + f] = u.feat(src, f);
    }
    double* hid = c.hidden.data() + static_cast<std::size_t>(t) * H;
    for (int h = 0; h < H; ++h) {
      double acc = model.b1[static_cast<std::size_t>(h)];
      const double* row = model.w1.data() + static_cast<std::size_t>(h) * wd;
      for (int i = 0; i < wd; ++i) acc += row[i] * win[i];
      hid[h] = std::tanh(acc);
    }
    auto out = c.log_probs.row(t);
    for (int k = 0; k < V; ++k) {
      double acc = model.b2[static_cast<std::size_t>(k)];
      const double* row = model.w2.data() + static_cast<std::size_t>(k) * H;
      for (int h = 0; h < H; ++h) acc += row[h] * hid[h];
      out[static_cast<std::size_t>(k)] = acc;
    }
    log_softmax_row(out);
  }
  return c;
}

inline LogProbMatrix forward(const WindowModel& model,
                             const SynthUtterance& u) {
  return forward_cached(model, u).log_probs;
}

struct Gradients {
  std::vector<double> w1, b1, w2, b2;

  explicit Gradients(const WindowModel& m)
      : w1(m.w1.size(), 0.0), b1(m.b1.size(), 0.0), w2(m.w2.size(), 0.0),
        b2(m.b2.size(), 0.0) {}

  void add(const Gradients& o) {
    for (std::size_t i = 0; i < w1.size(); ++i) w1[i] += o.w1[i];
    for (std::size_t i = 0; i < b1.size(); ++i) b1[i] += o.b1[i];
    for (std::size_t i = 0; i < w2.size(); ++i) w2[i] += o.w2[i];
    for (std::size_t i = 0; i < b2.size(); ++i) b2[i] += o.b2[i];
  }
};

// Backprop of a T x |V'| upstream gradient w.r.t. the logits into the
// parameters.
inline Gradients backward(const WindowModel& model, const SynthUtterance& u,
                          const ForwardCache& cache,
                          const std::vector<double>& dlogits) {
  const int T = u.T, wd = model.window_dim(), H = model.hidden,
            V = model.n_out;
  if (dlogits.size() != static_cast<std::size_t>(T) * V)
    throw std::invalid_argument("backward: upstream gradient shape mismatch");
  Gradients g(model);
  std::vector<double> dhid(static_cast<std::size_t>(H));
  for (int t = 0; t < T; ++t) {
    const double* hid = cache.hidden.data() + static_cast<std::size_t>(t) * H;
    const double* win = cache.window.data() + static_cast<std::size_t>(t) * wd;
    const double* dl = dlogits.data() + static_cast<std::size_t>(t) * V;
    std::fill(dhid.begin(), dhid.end(), 0.0);
    for (int k = 0; k < V; ++k) {
      double dk = dl[k];
      if (dk == 0.0) continue;
      g.b2[static_cast<std::size_t>(k)] += dk;
      double* gw2 = g.w2.data() + static_cast<std::size_t>(k) * H;
      const double* w2row = model.w2.data() + static_cast<std::size_t>(k) * H;
      for (int h = 0; h < H; ++h) {
        gw2[h] += dk * hid[h];
        dhid[static_cast<std::size_t>(h)] += dk * w2row[h];
      }
    }
    for (int h = 0; h < H; ++h) {
      double da = dhid[static_cast<std::size_t>(h)] * (1.0 - hid[h] * hid[h]);
      if (da == 0.0) continue;
      g.b1[static_cast<std::size_t>(h)] += da;
      double* gw1 = g.w1.data() + static_cast<std::size_t>(h) * wd;
      for (int i = 0; i < wd; ++i) gw1[i] += da * win[i];
    }
  }
  return g;
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m, v;
  long t = 0;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One Adam update with bias correction over a flat parameter span.
inline void adam_step_span(std::span<double> params,
                           std::span<const double> grads, AdamState& st,
                           const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != st.m.size())
    throw std::invalid_argument("adam_step: size mismatch");
  ++st.t;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * grads[i];
    st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    double mhat = st.m[i] / bc1;
    double vhat = st.v[i] / bc2;
    params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

// Adam over the four parameter groups of a WindowModel.
struct ModelOptimizer {
  AdamConfig cfg;
  AdamState s_w1, s_b1, s_w2, s_b2;

  ModelOptimizer(const WindowModel& m, const AdamConfig& c)
      : cfg(c), s_w1(m.w1.size()), s_b1(m.b1.size()), s_w2(m.w2.size()),
        s_b2(m.b2.size()) {}

  void step(WindowModel& m, const Gradients& g) {
    adam_step_span(m.w1, g.w1, s_w1, cfg);
    adam_step_span(m.b1, g.b1, s_b1, cfg);
    adam_step_span(m.w2, g.w2, s_w2, cfg);
    adam_step_span(m.b2, g.b2, s_b2, cfg);
  }
};

}  // namespace awp

#endif  // AWP_MODEL_HPP
