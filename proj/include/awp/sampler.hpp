#ifndef AWP_SAMPLER_HPP
#define AWP_SAMPLER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "awp/logprob.hpp"
#include "awp/rng.hpp"
#include "awp/vocab.hpp"

namespace awp {

enum class SampleMode { Categorical, GumbelSoftmax };

struct SamplerConfig {
  int n_alignments = 5;
  double temperature = 1.0;
  SampleMode mode = SampleMode::Categorical;
  std::uint64_t seed = 0;
};

namespace detail {

// Temperatures below this are treated as the argmax limit.
constexpr double kArgmaxTemperature = 1e-6;

inline TokenId row_argmax(std::span<const double> row) {
  return static_cast<TokenId>(
      std::max_element(row.begin(), row.end()) - row.begin());
}

// softmax(logp / temperature) for one row.
inline std::vector<double> tempered_probs(std::span<const double> row,
                                          double temperature) {
  std::vector<double> scaled(row.begin(), row.end());
  for (double& x : scaled) x /= temperature;
  log_softmax_row(scaled);
  for (double& x : scaled) x = std::exp(x);
  return scaled;
}

inline TokenId draw_categorical(const std::vector<double>& probs, Rng& rng) {
  double u = rng.next_double();
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return static_cast<TokenId>(k);
  }
  return static_cast<TokenId>(probs.size() - 1);  // rounding slack
}

inline TokenId draw_gumbel(std::span<const double> row, double temperature,
                           Rng& rng) {
  double best = kNegInf;
  TokenId arg = 0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    double v = row[k] / temperature + rng.next_gumbel();
    if (v > best) {
      best = v;
      arg = static_cast<TokenId>(k);
    }
  }
  return arg;
}

}  // namespace detail

// Draw N alignments, each frame independently from softmax(row/temperature).
// Sample i uses the stream split(seed, i), so results are independent of
// batch order and identical across runs with the same config.
inline std::vector<Alignment> sample_alignments(const LogProbMatrix& m,
                                                const SamplerConfig& cfg) {
  std::vector<Alignment> out;
  out.reserve(static_cast<std::size_t>(cfg.n_alignments));
  Rng root(cfg.seed);
  const bool argmax = cfg.temperature < detail::kArgmaxTemperature;
  for (int i = 0; i < cfg.n_alignments; ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    Alignment a(static_cast<std::size_t>(m.T));
    for (int t = 0; t < m.T; ++t) {
      if (argmax) {
        a[static_cast<std::size_t>(t)] = detail::row_argmax(m.row(t));
      } else {
        auto probs = detail::tempered_probs(m.row(t), cfg.temperature);
        a[static_cast<std::size_t>(t)] = detail::draw_categorical(probs, rng);
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

// Gumbel-max variant: per frame, argmax over logp/temperature + Gumbel(0,1).
// Distributionally identical to the categorical path at temperature 1.
inline std::vector<Alignment> sample_gumbel(const LogProbMatrix& m,
                                            const SamplerConfig& cfg) {
  std::vector<Alignment> out;
  out.reserve(static_cast<std::size_t>(cfg.n_alignments));
  Rng root(cfg.seed);
  const bool argmax = cfg.temperature < detail::kArgmaxTemperature;
  for (int i = 0; i < cfg.n_alignments; ++i) {
    Rng rng = root.split(static_cast<std::uint64_t>(i));
    Alignment a(static_cast<std::size_t>(m.T));
    for (int t = 0; t < m.T; ++t) {
      a[static_cast<std::size_t>(t)] =
          argmax ? detail::row_argmax(m.row(t))
                 : detail::draw_gumbel(m.row(t), cfg.temperature, rng);
    }
    out.push_back(std::move(a));
  }
  return out;
}

// Both modes are drop-in interchangeable.
inline std::vector<Alignment> sample(const LogProbMatrix& m,
                                     const SamplerConfig& cfg) {
  return cfg.mode == SampleMode::Categorical ? sample_alignments(m, cfg)
                                             : sample_gumbel(m, cfg);
}

}  // namespace awp

#endif  // AWP_SAMPLER_HPP
