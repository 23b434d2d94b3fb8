#ifndef AWP_SYNTH_HPP
#define AWP_SYNTH_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "awp/rng.hpp"
#include "awp/vocab.hpp"

namespace awp {

// Synthetic speech-like corpus generator. Each token (including the word
// separator) has a feature prototype; an utterance emits the prototype of
// the active token at every frame, delayed by cue_delay frames, plus
// Gaussian noise. cue_delay makes the discriminative evidence lag token
// onset, so models with little future context gain from delaying their
// emissions -- the drift mechanism under study.
struct SynthConfig {
  int vocab_size = 4;        // letters, excluding space and blank
  int d_min = 3;             // frames per token, inclusive range
  int d_max = 6;
  int feature_dim = 8;
  double noise_sigma = 0.3;
  double prototype_overlap = 0.0;  // 0 = well separated, ->1 = confusable
  int cue_delay = 2;               // frames of evidence lag
  int words_min = 2;
  int words_max = 4;
  int word_len_min = 2;
  int word_len_max = 4;
  double frame_duration_ms = 10.0;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const {
    return {{"vocab_size", vocab_size},
            {"d_min", d_min},
            {"d_max", d_max},
            {"feature_dim", feature_dim},
            {"noise_sigma", noise_sigma},
            {"prototype_overlap", prototype_overlap},
            {"cue_delay", cue_delay},
            {"words_min", words_min},
            {"words_max", words_max},
            {"word_len_min", word_len_min},
            {"word_len_max", word_len_max},
            {"frame_duration_ms", frame_duration_ms},
            {"seed", seed}};
  }

  static SynthConfig from_json(const nlohmann::json& j) {
    SynthConfig c;
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.d_min = j.value("d_min", c.d_min);
    c.d_max = j.value("d_max", c.d_max);
    c.feature_dim = j.value("feature_dim", c.feature_dim);
    c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
    c.prototype_overlap = j.value("prototype_overlap", c.prototype_overlap);
    c.cue_delay = j.value("cue_delay", c.cue_delay);
    c.words_min = j.value("words_min", c.words_min);
    c.words_max = j.value("words_max", c.words_max);
    c.word_len_min = j.value("word_len_min", c.word_len_min);
    c.word_len_max = j.value("word_len_max", c.word_len_max);
    c.frame_duration_ms = j.value("frame_duration_ms", c.frame_duration_ms);
    c.seed = j.value("seed", c.seed);
    return c;
  }

  void validate() const {
    if (vocab_size < 2 || d_min < 1 || d_max < d_min || feature_dim < 1 ||
        noise_sigma < 0 || cue_delay < 0 || words_min < 1 ||
        words_max < words_min || word_len_min < 1 ||
        word_len_max < word_len_min || frame_duration_ms <= 0)
      throw std::invalid_argument("SynthConfig: invalid field");
  }
};

struct SynthUtterance {
  int T = 0;
  int F = 0;
  std::vector<double> frames;  // row-major T x F
  std::vector<TokenId> target;  // token ids, no blank
  std::string target_text;
  std::vector<int> gt_emission;  // first frame of each target token
  double frame_duration_ms = 10.0;

  double feat(int t, int f) const {
    return frames[static_cast<std::size_t>(t) * static_cast<std::size_t>(F) +
                  static_cast<std::size_t>(f)];
  }
};

// Vocabulary for a config: letters a.., space, blank last.
inline Vocabulary make_vocab(const SynthConfig& cfg) {
  std::vector<std::string> tokens;
  for (int i = 0; i < cfg.vocab_size; ++i)
    tokens.push_back(std::string(1, static_cast<char>('a' + i)));
  tokens.push_back(" ");
  tokens.push_back("\xE2\x88\x85");  // U+2205 empty set, the blank symbol
  return Vocabulary(tokens, "\xE2\x88\x85", std::string(" "));
}

// Feature prototypes for every non-blank token, drawn from the config
// seed: unit-normalized Gaussian direction per token mixed with a shared
// direction by prototype_overlap.
inline std::vector<std::vector<double>> make_prototypes(const SynthConfig& cfg,
                                                        int n_tokens) {
  Rng rng = Rng(cfg.seed).split(0);
  std::vector<double> shared(static_cast<std::size_t>(cfg.feature_dim));
  for (double& x : shared) x = rng.next_gaussian();
  auto normalize = [](std::vector<double>& v) {
    double n = 0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n > 0)
      for (double& x : v) x /= n;
  };
  normalize(shared);
  std::vector<std::vector<double>> protos;
  for (int k = 0; k < n_tokens; ++k) {
    std::vector<double> p(static_cast<std::size_t>(cfg.feature_dim));
    for (double& x : p) x = rng.next_gaussian();
    normalize(p);
    double o = cfg.prototype_overlap;
    for (int f = 0; f < cfg.feature_dim; ++f)
      p[static_cast<std::size_t>(f)] =
          std::sqrt(1.0 - o * o) * p[static_cast<std::size_t>(f)] +
          o * shared[static_cast<std::size_t>(f)];
    protos.push_back(std::move(p));
  }
  return protos;
}

// Deterministic given (cfg.seed, split_id, n_utts). Targets are random
// words separated by single spaces; each target token gets a duration in
// [d_min, d_max] and its prototype appears cue_delay frames after onset.
inline std::vector<SynthUtterance> gen_dataset(const SynthConfig& cfg,
                                               int n_utts,
                                               const Vocabulary& v,
                                               std::uint64_t split_id = 0) {
  cfg.validate();
  auto protos = make_prototypes(cfg, v.size() - 1);  // all but blank
  Rng split_rng = Rng(cfg.seed).split(1).split(split_id);
  std::vector<SynthUtterance> out;
  out.reserve(static_cast<std::size_t>(n_utts));
  const TokenId space = *v.space_id();

  for (int i = 0; i < n_utts; ++i) {
    Rng rng = split_rng.split(static_cast<std::uint64_t>(i));
    SynthUtterance u;
    u.F = cfg.feature_dim;
    u.frame_duration_ms = cfg.frame_duration_ms;

    int n_words = cfg.words_min +
                  static_cast<int>(rng.next_below(
                      static_cast<std::uint64_t>(cfg.words_max - cfg.words_min + 1)));
    for (int w = 0; w < n_words; ++w) {
      if (w > 0) u.target.push_back(space);
      int len = cfg.word_len_min +
                static_cast<int>(rng.next_below(static_cast<std::uint64_t>(
                    cfg.word_len_max - cfg.word_len_min + 1)));
      for (int c = 0; c < len; ++c) {
        // no adjacent repeated letters: a repeat would merge under the
        // collapse operator, making even a perfect frame classifier err
        TokenId tok;
        do {
          tok = static_cast<TokenId>(
              rng.next_below(static_cast<std::uint64_t>(cfg.vocab_size)));
        } while (c > 0 && tok == u.target.back());
        u.target.push_back(tok);
      }
    }
    u.target_text = v.decode(u.target);

    std::vector<TokenId> frame_label;
    for (TokenId tok : u.target) {
      int d = cfg.d_min + static_cast<int>(rng.next_below(
                              static_cast<std::uint64_t>(cfg.d_max - cfg.d_min + 1)));
      u.gt_emission.push_back(static_cast<int>(frame_label.size()));
      for (int f = 0; f < d; ++f) frame_label.push_back(tok);
    }
    u.T = static_cast<int>(frame_label.size());
    u.frames.assign(
        static_cast<std::size_t>(u.T) * static_cast<std::size_t>(u.F), 0.0);
    for (int t = 0; t < u.T; ++t) {
      int src = t - cfg.cue_delay;
      if (src < 0) src = 0;
      const auto& p = protos[static_cast<std::size_t>(
          frame_label[static_cast<std::size_t>(src)])];
      for (int f = 0; f < u.F; ++f)
        u.frames[static_cast<std::size_t>(t) * u.F + f] =
            p[static_cast<std::size_t>(f)] +
            cfg.noise_sigma * rng.next_gaussian();
    }
    out.push_back(std::move(u));
  }
  return out;
}

// Binary split file: header {n_utts, F, frame_duration_ms}, then per
// utterance {T, U, text_len, frames, target ids, gt_emission, text bytes}.
inline void save_dataset(const std::vector<SynthUtterance>& ds,
                         const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_dataset: cannot write " + path);
  std::int64_t n = static_cast<std::int64_t>(ds.size());
  std::int64_t feat = ds.empty() ? 0 : ds.front().F;
  double ms = ds.empty() ? 0.0 : ds.front().frame_duration_ms;
  f.write(reinterpret_cast<const char*>(&n), sizeof(n));
  f.write(reinterpret_cast<const char*>(&feat), sizeof(feat));
  f.write(reinterpret_cast<const char*>(&ms), sizeof(ms));
  for (const SynthUtterance& u : ds) {
    std::int64_t t64 = u.T, u64 = static_cast<std::int64_t>(u.target.size()),
                 l64 = static_cast<std::int64_t>(u.target_text.size());
    f.write(reinterpret_cast<const char*>(&t64), sizeof(t64));
    f.write(reinterpret_cast<const char*>(&u64), sizeof(u64));
    f.write(reinterpret_cast<const char*>(&l64), sizeof(l64));
    f.write(reinterpret_cast<const char*>(u.frames.data()),
            static_cast<std::streamsize>(u.frames.size() * sizeof(double)));
    for (TokenId id : u.target) {
      std::int32_t v32 = id;
      f.write(reinterpret_cast<const char*>(&v32), sizeof(v32));
    }
    for (int g : u.gt_emission) {
      std::int32_t v32 = g;
      f.write(reinterpret_cast<const char*>(&v32), sizeof(v32));
    }
    f.write(u.target_text.data(), static_cast<std::streamsize>(l64));
  }
}

inline std::vector<SynthUtterance> load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_dataset: cannot read " + path);
  std::int64_t n = 0, feat = 0;
  double ms = 0.0;
  f.read(reinterpret_cast<char*>(&n), sizeof(n));
  f.read(reinterpret_cast<char*>(&feat), sizeof(feat));
  f.read(reinterpret_cast<char*>(&ms), sizeof(ms));
  std::vector<SynthUtterance> out;
  out.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    SynthUtterance u;
    u.F = static_cast<int>(feat);
    u.frame_duration_ms = ms;
    std::int64_t t64 = 0, u64 = 0, l64 = 0;
    f.read(reinterpret_cast<char*>(&t64), sizeof(t64));
    f.read(reinterpret_cast<char*>(&u64), sizeof(u64));
    f.read(reinterpret_cast<char*>(&l64), sizeof(l64));
    u.T = static_cast<int>(t64);
    u.frames.resize(static_cast<std::size_t>(t64 * feat));
    f.read(reinterpret_cast<char*>(u.frames.data()),
           static_cast<std::streamsize>(u.frames.size() * sizeof(double)));
    u.target.resize(static_cast<std::size_t>(u64));
    for (auto& id : u.target) {
      std::int32_t v32 = 0;
      f.read(reinterpret_cast<char*>(&v32), sizeof(v32));
      id = v32;
    }
    u.gt_emission.resize(static_cast<std::size_t>(u64));
    for (auto& g : u.gt_emission) {
      std::int32_t v32 = 0;
      f.read(reinterpret_cast<char*>(&v32), sizeof(v32));
      g = v32;
    }
    u.target_text.resize(static_cast<std::size_t>(l64));
    f.read(u.target_text.data(), static_cast<std::streamsize>(l64));
    if (!f) throw std::runtime_error("load_dataset: truncated file " + path);
    out.push_back(std::move(u));
  }
  return out;
}

}  // namespace awp

#endif  // AWP_SYNTH_HPP
