#ifndef AWP_CONFIG_HPP
#define AWP_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "awp/awp_loss.hpp"
#include "awp/model.hpp"
#include "awp/properties.hpp"
#include "awp/sampler.hpp"
#include "awp/synth.hpp"
#include "awp/train.hpp"

namespace awp {

// One declarative run description. Every random stream is derived from the
// single root seed, so identical configs give identical outputs.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  SynthConfig synth;
  int n_train = 120;
  int n_eval = 40;
  int model_past_context = 4;
  int model_future_context = 0;
  int model_hidden = 64;
  SamplerConfig sampler;
  AwpConfig awp;
  PropertyConfig property;
  AdamConfig optimizer;
  TrainConfig train;
  int beam_width = 8;

  void derive_seeds() {
    Rng root(seed);
    synth.seed = root.split(10).next_u64();
    sampler.seed = root.split(11).next_u64();
    train.seed = root.split(12).next_u64();
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["synth"] = synth.to_json();
    j["data"] = {{"n_train", n_train}, {"n_eval", n_eval}};
    j["model"] = {{"past_context", model_past_context},
                  {"future_context", model_future_context},
                  {"hidden", model_hidden}};
    j["sampler"] = {{"n_alignments", sampler.n_alignments},
                    {"temperature", sampler.temperature},
                    {"mode", sampler.mode == SampleMode::Categorical
                                 ? "categorical"
                                 : "gumbel"}};
    nlohmann::json sched = nlohmann::json::array();
    for (const auto& [s, a] : awp.alpha_schedule)
      sched.push_back({{"step", s}, {"alpha", a}});
    j["awp"] = {{"alpha", awp.alpha},
                {"lambda", awp.lambda_margin},
                {"start_epoch", awp.start_epoch},
                {"alpha_schedule", sched},
                {"log_domain", awp.log_domain}};
    std::string kind = property.kind == PropertyKind::LowLatency ? "low_latency"
                       : property.kind == PropertyKind::MinWer   ? "min_wer"
                                                                 : "none";
    j["property"] = {{"kind", kind},
                     {"k_shifts", property.k_shifts},
                     {"m_words", property.m_words}};
    j["optimizer"] = {{"lr", optimizer.lr},
                      {"beta1", optimizer.beta1},
                      {"beta2", optimizer.beta2},
                      {"eps", optimizer.eps}};
    j["train"] = {{"epochs", train.epochs},
                  {"eval_interval", train.eval_interval},
                  {"ema_decay", train.ema_decay}};
    j["beam_width"] = beam_width;
    return j;
  }

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("synth")) c.synth = SynthConfig::from_json(j.at("synth"));
    if (j.contains("data")) {
      c.n_train = j.at("data").value("n_train", c.n_train);
      c.n_eval = j.at("data").value("n_eval", c.n_eval);
    }
    if (j.contains("model")) {
      const auto& m = j.at("model");
      c.model_past_context = m.value("past_context", c.model_past_context);
      c.model_future_context =
          m.value("future_context", c.model_future_context);
      c.model_hidden = m.value("hidden", c.model_hidden);
    }
    if (j.contains("sampler")) {
      const auto& s = j.at("sampler");
      c.sampler.n_alignments = s.value("n_alignments", c.sampler.n_alignments);
      c.sampler.temperature = s.value("temperature", c.sampler.temperature);
      std::string mode = s.value("mode", std::string("categorical"));
      if (mode == "categorical") c.sampler.mode = SampleMode::Categorical;
      else if (mode == "gumbel") c.sampler.mode = SampleMode::GumbelSoftmax;
      else throw std::invalid_argument("config: unknown sampler mode " + mode);
    }
    if (j.contains("awp")) {
      const auto& a = j.at("awp");
      c.awp.alpha = a.value("alpha", c.awp.alpha);
      c.awp.lambda_margin = a.value("lambda", c.awp.lambda_margin);
      c.awp.start_epoch = a.value("start_epoch", c.awp.start_epoch);
      c.awp.log_domain = a.value("log_domain", c.awp.log_domain);
      if (a.contains("alpha_schedule"))
        for (const auto& e : a.at("alpha_schedule"))
          c.awp.alpha_schedule.push_back(
              {e.at("step").get<long>(), e.at("alpha").get<double>()});
    }
    if (j.contains("property")) {
      const auto& p = j.at("property");
      std::string kind = p.value("kind", std::string("none"));
      if (kind == "low_latency") c.property.kind = PropertyKind::LowLatency;
      else if (kind == "min_wer") c.property.kind = PropertyKind::MinWer;
      else if (kind == "none") c.property.kind = PropertyKind::None;
      else throw std::invalid_argument("config: unknown property kind " + kind);
      c.property.k_shifts = p.value("k_shifts", c.property.k_shifts);
      c.property.m_words = p.value("m_words", c.property.m_words);
    }
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      c.optimizer.lr = o.value("lr", c.optimizer.lr);
      c.optimizer.beta1 = o.value("beta1", c.optimizer.beta1);
      c.optimizer.beta2 = o.value("beta2", c.optimizer.beta2);
      c.optimizer.eps = o.value("eps", c.optimizer.eps);
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      c.train.epochs = t.value("epochs", c.train.epochs);
      c.train.eval_interval = t.value("eval_interval", c.train.eval_interval);
      c.train.ema_decay = t.value("ema_decay", c.train.ema_decay);
    }
    c.beam_width = j.value("beam_width", c.beam_width);
    c.derive_seeds();
    return c;
  }

  static ExperimentConfig from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("config: cannot read " + path);
    nlohmann::json j;
    f >> j;
    return from_json(j);
  }
};

// Build the model described by a config (before training).
inline WindowModel make_model(const ExperimentConfig& cfg,
                              const Vocabulary& v) {
  WindowModel m;
  m.past_context = cfg.model_past_context;
  m.future_context = cfg.model_future_context;
  m.feature_dim = cfg.synth.feature_dim;
  m.hidden = cfg.model_hidden;
  m.n_out = v.size();
  m.init(Rng(cfg.seed).split(20));
  return m;
}

// End-to-end run from a config: generate data, train, return everything.
struct RunResult {
  Vocabulary vocab;
  std::vector<SynthUtterance> train_set;
  std::vector<SynthUtterance> eval_set;
  TrainResult train_result;
};

inline RunResult run_experiment(const ExperimentConfig& cfg) {
  Vocabulary v = make_vocab(cfg.synth);
  std::vector<SynthUtterance> train_set =
      gen_dataset(cfg.synth, cfg.n_train, v, /*split_id=*/0);
  std::vector<SynthUtterance> eval_set =
      gen_dataset(cfg.synth, cfg.n_eval, v, /*split_id=*/1);
  WindowModel model = make_model(cfg, v);
  TrainResult tr = train(train_set, eval_set, v, std::move(model), cfg.awp,
                         cfg.sampler, cfg.property, cfg.optimizer, cfg.train);
  return {std::move(v), std::move(train_set), std::move(eval_set),
          std::move(tr)};
}

}  // namespace awp

#endif  // AWP_CONFIG_HPP
