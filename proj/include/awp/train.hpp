#ifndef AWP_TRAIN_HPP
#define AWP_TRAIN_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "awp/awp_loss.hpp"
#include "awp/ctc.hpp"
#include "awp/decode.hpp"
#include "awp/edit_distance.hpp"
#include "awp/latency.hpp"
#include "awp/model.hpp"
#include "awp/properties.hpp"
#include "awp/sampler.hpp"
#include "awp/synth.hpp"
#include "awp/vocab.hpp"

namespace awp {

// One row of evaluation output.
struct MetricsRecord {
  long step = 0;
  double epoch = 0.0;
  double ctc_loss = 0.0;
  double awp_loss = 0.0;
  double hinge_active_frac = 0.0;
  double train_wer = 0.0;
  double eval_wer = 0.0;
  double eval_cer = 0.0;
  double dl_frames = 0.0;
  double dl_ms = 0.0;
  double tl_ms = 0.0;
};

inline std::string metrics_csv_header() {
  return "step,epoch,ctc_loss,awp_loss,hinge_active_frac,train_wer,eval_wer,"
         "eval_cer,dl_frames,dl_ms,tl_ms";
}

inline std::string metrics_csv_row(const MetricsRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%ld,%.6f,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g",
                r.step, r.epoch, r.ctc_loss, r.awp_loss, r.hinge_active_frac,
                r.train_wer, r.eval_wer, r.eval_cer, r.dl_frames, r.dl_ms,
                r.tl_ms);
  return buf;
}

inline std::string metrics_to_csv(const std::vector<MetricsRecord>& history) {
  std::string out = metrics_csv_header() + "\n";
  for (const MetricsRecord& r : history) out += metrics_csv_row(r) + "\n";
  return out;
}

// Corpus-level metrics: pooled error counts over the split, not a mean of
// per-utterance rates.
struct EvalMetrics {
  double wer = 0.0;
  double cer = 0.0;
  double dl_frames = 0.0;  // vs ground-truth emission times
  double dl_ms = 0.0;
  double dcl_ms = 0.0;
  double tl_ms = 0.0;
  double mean_frame_ctc_loss = 0.0;  // per-frame CTC loss, averaged
  int infeasible = 0;
};

inline EvalMetrics evaluate(const WindowModel& model,
                            const std::vector<SynthUtterance>& dataset,
                            const Vocabulary& v,
                            const std::optional<BeamConfig>& beam =
                                std::nullopt) {
  EvalMetrics out;
  long word_err = 0, word_ref = 0, char_err = 0, char_ref = 0;
  double drift_sum = 0.0;
  long drift_count = 0;
  double frame_loss_sum = 0.0;
  long frame_count = 0;
  out.dcl_ms = 0.0;
  for (const SynthUtterance& u : dataset) {
    LogProbMatrix m = forward(model, u);
    out.dcl_ms = model.future_context * u.frame_duration_ms;
    std::string hyp =
        beam ? beam_decode(m, v, *beam) : greedy_decode(m, v);
    auto ref_words = split_words(u.target_text);
    word_err += edit_distance(ref_words, split_words(hyp)).cost;
    word_ref += static_cast<long>(ref_words.size());
    char_err += edit_distance(chars_of(u.target_text), chars_of(hyp)).cost;
    char_ref += static_cast<long>(u.target_text.size());
    try {
      frame_loss_sum += ctc_loss(m, u.target, v.blank_id()) / m.T;
      ++frame_count;
      LatencyReport lr = measure_drift_vs_truth(m, u.target, u.gt_emission,
                                                v.blank_id(), out.dcl_ms);
      drift_sum += lr.dl_frames * static_cast<double>(lr.per_token_drift.size());
      drift_count += static_cast<long>(lr.per_token_drift.size());
    } catch (const InfeasibleTarget&) {
      ++out.infeasible;
    }
  }
  if (word_ref > 0) out.wer = static_cast<double>(word_err) / word_ref;
  if (char_ref > 0) out.cer = static_cast<double>(char_err) / char_ref;
  if (drift_count > 0) out.dl_frames = drift_sum / drift_count;
  if (!dataset.empty())
    out.dl_ms = out.dl_frames * dataset.front().frame_duration_ms;
  out.tl_ms = out.dcl_ms + out.dl_ms;
  if (frame_count > 0) out.mean_frame_ctc_loss = frame_loss_sum / frame_count;
  return out;
}

struct TrainConfig {
  int epochs = 10;
  int eval_interval = 0;  // steps between metric rows; 0 = once per epoch
  std::uint64_t seed = 0;
  double ema_decay = 0.0;  // 0 disables the parameter EMA
};

struct TrainState {
  WindowModel model;
  WindowModel ema_model;  // valid when ema_decay > 0
  long step = 0;
  double epoch = 0.0;
  long skipped_infeasible = 0;
  long pairs_dropped = 0;  // sampled pairs filtered as not applicable
};

struct TrainResult {
  TrainState state;
  std::vector<MetricsRecord> history;
};

namespace detail {

inline void ema_update(WindowModel& ema, const WindowModel& m, double decay) {
  auto blend = [decay](std::vector<double>& e, const std::vector<double>& p) {
    for (std::size_t i = 0; i < e.size(); ++i)
      e[i] = decay * e[i] + (1.0 - decay) * p[i];
  };
  blend(ema.w1, m.w1);
  blend(ema.b1, m.b1);
  blend(ema.w2, m.w2);
  blend(ema.b2, m.b2);
}

}  // namespace detail

// Single-threaded, batch = 1 utterance per step, deterministic given the
// config seeds. Each step: forward, CTC gradient, plus the AWP gradient
// once the start epoch is reached (sample N alignments, apply the property
// transform, hinge over retained pairs), then one Adam update.
inline TrainResult train(const std::vector<SynthUtterance>& train_set,
                         const std::vector<SynthUtterance>& eval_set,
                         const Vocabulary& v, WindowModel model,
                         const AwpConfig& awp_cfg,
                         const SamplerConfig& sampler_cfg,
                         const PropertyConfig& prop_cfg,
                         const AdamConfig& adam_cfg,
                         const TrainConfig& train_cfg) {
  if (train_set.empty())
    throw std::invalid_argument("train: empty training set");
  TrainResult res;
  res.state.model = std::move(model);
  if (train_cfg.ema_decay > 0.0) res.state.ema_model = res.state.model;
  ModelOptimizer opt(res.state.model, adam_cfg);
  Rng root(train_cfg.seed);
  Rng shuffle_rng = root.split(1);
  Rng prop_rng_root = root.split(2);

  const long steps_per_epoch = static_cast<long>(train_set.size());
  const int eval_every = train_cfg.eval_interval > 0
                             ? train_cfg.eval_interval
                             : static_cast<int>(steps_per_epoch);
  double ctc_acc = 0.0, awp_acc = 0.0, hinge_acc = 0.0;
  long acc_n = 0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int ep = 0; ep < train_cfg.epochs; ++ep) {
    // Fisher-Yates with the per-epoch stream
    Rng erng = shuffle_rng.split(static_cast<std::uint64_t>(ep));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(erng.next_below(i));
      std::swap(order[i - 1], order[j]);
    }

    for (std::size_t oi = 0; oi < order.size(); ++oi) {
      const SynthUtterance& u = train_set[order[oi]];
      res.state.epoch =
          static_cast<double>(res.state.step) / steps_per_epoch;
      double alpha_eff =
          awp_cfg.effective_alpha(res.state.epoch, res.state.step);
      bool awp_active = alpha_eff > 0.0 && prop_cfg.kind != PropertyKind::None;

      ForwardCache cache = forward_cached(res.state.model, u);
      const LogProbMatrix& m = cache.log_probs;

      double ctc_l = 0.0, awp_l = 0.0, hinge_frac = 0.0;
      std::vector<double> grad_logp;
      try {
        ctc_l = ctc_loss(m, u.target, v.blank_id());
        grad_logp = ctc_grad_logp(m, u.target, v.blank_id());
      } catch (const InfeasibleTarget&) {
        ++res.state.skipped_infeasible;
        ++res.state.step;
        continue;
      }
      if (!std::isfinite(ctc_l))
        throw std::runtime_error(
            "train: divergence (non-finite CTC loss) at step " +
            std::to_string(res.state.step));

      if (awp_active) {
        SamplerConfig scfg = sampler_cfg;
        scfg.seed = Rng(sampler_cfg.seed)
                        .split(static_cast<std::uint64_t>(res.state.step))
                        .next_u64();
        std::vector<Alignment> samples = sample(m, scfg);
        Rng prng =
            prop_rng_root.split(static_cast<std::uint64_t>(res.state.step));
        std::vector<AlignmentPair> pairs;
        pairs.reserve(samples.size());
        for (std::size_t si = 0; si < samples.size(); ++si) {
          Rng pr = prng.split(si);
          TransformResult tr =
              apply_property(prop_cfg, samples[si], u.target_text, v, pr);
          if (!tr.applicable) ++res.state.pairs_dropped;
          pairs.push_back(
              {std::move(samples[si]), std::move(tr.alignment), tr.applicable});
        }
        AwpLossResult alr =
            awp_loss(m, pairs, awp_cfg.lambda_margin, awp_cfg.log_domain);
        awp_l = alr.loss;
        hinge_frac = alr.active_fraction();
        if (!alr.no_pairs) {
          std::vector<double> g_awp = awp_grad(
              m, pairs, awp_cfg.lambda_margin, awp_cfg.log_domain);
          for (std::size_t i = 0; i < grad_logp.size(); ++i)
            grad_logp[i] += alpha_eff * g_awp[i];
        }
      }

      std::vector<double> dlogits = grad_logits_from_logp(m, grad_logp);
      Gradients g = backward(res.state.model, u, cache, dlogits);
      opt.step(res.state.model, g);
      if (train_cfg.ema_decay > 0.0)
        detail::ema_update(res.state.ema_model, res.state.model,
                           train_cfg.ema_decay);

      ctc_acc += ctc_l;
      awp_acc += awp_l;
      hinge_acc += hinge_frac;
      ++acc_n;
      ++res.state.step;

      if (res.state.step % eval_every == 0) {
        const WindowModel& eval_model = train_cfg.ema_decay > 0.0
                                            ? res.state.ema_model
                                            : res.state.model;
        EvalMetrics train_m = evaluate(
            eval_model,
            std::vector<SynthUtterance>(
                train_set.begin(),
                train_set.begin() +
                    static_cast<long>(std::min<std::size_t>(
                        train_set.size(), 16))),
            v);
        EvalMetrics eval_m = evaluate(eval_model, eval_set, v);
        MetricsRecord rec;
        rec.step = res.state.step;
        rec.epoch = static_cast<double>(res.state.step) / steps_per_epoch;
        rec.ctc_loss = acc_n ? ctc_acc / acc_n : 0.0;
        rec.awp_loss = acc_n ? awp_acc / acc_n : 0.0;
        rec.hinge_active_frac = acc_n ? hinge_acc / acc_n : 0.0;
        rec.train_wer = train_m.wer;
        rec.eval_wer = eval_m.wer;
        rec.eval_cer = eval_m.cer;
        rec.dl_frames = eval_m.dl_frames;
        rec.dl_ms = eval_m.dl_ms;
        rec.tl_ms = eval_m.tl_ms;
        res.history.push_back(rec);
        ctc_acc = awp_acc = hinge_acc = 0.0;
        acc_n = 0;
      }
    }
  }
  res.state.epoch = static_cast<double>(res.state.step) / steps_per_epoch;
  return res;
}

}  // namespace awp

#endif  // AWP_TRAIN_HPP
