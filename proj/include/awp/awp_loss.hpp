#ifndef AWP_AWP_LOSS_HPP
#define AWP_AWP_LOSS_HPP

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "awp/ctc.hpp"
#include "awp/logprob.hpp"
#include "awp/vocab.hpp"

namespace awp {

// A sampled alignment with its property-improved counterpart. Pairs with
// applicable=false are excluded from the loss and its normalizer.
struct AlignmentPair {
  Alignment sampled;
  Alignment improved;
  bool applicable = true;
};

struct AwpConfig {
  double alpha = 0.0;          // weight of the auxiliary loss
  double lambda_margin = 0.0;  // hinge margin
  double start_epoch = 0.0;    // epochs of pure CTC before the loss activates
  // optional piecewise-constant (step, alpha) schedule; steps strictly
  // increasing; before the first step the base alpha applies
  std::vector<std::pair<long, double>> alpha_schedule;
  // optional log-domain hinge max{logP(a)-logP(abar)+lambda, 0}; default
  // off, matching the probability-space formulation
  bool log_domain = false;

  double effective_alpha(double epoch, long step) const {
    if (epoch < start_epoch) return 0.0;
    double a = alpha;
    for (const auto& [s, v] : alpha_schedule) {
      if (step >= s) a = v;
      else break;
    }
    return a;
  }
};

struct AwpLossResult {
  double loss = 0.0;
  int retained = 0;      // pairs kept after applicability filtering
  int active = 0;        // pairs with a strictly positive hinge
  bool no_pairs = false; // all pairs filtered out

  double active_fraction() const {
    return retained > 0 ? static_cast<double>(active) / retained : 0.0;
  }
};

// Hinge loss over the retained pairs:
//   (1/N) sum_i max{P(a_i|x) - P(abar_i|x) + lambda, 0},
// with P in probability space via exp(path_log_prob) and N the retained
// pair count.
inline AwpLossResult awp_loss(const LogProbMatrix& m,
                              const std::vector<AlignmentPair>& pairs,
                              double lambda, bool log_domain = false) {
  AwpLossResult res;
  double sum = 0.0;
  for (const AlignmentPair& pr : pairs) {
    if (!pr.applicable) continue;
    ++res.retained;
    double lp_a = path_log_prob(m, pr.sampled);
    double lp_b = path_log_prob(m, pr.improved);
    double term = log_domain ? lp_a - lp_b + lambda
                             : std::exp(lp_a) - std::exp(lp_b) + lambda;
    if (term > 0.0) {
      sum += term;
      ++res.active;
    }
  }
  if (res.retained == 0) {
    res.no_pairs = true;
    return res;
  }
  res.loss = sum / res.retained;
  return res;
}

// Subgradient of awp_loss w.r.t. the log-probability entries. Inactive
// hinges contribute nothing; at the kink the zero subgradient is used.
// For an active pair, d term / d logp[t][c] = P(a)[a_t=c] - P(abar)[abar_t=c]
// (in log domain the probability factors drop out).
inline std::vector<double> awp_grad(const LogProbMatrix& m,
                                    const std::vector<AlignmentPair>& pairs,
                                    double lambda, bool log_domain = false) {
  std::vector<double> grad(
      static_cast<std::size_t>(m.T) * static_cast<std::size_t>(m.V), 0.0);
  int retained = 0;
  for (const AlignmentPair& pr : pairs)
    if (pr.applicable) ++retained;
  if (retained == 0) return grad;
  const double inv_n = 1.0 / retained;

  for (const AlignmentPair& pr : pairs) {
    if (!pr.applicable) continue;
    double lp_a = path_log_prob(m, pr.sampled);
    double lp_b = path_log_prob(m, pr.improved);
    double term = log_domain ? lp_a - lp_b + lambda
                             : std::exp(lp_a) - std::exp(lp_b) + lambda;
    if (term <= 0.0) continue;
    double wa = log_domain ? 1.0 : std::exp(lp_a);
    double wb = log_domain ? 1.0 : std::exp(lp_b);
    for (int t = 0; t < m.T; ++t) {
      grad[static_cast<std::size_t>(t) * m.V + pr.sampled[static_cast<std::size_t>(t)]] +=
          inv_n * wa;
      grad[static_cast<std::size_t>(t) * m.V + pr.improved[static_cast<std::size_t>(t)]] -=
          inv_n * wb;
    }
  }
  return grad;
}

struct CombinedLoss {
  double total = 0.0;
  double ctc_part = 0.0;
  double awp_part = 0.0;
  double alpha_effective = 0.0;
  double hinge_active_fraction = 0.0;
  bool no_pairs = false;
};

// L = L_CTC + alpha_effective * L_AWP, with alpha_effective zero before the
// start epoch and otherwise taken from the schedule.
inline CombinedLoss combined_loss(const LogProbMatrix& m,
                                  const std::vector<TokenId>& y,
                                  const std::vector<AlignmentPair>& pairs,
                                  const AwpConfig& cfg, TokenId blank_id,
                                  double epoch, long step = 0) {
  CombinedLoss out;
  out.ctc_part = ctc_loss(m, y, blank_id);
  out.alpha_effective = cfg.effective_alpha(epoch, step);
  AwpLossResult awp =
      awp_loss(m, pairs, cfg.lambda_margin, cfg.log_domain);
  out.awp_part = awp.loss;
  out.hinge_active_fraction = awp.active_fraction();
  out.no_pairs = awp.no_pairs;
  out.total = out.ctc_part + out.alpha_effective * out.awp_part;
  return out;
}

}  // namespace awp

#endif  // AWP_AWP_LOSS_HPP
