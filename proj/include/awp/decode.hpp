#ifndef AWP_DECODE_HPP
#define AWP_DECODE_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "awp/logprob.hpp"
#include "awp/vocab.hpp"

namespace awp {

// External language-model hook for the decoder score
//   L(y) = P_acoustic(y|x) + beta * P_CharLM(y) + gamma * P_WordLM(y).
// No LM ships with the toolkit; the weights default to 0 and the hook to
// a constant 0.
struct BeamConfig {
  int beam_width = 8;
  double lm_char_weight = 0.0;   // beta
  double lm_word_weight = 0.0;   // gamma
  std::function<double(const std::vector<TokenId>&)> char_lm;
  std::function<double(const std::vector<TokenId>&)> word_lm;
};

// Best-path decoding: collapse of the per-frame argmax. Not guaranteed to
// find the most probable label sequence (the classic best-path vs
// best-label gap); beam_decode closes that gap as the width grows.
inline std::string greedy_decode(const LogProbMatrix& m, const Vocabulary& v) {
  Alignment a(static_cast<std::size_t>(m.T));
  for (int t = 0; t < m.T; ++t) {
    auto row = m.row(t);
    a[static_cast<std::size_t>(t)] = static_cast<TokenId>(
        std::max_element(row.begin(), row.end()) - row.begin());
  }
  return collapse_to_text(a, v);
}

namespace detail {

struct PrefixMass {
  double blank = kNegInf;      // mass of paths ending in blank
  double non_blank = kNegInf;  // mass of paths ending in the last token

  double total() const { return log_add(blank, non_blank); }
};

}  // namespace detail

// Prefix beam search over collapsed prefixes, summing path probabilities
// per prefix with separate blank/non-blank ending masses. Deterministic:
// prefixes are kept in lexicographic order and ties in score break toward
// the lexicographically smaller prefix.
inline std::vector<TokenId> beam_decode_ids(const LogProbMatrix& m,
                                            const Vocabulary& v,
                                            const BeamConfig& cfg) {
  if (cfg.beam_width < 1)
    throw std::invalid_argument("beam_decode: beam_width must be >= 1");
  const TokenId blank = v.blank_id();
  using Beam = std::map<std::vector<TokenId>, detail::PrefixMass>;
  Beam beam;
  beam[{}] = {0.0, kNegInf};

  for (int t = 0; t < m.T; ++t) {
    Beam next;
    for (const auto& [prefix, mass] : beam) {
      for (TokenId k = 0; k < m.V; ++k) {
        double lp = m.at(t, k);
        if (k == blank) {
          auto& pm = next[prefix];
          pm.blank = log_add(pm.blank, mass.total() + lp);
        } else if (!prefix.empty() && prefix.back() == k) {
          // same token: repeat extends the existing run...
          auto& same = next[prefix];
          same.non_blank = log_add(same.non_blank, mass.non_blank + lp);
          // ...while a blank-separated copy starts a new occurrence
          std::vector<TokenId> grown = prefix;
          grown.push_back(k);
          auto& pm = next[grown];
          pm.non_blank = log_add(pm.non_blank, mass.blank + lp);
        } else {
          std::vector<TokenId> grown = prefix;
          grown.push_back(k);
          auto& pm = next[grown];
          pm.non_blank = log_add(pm.non_blank, mass.total() + lp);
        }
      }
    }
    if (static_cast<int>(next.size()) > cfg.beam_width) {
      std::vector<std::pair<double, const std::vector<TokenId>*>> order;
      order.reserve(next.size());
      for (const auto& [prefix, mass] : next)
        order.push_back({mass.total(), &prefix});
      std::stable_sort(order.begin(), order.end(),
                       [](const auto& a, const auto& b) {
                         return a.first > b.first;  // stable: map order = lex
                       });
      Beam pruned;
      for (int i = 0; i < cfg.beam_width; ++i)
        pruned[*order[static_cast<std::size_t>(i)].second] =
            next[*order[static_cast<std::size_t>(i)].second];
      next = std::move(pruned);
    }
    beam = std::move(next);
  }

  const std::vector<TokenId>* best = nullptr;
  double best_score = kNegInf;
  for (const auto& [prefix, mass] : beam) {
    double score = mass.total();
    if (cfg.lm_char_weight != 0.0 && cfg.char_lm)
      score += cfg.lm_char_weight * cfg.char_lm(prefix);
    if (cfg.lm_word_weight != 0.0 && cfg.word_lm)
      score += cfg.lm_word_weight * cfg.word_lm(prefix);
    if (best == nullptr || score > best_score) {  // map order = lex tie-break
      best = &prefix;
      best_score = score;
    }
  }
  return best ? *best : std::vector<TokenId>{};
}

inline std::string beam_decode(const LogProbMatrix& m, const Vocabulary& v,
                               const BeamConfig& cfg) {
  return v.decode(beam_decode_ids(m, v, cfg));
}

}  // namespace awp

#endif  // AWP_DECODE_HPP
