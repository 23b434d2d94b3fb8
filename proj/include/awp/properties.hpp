#ifndef AWP_PROPERTIES_HPP
#define AWP_PROPERTIES_HPP

#include <algorithm>
#include <string>
#include <vector>

#include "awp/edit_distance.hpp"
#include "awp/rng.hpp"
#include "awp/vocab.hpp"

namespace awp {

// Output of a property transform. When not applicable the alignment is
// returned unchanged and the pair is dropped from the hinge loss.
struct TransformResult {
  Alignment alignment;
  bool applicable = false;
  int fixes_applied = 0;
};

enum class PropertyKind { None, LowLatency, MinWer };

struct PropertyConfig {
  PropertyKind kind = PropertyKind::None;
  int k_shifts = 1;  // low-latency: tokens shifted per application
  int m_words = 1;   // min-WER: words corrected per application
};

// Shift the alignment one step to the left starting at a repetition
// position, then pad with a trailing blank. The shift start is restricted
// to frames that repeat their predecessor, so the collapsed text is
// unchanged while every emission at or after the shift point moves one
// frame earlier. k > 1 applies the rule k times at independently drawn
// positions; stops early when no repetition remains.
inline TransformResult f_low_latency(const Alignment& a, int k, Rng& rng,
                                     TokenId blank_id) {
  TransformResult res{a, false, 0};
  const int T = static_cast<int>(a.size());
  for (int step = 0; step < k; ++step) {
    std::vector<int> reps;  // 0-indexed positions r with a[r] == a[r-1]
    for (int t = 1; t < T; ++t)
      if (res.alignment[static_cast<std::size_t>(t)] ==
          res.alignment[static_cast<std::size_t>(t - 1)])
        reps.push_back(t);
    if (reps.empty()) break;
    int r = reps[static_cast<std::size_t>(rng.next_below(reps.size()))];
    for (int t = r - 1; t + 1 < T; ++t)
      res.alignment[static_cast<std::size_t>(t)] =
          res.alignment[static_cast<std::size_t>(t + 1)];
    res.alignment[static_cast<std::size_t>(T - 1)] = blank_id;
    ++res.fixes_applied;
  }
  res.applicable = res.fixes_applied > 0;
  return res;
}

namespace detail {

// Word boundaries of a collapsed-span sequence: [begin, end) indices into
// the span list, one entry per word (space spans are separators).
inline std::vector<std::pair<int, int>> word_spans(
    const std::vector<CollapsedSpan>& spans, TokenId space_id) {
  std::vector<std::pair<int, int>> words;
  int n = static_cast<int>(spans.size());
  int i = 0;
  while (i < n) {
    if (spans[static_cast<std::size_t>(i)].id == space_id) {
      ++i;
      continue;
    }
    int begin = i;
    while (i < n && spans[static_cast<std::size_t>(i)].id != space_id) ++i;
    words.push_back({begin, i});
  }
  return words;
}

}  // namespace detail

// One correction pass of the minimum-WER transform: among hypothesis words
// aligned to a reference word by substitution, pick the word needing the
// fewest character substitutions (leftmost on ties), relabel the frame
// runs of its substituted characters with the reference characters, and
// verify the word error count dropped by one. Words whose fix would need
// character insertions or deletions are skipped in favor of the next-best
// candidate. Returns false when no word is fixable.
inline bool fix_one_word(Alignment& a, const std::string& y_text,
                         const Vocabulary& v) {
  if (!v.space_id())
    throw std::invalid_argument("f_mwer: vocabulary has no space symbol");
  const TokenId space = *v.space_id();

  auto spans = collapse_with_spans(a, v.blank_id());
  auto words = detail::word_spans(spans, space);
  std::vector<std::string> hyp_words;
  hyp_words.reserve(words.size());
  for (auto [b, e] : words) {
    std::string w;
    for (int i = b; i < e; ++i) w += v.symbol(spans[static_cast<std::size_t>(i)].id);
    hyp_words.push_back(std::move(w));
  }
  std::vector<std::string> ref_words = split_words(y_text);

  auto word_script = edit_distance(ref_words, hyp_words);
  const int before = word_script.cost;
  if (before == 0) return false;

  // candidates: (char substitution distance, hyp word index, ref word index)
  std::vector<std::tuple<int, int, int>> candidates;
  for (const EditStep& st : word_script.script) {
    if (st.op != EditOp::Substitute) continue;
    int d = edit_distance(chars_of(ref_words[static_cast<std::size_t>(st.ref_pos)]),
                          chars_of(hyp_words[static_cast<std::size_t>(st.hyp_pos)]))
                .cost;
    candidates.push_back({d, st.hyp_pos, st.ref_pos});
  }
  std::sort(candidates.begin(), candidates.end());

  for (auto [dist, hyp_idx, ref_idx] : candidates) {
    const std::string& rw = ref_words[static_cast<std::size_t>(ref_idx)];
    const std::string& hw = hyp_words[static_cast<std::size_t>(hyp_idx)];
    auto char_script = edit_distance(chars_of(rw), chars_of(hw));
    bool subs_only = true;
    for (const EditStep& st : char_script.script)
      if (st.op == EditOp::Insert || st.op == EditOp::Delete) subs_only = false;
    if (!subs_only) continue;

    Alignment fixed = a;
    auto [wb, we] = words[static_cast<std::size_t>(hyp_idx)];
    for (const EditStep& st : char_script.script) {
      if (st.op != EditOp::Substitute) continue;
      const CollapsedSpan& sp = spans[static_cast<std::size_t>(wb + st.hyp_pos)];
      TokenId ref_tok = v.id(std::string(1, rw[static_cast<std::size_t>(st.ref_pos)]));
      for (int t = sp.begin; t < sp.end; ++t)
        fixed[static_cast<std::size_t>(t)] = ref_tok;
    }
    // A relabeled run can merge with an identical neighbor and change the
    // collapsed text; accept only fixes that really remove one word error.
    int after = word_errors(y_text, collapse_to_text(fixed, v));
    if (after == before - 1) {
      a = std::move(fixed);
      return true;
    }
  }
  return false;
}

// The minimum-WER property transform: up to m single-word corrections
// applied to the running result. applicable=false when the collapse
// already matches the target or no word is substitution-fixable.
inline TransformResult f_mwer(const Alignment& a, const std::string& y_text,
                              int m, const Vocabulary& v) {
  if (y_text.empty())
    throw std::invalid_argument("f_mwer: empty target text");
  TransformResult res{a, false, 0};
  for (int i = 0; i < m; ++i) {
    if (!fix_one_word(res.alignment, y_text, v)) break;
    ++res.fixes_applied;
  }
  res.applicable = res.fixes_applied > 0;
  return res;
}

// Dispatch used by the training loop.
inline TransformResult apply_property(const PropertyConfig& cfg,
                                      const Alignment& a,
                                      const std::string& y_text,
                                      const Vocabulary& v, Rng& rng) {
  switch (cfg.kind) {
    case PropertyKind::LowLatency:
      return f_low_latency(a, cfg.k_shifts, rng, v.blank_id());
    case PropertyKind::MinWer:
      return f_mwer(a, y_text, cfg.m_words, v);
    case PropertyKind::None:
      break;
  }
  return {a, false, 0};
}

}  // namespace awp

#endif  // AWP_PROPERTIES_HPP
