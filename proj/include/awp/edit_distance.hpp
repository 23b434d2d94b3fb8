#ifndef AWP_EDIT_DISTANCE_HPP
#define AWP_EDIT_DISTANCE_HPP

#include <algorithm>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace awp {

enum class EditOp { Match, Substitute, Insert, Delete };

// One step of an edit script. ref_pos / hyp_pos index the consumed element
// (-1 when the op does not consume from that side).
struct EditStep {
  EditOp op;
  int ref_pos;
  int hyp_pos;
};

struct EditResult {
  int cost;
  std::vector<EditStep> script;
};

// Unit-cost Levenshtein distance with a witnessing script. The backtrace
// tie-break order is fixed: Match > Substitute > Delete > Insert, so the
// script is deterministic (downstream word selection relies on this).
template <class T>
EditResult edit_distance(const std::vector<T>& ref, const std::vector<T>& hyp) {
  const int n = static_cast<int>(ref.size());
  const int m = static_cast<int>(hyp.size());
  std::vector<int> dp(static_cast<std::size_t>((n + 1) * (m + 1)));
  auto at = [&](int i, int j) -> int& {
    return dp[static_cast<std::size_t>(i * (m + 1) + j)];
  };
  for (int i = 0; i <= n; ++i) at(i, 0) = i;
  for (int j = 0; j <= m; ++j) at(0, j) = j;
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= m; ++j) {
      int sub = at(i - 1, j - 1) +
                (ref[static_cast<std::size_t>(i - 1)] ==
                         hyp[static_cast<std::size_t>(j - 1)]
                     ? 0
                     : 1);
      int del = at(i - 1, j) + 1;
      int ins = at(i, j - 1) + 1;
      at(i, j) = std::min({sub, del, ins});
    }
  }

  EditResult res;
  res.cost = at(n, m);
  int i = n, j = m;
  std::vector<EditStep> rev;
  while (i > 0 || j > 0) {
    bool eq = i > 0 && j > 0 &&
              ref[static_cast<std::size_t>(i - 1)] ==
                  hyp[static_cast<std::size_t>(j - 1)];
    if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (eq ? 0 : 1)) {
      rev.push_back({eq ? EditOp::Match : EditOp::Substitute, i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      rev.push_back({EditOp::Delete, i - 1, -1});
      --i;
    } else {
      rev.push_back({EditOp::Insert, -1, j - 1});
      --j;
    }
  }
  res.script.assign(rev.rbegin(), rev.rend());
  return res;
}

// Tokenize on the space character; runs of spaces count as one separator
// (collapsed CTC output can emit repeated spaces split by blanks).
inline std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (c == ' ') {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

inline std::vector<char> chars_of(const std::string& s) {
  return std::vector<char>(s.begin(), s.end());
}

// Word error rate: word-level edit distance over reference word count.
// Undefined for an empty reference. An empty hypothesis against a
// non-empty reference counts all words as deletions.
inline double wer(const std::string& ref_text, const std::string& hyp_text) {
  auto ref = split_words(ref_text);
  if (ref.empty())
    throw std::invalid_argument("wer: empty reference, metric undefined");
  auto hyp = split_words(hyp_text);
  return static_cast<double>(edit_distance(ref, hyp).cost) /
         static_cast<double>(ref.size());
}

// Character error rate; spaces count as characters.
inline double cer(const std::string& ref_text, const std::string& hyp_text) {
  if (ref_text.empty())
    throw std::invalid_argument("cer: empty reference, metric undefined");
  return static_cast<double>(
             edit_distance(chars_of(ref_text), chars_of(hyp_text)).cost) /
         static_cast<double>(ref_text.size());
}

inline int word_errors(const std::string& ref_text,
                       const std::string& hyp_text) {
  return edit_distance(split_words(ref_text), split_words(hyp_text)).cost;
}

}  // namespace awp

#endif  // AWP_EDIT_DISTANCE_HPP
