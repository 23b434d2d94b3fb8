#ifndef AWP_VOCAB_HPP
#define AWP_VOCAB_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace awp {

using TokenId = int;

// A length-T frame labeling over V' (vocabulary plus blank).
using Alignment = std::vector<TokenId>;

// Token inventory V plus the blank token forming V'. Ids are dense
// 0..size()-1 in the order the symbols were given.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens, const std::string& blank_symbol,
             std::optional<std::string> space_symbol = std::nullopt)
      : tokens_(std::move(tokens)) {
    blank_id_ = -1;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second)
        throw std::invalid_argument("Vocabulary: duplicate symbol '" +
                                    tokens_[i] + "'");
      if (tokens_[i] == blank_symbol) blank_id_ = static_cast<TokenId>(i);
    }
    if (blank_id_ < 0)
      throw std::invalid_argument("Vocabulary: blank symbol not in tokens");
    if (space_symbol) {
      auto it = index_.find(*space_symbol);
      if (it == index_.end())
        throw std::invalid_argument("Vocabulary: space symbol not in tokens");
      space_id_ = it->second;
    }
  }

  int size() const { return static_cast<int>(tokens_.size()); }
  TokenId blank_id() const { return blank_id_; }
  std::optional<TokenId> space_id() const { return space_id_; }

  const std::string& symbol(TokenId id) const {
    if (id < 0 || id >= size())
      throw std::out_of_range("Vocabulary: bad token id");
    return tokens_[static_cast<std::size_t>(id)];
  }

  TokenId id(const std::string& symbol) const {
    auto it = index_.find(symbol);
    if (it == index_.end())
      throw std::invalid_argument("Vocabulary: unknown symbol '" + symbol +
                                  "'");
    return it->second;
  }

  bool valid_id(TokenId id) const { return id >= 0 && id < size(); }

  // Encode text made of single-byte graphemes (the synthetic corpora use
  // ASCII letters plus space). Blank never appears in text.
  std::vector<TokenId> encode(const std::string& text) const {
    std::vector<TokenId> out;
    out.reserve(text.size());
    for (char c : text) out.push_back(id(std::string(1, c)));
    return out;
  }

  std::string decode(const std::vector<TokenId>& ids) const {
    std::string out;
    for (TokenId t : ids) out += symbol(t);
    return out;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tokens"] = tokens_;
    j["blank"] = tokens_[static_cast<std::size_t>(blank_id_)];
    if (space_id_) j["space"] = tokens_[static_cast<std::size_t>(*space_id_)];
    return j;
  }

  static Vocabulary from_json(const nlohmann::json& j) {
    std::optional<std::string> space;
    if (j.contains("space")) space = j.at("space").get<std::string>();
    return Vocabulary(j.at("tokens").get<std::vector<std::string>>(),
                      j.at("blank").get<std::string>(), space);
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId blank_id_;
  std::optional<TokenId> space_id_;
};

// One collapsed token occurrence and the frame run it came from
// ([begin, end) frames of identical non-blank labels).
struct CollapsedSpan {
  TokenId id;
  int begin;
  int end;
};

// The collapse operator: merge consecutive duplicates, then drop blanks.
inline std::vector<TokenId> collapse(const Alignment& a, TokenId blank_id) {
  std::vector<TokenId> out;
  TokenId prev = blank_id;
  bool first = true;
  for (TokenId t : a) {
    if (t != blank_id && (first || t != prev)) out.push_back(t);
    prev = t;
    first = false;
  }
  return out;
}

// Collapse while keeping, per output token, the maximal frame run that
// produced it. Blank (or a different token) ends a run.
inline std::vector<CollapsedSpan> collapse_with_spans(const Alignment& a,
                                                      TokenId blank_id) {
  std::vector<CollapsedSpan> out;
  int T = static_cast<int>(a.size());
  int t = 0;
  while (t < T) {
    if (a[static_cast<std::size_t>(t)] == blank_id) {
      ++t;
      continue;
    }
    int begin = t;
    TokenId tok = a[static_cast<std::size_t>(t)];
    while (t < T && a[static_cast<std::size_t>(t)] == tok) ++t;
    out.push_back({tok, begin, t});
  }
  return out;
}

inline std::string collapse_to_text(const Alignment& a, const Vocabulary& v) {
  return v.decode(collapse(a, v.blank_id()));
}

}  // namespace awp

#endif  // AWP_VOCAB_HPP
