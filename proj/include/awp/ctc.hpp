#ifndef AWP_CTC_HPP
#define AWP_CTC_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "awp/logprob.hpp"
#include "awp/vocab.hpp"

namespace awp {

// Raised when the target cannot fit in T frames (T < U + #adjacent-repeats).
// Infeasibility is an explicit error, not a silent infinite loss; training
// code filters bad samples deliberately.
struct InfeasibleTarget : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline int adjacent_repeats(const std::vector<TokenId>& y) {
  int n = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] == y[i - 1]) ++n;
  return n;
}

inline void check_feasible(const LogProbMatrix& m,
                           const std::vector<TokenId>& y, TokenId blank_id) {
  if (y.empty()) throw InfeasibleTarget("ctc: empty target");
  for (TokenId t : y) {
    if (t == blank_id) throw InfeasibleTarget("ctc: blank in target");
    if (t < 0 || t >= m.V) throw InfeasibleTarget("ctc: target id out of range");
  }
  int need = static_cast<int>(y.size()) + adjacent_repeats(y);
  if (need > m.T)
    throw InfeasibleTarget("ctc: target needs " + std::to_string(need) +
                           " frames but T=" + std::to_string(m.T));
}

// Sum of per-frame log-probabilities along one alignment (log of Eq-1
// style path probability).
inline double path_log_prob(const LogProbMatrix& m, const Alignment& a) {
  if (static_cast<int>(a.size()) != m.T)
    throw std::invalid_argument("path_log_prob: alignment length != T");
  double acc = 0.0;
  for (int t = 0; t < m.T; ++t) {
    TokenId k = a[static_cast<std::size_t>(t)];
    if (k < 0 || k >= m.V)
      throw std::invalid_argument("path_log_prob: token id out of range");
    acc += m.at(t, k);
  }
  return acc;
}

// Forward-backward tables over the extended target (blanks interleaved
// around y, S = 2U+1). alpha/beta both include the emission at their frame.
struct CtcLattice {
  std::vector<TokenId> extended;  // length S
  int T = 0;
  int S = 0;
  std::vector<double> alpha;  // T x S, log domain
  std::vector<double> beta;   // T x S, log domain
  double log_like = kNegInf;  // log P(y|x)

  double& a(int t, int s) {
    return alpha[static_cast<std::size_t>(t * S + s)];
  }
  double a(int t, int s) const {
    return alpha[static_cast<std::size_t>(t * S + s)];
  }
  double& b(int t, int s) { return beta[static_cast<std::size_t>(t * S + s)]; }
  double b(int t, int s) const {
    return beta[static_cast<std::size_t>(t * S + s)];
  }
};

inline std::vector<TokenId> extend_target(const std::vector<TokenId>& y,
                                          TokenId blank_id) {
  std::vector<TokenId> ext;
  ext.reserve(2 * y.size() + 1);
  ext.push_back(blank_id);
  for (TokenId t : y) {
    ext.push_back(t);
    ext.push_back(blank_id);
  }
  return ext;
}

// Whether state s can be entered from s-2 (skip transition): only into a
// label state whose label differs from the label two states back.
inline bool allows_skip(const std::vector<TokenId>& ext, TokenId blank_id,
                        int s) {
  return s >= 2 && ext[static_cast<std::size_t>(s)] != blank_id &&
         ext[static_cast<std::size_t>(s)] != ext[static_cast<std::size_t>(s - 2)];
}

inline CtcLattice ctc_lattice(const LogProbMatrix& m,
                              const std::vector<TokenId>& y,
                              TokenId blank_id) {
  check_feasible(m, y, blank_id);
  CtcLattice lat;
  lat.extended = extend_target(y, blank_id);
  lat.T = m.T;
  lat.S = static_cast<int>(lat.extended.size());
  const int T = lat.T, S = lat.S;
  lat.alpha.assign(static_cast<std::size_t>(T * S), kNegInf);
  lat.beta.assign(static_cast<std::size_t>(T * S), kNegInf);
  auto lp = [&](int t, int s) {
    return m.at(t, lat.extended[static_cast<std::size_t>(s)]);
  };

  lat.a(0, 0) = lp(0, 0);
  if (S > 1) lat.a(0, 1) = lp(0, 1);
  for (int t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double acc = lat.a(t - 1, s);
      if (s >= 1) acc = log_add(acc, lat.a(t - 1, s - 1));
      if (allows_skip(lat.extended, blank_id, s))
        acc = log_add(acc, lat.a(t - 1, s - 2));
      lat.a(t, s) = acc == kNegInf ? kNegInf : acc + lp(t, s);
    }
  }

  lat.b(T - 1, S - 1) = lp(T - 1, S - 1);
  if (S > 1) lat.b(T - 1, S - 2) = lp(T - 1, S - 2);
  for (int t = T - 2; t >= 0; --t) {
    for (int s = S - 1; s >= 0; --s) {
      double acc = lat.b(t + 1, s);
      if (s + 1 < S) acc = log_add(acc, lat.b(t + 1, s + 1));
      if (s + 2 < S && allows_skip(lat.extended, blank_id, s + 2))
        acc = log_add(acc, lat.b(t + 1, s + 2));
      lat.b(t, s) = acc == kNegInf ? kNegInf : acc + lp(t, s);
    }
  }

  double ll = lat.a(T - 1, S - 1);
  if (S > 1) ll = log_add(ll, lat.a(T - 1, S - 2));
  lat.log_like = ll;
  return lat;
}

// Negative log-likelihood -log P(y|x) via the forward recursion.
inline double ctc_loss(const LogProbMatrix& m, const std::vector<TokenId>& y,
                       TokenId blank_id) {
  CtcLattice lat = ctc_lattice(m, y, blank_id);
  if (lat.log_like == kNegInf)
    throw InfeasibleTarget("ctc: zero-probability target");
  return -lat.log_like;
}

// Gradient of the CTC loss w.r.t. the log-probability entries, from the
// alpha-beta occupancy: dL/dlogp[t][k] = -(1/P) sum_{s: ext[s]=k}
// alpha[t][s]*beta[t][s]/p[t][k].
inline std::vector<double> ctc_grad_logp(const LogProbMatrix& m,
                                         const std::vector<TokenId>& y,
                                         TokenId blank_id) {
  CtcLattice lat = ctc_lattice(m, y, blank_id);
  if (lat.log_like == kNegInf)
    throw InfeasibleTarget("ctc: zero-probability target");
  std::vector<double> grad(
      static_cast<std::size_t>(m.T) * static_cast<std::size_t>(m.V), 0.0);
  for (int t = 0; t < m.T; ++t) {
    // accumulate occupancy per token in log space
    std::vector<double> occ(static_cast<std::size_t>(m.V), kNegInf);
    for (int s = 0; s < lat.S; ++s) {
      TokenId k = lat.extended[static_cast<std::size_t>(s)];
      double v = lat.a(t, s) + lat.b(t, s) - m.at(t, k);
      occ[static_cast<std::size_t>(k)] =
          log_add(occ[static_cast<std::size_t>(k)], v);
    }
    for (int k = 0; k < m.V; ++k) {
      double o = occ[static_cast<std::size_t>(k)];
      if (o != kNegInf)
        grad[static_cast<std::size_t>(t * m.V + k)] =
            -std::exp(o - lat.log_like);
    }
  }
  return grad;
}

// Convert a gradient w.r.t. log-probabilities into a gradient w.r.t. the
// pre-softmax logits via the softmax chain rule:
//   g_logit[t][k] = g_logp[t][k] - p[t][k] * sum_j g_logp[t][j].
inline std::vector<double> grad_logits_from_logp(
    const LogProbMatrix& m, const std::vector<double>& grad_logp) {
  std::vector<double> out(grad_logp.size(), 0.0);
  for (int t = 0; t < m.T; ++t) {
    double row_sum = 0.0;
    for (int k = 0; k < m.V; ++k)
      row_sum += grad_logp[static_cast<std::size_t>(t * m.V + k)];
    for (int k = 0; k < m.V; ++k) {
      out[static_cast<std::size_t>(t * m.V + k)] =
          grad_logp[static_cast<std::size_t>(t * m.V + k)] -
          std::exp(m.at(t, k)) * row_sum;
    }
  }
  return out;
}

// Maximum-probability member of B^-1(y) (Viterbi over the lattice).
// Tie-break: among equal scores prefer the transition that enters the
// state at the current frame, larger jumps first (s-2 over s-1 over s),
// and the final-blank terminal state on a terminal tie. Non-blank
// emissions therefore happen as late as the score allows, which keeps
// drift measurements deterministic.
inline Alignment forced_align(const LogProbMatrix& m,
                              const std::vector<TokenId>& y,
                              TokenId blank_id) {
  check_feasible(m, y, blank_id);
  std::vector<TokenId> ext = extend_target(y, blank_id);
  const int T = m.T, S = static_cast<int>(ext.size());
  std::vector<double> score(static_cast<std::size_t>(T * S), kNegInf);
  std::vector<int> back(static_cast<std::size_t>(T * S), -1);
  auto sc = [&](int t, int s) -> double& {
    return score[static_cast<std::size_t>(t * S + s)];
  };
  auto bp = [&](int t, int s) -> int& {
    return back[static_cast<std::size_t>(t * S + s)];
  };
  auto lp = [&](int t, int s) {
    return m.at(t, ext[static_cast<std::size_t>(s)]);
  };

  sc(0, 0) = lp(0, 0);
  if (S > 1) sc(0, 1) = lp(0, 1);
  for (int t = 1; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      double best = kNegInf;
      int from = -1;
      // candidate order encodes the tie-break preference
      if (allows_skip(ext, blank_id, s) && sc(t - 1, s - 2) > best) {
        best = sc(t - 1, s - 2);
        from = s - 2;
      }
      if (s >= 1 && sc(t - 1, s - 1) > best) {
        best = sc(t - 1, s - 1);
        from = s - 1;
      }
      if (sc(t - 1, s) > best) {
        best = sc(t - 1, s);
        from = s;
      }
      if (from >= 0) {
        sc(t, s) = best + lp(t, s);
        bp(t, s) = from;
      }
    }
  }

  int end = S - 1;
  if (S > 1 && sc(T - 1, S - 2) > sc(T - 1, S - 1)) end = S - 2;
  if (sc(T - 1, end) == kNegInf)
    throw InfeasibleTarget("forced_align: zero-probability target");

  Alignment a(static_cast<std::size_t>(T));
  int s = end;
  for (int t = T - 1; t >= 0; --t) {
    a[static_cast<std::size_t>(t)] = ext[static_cast<std::size_t>(s)];
    if (t > 0) s = bp(t, s);
  }
  return a;
}

// Viterbi score of the forced alignment (max over B^-1(y)).
inline double forced_align_score(const LogProbMatrix& m,
                                 const std::vector<TokenId>& y,
                                 TokenId blank_id) {
  return path_log_prob(m, forced_align(m, y, blank_id));
}

// Exact P(y|x) by enumerating all |V'|^T alignments. Exponential time;
// guarded to tiny instances. Test oracle for the forward recursion.
inline double brute_force_seq_prob(const LogProbMatrix& m,
                                   const std::vector<TokenId>& y,
                                   TokenId blank_id) {
  if (m.T > 10 || m.V > 5)
    throw std::invalid_argument(
        "brute_force_seq_prob: instance too large (T<=10, |V'|<=5)");
  double total = 0.0;
  Alignment a(static_cast<std::size_t>(m.T), 0);
  while (true) {
    if (collapse(a, blank_id) == y) total += std::exp(path_log_prob(m, a));
    int i = 0;
    for (; i < m.T; ++i) {
      if (++a[static_cast<std::size_t>(i)] < m.V) break;
      a[static_cast<std::size_t>(i)] = 0;
    }
    if (i == m.T) break;
  }
  return total;
}

}  // namespace awp

#endif  // AWP_CTC_HPP
