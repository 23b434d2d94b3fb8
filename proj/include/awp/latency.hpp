#ifndef AWP_LATENCY_HPP
#define AWP_LATENCY_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "awp/ctc.hpp"
#include "awp/logprob.hpp"
#include "awp/vocab.hpp"

namespace awp {

// Drift-latency report. TL = DCL + DL; DL may be negative (the online
// model emitting earlier than the reference).
struct LatencyReport {
  double dl_frames = 0.0;
  double dl_ms = 0.0;
  double dcl_ms = 0.0;
  double tl_ms = 0.0;
  std::vector<double> per_token_drift;  // frames, one per target occurrence
};

// First frame of each target-token occurrence in an alignment that
// collapses to the target (one collapsed span per occurrence).
inline std::vector<int> first_emission_frames(const Alignment& a,
                                              TokenId blank_id) {
  auto spans = collapse_with_spans(a, blank_id);
  std::vector<int> out;
  out.reserve(spans.size());
  for (const CollapsedSpan& s : spans) out.push_back(s.begin);
  return out;
}

namespace detail {

inline LatencyReport drift_report(const std::vector<int>& online_first,
                                  const std::vector<int>& ref_first,
                                  double frame_ms, double dcl_ms) {
  if (online_first.size() != ref_first.size())
    throw std::invalid_argument("measure_drift: occurrence count mismatch");
  LatencyReport r;
  r.dcl_ms = dcl_ms;
  for (std::size_t i = 0; i < online_first.size(); ++i)
    r.per_token_drift.push_back(
        static_cast<double>(online_first[i] - ref_first[i]));
  if (!r.per_token_drift.empty()) {
    double sum = 0.0;
    for (double d : r.per_token_drift) sum += d;
    r.dl_frames = sum / static_cast<double>(r.per_token_drift.size());
  }
  r.dl_ms = r.dl_frames * frame_ms;
  r.tl_ms = r.dcl_ms + r.dl_ms;
  return r;
}

}  // namespace detail

// Force-align both models against the same target and average, over all
// token occurrences, the difference of first-appearance frame indices
// (online minus reference).
inline LatencyReport measure_drift(const LogProbMatrix& m_ref,
                                   const LogProbMatrix& m_online,
                                   const std::vector<TokenId>& y,
                                   TokenId blank_id, double dcl_ms = 0.0) {
  if (m_ref.frame_duration_ms != m_online.frame_duration_ms)
    throw std::invalid_argument("measure_drift: frame duration mismatch");
  auto ref_first =
      first_emission_frames(forced_align(m_ref, y, blank_id), blank_id);
  auto online_first =
      first_emission_frames(forced_align(m_online, y, blank_id), blank_id);
  return detail::drift_report(online_first, ref_first, m_ref.frame_duration_ms,
                              dcl_ms);
}

// Drift of forced-alignment first frames against the ground-truth emission
// times of a synthetic utterance (possible because the benchmark knows the
// true times).
inline LatencyReport measure_drift_vs_truth(const LogProbMatrix& m,
                                            const std::vector<TokenId>& y,
                                            const std::vector<int>& gt_emission,
                                            TokenId blank_id,
                                            double dcl_ms = 0.0) {
  auto online_first =
      first_emission_frames(forced_align(m, y, blank_id), blank_id);
  return detail::drift_report(online_first, gt_emission, m.frame_duration_ms,
                              dcl_ms);
}

}  // namespace awp

#endif  // AWP_LATENCY_HPP
