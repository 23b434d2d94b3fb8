#ifndef AWP_LOGPROB_HPP
#define AWP_LOGPROB_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace awp {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) with exact handling of -inf operands.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b);
  double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

inline double log_sum_exp(std::span<const double> xs) {
  double hi = kNegInf;
  for (double x : xs) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

// Normalize a row of logits into log-probabilities in place.
inline void log_softmax_row(std::span<double> row) {
  double z = log_sum_exp(row);
  for (double& x : row) x -= z;
}

// T x |V'| per-frame log-probabilities (log-softmax output), plus the frame
// duration used to convert frame drift to milliseconds.
struct LogProbMatrix {
  int T = 0;
  int V = 0;
  double frame_duration_ms = 10.0;
  std::vector<double> data;  // row-major, T rows of V entries

  LogProbMatrix() = default;
  LogProbMatrix(int t, int v, double frame_ms = 10.0)
      : T(t), V(v), frame_duration_ms(frame_ms),
        data(static_cast<std::size_t>(t) * static_cast<std::size_t>(v),
             kNegInf) {}

  double& at(int t, int k) {
    return data[static_cast<std::size_t>(t) * static_cast<std::size_t>(V) +
                static_cast<std::size_t>(k)];
  }
  double at(int t, int k) const {
    return data[static_cast<std::size_t>(t) * static_cast<std::size_t>(V) +
                static_cast<std::size_t>(k)];
  }
  std::span<const double> row(int t) const {
    return {data.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(V),
            static_cast<std::size_t>(V)};
  }
  std::span<double> row(int t) {
    return {data.data() + static_cast<std::size_t>(t) * static_cast<std::size_t>(V),
            static_cast<std::size_t>(V)};
  }

  // Each row must log-sum-exp to 0 (valid log-softmax output).
  void validate(double tol = 1e-6) const {
    if (T < 1 || V < 1) throw std::invalid_argument("LogProbMatrix: empty");
    for (int t = 0; t < T; ++t) {
      double z = log_sum_exp(row(t));
      if (std::abs(z) > tol)
        throw std::invalid_argument(
            "LogProbMatrix: row " + std::to_string(t) +
            " is not normalized (logsumexp=" + std::to_string(z) + ")");
    }
  }

  // Binary form: header {T, V, frame_duration_ms}, then row-major doubles.
  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("LogProbMatrix: cannot write " + path);
    std::int64_t t64 = T, v64 = V;
    f.write(reinterpret_cast<const char*>(&t64), sizeof(t64));
    f.write(reinterpret_cast<const char*>(&v64), sizeof(v64));
    f.write(reinterpret_cast<const char*>(&frame_duration_ms),
            sizeof(frame_duration_ms));
    f.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
  }

  static LogProbMatrix load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("LogProbMatrix: cannot read " + path);
    std::int64_t t64 = 0, v64 = 0;
    double ms = 0.0;
    f.read(reinterpret_cast<char*>(&t64), sizeof(t64));
    f.read(reinterpret_cast<char*>(&v64), sizeof(v64));
    f.read(reinterpret_cast<char*>(&ms), sizeof(ms));
    LogProbMatrix m(static_cast<int>(t64), static_cast<int>(v64), ms);
    f.read(reinterpret_cast<char*>(m.data.data()),
           static_cast<std::streamsize>(m.data.size() * sizeof(double)));
    if (!f) throw std::runtime_error("LogProbMatrix: truncated file " + path);
    return m;
  }

  nlohmann::json to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (int t = 0; t < T; ++t) {
      nlohmann::json r = nlohmann::json::array();
      for (int k = 0; k < V; ++k) r.push_back(at(t, k));
      rows.push_back(std::move(r));
    }
    return {{"T", T},
            {"V", V},
            {"frame_duration_ms", frame_duration_ms},
            {"log_probs", std::move(rows)}};
  }
};

// Uniform distribution over V tokens at every frame; handy in tests.
inline LogProbMatrix uniform_log_probs(int T, int V, double frame_ms = 10.0) {
  LogProbMatrix m(T, V, frame_ms);
  double lp = -std::log(static_cast<double>(V));
  std::fill(m.data.begin(), m.data.end(), lp);
  return m;
}

}  // namespace awp

#endif  // AWP_LOGPROB_HPP
