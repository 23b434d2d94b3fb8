#include <cmath>

#include <catch_amalgamated.hpp>

#include "awp/ctc.hpp"
#include "oracles.hpp"

using namespace awp;
using namespace awp::test;

namespace {
constexpr TokenId kBlank = 0;  // convention for these fixtures: blank = id 0
}

TEST_CASE("path_log_prob equals the exp-space product") {
  SECTION("uniform two-frame case") {
    LogProbMatrix m = uniform_log_probs(2, 2);
    CHECK(path_log_prob(m, {1, 0}) == Catch::Approx(std::log(0.25)));
  }

  SECTION("random instances against the direct product") {
    Rng rng(101);
    for (int it = 0; it < 100; ++it) {
      int T = 2 + static_cast<int>(rng.next_below(6));
      int V = 2 + static_cast<int>(rng.next_below(3));
      LogProbMatrix m = random_log_probs(T, V, rng);
      Alignment a(static_cast<std::size_t>(T));
      for (auto& t : a) t = static_cast<TokenId>(rng.next_below(
          static_cast<std::uint64_t>(V)));
      double prod = 1.0;
      for (int t = 0; t < T; ++t) prod *= std::exp(m.at(t, a[static_cast<std::size_t>(t)]));
      CHECK(path_log_prob(m, a) ==
            Catch::Approx(std::log(prod)).epsilon(1e-12));
    }
  }

  SECTION("argmax alignment maximizes the path probability") {
    Rng rng(102);
    LogProbMatrix m = random_log_probs(4, 3, rng);
    Alignment best(4);
    for (int t = 0; t < 4; ++t) {
      auto row = m.row(t);
      best[static_cast<std::size_t>(t)] = static_cast<TokenId>(
          std::max_element(row.begin(), row.end()) - row.begin());
    }
    double best_lp = path_log_prob(m, best);
    for_each_alignment(4, 3, [&](const Alignment& a) {
      CHECK(path_log_prob(m, a) <= best_lp + 1e-12);
    });
  }

  SECTION("length mismatch is an error") {
    LogProbMatrix m = uniform_log_probs(3, 2);
    CHECK_THROWS_AS(path_log_prob(m, {0, 1}), std::invalid_argument);
  }
}

TEST_CASE("ctc_loss closed-form two-frame case") {
  // V' = {blank, a}, all probabilities 0.5, y = "a":
  // valid alignments {aa, a-, -a}, P = 0.75
  LogProbMatrix m = uniform_log_probs(2, 2);
  CHECK(ctc_loss(m, {1}, kBlank) == Catch::Approx(-std::log(0.75)).epsilon(1e-12));
  CHECK(ctc_loss(m, {1}, kBlank) == Catch::Approx(0.2876820724).epsilon(1e-8));
}

TEST_CASE("infeasible targets raise an explicit error") {
  LogProbMatrix m = uniform_log_probs(2, 3);
  CHECK_THROWS_AS(ctc_loss(m, {1, 2, 1}, kBlank), InfeasibleTarget);
  CHECK_THROWS_AS(ctc_loss(m, {1, 1}, kBlank), InfeasibleTarget);  // repeat needs 3
  CHECK_THROWS_AS(ctc_loss(m, {}, kBlank), InfeasibleTarget);
  CHECK_THROWS_AS(ctc_loss(m, {0}, kBlank), InfeasibleTarget);  // blank in y
  CHECK_NOTHROW(ctc_loss(m, {1, 2}, kBlank));
}

TEST_CASE("ctc_loss matches exhaustive enumeration") {
  Rng rng(103);
  for (int it = 0; it < 200; ++it) {
    int T = 2 + static_cast<int>(rng.next_below(7));   // up to 8
    int V = 2 + static_cast<int>(rng.next_below(3));   // up to 4
    int U = 1 + static_cast<int>(rng.next_below(3));   // up to 3
    LogProbMatrix m = random_log_probs(T, V, rng);
    std::vector<TokenId> y;
    for (int i = 0; i < U; ++i)
      y.push_back(1 + static_cast<TokenId>(rng.next_below(
              static_cast<std::uint64_t>(V - 1))));
    if (static_cast<int>(y.size()) + adjacent_repeats(y) > T) continue;
    double brute = brute_force_seq_prob(m, y, kBlank);
    CHECK(ctc_loss(m, y, kBlank) ==
          Catch::Approx(-std::log(brute)).margin(1e-9));
  }
}

TEST_CASE("sequence probabilities are a distribution over label sequences") {
  Rng rng(104);
  for (int it = 0; it < 5; ++it) {
    int T = 2 + static_cast<int>(rng.next_below(3));  // up to 4
    int V = 2 + static_cast<int>(rng.next_below(2));  // up to 3
    LogProbMatrix m = random_log_probs(T, V, rng);
    // enumerate all label sequences reachable at length <= T, incl. empty
    double total = 0.0;
    std::vector<std::vector<TokenId>> labels = {{}};
    for (int len = 1; len <= T; ++len) {
      std::vector<std::vector<TokenId>> next;
      for (auto& base : labels)
        if (static_cast<int>(base.size()) == len - 1)
          for (TokenId k = 1; k < V; ++k) {
            auto y = base;
            y.push_back(k);
            next.push_back(y);
          }
      labels.insert(labels.end(), next.begin(), next.end());
    }
    for (const auto& y : labels) {
      if (y.empty()) {
        // P(empty) = product of blank probabilities
        double p = 1.0;
        for (int t = 0; t < T; ++t) p *= std::exp(m.at(t, kBlank));
        total += p;
      } else if (static_cast<int>(y.size()) + adjacent_repeats(y) <= T) {
        total += brute_force_seq_prob(m, y, kBlank);
      }
    }
    CHECK(total == Catch::Approx(1.0).epsilon(1e-9));
    // and exp(-loss) is a probability
    double p1 = std::exp(-ctc_loss(m, {1}, kBlank));
    CHECK(p1 > 0.0);
    CHECK(p1 <= 1.0);
  }
}

TEST_CASE("alpha/beta agree on the log-likelihood at every frame") {
  Rng rng(105);
  for (int it = 0; it < 50; ++it) {
    int T = 3 + static_cast<int>(rng.next_below(6));
    int V = 2 + static_cast<int>(rng.next_below(3));
    LogProbMatrix m = random_log_probs(T, V, rng);
    std::vector<TokenId> y = {1, static_cast<TokenId>(1 + rng.next_below(
                                     static_cast<std::uint64_t>(V - 1)))};
    if (static_cast<int>(y.size()) + adjacent_repeats(y) > T) continue;
    CtcLattice lat = ctc_lattice(m, y, kBlank);
    for (int t = 0; t < lat.T; ++t) {
      double acc = kNegInf;
      for (int s = 0; s < lat.S; ++s) {
        TokenId k = lat.extended[static_cast<std::size_t>(s)];
        acc = log_add(acc, lat.a(t, s) + lat.b(t, s) - m.at(t, k));
      }
      CHECK(acc == Catch::Approx(lat.log_like).margin(1e-8));
    }
    // forward and backward terminations agree
    double beta_ll = lat.b(0, 0);
    if (lat.S > 1) beta_ll = log_add(beta_ll, lat.b(0, 1));
    CHECK(beta_ll == Catch::Approx(lat.log_like).margin(1e-9));
  }
}

TEST_CASE("ctc_grad matches finite differences on the logits") {
  Rng rng(106);
  int checked = 0;
  while (checked < 20) {
    int T = 3 + static_cast<int>(rng.next_below(4));  // up to 6
    int V = 2 + static_cast<int>(rng.next_below(3));  // up to 4
    std::vector<double> logits(static_cast<std::size_t>(T * V));
    for (auto& x : logits) x = rng.next_gaussian();
    std::vector<TokenId> y = {1};
    if (V > 2 && rng.next_below(2)) y.push_back(2);
    if (static_cast<int>(y.size()) + adjacent_repeats(y) > T) continue;

    LogProbMatrix m = logp_from_logits(logits, T, V);
    auto g_logp = ctc_grad_logp(m, y, kBlank);
    auto g_analytic = grad_logits_from_logp(m, g_logp);
    auto g_fd = fd_grad_logits(
        [&](const LogProbMatrix& mm) { return ctc_loss(mm, y, kBlank); },
        logits, T, V, 1e-5);
    CHECK(max_rel_err(g_analytic, g_fd, 1e-4) < 1e-5);
    ++checked;
  }
}

TEST_CASE("logit gradient rows sum to zero") {
  Rng rng(107);
  LogProbMatrix m = random_log_probs(6, 4, rng);
  std::vector<TokenId> y = {1, 2};
  auto g = grad_logits_from_logp(m, ctc_grad_logp(m, y, kBlank));
  for (int t = 0; t < m.T; ++t) {
    double s = 0.0;
    for (int k = 0; k < m.V; ++k) s += g[static_cast<std::size_t>(t * m.V + k)];
    CHECK(s == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("shifting mass toward the needed token decreases the loss") {
  Rng rng(108);
  LogProbMatrix m = random_log_probs(4, 3, rng);
  std::vector<TokenId> y = {1};
  double before = ctc_loss(m, y, kBlank);
  LogProbMatrix boosted = m;
  for (int t = 0; t < m.T; ++t) {
    auto row = boosted.row(t);
    row[1] += std::log(2.0);
    log_softmax_row(row);
  }
  CHECK(ctc_loss(boosted, y, kBlank) < before);
}

TEST_CASE("forced_align picks the Viterbi path") {
  SECTION("strong evidence at frame 1 only") {
    // T=3, V'={blank,a}; frame 1 strongly favors a, frames 0/2 favor blank
    LogProbMatrix m(3, 2);
    auto set_row = [&](int t, double p_blank) {
      m.at(t, 0) = std::log(p_blank);
      m.at(t, 1) = std::log(1.0 - p_blank);
    };
    set_row(0, 0.9);
    set_row(1, 0.05);
    set_row(2, 0.9);
    CHECK(forced_align(m, {1}, kBlank) == Alignment{0, 1, 0});
  }

  SECTION("result collapses to the target") {
    Rng rng(109);
    for (int it = 0; it < 100; ++it) {
      int T = 3 + static_cast<int>(rng.next_below(5));
      int V = 2 + static_cast<int>(rng.next_below(3));
      LogProbMatrix m = random_log_probs(T, V, rng);
      std::vector<TokenId> y = {1};
      if (V > 2) y.push_back(2);
      Alignment a = forced_align(m, y, kBlank);
      CHECK(collapse(a, kBlank) == y);
    }
  }

  SECTION("Viterbi score equals the max over enumerated members of B^-1(y)") {
    Rng rng(110);
    for (int it = 0; it < 30; ++it) {
      int T = 3 + static_cast<int>(rng.next_below(3));
      int V = 2 + static_cast<int>(rng.next_below(2));
      LogProbMatrix m = random_log_probs(T, V, rng);
      std::vector<TokenId> y = {1};
      double best = kNegInf;
      for_each_alignment(T, V, [&](const Alignment& a) {
        if (collapse(a, kBlank) == y)
          best = std::max(best, path_log_prob(m, a));
      });
      CHECK(forced_align_score(m, y, kBlank) ==
            Catch::Approx(best).margin(1e-10));
      // max over members <= sum over members
      CHECK(forced_align_score(m, y, kBlank) <= -ctc_loss(m, y, kBlank) + 1e-12);
    }
  }
}

TEST_CASE("brute force oracle is guarded against large instances") {
  LogProbMatrix m = uniform_log_probs(11, 2);
  CHECK_THROWS_AS(brute_force_seq_prob(m, {1}, kBlank), std::invalid_argument);
}

TEST_CASE("batched losses are independent of evaluation order") {
  Rng rng(111);
  std::vector<LogProbMatrix> batch;
  std::vector<std::vector<TokenId>> targets;
  for (int i = 0; i < 8; ++i) {
    batch.push_back(random_log_probs(6, 3, rng));
    targets.push_back({1, 2});
  }
  std::vector<double> forward_order, reverse_order(8);
  for (int i = 0; i < 8; ++i)
    forward_order.push_back(ctc_loss(batch[static_cast<std::size_t>(i)],
                                     targets[static_cast<std::size_t>(i)],
                                     kBlank));
  for (int i = 7; i >= 0; --i)
    reverse_order[static_cast<std::size_t>(i)] =
        ctc_loss(batch[static_cast<std::size_t>(i)],
                 targets[static_cast<std::size_t>(i)], kBlank);
  CHECK(forward_order == reverse_order);  // bitwise equality
}

TEST_CASE("log prob matrix binary round trip") {
  Rng rng(112);
  LogProbMatrix m = random_log_probs(5, 4, rng, 16.0);
  std::string path = "logprob_roundtrip.bin";
  m.save(path);
  LogProbMatrix r = LogProbMatrix::load(path);
  CHECK(r.T == m.T);
  CHECK(r.V == m.V);
  CHECK(r.frame_duration_ms == m.frame_duration_ms);
  CHECK(r.data == m.data);  // bit-exact
  std::remove(path.c_str());
  CHECK_NOTHROW(r.validate());
}
