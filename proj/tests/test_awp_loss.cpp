#include <cmath>

#include <catch_amalgamated.hpp>

#include "awp/awp_loss.hpp"
#include "oracles.hpp"

using namespace awp;
using namespace awp::test;

namespace {
constexpr TokenId kBlank = 0;

// a matrix whose single frame-0 row gives the pair the requested
// probabilities: P(a) via token 1, P(abar) via token 2
LogProbMatrix pair_matrix(double p_a, double p_abar) {
  LogProbMatrix m(1, 3);
  m.at(0, 0) = std::log(1.0 - p_a - p_abar);
  m.at(0, 1) = std::log(p_a);
  m.at(0, 2) = std::log(p_abar);
  return m;
}

}  // namespace

TEST_CASE("hinge arithmetic on single pairs") {
  SECTION("margin satisfied: term clamps to zero") {
    LogProbMatrix m = pair_matrix(0.2, 0.5);
    std::vector<AlignmentPair> pairs = {{{1}, {2}, true}};
    CHECK(awp_loss(m, pairs, 0.01).loss == 0.0);
    CHECK(awp_loss(m, pairs, 0.01).active == 0);
  }

  SECTION("margin violated: raw difference") {
    LogProbMatrix m = pair_matrix(0.5, 0.2);
    std::vector<AlignmentPair> pairs = {{{1}, {2}, true}};
    CHECK(awp_loss(m, pairs, 0.0).loss == Catch::Approx(0.3).epsilon(1e-12));
    CHECK(awp_loss(m, pairs, 0.0).active == 1);
  }

  SECTION("identical pairs at zero margin give zero loss") {
    LogProbMatrix m = pair_matrix(0.3, 0.3);
    std::vector<AlignmentPair> pairs = {{{1}, {1}, true}, {{2}, {2}, true}};
    CHECK(awp_loss(m, pairs, 0.0).loss == 0.0);
  }
}

TEST_CASE("inapplicable pairs are dropped and N adjusted") {
  LogProbMatrix m = pair_matrix(0.5, 0.2);
  std::vector<AlignmentPair> pairs = {{{1}, {2}, true}, {{1}, {1}, false}};
  AwpLossResult r = awp_loss(m, pairs, 0.0);
  CHECK(r.retained == 1);
  CHECK(r.loss == Catch::Approx(0.3));  // divided by 1, not 2

  std::vector<AlignmentPair> all_dropped = {{{1}, {1}, false}};
  AwpLossResult none = awp_loss(m, all_dropped, 0.0);
  CHECK(none.no_pairs);
  CHECK(none.loss == 0.0);
}

TEST_CASE("loss bounds and margin monotonicity") {
  Rng rng(301);
  for (int it = 0; it < 50; ++it) {
    LogProbMatrix m = random_log_probs(5, 3, rng);
    std::vector<AlignmentPair> pairs;
    for (int i = 0; i < 4; ++i) {
      Alignment a(5), b(5);
      for (auto& t : a) t = static_cast<TokenId>(rng.next_below(3));
      for (auto& t : b) t = static_cast<TokenId>(rng.next_below(3));
      pairs.push_back({a, b, true});
    }
    double l0 = awp_loss(m, pairs, 0.0).loss;
    double l1 = awp_loss(m, pairs, 0.1).loss;
    double l2 = awp_loss(m, pairs, 0.5).loss;
    CHECK(l0 >= 0.0);
    CHECK(l2 <= 1.0 + 0.5 + 1e-12);  // probabilities live in [0,1]
    CHECK(l1 >= l0);
    CHECK(l2 >= l1);
  }
}

TEST_CASE("awp_grad is zero when every hinge is inactive") {
  LogProbMatrix m = pair_matrix(0.1, 0.6);
  std::vector<AlignmentPair> pairs = {{{1}, {2}, true}};
  for (double g : awp_grad(m, pairs, 0.0))
    CHECK(g == 0.0);
}

TEST_CASE("awp_grad matches finite differences away from kinks") {
  Rng rng(302);
  int checked = 0;
  while (checked < 30) {
    int T = 3 + static_cast<int>(rng.next_below(4));  // up to 6
    int V = 3;
    std::vector<double> logits(static_cast<std::size_t>(T * V));
    for (auto& x : logits) x = rng.next_gaussian();
    LogProbMatrix m = logp_from_logits(logits, T, V);

    std::vector<AlignmentPair> pairs;
    for (int i = 0; i < 3; ++i) {
      Alignment a(static_cast<std::size_t>(T)), b(static_cast<std::size_t>(T));
      for (auto& t : a) t = static_cast<TokenId>(rng.next_below(3));
      for (auto& t : b) t = static_cast<TokenId>(rng.next_below(3));
      pairs.push_back({a, b, true});
    }
    const double lambda = 0.05;
    // keep only instances where every hinge is strictly active and away
    // from the kink, so the loss is differentiable there
    bool all_active = true;
    for (const auto& pr : pairs) {
      double margin = std::exp(path_log_prob(m, pr.sampled)) -
                      std::exp(path_log_prob(m, pr.improved)) + lambda;
      if (margin < 1e-3) all_active = false;
    }
    if (!all_active) continue;

    auto g_logp = awp_grad(m, pairs, lambda);
    auto g_analytic = grad_logits_from_logp(m, g_logp);
    auto g_fd = fd_grad_logits(
        [&](const LogProbMatrix& mm) {
          return awp_loss(mm, pairs, lambda).loss;
        },
        logits, T, V, 1e-6);
    CHECK(max_rel_err(g_analytic, g_fd, 1e-6) < 1e-4);
    ++checked;
  }
}

TEST_CASE("one gradient step widens P(improved) - P(sampled)") {
  Rng rng(303);
  for (int it = 0; it < 20; ++it) {
    int T = 5;
    std::vector<double> logits(static_cast<std::size_t>(T * 3));
    for (auto& x : logits) x = rng.next_gaussian();
    LogProbMatrix m = logp_from_logits(logits, T, 3);
    Alignment a(5), b(5);
    for (auto& t : a) t = static_cast<TokenId>(rng.next_below(3));
    for (auto& t : b) t = static_cast<TokenId>(rng.next_below(3));
    if (a == b) continue;
    std::vector<AlignmentPair> pairs = {{a, b, true}};
    if (awp_loss(m, pairs, 0.1).active == 0) continue;

    auto g = grad_logits_from_logp(m, awp_grad(m, pairs, 0.1));
    double lr = 0.05;
    for (std::size_t i = 0; i < logits.size(); ++i) logits[i] -= lr * g[i];
    LogProbMatrix m2 = logp_from_logits(logits, T, 3);
    double gap_before = std::exp(path_log_prob(m, b)) -
                        std::exp(path_log_prob(m, a));
    double gap_after = std::exp(path_log_prob(m2, b)) -
                       std::exp(path_log_prob(m2, a));
    CHECK(gap_after > gap_before);
  }
}

TEST_CASE("log-domain variant behaves like the hinge on log-probabilities") {
  LogProbMatrix m = pair_matrix(0.5, 0.2);
  std::vector<AlignmentPair> pairs = {{{1}, {2}, true}};
  double expected = std::log(0.5) - std::log(0.2) + 0.1;
  CHECK(awp_loss(m, pairs, 0.1, /*log_domain=*/true).loss ==
        Catch::Approx(expected));
}

TEST_CASE("combined loss respects alpha and the start epoch") {
  Rng rng(304);
  LogProbMatrix m = random_log_probs(6, 3, rng);
  std::vector<TokenId> y = {1, 2};
  std::vector<AlignmentPair> pairs;
  for (int i = 0; i < 3; ++i) {
    Alignment a(6), b(6);
    for (auto& t : a) t = static_cast<TokenId>(rng.next_below(3));
    for (auto& t : b) t = static_cast<TokenId>(rng.next_below(3));
    pairs.push_back({a, b, true});
  }

  AwpConfig cfg;
  cfg.alpha = 0.0;
  cfg.lambda_margin = 0.2;
  CombinedLoss zero_alpha = combined_loss(m, y, pairs, cfg, kBlank, 10.0);
  CHECK(zero_alpha.total == ctc_loss(m, y, kBlank));

  cfg.alpha = 0.5;
  cfg.start_epoch = 3.0;
  CombinedLoss warmup = combined_loss(m, y, pairs, cfg, kBlank, 2.9);
  CHECK(warmup.alpha_effective == 0.0);
  CHECK(warmup.total == warmup.ctc_part);

  CombinedLoss active = combined_loss(m, y, pairs, cfg, kBlank, 3.0);
  CHECK(active.alpha_effective == 0.5);
  CHECK(active.total ==
        Catch::Approx(active.ctc_part + 0.5 * active.awp_part));

  // continuity in alpha around any point
  cfg.start_epoch = 0.0;
  cfg.alpha = 0.3;
  double t1 = combined_loss(m, y, pairs, cfg, kBlank, 1.0).total;
  cfg.alpha = 0.3 + 1e-9;
  double t2 = combined_loss(m, y, pairs, cfg, kBlank, 1.0).total;
  CHECK(std::abs(t2 - t1) < 1e-8);
}

TEST_CASE("alpha schedule is piecewise constant over steps") {
  AwpConfig cfg;
  cfg.alpha = 0.1;
  cfg.alpha_schedule = {{100, 0.05}, {200, 0.01}};
  CHECK(cfg.effective_alpha(1.0, 50) == 0.1);
  CHECK(cfg.effective_alpha(1.0, 100) == 0.05);
  CHECK(cfg.effective_alpha(1.0, 199) == 0.05);
  CHECK(cfg.effective_alpha(1.0, 5000) == 0.01);
  cfg.start_epoch = 2.0;
  CHECK(cfg.effective_alpha(1.9, 5000) == 0.0);
}

TEST_CASE("paper hyperparameter presets plug in directly") {
  // LS-960 low-latency setting: alpha 0.001, lambda 0.01
  AwpConfig cfg;
  cfg.alpha = 0.001;
  cfg.lambda_margin = 0.01;
  LogProbMatrix m = pair_matrix(0.5, 0.2);
  std::vector<AlignmentPair> pairs = {{{1}, {2}, true}};
  std::vector<TokenId> y = {1};
  CombinedLoss r = combined_loss(m, y, pairs, cfg, kBlank, 1.0);
  CHECK(r.awp_part == Catch::Approx(0.31));
  CHECK(r.total == Catch::Approx(r.ctc_part + 0.001 * 0.31));
}

TEST_CASE("gradient accumulation is order independent with fixed summation") {
  Rng rng(305);
  LogProbMatrix m = random_log_probs(5, 3, rng);
  std::vector<AlignmentPair> pairs;
  for (int i = 0; i < 6; ++i) {
    Alignment a(5), b(5);
    for (auto& t : a) t = static_cast<TokenId>(rng.next_below(3));
    for (auto& t : b) t = static_cast<TokenId>(rng.next_below(3));
    pairs.push_back({a, b, true});
  }
  auto g1 = awp_grad(m, pairs, 0.1);
  auto g2 = awp_grad(m, pairs, 0.1);
  CHECK(g1 == g2);  // bitwise
}
