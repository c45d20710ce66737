#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "liprl/scenarios.hpp"
#include "test_util.hpp"

using namespace liprl;

namespace {

// ---- independent currency oracle: plain nested loops, no shared library
// machinery beyond the data types -----------------------------------------

double o_angular(const std::vector<double>& a, const std::vector<double>& b) {
  double na = 0.0, nb = 0.0;
  for (double x : a) na += x * x;
  for (double x : b) nb += x * x;
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  double dm = 0.0, dp = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double ua = a[i] / na;
    double ub = b[i] / nb;
    dm += (ua - ub) * (ua - ub);
    dp += (ua + ub) * (ua + ub);
  }
  return 2.0 * std::atan2(std::sqrt(dm), std::sqrt(dp)) / std::numbers::pi;
}

double o_euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double o_deps(const std::vector<double>& a, const std::vector<double>& b,
              double eps) {
  return o_angular(a, b) + eps * o_euclid(a, b);
}

double o_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct OracleStep {
  long long day;
  std::size_t chosen;
  double predicted;
  double max_sample_value;
};

// Direct re-run of the step-wise procedure: every quantity recomputed from
// scratch with nested loops at every step.
std::vector<OracleStep> oracle_currency(const std::vector<OhlcvBar>& bars,
                                        const std::vector<ActionVector>& acts,
                                        double eps) {
  double mean_volume = 0.0;
  for (const auto& b : bars) mean_volume += b.volume;
  mean_volume /= static_cast<double>(bars.size());

  std::vector<std::vector<double>> states, results;
  std::vector<long long> days;
  for (std::size_t k = 1; k < bars.size(); ++k) {
    std::vector<double> s{bars[k - 1].open - bars[k - 1].close,
                          bars[k].open * 1e-2, bars[k - 1].volume * 1e-8};
    bool zero = s[0] == 0.0 && s[1] == 0.0 && s[2] == 0.0;
    if (zero) continue;
    const auto& b = bars[k];
    double swing = (b.high - std::max(b.open, b.close)) -
                   (b.low - std::min(b.open, b.close));
    states.push_back(s);
    results.push_back({b.open - b.close, swing * 1e-2,
                       (b.volume - mean_volume) * 1e-8});
    days.push_back(static_cast<long long>(k + 1));
  }

  std::vector<OracleStep> out;
  for (std::size_t j = 1; j < states.size(); ++j) {
    // samples: all (state_i, action) pairs for i < j
    std::vector<std::vector<double>> pts_s, pts_a;
    std::vector<double> vals;
    for (std::size_t i = 0; i < j; ++i) {
      for (const auto& a : acts) {
        pts_s.push_back(states[i]);
        pts_a.push_back(a.coords());
        vals.push_back(o_dot(results[i], a.coords()));
      }
    }
    double k_const = 0.0;
    for (std::size_t p = 0; p < vals.size(); ++p)
      for (std::size_t q = p + 1; q < vals.size(); ++q) {
        double d = o_deps(pts_s[p], pts_s[q], eps) +
                   o_deps(pts_a[p], pts_a[q], eps);
        if (d == 0.0) continue;
        double quot = std::abs(vals[p] - vals[q]) / d;
        if (quot > k_const) k_const = quot;
      }

    std::size_t chosen = 0;
    double best = -1e300;
    for (std::size_t ai = 0; ai < acts.size(); ++ai) {
      double pred = -1e300;
      for (std::size_t p = 0; p < vals.size(); ++p) {
        double d = o_deps(states[j], pts_s[p], eps) +
                   o_deps(acts[ai].coords(), pts_a[p], eps);
        double v = vals[p] - k_const * d;
        if (v > pred) pred = v;
      }
      if (pred > best) {
        best = pred;
        chosen = ai;
      }
    }
    double max_v = -1e300;
    for (double v : vals) max_v = std::max(max_v, v);
    out.push_back({days[j], chosen, best, max_v});
  }
  return out;
}

}  // namespace

TEST_CASE("currency states substitute the day formulas") {
  std::vector<OhlcvBar> bars{
      {1, 100.0, 101.0, 89.0, 90.0, 2e8},
      {2, 95.0, 96.0, 94.0, 95.5, 1.5e8},
  };
  auto st = currency_states(bars);
  REQUIRE(st.states.size() == 1);  // the first day has no state
  CHECK(st.days[0] == 2);
  CHECK(st.states[0][0] == 10.0);          // open(1) - close(1)
  CHECK(st.states[0][1] == 95.0 * 1e-2);   // open(2) * 1e-2
  CHECK(st.states[0][2] == 2.0);           // volume(1) * 1e-8

  CHECK_THROWS_AS(currency_states(std::vector<OhlcvBar>{bars[0]}),
                  insufficient_data_error);
}

TEST_CASE("currency states filter zero rows") {
  // a synthetic zero state requires open = close, volume = 0 on the prior
  // day and a zero open today, which the loader would reject; constructed
  // directly the filter must still drop it
  std::vector<OhlcvBar> bars{
      {1, 100.0, 100.0, 100.0, 100.0, 0.0},
      {2, 0.0, 1.0, 0.0, 1.0, 1e8},
      {3, 100.0, 101.0, 99.0, 100.5, 2e8},
  };
  auto st = currency_states(bars);
  CHECK(st.states.size() == 1);
  REQUIRE(st.filtered_days.size() == 1);
  CHECK(st.filtered_days[0] == 2);
}

TEST_CASE("currency results substitute the day formulas") {
  std::vector<OhlcvBar> bars{
      {1, 100.0, 102.0, 88.0, 90.0, 2.1e8},
      {2, 95.0, 95.0, 94.0, 95.0, 2.1e8},
  };
  auto r = currency_results(bars, 2.1e8);
  REQUIRE(r.size() == 2);
  // high - max(o,c) = 2, low - min(o,c) = -2 -> (2 - (-2)) * 1e-2 = 0.04
  CHECK(r[0][0] == 10.0);
  CHECK(r[0][1] == doctest::Approx(0.04).epsilon(1e-12));
  CHECK(r[0][2] == 0.0);  // volume equals the mean
  // flat high/low: second coordinate collapses to (0 - (-1)) * 1e-2
  CHECK(r[1][1] == doctest::Approx(0.01).epsilon(1e-12));

  CHECK_THROWS_AS(currency_results(bars, 0.0), config_error);
}

TEST_CASE("currency cold start: equal first-day rewards mean K = 0") {
  // day 2 is crafted so its result vector is exactly zero: open = close,
  // high = max, low = min, volume equal to the series mean. Every pair of
  // the first experience day then has reward 0, K = 0, and the first
  // prediction ties across all actions and picks the lowest index.
  std::vector<OhlcvBar> bars{
      {1, 100.0, 101.0, 97.0, 98.0, 2.0e8},
      {2, 102.0, 102.0, 102.0, 102.0, 2.1e8},
      {3, 103.0, 104.0, 100.0, 101.0, 2.2e8},
  };
  CHECK(mean_volume_of(bars) == 2.1e8);

  auto pool = sample_action_set(5, ActionKind::l2_sphere_signed, 3, 17);
  auto rep = run_currency_backtest(bars, pool, MetricConfig(0.1),
                                   ExtensionKind::mcshane());
  REQUIRE(rep.steps.size() == 1);  // prediction only for day 3
  CHECK(rep.steps[0].step == 3);
  CHECK(rep.steps[0].predicted == 0.0);  // the shared sample value
  CHECK(rep.steps[0].action == pool.actions[0].coords());  // tie -> lowest
}

TEST_CASE("currency backtest matches the brute-force oracle exactly") {
  auto bars = testutil::synth_ohlcv(12, 2024);
  auto pool = sample_action_set(3, ActionKind::l2_sphere_signed, 3, 99);
  const double eps = 0.1;

  auto rep = run_currency_backtest(bars, pool, MetricConfig(eps),
                                   ExtensionKind::mcshane());
  auto oracle = oracle_currency(bars, pool.actions, eps);

  REQUIRE(rep.steps.size() == oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    CHECK(rep.steps[i].step == oracle[i].day);
    CHECK(rep.steps[i].action == pool.actions[oracle[i].chosen].coords());
    CHECK(rep.steps[i].predicted == oracle[i].predicted);  // bit-exact
    // McShane never predicts above the best sample value
    CHECK(rep.steps[i].predicted <= oracle[i].max_sample_value + 1e-12);
  }
}

TEST_CASE("currency report columns are consistent") {
  auto bars = testutil::synth_ohlcv(25, 31);
  auto pool = sample_action_set(8, ActionKind::l2_sphere_signed, 3, 5);
  auto rep = run_currency_backtest(bars, pool, MetricConfig(0.1),
                                   ExtensionKind::mcshane());
  REQUIRE(!rep.steps.empty());

  double cr = 0.0, co = 0.0;
  auto results = currency_results(bars, mean_volume_of(bars));
  for (const auto& s : rep.steps) {
    cr += s.realized;
    co += s.optimal;
    CHECK(s.cum_realized == cr);
    CHECK(s.cum_optimal == co);
    // optimal column is the l2 norm of that day's result vector
    CHECK(s.optimal ==
          optimal_reward_l2(results[static_cast<std::size_t>(s.step) - 1]));
    // every pool action lives in the l2 ball of radius sqrt(2)
    CHECK(s.realized <= std::sqrt(2.0) * s.optimal + 1e-12);
  }

  // deterministic replay
  auto rep2 = run_currency_backtest(bars, pool, MetricConfig(0.1),
                                    ExtensionKind::mcshane());
  CHECK(rep2 == rep);

  // window cap keeps the loop running on a suffix of the history
  auto capped = run_currency_backtest(bars, pool, MetricConfig(0.1),
                                      ExtensionKind::mcshane(), 5);
  CHECK(capped.steps.size() == rep.steps.size());
}

TEST_CASE("allocation states cumulate increments and pin the cash coord") {
  PriceSeries p;
  p.timestamps = {0, 1, 2, 3};
  p.values = {{0.0, 0.0, 0.0, 0.0},
              {1.0, -2.0, 0.0, 3.0},
              {1.0, -2.0, 0.0, 3.0},
              {2.0, -1.0, 0.5, 3.5}};
  auto st = allocation_states(p);
  REQUIRE(st.states.size() == 3);  // row 0 is the zero state
  CHECK(st.filtered == std::vector<std::size_t>{0});
  CHECK(st.states[0].coords() ==
        std::vector<double>{1.0, -2.0, 0.0, 3.0, 0.0});
  CHECK(st.states[1].coords() ==
        std::vector<double>{1.0, -2.0, 0.0, 3.0, 0.0});  // repeats
  CHECK(st.states[2].coords() ==
        std::vector<double>{2.0, -1.0, 0.5, 3.5, 0.0});

  // a later return to the baseline is filtered as a zero state too
  PriceSeries back;
  back.timestamps = {0, 1, 2};
  back.values = {{1.0, 1.0}, {2.0, 0.5}, {1.0, 1.0}};
  auto st2 = allocation_states(back);
  CHECK(st2.states.size() == 1);
  CHECK(st2.filtered == std::vector<std::size_t>{0, 2});
}

TEST_CASE("optimal posthoc series") {
  std::vector<std::vector<double>> rewards{{3.0, 4.0, 0.0},
                                           {0.0, 0.0, 0.0},
                                           {1.0, 0.0, 0.0}};
  auto ball = optimal_posthoc(rewards);
  REQUIRE(ball.size() == 3);
  CHECK(ball[0] == 5.0);
  CHECK(ball[1] == 5.0);  // zero vector adds nothing
  CHECK(ball[2] == 6.0);

  ActionSet pool;
  pool.actions.emplace_back(std::vector<double>{100.0, 0.0, 0.0},
                            ActionKind::l1_simplex_100);
  pool.actions.emplace_back(std::vector<double>{0.0, 100.0, 0.0},
                            ActionKind::l1_simplex_100);
  auto finite = optimal_posthoc(rewards, pool);
  REQUIRE(finite.size() == 3);
  CHECK(finite[0] == 400.0);   // best_action picks 4 * 100
  CHECK(finite[1] == 400.0);
  CHECK(finite[2] == 500.0);
}

TEST_CASE("allocation backtest: beta 0 modes coincide and replay is exact") {
  SynthParams sp;
  sp.n_steps = 60;
  sp.n_products = 4;
  sp.seed = 404;
  auto prices = synth_market(sp);
  auto pool = sample_action_set(20, ActionKind::l1_simplex_100, 5, 404);

  SimilarityRewardConfig sim;
  DreamConfig dreams;
  dreams.beta = 0.0;
  auto outcome = run_allocation_backtest(prices, pool, MetricConfig(0.1),
                                         sim, dreams, 1000.0, 11);
  CHECK(outcome.augmented == outcome.real_only);
  REQUIRE(!outcome.real_only.steps.empty());
  CHECK(outcome.real_only.survival_time.has_value());

  auto outcome2 = run_allocation_backtest(prices, pool, MetricConfig(0.1),
                                          sim, dreams, 1000.0, 11);
  CHECK(outcome2.real_only == outcome.real_only);
  CHECK(outcome2.augmented == outcome.augmented);
}

TEST_CASE("allocation backtest replays stored actions on repeated states") {
  // the cumulative state A appears in both halves; the nearest training
  // state of a repeated test state is itself, so the chosen action repeats
  PriceSeries p;
  p.timestamps = {0, 1, 2, 3, 4, 5, 6, 7};
  std::vector<double> A{1.0, 0.5, -0.5, 2.0};
  std::vector<double> B{2.0, 1.0, 0.5, 1.0};
  std::vector<double> C{0.5, 2.0, 1.0, 0.5};
  std::vector<double> D{3.0, 0.1, 0.2, 0.3};
  p.values = {{0, 0, 0, 0}, A, B, C, A, B, D, A};
  auto pool = sample_action_set(15, ActionKind::l1_simplex_100, 5, 3);

  SimilarityRewardConfig sim;
  DreamConfig dreams;
  dreams.beta = 0.0;
  auto outcome = run_allocation_backtest(p, pool, MetricConfig(0.1), sim,
                                         dreams, 1000.0, 2);
  // states: A B C | A B D A ; test steps at minutes 4, 5, 6 (7 has no next)
  const auto& steps = outcome.real_only.steps;
  REQUIRE(steps.size() == 3);
  // test state at minute 4 is A, at 5 is B: distance 0 to their training
  // twins; assert the same action is chosen when A recurs in training
  auto rep2 = run_allocation_backtest(p, pool, MetricConfig(0.1), sim,
                                      dreams, 1000.0, 2);
  CHECK(rep2.real_only.steps[0].action == steps[0].action);
  CHECK(rep2.real_only.steps[1].action == steps[1].action);
}

TEST_CASE("allocation backtest on a falling market drains and stops") {
  SynthParams sp;
  sp.n_steps = 600;
  sp.n_products = 4;
  sp.drift = -6.0;
  sp.volatility = 0.0;
  sp.seed = 1;
  auto prices = synth_market(sp);
  auto pool = sample_action_set(10, ActionKind::l1_simplex_100, 5, 8);

  SimilarityRewardConfig sim;
  sim.sim_epsilon = 5.0;  // falling states drift apart quickly
  DreamConfig dreams;
  dreams.beta = 0.0;
  auto outcome = run_allocation_backtest(prices, pool, MetricConfig(0.1),
                                         sim, dreams, 1000.0, 3);
  const auto& rep = outcome.real_only;
  REQUIRE(!rep.steps.empty());

  double prev_cum = 0.0;
  for (const auto& s : rep.steps) {
    CHECK(s.realized <= 0.0);            // every product falls
    CHECK(s.optimal == 0.0);             // cash is the posthoc best
    CHECK(s.cum_realized <= prev_cum);   // capital never recovers
    prev_cum = s.cum_realized;
    CHECK(s.realized <= s.optimal + 1e-12);
  }
  REQUIRE(rep.survival_time.has_value());
  // ruin before the horizon: the last recorded step exhausts the capital
  CHECK(*rep.survival_time == static_cast<long long>(rep.steps.size()));
  CHECK(1000.0 + rep.steps.back().cum_realized <= 0.0);
  auto horizon =
      static_cast<long long>(prices.n_steps() / 2);
  CHECK(*rep.survival_time < horizon);
}

TEST_CASE("allocation backtest with dreams runs and reports both modes") {
  SynthParams sp;
  sp.n_steps = 120;
  sp.n_products = 4;
  sp.seed = 77;
  auto prices = synth_market(sp);
  auto pool = sample_action_set(25, ActionKind::l1_simplex_100, 5, 77);

  SimilarityRewardConfig sim;
  DreamConfig dreams;
  dreams.beta = 0.5;
  dreams.rng_seed = 77;
  auto outcome = run_allocation_backtest(prices, pool, MetricConfig(0.1),
                                         sim, dreams, 1000.0, 77);
  REQUIRE(!outcome.real_only.steps.empty());
  REQUIRE(!outcome.augmented.steps.empty());
  CHECK(outcome.real_only.survival_time.has_value());
  CHECK(outcome.augmented.survival_time.has_value());
  CHECK(outcome.augmented.config.beta == 0.5);
  CHECK(outcome.real_only.config.beta == 0.0);

  // per-step realized never beats the posthoc optimum; cumulative columns
  // are exact prefix sums
  double cr = 0.0, co = 0.0;
  for (const auto& s : outcome.augmented.steps) {
    CHECK(s.realized <= s.optimal + 1e-12);
    cr += s.realized;
    co += s.optimal;
    CHECK(s.cum_realized == cr);
    CHECK(s.cum_optimal == co);
  }

  // determinism of the dream-augmented mode
  auto outcome2 = run_allocation_backtest(prices, pool, MetricConfig(0.1),
                                          sim, dreams, 1000.0, 77);
  CHECK(outcome2.augmented == outcome.augmented);
}

TEST_CASE("allocation rejects degenerate inputs") {
  PriceSeries tiny;
  tiny.timestamps = {0, 1, 2};
  tiny.values = {{0.0, 0.0}, {1.0, 1.0}, {2.0, 2.0}};
  auto pool = sample_action_set(5, ActionKind::l1_simplex_100, 3, 1);
  SimilarityRewardConfig sim;
  DreamConfig dreams;
  CHECK_THROWS_AS(run_allocation_backtest(tiny, pool, MetricConfig(0.1), sim,
                                          dreams),
                  insufficient_data_error);

  auto sphere_pool = sample_action_set(5, ActionKind::l2_sphere_signed, 3, 1);
  CHECK_THROWS_AS(run_allocation_backtest(tiny, sphere_pool,
                                          MetricConfig(0.1), sim, dreams),
                  config_error);
}
