#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liprl/action.hpp"
#include "liprl/data_io.hpp"
#include "liprl/dreams.hpp"
#include "liprl/errors.hpp"
#include "liprl/lipschitz.hpp"
#include "liprl/metric.hpp"
#include "liprl/report.hpp"
#include "liprl/reward.hpp"
#include "liprl/rng.hpp"
#include "liprl/state.hpp"

namespace liprl {

// ---- currency scenario ---------------------------------------------------
//
// Day k is described before the open by
//   s_k = ( open(k-1) - close(k-1), open(k) * 1e-2, volume(k-1) * 1e-8 )
// and evaluated after the close by the result vector
//   r_k = ( open(k) - close(k),
//           ((high(k) - max(open(k), close(k)))
//             - (low(k) - min(open(k), close(k)))) * 1e-2,
//           (volume(k) - mean_volume) * 1e-8 ).
// The reward of a bet a on day k is r_k . a.

struct CurrencyStates {
  std::vector<StateVector> states;
  std::vector<std::size_t> days;           // 1-based bar index per state
  std::vector<std::size_t> filtered_days;  // days dropped as zero states
};

inline CurrencyStates currency_states(std::span<const OhlcvBar> bars) {
  if (bars.size() < 2)
    throw insufficient_data_error("currency_states: need at least 2 bars");
  CurrencyStates out;
  for (std::size_t k = 1; k < bars.size(); ++k) {  // day 1 has no state
    const auto& prev = bars[k - 1];
    const auto& cur = bars[k];
    std::vector<double> c{prev.open - prev.close, cur.open * 1e-2,
                          prev.volume * 1e-8};
    if (all_zero(c)) {
      out.filtered_days.push_back(k + 1);
      continue;
    }
    out.states.emplace_back(std::move(c));
    out.days.push_back(k + 1);
  }
  return out;
}

inline double mean_volume_of(std::span<const OhlcvBar> bars) {
  if (bars.empty())
    throw insufficient_data_error("mean_volume_of: no bars");
  double s = 0.0;
  for (const auto& b : bars) s += b.volume;
  return s / static_cast<double>(bars.size());
}

inline std::vector<std::vector<double>> currency_results(
    std::span<const OhlcvBar> bars, double mean_volume) {
  if (bars.size() < 2)
    throw insufficient_data_error("currency_results: need at least 2 bars");
  if (!(mean_volume > 0.0))
    throw config_error("currency_results: mean_volume must be positive");
  std::vector<std::vector<double>> out;
  out.reserve(bars.size());
  for (const auto& b : bars) {
    double swing = (b.high - std::max(b.open, b.close)) -
                   (b.low - std::min(b.open, b.close));
    out.push_back({b.open - b.close, swing * 1e-2,
                   (b.volume - mean_volume) * 1e-8});
  }
  return out;
}

// Step-wise backtest. At each day with at least one prior usable day, the
// sample set holds every pair (s_i, a), a in the pool, of the past days with
// reward r_i . a (one of them is the day's genuinely realized best pair, the
// others are artificial); the extension over the product metric scores the
// candidate pairs (s_k, a) and the argmax action is executed.
// window_days > 0 caps the history to the most recent days.
inline BacktestReport run_currency_backtest(std::span<const OhlcvBar> bars,
                                            const ActionSet& pool,
                                            const MetricConfig& cfg,
                                            ExtensionKind kind,
                                            std::size_t window_days = 0) {
  if (pool.actions.empty())
    throw domain_error("run_currency_backtest: empty action set");
  if (pool.dim() != 3)
    throw dimension_error("run_currency_backtest: actions must have dim 3");

  auto st = currency_states(bars);
  if (st.states.size() < 2)
    throw insufficient_data_error(
        "run_currency_backtest: need at least 2 usable days");
  auto results = currency_results(bars, mean_volume_of(bars));

  BacktestReport rep;
  rep.config.scenario = "currency";
  rep.config.epsilon = cfg.epsilon;
  rep.config.extension = kind.name();
  rep.config.actions = static_cast<int>(pool.size());
  rep.config.seed = pool.seed;

  // Growing sample set over (state, action) pairs; incremental inserts,
  // rebuilt from scratch only when the window cap trims old days.
  std::optional<PairRewardFunction> f;
  std::vector<std::pair<StateVector, std::vector<double>>> history;
  std::size_t folded = 0;  // history entries already inside f
  double cum_realized = 0.0, cum_optimal = 0.0;

  for (std::size_t j = 0; j < st.states.size(); ++j) {
    const StateVector& s = st.states[j];
    const std::vector<double>& r = results[st.days[j] - 1];

    if (window_days > 0 && history.size() > window_days) {
      history.erase(history.begin(),
                    history.end() - static_cast<std::ptrdiff_t>(window_days));
      f.reset();
      folded = 0;
    }
    try {
      if (!history.empty()) {
        if (!f) {
          std::vector<RewardSample<StateActionPair>> samples;
          samples.reserve(history.size() * pool.size());
          for (const auto& [hs, hr] : history)
            for (const auto& a : pool.actions)
              samples.push_back({{hs, a}, duality_reward(hr, a)});
          f.emplace(std::move(samples), ProductMetric{cfg});
          folded = history.size();
        } else {
          for (; folded < history.size(); ++folded)
            for (const auto& a : pool.actions)
              f->add_sample({{history[folded].first, a},
                             duality_reward(history[folded].second, a)});
        }
      }
    } catch (const error& e) {
      throw domain_error("run_currency_backtest: day " +
                         std::to_string(st.days[j]) + ": " + e.what());
    }

    if (f) {
      std::size_t best_idx = 0;
      double best_pred = -std::numeric_limits<double>::infinity();
      for (std::size_t ai = 0; ai < pool.size(); ++ai) {
        double pred = blend_value(*f, StateActionPair{s, pool.actions[ai]},
                                  kind.lambda());
        if (pred > best_pred) {
          best_pred = pred;
          best_idx = ai;
        }
      }
      const ActionVector& chosen = pool.actions[best_idx];
      double realized = duality_reward(r, chosen);
      double optimal = optimal_reward_l2(r);
      cum_realized += realized;
      cum_optimal += optimal;
      rep.steps.push_back({static_cast<long long>(st.days[j]),
                           chosen.coords(), best_pred, realized, optimal,
                           cum_realized, cum_optimal});
    }

    history.emplace_back(s, r);
  }
  return rep;
}

// ---- allocation scenario ---------------------------------------------------
//
// States are the cumulative value increments of each product since the start
// of the series, with an extra cash coordinate pinned to 0. A bet of 100
// units split as a (sum 100) on the increment vector delta earns
// (a / 100) . delta in the step to the next minute.

struct AllocationStates {
  std::vector<StateVector> states;
  std::vector<std::size_t> minutes;   // row index per state
  std::vector<std::size_t> filtered;  // all-zero rows dropped
};

inline AllocationStates allocation_states(const PriceSeries& prices) {
  if (prices.n_steps() < 2)
    throw insufficient_data_error("allocation_states: need at least 2 rows");
  const std::size_t np = prices.n_products();
  AllocationStates out;
  const auto& base = prices.values.front();
  for (std::size_t t = 0; t < prices.n_steps(); ++t) {
    std::vector<double> c(np + 1, 0.0);
    for (std::size_t j = 0; j < np; ++j) c[j] = prices.values[t][j] - base[j];
    if (all_zero(c)) {
      out.filtered.push_back(t);
      continue;
    }
    out.states.emplace_back(std::move(c));
    out.minutes.push_back(t);
  }
  return out;
}

// Best achievable profit of a 100-unit simplex bet on an increment vector:
// everything on the best product, or cash when all increments are negative.
inline double optimal_allocation_step(std::span<const double> delta) {
  double best = 0.0;
  for (double d : delta) best = std::max(best, d);
  return best;
}

// A posteriori optimal cumulative series over the l2 ball.
inline std::vector<double> optimal_posthoc(
    std::span<const std::vector<double>> reward_series, double radius = 1.0) {
  std::vector<double> out;
  out.reserve(reward_series.size());
  double cum = 0.0;
  for (const auto& r : reward_series) {
    cum += optimal_reward_l2(r, radius);
    out.push_back(cum);
  }
  return out;
}

// A posteriori optimal cumulative series over a finite action set.
inline std::vector<double> optimal_posthoc(
    std::span<const std::vector<double>> reward_series, const ActionSet& pool) {
  std::vector<double> out;
  out.reserve(reward_series.size());
  double cum = 0.0;
  for (const auto& r : reward_series) {
    cum += best_action(r, pool).value;
    out.push_back(cum);
  }
  return out;
}

struct AllocationOutcome {
  BacktestReport real_only;
  BacktestReport augmented;
};

namespace detail {

// Training pass: walk the training states in time order, score each with the
// experience/random average, and store the bet that best represents the
// score.
inline std::vector<Experience> train_allocation(
    std::span<const StateVector> states, const ActionSet& pool,
    const SimilarityRewardConfig& sim_cfg, const MetricConfig& metric_cfg,
    std::uint64_t seed) {
  std::vector<Experience> trained;
  trained.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    Rng rng(derive_seed(seed, i));
    double value = mean_reward_AB(states[i], trained, pool, sim_cfg,
                                  metric_cfg, rng);
    auto a = closest_action(states[i], pool, value);
    trained.push_back({states[i], pool.actions[a.index], value});
  }
  return trained;
}

struct TrainedEntry {
  const StateVector* state;
  const ActionVector* action;
  double value;
};

// Execution pass: play the stored bet of the nearest trained state on each
// test minute; stop when the capital is gone.
inline BacktestReport execute_allocation(
    const PriceSeries& prices, const AllocationStates& st,
    std::size_t first_test, std::span<const TrainedEntry> trained,
    const MetricConfig& metric_cfg, double initial_capital) {
  BacktestReport rep;
  double capital = initial_capital;
  double cum_realized = 0.0, cum_optimal = 0.0;
  long long steps_executed = 0;

  for (std::size_t i = first_test; i < st.states.size(); ++i) {
    const std::size_t t = st.minutes[i];
    if (t + 1 >= prices.n_steps()) break;  // no next increment to realize
    const StateVector& s = st.states[i];

    std::size_t nearest = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < trained.size(); ++k) {
      double d = eps_distance(s, *trained[k].state, metric_cfg);
      if (d < best_d) {
        best_d = d;
        nearest = k;
      }
    }
    const ActionVector& a = *trained[nearest].action;

    const std::size_t np = prices.n_products();
    std::vector<double> delta(np + 1, 0.0);
    for (std::size_t j = 0; j < np; ++j)
      delta[j] = prices.values[t + 1][j] - prices.values[t][j];

    double realized = dot(std::span<const double>(delta),
                          std::span<const double>(a.coords())) / 100.0;
    double optimal = optimal_allocation_step(delta);
    capital += realized;
    cum_realized += realized;
    cum_optimal += optimal;
    ++steps_executed;
    rep.steps.push_back({static_cast<long long>(t), a.coords(),
                         trained[nearest].value, realized, optimal,
                         cum_realized, cum_optimal});
    if (capital <= 0.0) break;  // out of money: stop betting
  }
  rep.survival_time = steps_executed;
  return rep;
}

}  // namespace detail

// Trains on the first half of the states and executes on the second half,
// once with the full real training set and once with a beta fraction of it
// replaced by dreams. With beta = 0 the two runs coincide. survival_time is
// the number of executed steps before the capital reaches 0 (the horizon
// when it never does).
inline AllocationOutcome run_allocation_backtest(
    const PriceSeries& prices, const ActionSet& pool,
    const MetricConfig& metric_cfg, const SimilarityRewardConfig& sim_cfg,
    const DreamConfig& dream_cfg, double initial_capital = 1000.0,
    std::uint64_t seed = 0) {
  sim_cfg.validate();
  dream_cfg.validate();
  if (pool.actions.empty())
    throw domain_error("run_allocation_backtest: empty action set");
  if (pool.kind() != ActionKind::l1_simplex_100)
    throw config_error(
        "run_allocation_backtest: allocation bets must be l1_simplex_100");
  if (!(initial_capital > 0.0))
    throw config_error(
        "run_allocation_backtest: initial_capital must be positive");

  auto st = allocation_states(prices);
  if (pool.dim() != prices.n_products() + 1)
    throw dimension_error(
        "run_allocation_backtest: bets must have n_products + 1 coordinates");
  const std::size_t n_train =
      static_cast<std::size_t>(st.states.size() / 2);
  if (n_train < 2 || st.states.size() - n_train < 2)
    throw insufficient_data_error(
        "run_allocation_backtest: need at least 2 train and 2 test states");

  auto train_states =
      std::span<const StateVector>(st.states.data(), n_train);

  auto snapshot = [&](BacktestReport& rep, double beta) {
    rep.config.scenario = "allocation";
    rep.config.epsilon = metric_cfg.epsilon;
    rep.config.extension = "mcshane";
    rep.config.beta = beta;
    rep.config.actions = static_cast<int>(pool.size());
    rep.config.sim_epsilon = sim_cfg.sim_epsilon;
    rep.config.frac_experience = sim_cfg.frac_experience;
    rep.config.top_quantile = sim_cfg.top_quantile;
    rep.config.draw_total = static_cast<int>(sim_cfg.draw_total);
    rep.config.noise_scale = dream_cfg.noise_scale;
    rep.config.initial_capital = initial_capital;
    rep.config.seed = seed;
  };

  AllocationOutcome out;

  // Mode 1: every training state, no dreams.
  {
    auto trained = detail::train_allocation(train_states, pool, sim_cfg,
                                            metric_cfg, seed);
    std::vector<detail::TrainedEntry> entries;
    entries.reserve(trained.size());
    for (const auto& e : trained)
      entries.push_back({&e.state, &e.action, e.value});
    out.real_only = detail::execute_allocation(prices, st, n_train, entries,
                                               metric_cfg, initial_capital);
    snapshot(out.real_only, 0.0);
  }

  // Mode 2: keep a (1 - beta) subsample of the training states and fill the
  // set back up with dreams rewarded through the extension.
  if (dream_cfg.beta == 0.0) {
    out.augmented = out.real_only;
    snapshot(out.augmented, 0.0);
  } else {
    const auto n_keep = static_cast<std::size_t>(std::llround(
        (1.0 - dream_cfg.beta) * static_cast<double>(n_train)));
    if (n_keep < 2)
      throw insufficient_data_error(
          "run_allocation_backtest: beta leaves fewer than 2 real states");

    // Seeded order-preserving subsample of the training indices.
    std::vector<std::size_t> idx(n_train);
    for (std::size_t i = 0; i < n_train; ++i) idx[i] = i;
    Rng pick(derive_seed(dream_cfg.rng_seed, 0x5ab5a));
    for (std::size_t i = 0; i < n_train; ++i) {
      std::size_t j = i + pick.index(n_train - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(n_keep);
    std::sort(idx.begin(), idx.end());

    std::vector<StateVector> kept;
    kept.reserve(n_keep);
    for (auto i : idx) kept.push_back(st.states[i]);

    auto trained = detail::train_allocation(kept, pool, sim_cfg, metric_cfg,
                                            derive_seed(seed, 0xd3));
    std::vector<RewardSample<StateVector>> samples;
    samples.reserve(trained.size());
    for (const auto& e : trained) samples.push_back({e.state, e.value});
    StateExtensionModel ext(
        StateRewardFunction(std::move(samples), EpsMetric{metric_cfg}),
        ExtensionKind::mcshane());
    auto augmented = build_augmented_set(trained, dream_cfg, ext, pool);

    std::vector<detail::TrainedEntry> entries;
    entries.reserve(augmented.size());
    for (const auto& e : augmented.real_states)
      entries.push_back({&e.state, &e.action, e.value});
    for (const auto& e : augmented.dream_states)
      entries.push_back({&e.state, &e.action, e.reward});
    out.augmented = detail::execute_allocation(prices, st, n_train, entries,
                                               metric_cfg, initial_capital);
    snapshot(out.augmented, dream_cfg.beta);
  }

  return out;
}

}  // namespace liprl
