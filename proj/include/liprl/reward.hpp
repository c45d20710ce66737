#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "liprl/action.hpp"
#include "liprl/errors.hpp"
#include "liprl/metric.hpp"
#include "liprl/rng.hpp"
#include "liprl/state.hpp"

namespace liprl {

// Reward of an action on a realized state-value vector: the dual pairing.
// The value vector may be zero (a flat day is a valid outcome, just not a
// valid metric point), so this takes raw coordinates.
inline double duality_reward(std::span<const double> state_value,
                             const ActionVector& a) {
  return dot(state_value, a.span());
}

inline double duality_reward(const StateVector& s, const ActionVector& a) {
  return dot(s.span(), a.span());
}

struct BestAction {
  std::size_t index;
  double value;
};

// argmax of the dual pairing over a finite pool; ties to the lowest index.
inline BestAction best_action(std::span<const double> state_value,
                              const ActionSet& pool) {
  if (pool.actions.empty())
    throw domain_error("best_action: empty action set");
  BestAction best{0, duality_reward(state_value, pool.actions[0])};
  for (std::size_t i = 1; i < pool.actions.size(); ++i) {
    double v = duality_reward(state_value, pool.actions[i]);
    if (v > best.value) best = {i, v};
  }
  return best;
}

// Best achievable reward over the whole l2-ball of the given radius:
// radius * |state_value|_2.
inline double optimal_reward_l2(std::span<const double> state_value,
                                double radius = 1.0) {
  if (!(radius > 0.0))
    throw config_error("optimal_reward_l2: radius must be positive");
  return radius * norm2(state_value);
}

// Action whose direct pairing best represents a target value:
// argmin |target - s . a|, ties to the lowest index.
struct AssignedAction {
  std::size_t index;
  double gap;
};

inline AssignedAction closest_action(const StateVector& s,
                                     const ActionSet& pool, double target) {
  if (pool.actions.empty())
    throw domain_error("closest_action: empty action set");
  AssignedAction best{0, std::abs(target - duality_reward(s, pool.actions[0]))};
  for (std::size_t i = 1; i < pool.actions.size(); ++i) {
    double g = std::abs(target - duality_reward(s, pool.actions[i]));
    if (g < best.gap) best = {i, g};
  }
  return best;
}

// One checked (state, bet, reward) record from past steps.
struct Experience {
  StateVector state;
  ActionVector action;
  double value;
};

// Knobs for the experience/random reward average. A draw of draw_total
// actions is split frac_experience : (1 - frac_experience) between
//   A: bets that scored in the top `top_quantile` of past rewards on states
//      within sim_epsilon of the query (in d_eps), and
//   B: random picks from the pool.
// When A cannot fill its share the remainder comes from B.
struct SimilarityRewardConfig {
  double sim_epsilon = 0.5;
  double frac_experience = 0.9;
  double top_quantile = 0.25;
  std::size_t draw_total = 30;

  void validate() const {
    if (!(sim_epsilon > 0.0))
      throw config_error("SimilarityRewardConfig: sim_epsilon must be > 0");
    if (!(frac_experience >= 0.0 && frac_experience <= 1.0))
      throw config_error(
          "SimilarityRewardConfig: frac_experience must be in [0, 1]");
    if (!(top_quantile > 0.0 && top_quantile <= 1.0))
      throw config_error(
          "SimilarityRewardConfig: top_quantile must be in (0, 1]");
    if (draw_total == 0)
      throw config_error("SimilarityRewardConfig: draw_total must be >= 1");
  }
};

// Mean reward of s over the A-union-B draw described above. Deterministic
// given (history, cfg, rng state). With no similar history the mean falls
// back to random bets only.
inline double mean_reward_AB(const StateVector& s,
                             std::span<const Experience> history,
                             const ActionSet& pool,
                             const SimilarityRewardConfig& cfg,
                             const MetricConfig& metric_cfg, Rng& rng) {
  cfg.validate();
  if (pool.actions.empty())
    throw domain_error("mean_reward_AB: empty action pool");

  // Candidates: history entries on similar states, best rewards first.
  struct Cand {
    double value;
    std::size_t idx;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (eps_distance(s, history[i].state, metric_cfg) < cfg.sim_epsilon)
      cands.push_back({history[i].value, i});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.idx < b.idx;
  });
  const std::size_t kept = cands.empty()
      ? 0
      : static_cast<std::size_t>(std::ceil(
            cfg.top_quantile * static_cast<double>(cands.size())));

  const bool b_disabled = cfg.frac_experience == 1.0;
  const std::size_t na_target = b_disabled
      ? cfg.draw_total
      : static_cast<std::size_t>(std::ceil(
            cfg.frac_experience * static_cast<double>(cfg.draw_total)));
  const std::size_t na = std::min(na_target, kept);
  const std::size_t nb =
      (b_disabled && na > 0) ? 0 : cfg.draw_total - na;

  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < na; ++i, ++count)
    sum += duality_reward(s, history[cands[i].idx].action);
  for (std::size_t i = 0; i < nb; ++i, ++count)
    sum += duality_reward(s, pool.actions[rng.index(pool.actions.size())]);
  return sum / static_cast<double>(count);
}

}  // namespace liprl
