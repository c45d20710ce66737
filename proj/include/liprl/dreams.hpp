#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "liprl/errors.hpp"
#include "liprl/lipschitz.hpp"
#include "liprl/metric.hpp"
#include "liprl/reward.hpp"
#include "liprl/rng.hpp"
#include "liprl/state.hpp"

namespace liprl {

// How the mixing coefficient t of a dream is drawn.
enum class MixingDist { uniform, fixed };

// Synthetic-state generation: a dream is
//   t * s_i + (1 - t) * s_j + eta
// for two distinct real states, t from `interp`, and eta componentwise
// Gaussian with std = noise_scale * (sample std of that coordinate over the
// real states). beta is the fraction of the final augmented set made of
// dreams.
struct DreamConfig {
  double beta = 0.5;
  double noise_scale = 0.1;
  MixingDist interp = MixingDist::uniform;
  double fixed_t = 1.0;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(beta >= 0.0 && beta <= 1.0))
      throw config_error("DreamConfig: beta must be in [0, 1]");
    if (!(noise_scale >= 0.0))
      throw config_error("DreamConfig: noise_scale must be >= 0");
    if (interp == MixingDist::fixed && !(fixed_t >= 0.0 && fixed_t <= 1.0))
      throw config_error("DreamConfig: fixed_t must be in [0, 1]");
  }
};

// A dream and the indices of the two real states it interpolates.
struct DreamState {
  StateVector state;
  std::size_t parent_i;
  std::size_t parent_j;
};

// Number of dreams so that dreams / (real + dreams) == beta, up to rounding.
inline std::size_t dream_count_for_beta(std::size_t n_real, double beta) {
  if (!(beta >= 0.0 && beta < 1.0))
    throw config_error(
        "dream_count_for_beta: beta must be in [0, 1); a set made only of "
        "dreams has no real states to interpolate");
  return static_cast<std::size_t>(
      std::llround(static_cast<double>(n_real) * beta / (1.0 - beta)));
}

inline std::vector<DreamState> generate_dreams(
    std::span<const StateVector> real, long long count,
    const DreamConfig& cfg) {
  cfg.validate();
  if (count < 0) throw config_error("generate_dreams: count must be >= 0");
  if (count == 0) return {};
  if (real.size() < 2)
    throw insufficient_data_error(
        "generate_dreams: need at least two real states to interpolate");

  const std::size_t dim = real.front().dim();
  for (const auto& s : real)
    if (s.dim() != dim)
      throw dimension_error("generate_dreams: mixed state dimensions");

  // Componentwise sample std of the real states scales the noise, so noise
  // stays proportionate on coordinates with very different magnitudes.
  std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
  for (const auto& s : real)
    for (std::size_t j = 0; j < dim; ++j) mean[j] += s[j];
  for (auto& m : mean) m /= static_cast<double>(real.size());
  if (real.size() > 1) {
    for (const auto& s : real)
      for (std::size_t j = 0; j < dim; ++j)
        sd[j] += (s[j] - mean[j]) * (s[j] - mean[j]);
    for (auto& v : sd)
      v = std::sqrt(v / static_cast<double>(real.size() - 1));
  }

  Rng rng(derive_seed(cfg.rng_seed, 0xd2ea3));
  std::vector<DreamState> dreams;
  dreams.reserve(static_cast<std::size_t>(count));
  for (long long n = 0; n < count; ++n) {
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 100)
        throw domain_error(
            "generate_dreams: could not draw a nonzero dream in 100 attempts");
      std::size_t i = rng.index(real.size());
      std::size_t j = rng.index(real.size() - 1);
      if (j >= i) ++j;  // j != i
      double t = cfg.interp == MixingDist::uniform ? rng.uniform01()
                                                   : cfg.fixed_t;
      std::vector<double> c(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        c[d] = t * real[i][d] + (1.0 - t) * real[j][d];
        if (cfg.noise_scale > 0.0 && sd[d] > 0.0)
          c[d] += cfg.noise_scale * sd[d] * rng.normal();
      }
      if (all_zero(c)) continue;  // not a valid state, redraw
      dreams.push_back({StateVector(std::move(c)), i, j});
      break;
    }
  }
  return dreams;
}

// Action representing a dream's extended reward: the pool action minimizing
// |R^M(s*) - s* . a|, with the achieved gap.
inline AssignedAction assign_dream_action(const StateVector& s_star,
                                          const StateExtensionModel& ext,
                                          const ActionSet& pool) {
  return closest_action(s_star, pool, ext.evaluate(s_star));
}

struct DreamEntry {
  StateVector state;
  double reward;
  ActionVector action;
  std::size_t parent_i;
  std::size_t parent_j;
};

// Training set enlarged with dreams: real entries pass through, dreams carry
// the extension's reward and a representing action.
struct AugmentedSet {
  std::vector<Experience> real_states;
  std::vector<DreamEntry> dream_states;

  std::size_t size() const { return real_states.size() + dream_states.size(); }
};

inline AugmentedSet build_augmented_set(std::span<const Experience> real,
                                        const DreamConfig& cfg,
                                        const StateExtensionModel& ext,
                                        const ActionSet& pool) {
  cfg.validate();
  if (real.empty())
    throw insufficient_data_error("build_augmented_set: no real states");

  AugmentedSet out;
  out.real_states.assign(real.begin(), real.end());

  const std::size_t n_dreams = dream_count_for_beta(real.size(), cfg.beta);
  if (n_dreams == 0) return out;

  std::vector<StateVector> states;
  states.reserve(real.size());
  for (const auto& e : real) states.push_back(e.state);

  auto dreams =
      generate_dreams(states, static_cast<long long>(n_dreams), cfg);
  out.dream_states.reserve(dreams.size());
  for (auto& d : dreams) {
    double reward = ext.evaluate(d.state);
    auto a = closest_action(d.state, pool, reward);
    out.dream_states.push_back({std::move(d.state), reward,
                                pool.actions[a.index], d.parent_i,
                                d.parent_j});
  }
  return out;
}

}  // namespace liprl
