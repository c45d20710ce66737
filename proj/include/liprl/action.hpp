#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liprl/errors.hpp"
#include "liprl/rng.hpp"
#include "liprl/state.hpp"

namespace liprl {

// Constraint families for actions ("bets").
//   l1_simplex_100  : all coordinates >= 0 and summing to 100 (percentages
//                     of a fixed budget, one coordinate per product).
//   l2_sphere_signed: first dim-1 coordinates on the unit l2-sphere, last
//                     coordinate exactly +1 or -1 (buy/sell directive).
enum class ActionKind { l1_simplex_100, l2_sphere_signed };

inline const char* to_string(ActionKind k) {
  return k == ActionKind::l1_simplex_100 ? "l1_simplex_100"
                                         : "l2_sphere_signed";
}

class ActionVector {
 public:
  ActionVector(std::vector<double> coords, ActionKind kind)
      : coords_(std::move(coords)), kind_(kind) {
    validate();
  }

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<double>& coords() const { return coords_; }
  std::span<const double> span() const { return coords_; }
  ActionKind kind() const { return kind_; }

  friend bool operator==(const ActionVector& a, const ActionVector& b) {
    return a.kind_ == b.kind_ && a.coords_ == b.coords_;
  }

 private:
  // Tolerance 1e-9 so serialized actions re-validate after a round trip.
  void validate() const {
    constexpr double tol = 1e-9;
    for (double c : coords_) {
      if (!std::isfinite(c))
        throw domain_error("ActionVector: coordinates must be finite");
    }
    if (kind_ == ActionKind::l1_simplex_100) {
      if (coords_.empty())
        throw domain_error("ActionVector: dimension must be at least 1");
      double sum = 0.0;
      for (double c : coords_) {
        if (c < -tol)
          throw domain_error("ActionVector: simplex coordinate < 0");
        sum += c;
      }
      if (std::abs(sum - 100.0) > tol)
        throw domain_error("ActionVector: simplex coordinates must sum to 100"
                           " (got " + std::to_string(sum) + ")");
    } else {
      if (coords_.size() < 2)
        throw domain_error("ActionVector: signed-sphere kind needs dim >= 2");
      double head = liprl::norm2(
          std::span<const double>(coords_.data(), coords_.size() - 1));
      if (std::abs(head - 1.0) > tol)
        throw domain_error("ActionVector: leading block must have unit norm");
      double last = coords_.back();
      if (last != 1.0 && last != -1.0)
        throw domain_error("ActionVector: last coordinate must be +1 or -1");
    }
  }

  std::vector<double> coords_;
  ActionKind kind_;
};

// Finite action pool; all entries share kind and dimension.
struct ActionSet {
  std::vector<ActionVector> actions;
  std::uint64_t seed = 0;

  std::size_t size() const { return actions.size(); }
  const ActionVector& operator[](std::size_t i) const { return actions[i]; }
  std::size_t dim() const { return actions.front().dim(); }
  ActionKind kind() const { return actions.front().kind(); }
};

// Draws a deterministic action pool for a given seed.
inline ActionSet sample_action_set(std::size_t n_actions, ActionKind kind,
                                   std::size_t dim, std::uint64_t seed) {
  if (n_actions == 0)
    throw config_error("sample_action_set: need at least one action");
  if (kind == ActionKind::l2_sphere_signed && dim < 2)
    throw config_error("sample_action_set: signed-sphere kind needs dim >= 2");
  if (dim == 0) throw config_error("sample_action_set: dim must be positive");

  Rng rng(derive_seed(seed, 0x5eedac7));
  ActionSet set;
  set.seed = seed;
  set.actions.reserve(n_actions);
  for (std::size_t i = 0; i < n_actions; ++i) {
    if (kind == ActionKind::l1_simplex_100) {
      auto w = rng.dirichlet1(dim);
      for (auto& x : w) x *= 100.0;
      set.actions.emplace_back(std::move(w), kind);
    } else {
      std::vector<double> v;
      double n = 0.0;
      do {
        v = rng.gaussian_vec(dim - 1);
        n = norm2(v);
      } while (n < 1e-12);
      for (auto& x : v) x /= n;
      v.push_back(static_cast<double>(rng.sign()));
      set.actions.emplace_back(std::move(v), kind);
    }
  }
  return set;
}

}  // namespace liprl
