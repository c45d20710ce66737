#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "liprl/action.hpp"
#include "liprl/errors.hpp"
#include "liprl/state.hpp"

namespace liprl {

// Weight of the Euclidean term in the hybrid distance
//   d_eps(s1, s2) = Theta(s1, s2) + epsilon * E(s1, s2).
// epsilon = 0 still gives a pseudo-metric; a true metric needs epsilon > 0.
struct MetricConfig {
  double epsilon = 0.1;

  explicit MetricConfig(double eps = 0.1) : epsilon(eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps))
      throw config_error("MetricConfig: epsilon must be finite and >= 0");
  }
};

namespace detail {

inline void check_same_dim(std::span<const double> a,
                           std::span<const double> b, const char* op) {
  if (a.size() != b.size())
    throw dimension_error(std::string(op) + ": dimensions differ (" +
                          std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
}

// Angle between directions, normalized to [0, 1]. Computed with the
// half-angle form  theta = 2*atan2(|u - v|, |u + v|)  on the unit vectors,
// which is exact at 0 and pi where arccos of a rounded cosine loses ~1e-8.
inline double angular_kernel(std::span<const double> a, double na,
                             std::span<const double> b, double nb) {
  check_same_dim(a, b, "angular_distance");
  if (na == 0.0 || nb == 0.0)
    throw domain_error("angular_distance: zero vector has no direction");
  double dm = 0.0, dp = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double ua = a[i] / na;
    double ub = b[i] / nb;
    dm += (ua - ub) * (ua - ub);
    dp += (ua + ub) * (ua + ub);
  }
  double theta = 2.0 * std::atan2(std::sqrt(dm), std::sqrt(dp));
  return theta / std::numbers::pi;
}

inline double euclidean_kernel(std::span<const double> a,
                               std::span<const double> b) {
  check_same_dim(a, b, "euclidean_distance");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double eps_kernel(std::span<const double> a, double na,
                         std::span<const double> b, double nb,
                         const MetricConfig& cfg) {
  return angular_kernel(a, na, b, nb) + cfg.epsilon * euclidean_kernel(a, b);
}

}  // namespace detail

// Theta: scale-invariant direction distance in [0, 1].
inline double angular_distance(const StateVector& s1, const StateVector& s2) {
  return detail::angular_kernel(s1.span(), s1.norm2(), s2.span(), s2.norm2());
}

// E: plain l2 distance.
inline double euclidean_distance(const StateVector& s1,
                                 const StateVector& s2) {
  return detail::euclidean_kernel(s1.span(), s2.span());
}

// d_eps = Theta + epsilon * E.
inline double eps_distance(const StateVector& s1, const StateVector& s2,
                           const MetricConfig& cfg) {
  return detail::eps_kernel(s1.span(), s1.norm2(), s2.span(), s2.norm2(), cfg);
}

// A point of the product space (states x actions), carrying d_s + d_a.
struct StateActionPair {
  StateVector state;
  ActionVector action;

  friend bool operator==(const StateActionPair& a, const StateActionPair& b) {
    return a.state == b.state && a.action == b.action;
  }
};

// d_s + d_a with d_eps on both factors. Actions are nonzero by construction
// (simplex sums to 100; signed-sphere norm >= 1), so they are valid points.
inline double product_distance(const StateActionPair& p1,
                               const StateActionPair& p2,
                               const MetricConfig& cfg) {
  double ds = eps_distance(p1.state, p2.state, cfg);
  double da = detail::eps_kernel(p1.action.span(), norm2(p1.action.span()),
                                 p2.action.span(), norm2(p2.action.span()),
                                 cfg);
  return ds + da;
}

enum class DistanceKind { angular, euclidean, eps };

// inf over a finite set: d(s, S) = min_{x in S} d(s, x).
inline double distance_to_set(const StateVector& s,
                              std::span<const StateVector> set,
                              DistanceKind kind, const MetricConfig& cfg) {
  if (set.empty())
    throw domain_error("distance_to_set: set must be non-empty");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : set) {
    double d = 0.0;
    switch (kind) {
      case DistanceKind::angular: d = angular_distance(s, x); break;
      case DistanceKind::euclidean: d = euclidean_distance(s, x); break;
      case DistanceKind::eps: d = eps_distance(s, x, cfg); break;
    }
    best = std::min(best, d);
  }
  return best;
}

// Callable metrics, so the extension machinery can be generic in the point
// type.
struct EpsMetric {
  MetricConfig cfg;
  double operator()(const StateVector& a, const StateVector& b) const {
    return eps_distance(a, b, cfg);
  }
};

struct ProductMetric {
  MetricConfig cfg;
  double operator()(const StateActionPair& a, const StateActionPair& b) const {
    return product_distance(a, b, cfg);
  }
};

}  // namespace liprl
