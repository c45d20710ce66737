#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "liprl/errors.hpp"
#include "liprl/metric.hpp"
#include "liprl/state.hpp"

namespace liprl {

template <typename Point>
struct RewardSample {
  Point point;
  double value;
};

// A reward function known on finitely many points, together with the metric
// it lives on and its Lipschitz constant
//   K = max_{i != j} |v_i - v_j| / d(p_i, p_j).
// Points must be pairwise distinct under the metric; a repeated point with
// the same value is merged, with a conflicting value the constant would be
// infinite and the function is rejected. A singleton has K = 0.
//
// Metric is any callable double(const Point&, const Point&).
template <typename Point, typename Metric>
class SampledRewardFunction {
 public:
  SampledRewardFunction(std::vector<RewardSample<Point>> samples,
                        Metric metric)
      : metric_(std::move(metric)) {
    if (samples.empty())
      throw domain_error("SampledRewardFunction: need at least one sample");
    samples_.reserve(samples.size());
    for (auto& s : samples) add_sample(std::move(s));
  }

  // Streaming insertion used by the step-wise backtest loop: the new sample
  // is compared against every existing one, O(|samples|).
  void add_sample(RewardSample<Point> s) {
    if (!std::isfinite(s.value))
      throw domain_error("SampledRewardFunction: sample value must be finite");
    for (const auto& old : samples_) {
      double d = metric_(old.point, s.point);
      if (d == 0.0) {
        if (old.value == s.value) return;  // duplicate, merge
        throw ill_posed_error(
            "SampledRewardFunction: two values at the same point (" +
            std::to_string(old.value) + " vs " + std::to_string(s.value) +
            ")");
      }
      k_ = std::max(k_, std::abs(old.value - s.value) / d);
    }
    samples_.push_back(std::move(s));
  }

  double lipschitz_constant() const { return k_; }
  std::span<const RewardSample<Point>> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  const Metric& metric() const { return metric_; }
  double max_value() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples_) m = std::max(m, s.value);
    return m;
  }

 private:
  std::vector<RewardSample<Point>> samples_;
  Metric metric_;
  double k_ = 0.0;
};

template <typename Point, typename Metric>
double lipschitz_constant(const SampledRewardFunction<Point, Metric>& f) {
  return f.lipschitz_constant();
}

// McShane form: the smallest K-Lipschitz function agreeing with f on its
// samples. The Whitney form below is the largest; every K-Lipschitz
// extension lies between the two.
template <typename Point, typename Metric>
double mcshane_value(const SampledRewardFunction<Point, Metric>& f,
                     const Point& x) {
  double k = f.lipschitz_constant();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& s : f.samples())
    best = std::max(best, s.value - k * f.metric()(x, s.point));
  return best;
}

template <typename Point, typename Metric>
double whitney_value(const SampledRewardFunction<Point, Metric>& f,
                     const Point& x) {
  double k = f.lipschitz_constant();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : f.samples())
    best = std::min(best, s.value + k * f.metric()(x, s.point));
  return best;
}

template <typename Point, typename Metric>
double blend_value(const SampledRewardFunction<Point, Metric>& f,
                   const Point& x, double lambda) {
  if (lambda == 0.0) return mcshane_value(f, x);
  if (lambda == 1.0) return whitney_value(f, x);
  return (1.0 - lambda) * mcshane_value(f, x) + lambda * whitney_value(f, x);
}

// Which extension to evaluate; a convex combination parameterized by lambda,
// with blend(0) == McShane and blend(1) == Whitney.
class ExtensionKind {
 public:
  static ExtensionKind mcshane() { return ExtensionKind(0.0); }
  static ExtensionKind whitney() { return ExtensionKind(1.0); }
  static ExtensionKind blend(double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
      throw config_error("ExtensionKind: blend lambda must be in [0, 1]");
    return ExtensionKind(lambda);
  }

  double lambda() const { return lambda_; }
  std::string name() const {
    if (lambda_ == 0.0) return "mcshane";
    if (lambda_ == 1.0) return "whitney";
    return "blend:" + std::to_string(lambda_);
  }

  friend bool operator==(const ExtensionKind& a, const ExtensionKind& b) {
    return a.lambda_ == b.lambda_;
  }

 private:
  explicit ExtensionKind(double lambda) : lambda_(lambda) {}
  double lambda_;
};

// Immutable, evaluable extension of a sampled reward function to the whole
// space. Safe for concurrent evaluation.
template <typename Point, typename Metric>
class ExtensionModel {
 public:
  ExtensionModel(SampledRewardFunction<Point, Metric> base,
                 ExtensionKind kind = ExtensionKind::mcshane())
      : base_(std::move(base)), kind_(kind) {}

  const SampledRewardFunction<Point, Metric>& base() const { return base_; }
  ExtensionKind kind() const { return kind_; }

  double mcshane(const Point& x) const { return mcshane_value(base_, x); }
  double whitney(const Point& x) const { return whitney_value(base_, x); }
  double evaluate(const Point& x) const {
    return blend_value(base_, x, kind_.lambda());
  }

  std::vector<double> evaluate_batch(std::span<const Point> xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      try {
        out.push_back(evaluate(xs[i]));
      } catch (const dimension_error& e) {
        throw dimension_error("evaluate_batch: point " + std::to_string(i) +
                              ": " + e.what());
      } catch (const domain_error& e) {
        throw domain_error("evaluate_batch: point " + std::to_string(i) +
                           ": " + e.what());
      }
    }
    return out;
  }

 private:
  SampledRewardFunction<Point, Metric> base_;
  ExtensionKind kind_;
};

using StateRewardFunction = SampledRewardFunction<StateVector, EpsMetric>;
using StateExtensionModel = ExtensionModel<StateVector, EpsMetric>;
using PairRewardFunction = SampledRewardFunction<StateActionPair, ProductMetric>;

struct BoundResult {
  double bound;
  std::size_t min_index;  // sample attaining the minimum (ties: lowest)
};

// A-priori bound on how far the extension can sit from a direct dual pairing
// with the minimizing sample's action:
//   |R^M(x) - x . a_s0| <= min_s ( r*|s - x|_inf + K*Theta(s, x)
//                                  + eps*K*E(s, x) ),
// valid when every sample value is v_i = s_i . a_i with a_i in the positive
// l1-sphere scaled by r (the action-set radius, 100 by default).
inline BoundResult propext_bound(const StateRewardFunction& f,
                                 const StateVector& x,
                                 double action_radius = 100.0) {
  const double k = f.lipschitz_constant();
  const double eps = f.metric().cfg.epsilon;
  BoundResult r{std::numeric_limits<double>::infinity(), 0};
  const auto samples = f.samples();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i].point;
    detail::check_same_dim(s.span(), x.span(), "propext_bound");
    double diff_inf = 0.0;
    for (std::size_t j = 0; j < s.dim(); ++j)
      diff_inf = std::max(diff_inf, std::abs(s[j] - x[j]));
    double v = action_radius * diff_inf + k * angular_distance(s, x) +
               eps * k * euclidean_distance(s, x);
    if (v < r.bound) {
      r.bound = v;
      r.min_index = i;
    }
  }
  return r;
}

// Lower bound on the gap |x . a - R^M(x)| for an action dominating every
// sample value (x . a >= v_i for all i):
//   gap >= K * ( Theta(x, M0) + eps * E(x, M0) ).
// The dominance hypothesis is checked; without it the bound does not apply.
inline double lower_bound_gap(const StateRewardFunction& f,
                              const StateVector& x,
                              std::span<const double> action) {
  const double pairing = dot(x.span(), action);
  double theta_min = std::numeric_limits<double>::infinity();
  double e_min = std::numeric_limits<double>::infinity();
  for (const auto& s : f.samples()) {
    if (pairing < s.value)
      throw domain_error(
          "lower_bound_gap: dominance hypothesis violated (x.a = " +
          std::to_string(pairing) + " < sample value " +
          std::to_string(s.value) + ")");
    theta_min = std::min(theta_min, angular_distance(x, s.point));
    e_min = std::min(e_min, euclidean_distance(x, s.point));
  }
  const double eps = f.metric().cfg.epsilon;
  return f.lipschitz_constant() * (theta_min + eps * e_min);
}

// Grid search for the blend parameter on held-out (point, value) pairs;
// picks the lambda with the smallest mean absolute error, ties to the
// smaller lambda.
template <typename Point, typename Metric>
double best_blend_lambda(
    const SampledRewardFunction<Point, Metric>& f,
    std::span<const RewardSample<Point>> holdout, std::size_t grid = 11) {
  if (holdout.empty())
    throw domain_error("best_blend_lambda: empty holdout set");
  if (grid < 2) throw config_error("best_blend_lambda: grid must be >= 2");
  double best_lambda = 0.0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid; ++g) {
    double lambda = static_cast<double>(g) / static_cast<double>(grid - 1);
    double err = 0.0;
    for (const auto& h : holdout)
      err += std::abs(blend_value(f, h.point, lambda) - h.value);
    err /= static_cast<double>(holdout.size());
    if (err < best_err) {
      best_err = err;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace liprl
