#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace liprl {

// Everything needed to replay a run. Written into every report.
struct ConfigSnapshot {
  std::string scenario;  // "currency" | "allocation" | "" for ad-hoc runs
  double epsilon = 0.1;
  std::string extension = "mcshane";
  double beta = 0.5;
  int actions = 30;
  double sim_epsilon = 0.5;
  double frac_experience = 0.9;
  double top_quantile = 0.25;
  int draw_total = 30;
  double noise_scale = 0.1;
  double initial_capital = 1000.0;
  std::uint64_t seed = 0;

  friend bool operator==(const ConfigSnapshot&, const ConfigSnapshot&) =
      default;
};

struct StepRecord {
  long long step = 0;             // day / minute index of the decision
  std::vector<double> action;     // chosen action's coordinates
  double predicted = 0.0;         // model forecast used for the choice
  double realized = 0.0;          // reward actually obtained
  double optimal = 0.0;           // best achievable a posteriori
  double cum_realized = 0.0;      // prefix sums of the two columns above
  double cum_optimal = 0.0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct BacktestReport {
  std::vector<StepRecord> steps;
  std::optional<long long> survival_time;  // allocation scenario only
  ConfigSnapshot config;

  double cum_realized() const {
    return steps.empty() ? 0.0 : steps.back().cum_realized;
  }
  double cum_optimal() const {
    return steps.empty() ? 0.0 : steps.back().cum_optimal;
  }

  friend bool operator==(const BacktestReport&, const BacktestReport&) =
      default;
};

}  // namespace liprl
