#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsbet/model.hpp"
#include "tsbet/reward.hpp"
#include "tsbet/stopping.hpp"
#include "tsbet/strategy.hpp"

namespace tsbet {

enum class Measure { Null, Alternative };

struct SimConfig {
  std::uint64_t paths = 5000;
  std::uint64_t seed = 1;
  std::int64_t horizon = 150;
  Measure measure = Measure::Alternative;
  // Off: each strategy draws from its own stream (keyed by its name).
  bool common_random_numbers = true;
  unsigned workers = 0;
  // Rounds at which the mean stopped evidence E[U_{t ^ tau}] is reported; the
  // horizon is always added.
  std::vector<std::int64_t> checkpoints{10, 50};
  // When set, unstopped paths contribute (alpha U_H)^kappa to a tail bound on
  // late rejections.
  std::optional<double> kappa;
};

struct StoppedMean {
  std::int64_t t;
  double mean;
  double standard_error;
};

struct MonteCarloRun {
  std::string strategy;
  StoppingDistribution dist;
  std::uint64_t rejections = 0;
  std::vector<StoppedMean> stopped_means;
  std::optional<double> kappa_tail;
};

// Observation for (path, round) under the given measure.
double sample_observation(const Distribution& d, std::uint64_t seed, std::uint64_t stream, std::uint64_t path,
                          std::uint64_t round);

MonteCarloRun run(const TestingProblem& problem, const Strategy& strategy, const SimConfig& config);

struct ComparisonRow {
  std::string strategy;
  MonteCarloRun run;
  std::vector<RewardEstimate> rewards;
};

struct Comparison {
  std::vector<RewardSpec> rewards;
  std::vector<ComparisonRow> rows;
};

Comparison compare(const TestingProblem& problem, const std::vector<StrategyPtr>& strategies,
                   const SimConfig& config, const std::vector<RewardSpec>& rewards);

}  // namespace tsbet
