#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsbet/reward.hpp"

namespace tsbet {

enum class Estimator { Exact, MonteCarlo };

// Law of the rejection time truncated at a horizon H.
struct StoppingDistribution {
  std::int64_t horizon = 0;
  // mass[t] = P(tau = t) for t = 1..H; mass[0] is always 0.
  std::vector<double> mass;
  // Per-round standard errors (Monte Carlo only, zero for exact results).
  std::vector<double> se;
  double never_mass = 1.0;  // P(tau > H)
  Estimator kind = Estimator::Exact;
  std::uint64_t paths = 0;

  static StoppingDistribution empty(std::int64_t horizon, Estimator kind);

  std::vector<double> cdf() const;
  double cdf_at(std::int64_t t) const;
  double rejection_probability() const { return 1.0 - never_mass; }
};

struct RewardEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  // Largest possible contribution of paths unresolved at the horizon.
  double truncation_bound = 0.0;
};

RewardEstimate expected_reward(const StoppingDistribution& dist, const RewardSpec& reward);

// sup_t |F_a(t) - F_b(t)| over 1..min(limit, horizons).
double cdf_sup_distance(const StoppingDistribution& a, const StoppingDistribution& b, std::int64_t limit);

// Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence = 0.95);

}  // namespace tsbet
