#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tsbet/model.hpp"
#include "tsbet/stopping.hpp"
#include "tsbet/strategy.hpp"

namespace tsbet {

struct EnumerationOptions {
  // Above this many live states in one round the sweep switches from merged
  // breadth-first levels to depth-first traversal.
  std::size_t level_budget = std::size_t{1} << 20;
  // Strategies without a compact state refuse horizons beyond this.
  std::int64_t prefix_limit = 25;
  unsigned workers = 0;
};

struct ExactStopping {
  StoppingDistribution alternative;
  StoppingDistribution null;
  // max over visited states of (E0[U_{t+1} | state] - U_t) / U_t; <= 0 up to
  // rounding for a valid e-process.
  double max_martingale_excess = 0.0;
  std::uint64_t states = 0;
  bool depth_first = false;
};

// Exact rejection-time law under both measures for a Bernoulli problem,
// propagating the mass of live prefixes and removing each one as soon as it rejects.
ExactStopping exact_stopping_distribution(const TestingProblem& problem, const Strategy& strategy,
                                          std::int64_t horizon, const EnumerationOptions& options = {});

// Strategy defined directly on prefixes: the callback returns the round's
// payoff pair (e0, e1) given the bits observed so far.
class PrefixRule : public Strategy {
 public:
  using Rule = std::function<std::pair<double, double>(const std::vector<int>& prefix)>;
  PrefixRule(Rule rule, std::string name) : rule_(std::move(rule)), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  std::unique_ptr<Walker> start() const override;
  bool compact_state() const override { return false; }

 private:
  Rule rule_;
  std::string name_;
};

}  // namespace tsbet
