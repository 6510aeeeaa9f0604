#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "tsbet/model.hpp"
#include "tsbet/reward.hpp"
#include "tsbet/strategy.hpp"

namespace tsbet {

// Interior rescaled-wealth nodes z = alpha * w in (0, 1); z = 1 is the
// absorbing rejection boundary and is not stored.
class WealthGrid {
 public:
  // `points` log-spaced values on [z_min, 1]; the last one (z = 1) is dropped.
  static WealthGrid log_uniform(double z_min, std::size_t points);
  // Arbitrary strictly increasing nodes in (0, 1).
  static WealthGrid from_nodes(std::vector<double> nodes);

  const std::vector<double>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  double z_min() const { return nodes_.front(); }
  bool uniform() const { return uniform_; }
  double log_step() const { return log_step_; }

  // Monotone piecewise-linear interpolation in (log z, value). Below z_min the
  // row is extended as a power law with the slope of the first segment, above
  // the last node it stays flat.
  double interpolate(const std::vector<double>& row, double z) const;
  // Same, from log z (uniform grids avoid one log per call).
  double interpolate_log(const std::vector<double>& row, double log_z) const;

  // Piecewise-linear in log z, clamped to the end values outside the grid.
  double interpolate_clamped(const std::vector<double>& row, double z) const;

 private:
  // Index i and weight f such that log z lies between nodes i and i+1.
  bool locate(double z, double log_z, std::size_t& i, double& f) const;
  double below(const std::vector<double>& row, double log_z) const;

  std::vector<double> nodes_;
  std::vector<double> log_nodes_;
  bool uniform_ = false;
  double log_step_ = 0.0;
};

// Cap an overshooting payoff at the boundary and move the freed null mass to
// the other outcome. Returns (e0', e1').
std::pair<double, double> apply_capping(double p0, double e0, double e1, double z);

struct BellmanOptions {
  bool capping = false;
  std::size_t quadrature_nodes = 41;
  unsigned workers = 0;
};

// V[t][i], t = 0..H, with V[H] = 0.
struct ValueTable {
  std::vector<std::vector<double>> value;
};

// Optimal grid action per (round, node), rounds 0..H-1.
struct MarkovPolicy {
  std::vector<std::vector<double>> action;
  std::vector<std::vector<std::uint32_t>> index;
};

struct BellmanSolution {
  TestingProblem problem;
  ActionFamily family;
  RewardSpec reward;
  WealthGrid grid;
  std::vector<double> actions;
  std::int64_t horizon;
  bool capping;
  ValueTable values;
  MarkovPolicy policy;
};

BellmanSolution backward_induction(const TestingProblem& problem, const ActionFamily& family,
                                   const RewardSpec& reward, const WealthGrid& grid,
                                   const std::vector<double>& actions, std::int64_t horizon,
                                   const BellmanOptions& options = {});

struct StationarySolution {
  std::vector<double> value;
  std::vector<double> action;
  std::vector<std::uint32_t> index;
  int iterations;
  double residual;
};

// Fixed point of v(z) = exp(-1/T) max_a E[1{z phi >= 1} + v(z phi) 1{z phi < 1}].
StationarySolution stationary_value_iteration(const TestingProblem& problem, const ActionFamily& family,
                                              double timescale, const WealthGrid& grid,
                                              const std::vector<double>& actions, double tolerance,
                                              const BellmanOptions& options = {}, int max_iterations = 100000);

// Evenly spaced actions over [lo, hi].
std::vector<double> linear_actions(double lo, double hi, std::size_t count);

// Default action grid: [p0, 1] for Bernoulli (betting on the favourable side),
// the family interval otherwise.
std::vector<double> default_actions(const TestingProblem& problem, const ActionFamily& family, std::size_t count);

// Plays the policy at the current wealth (actions interpolated in log z), no
// bet past the horizon.
class PolicyStrategy : public Strategy {
 public:
  PolicyStrategy(std::shared_ptr<const BellmanSolution> solution, std::string name = "bellman");
  std::string name() const override { return name_; }
  std::unique_ptr<Walker> start() const override;
  double action_at(std::int64_t t, double z) const;

 private:
  std::shared_ptr<const BellmanSolution> solution_;
  std::string name_;
};

}  // namespace tsbet
