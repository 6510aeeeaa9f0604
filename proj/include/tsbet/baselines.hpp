#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>

#include "tsbet/model.hpp"
#include "tsbet/strategy.hpp"

namespace tsbet {

// Horizon-aware heuristics. Both are frozen reconstructions of recipe-level
// descriptions; see README for the exact formulas.

struct StarBetsState {
  std::int64_t t = 0;         // rounds played
  std::int64_t deadline = 0;  // T
  double wealth = 1.0;
  double sum = 0.0;           // sum of observations
  double sum_sq_dev = 0.0;    // sum of (x - p0)^2
};

struct StarBetsDecision {
  double action;   // probability put on outcome 1
  double lambda;   // stake in payoff units, e1 = 1 + lambda (1 - p0)
  bool game_over;  // wealth already at 1/alpha, or no rounds left
};

// Stake lambda = min(target, max, sqrt(2 log(1/(alpha w)) / (n v))), n = T - t
// rounds left, v = max(p0 q0, m2 + p0 q0 (n/T)/(t+1)) with m2 the empirical
// second moment of x - p0. The last round bets just enough to reach 1/alpha.
StarBetsDecision star_bets_action(const StarBetsState& state, double p0, double alpha);

inline constexpr std::size_t kScheduleCount = 6;

struct ScheduleMixState {
  std::int64_t t = 0;
  std::int64_t deadline = 0;
  double successes = 0.0;
  std::array<double, kScheduleCount> wealth{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
};

// Mixing weight of schedule j (0..5: linear then quadratic, onsets 0.25T,
// 0.5T, 0.75T) at round t + 1.
double schedule_weight(std::size_t j, std::int64_t t, std::int64_t deadline);

// Per-schedule actions: (1 - w_j) Kelly + w_j endpoint, where Kelly =
// max(p0, (s + 1/2)/(t + 1)) and endpoint = clamp(p0 / (alpha W_j), p0, 1).
std::array<double, kScheduleCount> schedule_mix_action(const ScheduleMixState& state, double p0, double alpha);

class StarBets : public Strategy {
 public:
  StarBets(const TestingProblem& problem, std::int64_t deadline, std::string name = "star_bets");
  std::string name() const override { return name_; }
  std::unique_ptr<Walker> start() const override;

 private:
  double p0_, alpha_;
  std::int64_t deadline_;
  std::string name_;
};

class ScheduleMix : public Strategy {
 public:
  ScheduleMix(const TestingProblem& problem, std::int64_t deadline, std::string name = "schedule_mix");
  std::string name() const override { return name_; }
  std::unique_ptr<Walker> start() const override;

 private:
  double p0_, alpha_;
  std::int64_t deadline_;
  std::string name_;
};

// Constant Bernoulli bet whose payoffs are capped at the current wealth.
class CappedConstant : public Strategy {
 public:
  CappedConstant(const TestingProblem& problem, double action, std::string name = "");
  std::string name() const override { return name_; }
  std::unique_ptr<Walker> start() const override;
  double action() const { return action_; }

 private:
  double p0_, alpha_, action_;
  std::string name_;
};

}  // namespace tsbet
