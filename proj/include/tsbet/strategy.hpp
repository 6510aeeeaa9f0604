#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tsbet/model.hpp"

namespace tsbet {

// Rescaled wealth z counts as having reached the boundary when z >= 1 - this.
// Capped bets land on z = 1 up to rounding of z * (1/z).
inline constexpr double kBoundaryTolerance = 1e-12;

inline bool crosses_boundary(double z) { return z >= 1.0 - kBoundaryTolerance; }

// One path of a sequential test: consumes observations, exposes the current
// e-process value.
class Walker {
 public:
  virtual ~Walker() = default;
  virtual void observe(double x) = 0;
  virtual double evidence() const = 0;
  virtual bool rejected(double alpha) const { return crosses_boundary(alpha * evidence()); }
  // True once the evidence can never reach 1/alpha again (e.g. zero wealth).
  virtual bool dead() const { return evidence() == 0.0; }
  virtual std::unique_ptr<Walker> clone() const = 0;
  // Two walkers at the same round with equal keys have identical futures.
  virtual void append_key(std::vector<std::int64_t>& key) const = 0;
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<Walker> start() const = 0;
  // Keys collapse paths to a state far smaller than the full prefix.
  virtual bool compact_state() const { return true; }
};

using StrategyPtr = std::shared_ptr<const Strategy>;

std::int64_t key_bits(double x);

// Plays the same action every round.
class ConstantAction : public Strategy {
 public:
  ConstantAction(ActionFamily family, double action, std::string name = "");
  std::string name() const override { return name_; }
  std::unique_ptr<Walker> start() const override;
  double action() const { return action_; }
  const ActionFamily& family() const { return family_; }

 private:
  ActionFamily family_;
  double action_;
  std::string name_;
};

}  // namespace tsbet
