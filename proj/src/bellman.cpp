#include "tsbet/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tsbet/errors.hpp"
#include "tsbet/parallel.hpp"
#include "tsbet/quadrature.hpp"

namespace tsbet {

WealthGrid WealthGrid::log_uniform(double z_min, std::size_t points) {
  if (!(z_min > 0.0 && z_min < 1.0)) throw DomainError("wealth grid: z_min must lie in (0,1)");
  if (points < 3) throw DomainError("wealth grid: need at least 3 points including the boundary");
  WealthGrid g;
  const double lo = std::log(z_min);
  g.log_step_ = -lo / static_cast<double>(points - 1);
  g.uniform_ = true;
  for (std::size_t i = 0; i + 1 < points; ++i) {
    const double lz = lo + static_cast<double>(i) * g.log_step_;
    g.log_nodes_.push_back(lz);
    g.nodes_.push_back(i == 0 ? z_min : std::exp(lz));
  }
  g.log_nodes_.front() = lo;
  return g;
}

WealthGrid WealthGrid::from_nodes(std::vector<double> nodes) {
  if (nodes.size() < 2) throw DomainError("wealth grid: need at least 2 nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!(nodes[i] > 0.0 && nodes[i] < 1.0)) throw DomainError("wealth grid: nodes must lie in (0,1)");
    if (i > 0 && !(nodes[i] > nodes[i - 1])) throw DomainError("wealth grid: nodes must be strictly increasing");
  }
  WealthGrid g;
  g.nodes_ = std::move(nodes);
  for (double z : g.nodes_) g.log_nodes_.push_back(std::log(z));
  return g;
}

bool WealthGrid::locate(double z, double log_z, std::size_t& i, double& f) const {
  const std::size_t n = nodes_.size();
  if (uniform_) {
    const double u = (log_z - log_nodes_[0]) / log_step_;
    if (u < 0.0 || u >= static_cast<double>(n - 1)) return false;
    i = static_cast<std::size_t>(u);
    f = u - static_cast<double>(i);
    return true;
  }
  if (z < nodes_.front() || z >= nodes_.back()) return false;
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), z);
  i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  f = z == nodes_[i] ? 0.0 : (log_z - log_nodes_[i]) / (log_nodes_[i + 1] - log_nodes_[i]);
  return true;
}

double WealthGrid::below(const std::vector<double>& row, double log_z) const {
  if (!(row[0] > 0.0)) return 0.0;
  double slope = 0.0;
  if (row[1] > 0.0) slope = std::max(0.0, (std::log(row[1]) - std::log(row[0])) / (log_nodes_[1] - log_nodes_[0]));
  return row[0] * std::exp(slope * (log_z - log_nodes_[0]));
}

double WealthGrid::interpolate(const std::vector<double>& row, double z) const {
  if (!(z < 1.0)) throw DomainError("interpolate: z >= 1 belongs to the rejection boundary");
  if (z <= 0.0) return 0.0;
  if (!uniform_) {
    if (z == nodes_.back()) return row.back();
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), z);
    if (it != nodes_.end() && *it == z) return row[static_cast<std::size_t>(it - nodes_.begin())];
  }
  return interpolate_log(row, std::log(z));
}

double WealthGrid::interpolate_log(const std::vector<double>& row, double log_z) const {
  if (!(log_z < 0.0)) throw DomainError("interpolate: z >= 1 belongs to the rejection boundary");
  std::size_t i = 0;
  double f = 0.0;
  const double z = uniform_ ? 0.0 : std::exp(log_z);
  if (!locate(z, log_z, i, f)) {
    return log_z < log_nodes_.front() ? below(row, log_z) : row.back();
  }
  if (f == 0.0) return row[i];
  return row[i] + f * (row[i + 1] - row[i]);
}

double WealthGrid::interpolate_clamped(const std::vector<double>& row, double z) const {
  if (z <= nodes_.front()) return row.front();
  if (z >= nodes_.back()) return row.back();
  std::size_t i = 0;
  double f = 0.0;
  locate(z, std::log(z), i, f);
  if (f == 0.0) return row[i];
  return row[i] + f * (row[i + 1] - row[i]);
}

std::pair<double, double> apply_capping(double p0, double e0, double e1, double z) {
  if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("apply_capping: p0 must lie in (0,1)");
  if (!(z > 0.0 && z < 1.0)) throw DomainError("apply_capping: z must lie in (0,1)");
  const double q0 = 1.0 - p0;
  if (e1 >= e0) {
    if (z * e1 <= 1.0) return {e0, e1};
    const double c1 = 1.0 / z;
    const double c0 = (1.0 - p0 * c1) / q0;
    if (c0 < -1e-12) throw SolverError("apply_capping: capped payoff became negative");
    return {std::max(0.0, c0), c1};
  }
  if (z * e0 <= 1.0) return {e0, e1};
  const double c0 = 1.0 / z;
  const double c1 = (1.0 - q0 * c0) / p0;
  if (c1 < -1e-12) throw SolverError("apply_capping: capped payoff became negative");
  return {c0, std::max(0.0, c1)};
}

std::vector<double> linear_actions(double lo, double hi, std::size_t count) {
  if (count == 0) throw DomainError("action grid must be non-empty");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  out.back() = hi;
  return out;
}

std::vector<double> default_actions(const TestingProblem& problem, const ActionFamily& family, std::size_t count) {
  if (const auto* b = std::get_if<BernoulliBet>(&family)) {
    const double p1 = std::get<Bernoulli>(problem.alternative).p;
    return p1 > b->p0 ? linear_actions(b->p0, 1.0, count) : linear_actions(0.0, b->p0, count);
  }
  const auto [lo, hi] = action_interval(family);
  return linear_actions(lo, hi, count);
}

namespace {

// One Bellman update: out[i] = discount * max_a E_alt[cross ? cross_value : next(z phi)].
class Stepper {
 public:
  Stepper(const TestingProblem& problem, const ActionFamily& family, const WealthGrid& grid,
          const std::vector<double>& actions, const BellmanOptions& options)
      : grid_(grid), actions_(actions), options_(options) {
    if (actions.empty()) throw DomainError("bellman: empty action grid");
    const auto [lo, hi] = action_interval(family);
    for (std::size_t a = 0; a < actions.size(); ++a) {
      if (!(actions[a] >= lo && actions[a] <= hi)) {
        std::ostringstream msg;
        msg << "bellman: action " << actions[a] << " outside [" << lo << ", " << hi << "]";
        throw DomainError(msg.str());
      }
      if (a > 0 && !(actions[a] > actions[a - 1])) throw DomainError("bellman: actions must be strictly increasing");
    }
    if (const auto* b = std::get_if<BernoulliBet>(&family)) {
      const auto* n = std::get_if<Bernoulli>(&problem.null);
      if (!n || n->p != b->p0) throw DomainError("bellman: BernoulliBet must match the Bernoulli null");
      bernoulli_ = true;
      p0_ = b->p0;
      p1_ = std::get<Bernoulli>(problem.alternative).p;
      return;
    }
    const auto* g = std::get_if<GaussianShift>(&family);
    const auto* alt = std::get_if<Gaussian>(&problem.alternative);
    if (!g || !alt) throw DomainError("bellman: family does not match the problem");
    if (options.capping) throw DomainError("bellman: capping is defined for Bernoulli bets only");
    const NormalRule& rule = normal_rule(options.quadrature_nodes);
    weights_ = rule.weights;
    const std::size_t k = rule.nodes.size();
    log_phi_.resize(actions.size() * k);
    phi_.resize(actions.size() * k);
    const double s2 = g->sigma * g->sigma;
    for (std::size_t a = 0; a < actions.size(); ++a) {
      for (std::size_t j = 0; j < k; ++j) {
        const double x = alt->mu + alt->sigma * rule.nodes[j];
        const double lp = actions[a] * (x - g->mu0) / s2 - actions[a] * actions[a] / (2.0 * s2);
        log_phi_[a * k + j] = lp;
        phi_[a * k + j] = std::exp(lp);
      }
    }
  }

  double integrand(std::size_t i, std::size_t a, const std::vector<double>& next, double cross_value) const {
    const double z = grid_.nodes()[i];
    if (bernoulli_) {
      auto [e0, e1] = bernoulli_payoffs(p0_, actions_[a]);
      if (options_.capping) std::tie(e0, e1) = apply_capping(p0_, e0, e1, z);
      return p1_ * child(next, z * e1, cross_value) + (1.0 - p1_) * child(next, z * e0, cross_value);
    }
    const std::size_t k = weights_.size();
    double acc = 0.0;
    if (grid_.uniform()) {
      const double lz = std::log(z);
      for (std::size_t j = 0; j < k; ++j) {
        const double lc = lz + log_phi_[a * k + j];
        acc += weights_[j] * (lc >= kCrossLog ? cross_value : grid_.interpolate_log(next, lc));
      }
    } else {
      for (std::size_t j = 0; j < k; ++j) acc += weights_[j] * child(next, z * phi_[a * k + j], cross_value);
    }
    return acc;
  }

  void step(const std::vector<double>& next, double cross_value, double discount, std::vector<double>& value,
            std::vector<double>& action, std::vector<std::uint32_t>& index) const {
    const std::size_t n = grid_.size();
    value.assign(n, 0.0);
    action.assign(n, 0.0);
    index.assign(n, 0);
    parallel_for(n, options_.workers, [&](std::size_t i) {
      double best = -1.0;
      std::size_t best_a = 0;
      for (std::size_t a = 0; a < actions_.size(); ++a) {
        const double v = integrand(i, a, next, cross_value);
        if (v > best) {  // strict: ties keep the smallest action
          best = v;
          best_a = a;
        }
      }
      value[i] = discount * best;
      action[i] = actions_[best_a];
      index[i] = static_cast<std::uint32_t>(best_a);
    });
  }

 private:
  double child(const std::vector<double>& next, double zc, double cross_value) const {
    if (crosses_boundary(zc)) return cross_value;
    return grid_.interpolate(next, zc);
  }

  static inline const double kCrossLog = std::log1p(-kBoundaryTolerance);

  const WealthGrid& grid_;
  const std::vector<double>& actions_;
  BellmanOptions options_;
  bool bernoulli_ = false;
  double p0_ = 0.0;
  double p1_ = 0.0;
  std::vector<double> weights_;
  std::vector<double> log_phi_;
  std::vector<double> phi_;
};

}  // namespace

BellmanSolution backward_induction(const TestingProblem& problem, const ActionFamily& family,
                                   const RewardSpec& reward, const WealthGrid& grid,
                                   const std::vector<double>& actions, std::int64_t horizon,
                                   const BellmanOptions& options) {
  if (horizon < 1) throw DomainError("bellman: horizon must be >= 1");
  const Stepper stepper(problem, family, grid, actions, options);
  BellmanSolution sol{problem, family, reward, grid, actions, horizon, options.capping, {}, {}};
  const auto h = static_cast<std::size_t>(horizon);
  sol.values.value.assign(h + 1, std::vector<double>(grid.size(), 0.0));
  sol.policy.action.assign(h, {});
  sol.policy.index.assign(h, {});
  for (std::size_t t = h; t-- > 0;) {
    stepper.step(sol.values.value[t + 1], evaluate(reward, static_cast<std::int64_t>(t) + 1), 1.0,
                 sol.values.value[t], sol.policy.action[t], sol.policy.index[t]);
  }
  return sol;
}

StationarySolution stationary_value_iteration(const TestingProblem& problem, const ActionFamily& family,
                                              double timescale, const WealthGrid& grid,
                                              const std::vector<double>& actions, double tolerance,
                                              const BellmanOptions& options, int max_iterations) {
  if (!(timescale > 0.0)) throw DomainError("stationary_value_iteration: timescale must be positive");
  if (!(tolerance > 0.0)) throw DomainError("stationary_value_iteration: tolerance must be positive");
  const Stepper stepper(problem, family, grid, actions, options);
  const double discount = std::exp(-1.0 / timescale);
  StationarySolution sol;
  sol.value.assign(grid.size(), 0.0);
  std::vector<double> next;
  double residual = INFINITY;
  for (int it = 1; it <= max_iterations; ++it) {
    stepper.step(sol.value, 1.0, discount, next, sol.action, sol.index);
    residual = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) residual = std::max(residual, std::abs(next[i] - sol.value[i]));
    sol.value.swap(next);
    if (residual <= tolerance) {
      sol.iterations = it;
      sol.residual = residual;
      return sol;
    }
  }
  throw ConvergenceError("stationary_value_iteration: no convergence", residual, max_iterations);
}

namespace {

double policy_action(const BellmanSolution& sol, std::int64_t t, double z) {
  if (t < 0 || t >= sol.horizon) return identity_action(sol.family);
  return sol.grid.interpolate_clamped(sol.policy.action[static_cast<std::size_t>(t)], z);
}

class PolicyWalker : public Walker {
 public:
  explicit PolicyWalker(std::shared_ptr<const BellmanSolution> sol) : sol_(std::move(sol)) {
    if (const auto* b = std::get_if<BernoulliBet>(&sol_->family)) p0_ = b->p0;
  }
  void observe(double x) override {
    const double z = sol_->problem.alpha * wealth_;
    if (t_ < sol_->horizon && z > 0.0) {
      const double a = policy_action(*sol_, t_, z);
      if (p0_ > 0.0) {
        auto [e0, e1] = bernoulli_payoffs(p0_, a);
        if (sol_->capping && z < 1.0) std::tie(e0, e1) = apply_capping(p0_, e0, e1, z);
        wealth_ *= x == 1.0 ? e1 : e0;
      } else {
        wealth_ *= payoff(sol_->family, a, x);
      }
    }
    ++t_;
  }
  double evidence() const override { return wealth_; }
  std::unique_ptr<Walker> clone() const override { return std::make_unique<PolicyWalker>(*this); }
  void append_key(std::vector<std::int64_t>& key) const override { key.push_back(key_bits(wealth_)); }

 private:
  std::shared_ptr<const BellmanSolution> sol_;
  double p0_ = 0.0;
  std::int64_t t_ = 0;
  double wealth_ = 1.0;
};

}  // namespace

PolicyStrategy::PolicyStrategy(std::shared_ptr<const BellmanSolution> solution, std::string name)
    : solution_(std::move(solution)), name_(std::move(name)) {
  if (!solution_) throw DomainError("PolicyStrategy: null solution");
}

std::unique_ptr<Walker> PolicyStrategy::start() const {
  return std::make_unique<PolicyWalker>(solution_);
}

double PolicyStrategy::action_at(std::int64_t t, double z) const { return policy_action(*solution_, t, z); }

}  // namespace tsbet
