#include "tsbet/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tsbet/bellman.hpp"
#include "tsbet/errors.hpp"

namespace tsbet {

namespace {

double bernoulli_p0(const TestingProblem& problem, const char* who) {
  const auto* b = std::get_if<Bernoulli>(&problem.null);
  if (!b) throw DomainError(std::string(who) + ": Bernoulli problem required");
  return b->p;
}

}  // namespace

StarBetsDecision star_bets_action(const StarBetsState& st, double p0, double alpha) {
  const double q0 = 1.0 - p0;
  const double goal = 1.0 / (alpha * st.wealth);  // payoff still needed
  if (st.t >= st.deadline || goal <= 1.0 || !(st.wealth > 0.0)) return {p0, 0.0, true};
  const double lambda_target = (goal - 1.0) / q0;
  const double lambda_max = 1.0 / p0;
  const auto left = static_cast<double>(st.deadline - st.t);
  double lambda = std::min(lambda_target, lambda_max);
  if (left > 1.0) {
    const double td = static_cast<double>(st.t);
    const double m2 = st.sum_sq_dev / std::max(td, 1.0);
    const double bonus = p0 * q0 * (left / static_cast<double>(st.deadline)) / (td + 1.0);
    const double v = std::max(p0 * q0, m2 + bonus);
    lambda = std::min(lambda, std::sqrt(2.0 * std::log(goal) / (left * v)));
  }
  lambda = std::max(0.0, lambda);
  return {std::min(1.0, p0 + lambda * p0 * q0), lambda, false};
}

double schedule_weight(std::size_t j, std::int64_t t, std::int64_t deadline) {
  static constexpr double kOnsets[3] = {0.25, 0.5, 0.75};
  const double T = static_cast<double>(deadline);
  const double onset = kOnsets[j % 3] * T;
  const double span = T - 1.0 - onset;
  const double td = static_cast<double>(t);
  double w = 0.0;
  if (td >= onset) w = span > 0.0 ? (td - onset) / span : 1.0;
  w = std::clamp(w, 0.0, 1.0);
  return j < 3 ? w : w * w;
}

std::array<double, kScheduleCount> schedule_mix_action(const ScheduleMixState& st, double p0, double alpha) {
  std::array<double, kScheduleCount> out{};
  if (st.t >= st.deadline) {
    out.fill(p0);
    return out;
  }
  const double kelly = std::max(p0, (st.successes + 0.5) / (static_cast<double>(st.t) + 1.0));
  for (std::size_t j = 0; j < kScheduleCount; ++j) {
    const double endpoint = st.wealth[j] > 0.0 ? std::clamp(p0 / (alpha * st.wealth[j]), p0, 1.0) : p0;
    const double w = schedule_weight(j, st.t, st.deadline);
    out[j] = std::clamp((1.0 - w) * kelly + w * endpoint, 0.0, 1.0);
  }
  return out;
}

namespace {

class StarBetsWalker : public Walker {
 public:
  StarBetsWalker(double p0, double alpha, std::int64_t deadline) : p0_(p0), alpha_(alpha) { st_.deadline = deadline; }
  void observe(double x) override {
    const StarBetsDecision d = star_bets_action(st_, p0_, alpha_);
    if (!d.game_over) {
      const auto [e0, e1] = bernoulli_payoffs(p0_, d.action);
      st_.wealth *= x == 1.0 ? e1 : e0;
    }
    st_.sum += x;
    st_.sum_sq_dev += (x - p0_) * (x - p0_);
    ++st_.t;
  }
  double evidence() const override { return st_.wealth; }
  bool dead() const override { return st_.wealth == 0.0 || st_.t >= st_.deadline; }
  std::unique_ptr<Walker> clone() const override { return std::make_unique<StarBetsWalker>(*this); }
  void append_key(std::vector<std::int64_t>& key) const override {
    key.push_back(static_cast<std::int64_t>(st_.sum));
    key.push_back(key_bits(st_.wealth));
  }

 private:
  double p0_, alpha_;
  StarBetsState st_;
};

class ScheduleMixWalker : public Walker {
 public:
  ScheduleMixWalker(double p0, double alpha, std::int64_t deadline) : p0_(p0), alpha_(alpha) { st_.deadline = deadline; }
  void observe(double x) override {
    const auto actions = schedule_mix_action(st_, p0_, alpha_);
    for (std::size_t j = 0; j < kScheduleCount; ++j) {
      const auto [e0, e1] = bernoulli_payoffs(p0_, actions[j]);
      st_.wealth[j] *= x == 1.0 ? e1 : e0;
    }
    st_.successes += x;
    ++st_.t;
  }
  double evidence() const override {
    double total = 0.0;
    for (double w : st_.wealth) total += w;
    return total / static_cast<double>(kScheduleCount);
  }
  bool dead() const override { return st_.t >= st_.deadline || evidence() == 0.0; }
  std::unique_ptr<Walker> clone() const override { return std::make_unique<ScheduleMixWalker>(*this); }
  void append_key(std::vector<std::int64_t>& key) const override {
    key.push_back(static_cast<std::int64_t>(st_.successes));
    for (double w : st_.wealth) key.push_back(key_bits(w));
  }

 private:
  double p0_, alpha_;
  ScheduleMixState st_;
};

class CappedWalker : public Walker {
 public:
  CappedWalker(double p0, double alpha, double action) : p0_(p0), alpha_(alpha) {
    std::tie(e0_, e1_) = bernoulli_payoffs(p0, action);
    log_e0_ = std::log(e0_);
    log_e1_ = std::log(e1_);
  }
  void observe(double x) override {
    const double z = alpha_ * wealth_;
    if (z > 0.0 && z < 1.0) {
      const auto [c0, c1] = apply_capping(p0_, e0_, e1_, z);
      if (x == 1.0) {
        if (c1 != e1_) {
          log_cap_ += std::log(c1) - log_e1_;
        }
        ++n1_;
      } else {
        if (c0 != e0_) {
          log_cap_ += std::log(c0) - log_e0_;
        }
        ++n0_;
      }
    }
    update();
  }
  double evidence() const override { return wealth_; }
  std::unique_ptr<Walker> clone() const override { return std::make_unique<CappedWalker>(*this); }
  void append_key(std::vector<std::int64_t>& key) const override {
    key.push_back(n1_);
    key.push_back(key_bits(log_cap_));
  }

 private:
  // Wealth = e1^n1 e0^n0 times the product of capping corrections, summed in log space
  // so that uncapped paths with equal counts share the same double.
  void update() {
    double lw = log_cap_;
    if (n1_ > 0) lw += static_cast<double>(n1_) * log_e1_;
    if (n0_ > 0) lw += static_cast<double>(n0_) * log_e0_;
    wealth_ = std::exp(lw);
  }
  double p0_, alpha_;
  double e0_, e1_, log_e0_, log_e1_;
  std::int64_t n1_ = 0, n0_ = 0;
  double log_cap_ = 0.0;
  double wealth_ = 1.0;
};

}  // namespace

StarBets::StarBets(const TestingProblem& problem, std::int64_t deadline, std::string name)
    : p0_(bernoulli_p0(problem, "StarBets")), alpha_(problem.alpha), deadline_(deadline), name_(std::move(name)) {
  if (deadline < 1) throw DomainError("StarBets: deadline must be >= 1");
}

std::unique_ptr<Walker> StarBets::start() const { return std::make_unique<StarBetsWalker>(p0_, alpha_, deadline_); }

ScheduleMix::ScheduleMix(const TestingProblem& problem, std::int64_t deadline, std::string name)
    : p0_(bernoulli_p0(problem, "ScheduleMix")), alpha_(problem.alpha), deadline_(deadline), name_(std::move(name)) {
  if (deadline < 1) throw DomainError("ScheduleMix: deadline must be >= 1");
}

std::unique_ptr<Walker> ScheduleMix::start() const {
  return std::make_unique<ScheduleMixWalker>(p0_, alpha_, deadline_);
}

CappedConstant::CappedConstant(const TestingProblem& problem, double action, std::string name)
    : p0_(bernoulli_p0(problem, "CappedConstant")), alpha_(problem.alpha), action_(action), name_(std::move(name)) {
  if (!(action > 0.0 && action < 1.0)) throw DomainError("CappedConstant: action must lie in (0,1)");
  if (name_.empty()) {
    std::ostringstream n;
    n << "capped(" << action << ")";
    name_ = n.str();
  }
}

std::unique_ptr<Walker> CappedConstant::start() const {
  return std::make_unique<CappedWalker>(p0_, alpha_, action_);
}

}  // namespace tsbet
