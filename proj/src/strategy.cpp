#include "tsbet/strategy.hpp"

#include <bit>
#include <cmath>
#include <sstream>

#include "tsbet/errors.hpp"

namespace tsbet {

std::int64_t key_bits(double x) {
  if (x == 0.0) x = 0.0;  // fold -0
  return std::bit_cast<std::int64_t>(x);
}

namespace {

// Bernoulli constant bet: wealth depends only on the outcome counts, and is
// recomputed from them so that all orderings give the same double.
class CountingWalker : public Walker {
 public:
  CountingWalker(double log_e0, double log_e1) : log_e0_(log_e0), log_e1_(log_e1) {}
  void observe(double x) override {
    if (x == 1.0) {
      ++n1_;
    } else {
      ++n0_;
    }
    update();
  }
  double evidence() const override { return wealth_; }
  std::unique_ptr<Walker> clone() const override { return std::make_unique<CountingWalker>(*this); }
  void append_key(std::vector<std::int64_t>& key) const override { key.push_back(n1_); }

 private:
  void update() {
    double lw = 0.0;
    if (n1_ > 0) lw += static_cast<double>(n1_) * log_e1_;
    if (n0_ > 0) lw += static_cast<double>(n0_) * log_e0_;
    wealth_ = std::exp(lw);
  }
  double log_e0_;
  double log_e1_;
  std::int64_t n1_ = 0;
  std::int64_t n0_ = 0;
  double wealth_ = 1.0;
};

class LogWealthWalker : public Walker {
 public:
  LogWealthWalker(ActionFamily family, double action) : family_(std::move(family)), action_(action) {}
  void observe(double x) override {
    const double e = payoff(family_, action_, x);
    log_wealth_ += e > 0.0 ? std::log(e) : -INFINITY;
  }
  double evidence() const override { return std::exp(log_wealth_); }
  std::unique_ptr<Walker> clone() const override { return std::make_unique<LogWealthWalker>(*this); }
  void append_key(std::vector<std::int64_t>& key) const override { key.push_back(key_bits(log_wealth_)); }

 private:
  ActionFamily family_;
  double action_;
  double log_wealth_ = 0.0;
};

}  // namespace

ConstantAction::ConstantAction(ActionFamily family, double action, std::string name)
    : family_(std::move(family)), action_(action), name_(std::move(name)) {
  const auto [lo, hi] = action_interval(family_);
  if (!(action >= lo && action <= hi)) {
    std::ostringstream msg;
    msg << "constant action " << action << " outside [" << lo << ", " << hi << "]";
    throw DomainError(msg.str());
  }
  if (name_.empty()) {
    std::ostringstream n;
    n << "constant(" << action << ")";
    name_ = n.str();
  }
}

std::unique_ptr<Walker> ConstantAction::start() const {
  if (const auto* b = std::get_if<BernoulliBet>(&family_)) {
    const auto [e0, e1] = bernoulli_payoffs(b->p0, action_);
    return std::make_unique<CountingWalker>(e0 > 0.0 ? std::log(e0) : -INFINITY,
                                            e1 > 0.0 ? std::log(e1) : -INFINITY);
  }
  return std::make_unique<LogWealthWalker>(family_, action_);
}

}  // namespace tsbet
