#pragma once

#include <cstddef>
#include <utility>
#include <variant>

namespace tsbet {

struct Bernoulli {
  double p;
};

struct Gaussian {
  double mu;
  double sigma;
};

using Distribution = std::variant<Bernoulli, Gaussian>;

Distribution make_bernoulli(double p);
Distribution make_gaussian(double mu, double sigma);
double mean(const Distribution& d);

struct TestingProblem {
  Distribution null;
  Distribution alternative;
  double alpha;
};

// Validates the instance: shared variant, distinct distributions, absolute
// continuity, alpha in (0,1). Gaussian pairs must share sigma.
TestingProblem make_problem(Distribution null, Distribution alternative, double alpha);

bool is_bernoulli(const TestingProblem& problem);

// Bernoulli outcomes: phi(a,1) = a/p0, phi(a,0) = (1-a)/(1-p0), a in [0,1].
struct BernoulliBet {
  double p0;
};

// phi(a,x) = exp(a(x-mu0)/sigma^2 - a^2/(2 sigma^2)), a in [a_min, a_max].
struct GaussianShift {
  double mu0;
  double sigma;
  double a_min = 0.0;
  double a_max = 4.0;
};

// phi(a,x) = 1 + a(x-m) for observations in [lo, hi].
struct CoinBet {
  double m;
  double lo = -1.0;
  double hi = 1.0;
};

using ActionFamily = std::variant<BernoulliBet, GaussianShift, CoinBet>;

// Natural family for a simple null: BernoulliBet or GaussianShift.
ActionFamily default_family(const TestingProblem& problem);

std::pair<double, double> action_interval(const ActionFamily& family);

// Action that leaves wealth unchanged.
double identity_action(const ActionFamily& family);

double payoff(const ActionFamily& family, double action, double outcome);

// Unchecked Bernoulli payoff pair (phi(a,0), phi(a,1)).
std::pair<double, double> bernoulli_payoffs(double p0, double action);

bool null_mean_check(const ActionFamily& family, double action, const Distribution& null,
                     double tolerance = 1e-12, std::size_t nodes = 41);

// Coin betting against an arbitrary null with known mean.
bool null_mean_check(const CoinBet& family, double action, double null_mean, double tolerance = 1e-12);

// Value on the extended real line. Infinite results must be inspected before use.
class ExtendedReal {
 public:
  enum class Kind { Finite, PlusInfinity, MinusInfinity };

  static ExtendedReal finite(double v) { return ExtendedReal(Kind::Finite, v); }
  static ExtendedReal plus_infinity() { return ExtendedReal(Kind::PlusInfinity, 0.0); }
  static ExtendedReal minus_infinity() { return ExtendedReal(Kind::MinusInfinity, 0.0); }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }
  // Throws DomainError when not finite.
  double value() const;

 private:
  ExtendedReal(Kind k, double v) : kind_(k), value_(v) {}
  Kind kind_;
  double value_;
};

// gamma(a) = E_alt[log phi(a, X)].
ExtendedReal log_growth(const TestingProblem& problem, const ActionFamily& family, double action);

double kl(const Distribution& alternative, const Distribution& null);

// log E_alt[(dpi1/dpi0)^beta] for Bernoulli pairs, stable for small beta.
double bernoulli_log_lr_moment(double p0, double p1, double beta);

double renyi(double order, const Distribution& alternative, const Distribution& null);

// pi_eta, the L_eta-tilt of the null with L_eta = (dpi1/dpi0)^{1/(1-eta)}.
Distribution tilt(const TestingProblem& problem, double eta);

}  // namespace tsbet
