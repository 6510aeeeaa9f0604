#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tsbet/errors.hpp"
#include "tsbet/model.hpp"
#include "tsbet/quadrature.hpp"

using namespace tsbet;

namespace {

TestingProblem bern(double p0, double p1, double alpha = 0.05) {
  return make_problem(make_bernoulli(p0), make_bernoulli(p1), alpha);
}

TestingProblem gauss(double mu, double sigma = 1.0, double alpha = 0.05) {
  return make_problem(make_gaussian(0.0, sigma), make_gaussian(mu, sigma), alpha);
}

// Direct two-point evaluation of (1/(xi-1)) log sum_x p1(x)^xi p0(x)^(1-xi).
double renyi_two_point(double xi, double p0, double p1) {
  const double s = std::pow(p1, xi) * std::pow(p0, 1 - xi) + std::pow(1 - p1, xi) * std::pow(1 - p0, 1 - xi);
  return std::log(s) / (xi - 1);
}

}  // namespace

TEST(Payoff, BernoulliExamples) {
  EXPECT_EQ(payoff(BernoulliBet{0.5}, 0.5, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(payoff(BernoulliBet{0.4}, 0.6, 1.0), 0.6 / 0.4);
  EXPECT_DOUBLE_EQ(payoff(BernoulliBet{0.4}, 0.6, 0.0), 0.4 / 0.6);
}

TEST(Payoff, GaussianZeroShiftIsConstant) {
  EXPECT_EQ(payoff(GaussianShift{0.0, 1.0}, 0.0, 3.7), 1.0);
  EXPECT_NEAR(payoff(GaussianShift{0.0, 2.0}, 1.0, 1.5), std::exp(1.0 * 1.5 / 4.0 - 1.0 / 8.0), 1e-15);
}

TEST(Payoff, CoinBetLinear) {
  EXPECT_DOUBLE_EQ(payoff(CoinBet{0.0}, 0.5, 1.0), 1.5);
  EXPECT_DOUBLE_EQ(payoff(CoinBet{0.0}, 0.5, -1.0), 0.5);
}

TEST(Payoff, Errors) {
  EXPECT_THROW(payoff(BernoulliBet{0.4}, 1.2, 1.0), DomainError);
  EXPECT_THROW(payoff(BernoulliBet{0.4}, -0.1, 1.0), DomainError);
  EXPECT_THROW(payoff(BernoulliBet{0.4}, 0.5, 0.5), DomainError);
  EXPECT_THROW(payoff(GaussianShift{0.0, 1.0}, 4.5, 0.0), DomainError);
  EXPECT_THROW(payoff(CoinBet{0.0}, 0.5, 2.0), DomainError);
}

TEST(NullMean, Examples) {
  EXPECT_TRUE(null_mean_check(BernoulliBet{0.4}, 0.6, make_bernoulli(0.4)));
  EXPECT_TRUE(null_mean_check(GaussianShift{0.0, 1.0}, 2.0, make_gaussian(0.0, 1.0)));
  EXPECT_TRUE(null_mean_check(CoinBet{0.0}, 0.5, 0.0));
  EXPECT_TRUE(null_mean_check(CoinBet{0.0}, -0.5, 0.0));
  // A null with a larger mean than the bet assumes is not covered.
  EXPECT_FALSE(null_mean_check(CoinBet{0.0}, 0.5, 0.3));
  EXPECT_THROW(null_mean_check(BernoulliBet{0.4}, 0.6, make_gaussian(0.0, 1.0)), DomainError);
  EXPECT_THROW(null_mean_check(GaussianShift{0.0, 1.0}, 1.0, make_bernoulli(0.4)), DomainError);
}

TEST(NullMean, BernoulliPropertyExact) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double p0 = std::clamp(u(rng), 1e-3, 1 - 1e-3);
    const double a = u(rng);
    const auto [e0, e1] = bernoulli_payoffs(p0, a);
    EXPECT_NEAR(p0 * e1 + (1 - p0) * e0, 1.0, 4e-16 * std::max(e0, e1) + 2e-16);
    EXPECT_TRUE(null_mean_check(BernoulliBet{p0}, a, make_bernoulli(p0)));
  }
}

TEST(NullMean, GaussianShiftQuadratureProperty) {
  const NormalRule& rule = normal_rule(41);
  // Default interval [0, 4] at unit scale: standardised shifts a / sigma up to 4.
  for (double sigma : {0.5, 1.0, 2.0}) {
    for (int k = 0; k <= 80; ++k) {
      const double a = std::min(4.0, 0.05 * k * sigma);
      const GaussianShift fam{0.3, sigma};
      double m = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) m += rule.weights[i] * payoff(fam, a, 0.3 + sigma * rule.nodes[i]);
      EXPECT_NEAR(m, 1.0, 1e-8) << sigma << " " << a;
    }
  }
}

TEST(Problem, Validation) {
  EXPECT_NO_THROW(bern(0.4, 0.6));
  EXPECT_THROW(bern(0.4, 0.4), DomainError);
  EXPECT_THROW(bern(0.0, 0.6), DomainError);
  EXPECT_THROW(bern(0.4, 0.6, 1.0), DomainError);
  EXPECT_THROW(bern(0.4, 0.6, 0.0), DomainError);
  EXPECT_THROW(make_problem(make_bernoulli(0.4), make_gaussian(0.0, 1.0), 0.05), DomainError);
  EXPECT_THROW(make_problem(make_gaussian(0.0, 1.0), make_gaussian(1.0, 2.0), 0.05), DomainError);
  EXPECT_THROW(make_bernoulli(1.5), DomainError);
  EXPECT_THROW(make_gaussian(0.0, 0.0), DomainError);
}

TEST(LogGrowth, Examples) {
  const TestingProblem g = gauss(0.25);
  const GaussianShift fam{0.0, 1.0};
  EXPECT_NEAR(log_growth(g, fam, 0.25).value(), 0.03125, 1e-15);
  EXPECT_NEAR(log_growth(g, fam, 0.5).value(), 0.0, 1e-15);
  const TestingProblem b = bern(0.5, 0.7);
  EXPECT_NEAR(log_growth(b, BernoulliBet{0.5}, 0.7).value(), 0.7 * std::log(1.4) + 0.3 * std::log(0.6), 1e-15);
  EXPECT_NEAR(log_growth(b, BernoulliBet{0.5}, 0.7).value(), 0.082282, 1e-6);
}

TEST(LogGrowth, ZeroPayoffIsMinusInfinity) {
  const TestingProblem b = bern(0.5, 0.7);
  const ExtendedReal g = log_growth(b, BernoulliBet{0.5}, 1.0);
  EXPECT_EQ(g.kind(), ExtendedReal::Kind::MinusInfinity);
  EXPECT_THROW(g.value(), DomainError);
}

TEST(LogGrowth, GaussianClosedFormMatchesQuadrature) {
  const TestingProblem g = gauss(0.6, 1.5);
  const GaussianShift fam{0.0, 1.5};
  for (double a : {0.1, 0.6, 1.3, 3.0}) {
    const double q = normal_expectation([&](double x) { return std::log(payoff(fam, a, x)); }, 0.6, 1.5);
    EXPECT_NEAR(log_growth(g, fam, a).value(), q, 1e-12);
  }
}

TEST(Kl, Examples) {
  EXPECT_EQ(kl(make_bernoulli(0.3), make_bernoulli(0.3)), 0.0);
  EXPECT_NEAR(kl(make_gaussian(0.25, 1.0), make_gaussian(0.0, 1.0)), 0.03125, 1e-16);
  EXPECT_NEAR(kl(make_bernoulli(0.7), make_bernoulli(0.5)), 0.7 * std::log(1.4) + 0.3 * std::log(0.6), 1e-15);
  EXPECT_THROW(kl(make_bernoulli(0.7), make_bernoulli(0.0)), InfiniteDivergence);
  EXPECT_THROW(kl(make_bernoulli(0.7), make_bernoulli(1.0)), InfiniteDivergence);
}

TEST(Kl, NonNegativeWithEqualityOnlyAtIdentity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(rng), q = u(rng);
    const double d = kl(make_bernoulli(p), make_bernoulli(q));
    EXPECT_GE(d, 0.0);
    if (p != q) { EXPECT_GT(d, 0.0); }
  }
}

TEST(Renyi, Examples) {
  EXPECT_NEAR(renyi(2.0, make_gaussian(0.25, 1.0), make_gaussian(0.0, 1.0)), 0.0625, 1e-16);
  EXPECT_NEAR(renyi(2.0, make_bernoulli(0.6), make_bernoulli(0.4)), renyi_two_point(2.0, 0.4, 0.6), 1e-14);
  const double k = kl(make_bernoulli(0.7), make_bernoulli(0.5));
  EXPECT_NEAR(renyi(1.0 + 1e-7, make_bernoulli(0.7), make_bernoulli(0.5)), k, 1e-6);
  EXPECT_THROW(renyi(1.0, make_bernoulli(0.7), make_bernoulli(0.5)), DomainError);
}

TEST(Renyi, NondecreasingInOrderAndMatchesTwoPointSum) {
  for (auto [p0, p1] : {std::pair{0.5, 0.7}, {0.4, 0.6}, {0.1, 0.3}, {0.8, 0.2}}) {
    double prev = 0.0;
    for (double xi = 1.01; xi < 20.0; xi *= 1.1) {
      const double d = renyi(xi, make_bernoulli(p1), make_bernoulli(p0));
      EXPECT_GE(d, prev - 1e-15);
      EXPECT_NEAR(d, renyi_two_point(xi, p0, p1), 1e-12 * std::max(1.0, d));
      prev = d;
    }
  }
}

TEST(Renyi, GaussianMatchesQuadratureMoment) {
  // D_xi = (1/(xi-1)) log E_null[LR^xi], LR = exp(mu x - mu^2/2).
  for (double xi : {1.5, 2.0, 3.0}) {
    const double m = normal_expectation([&](double x) { return std::exp(xi * (0.4 * x - 0.08)); }, 0.0, 1.0);
    EXPECT_NEAR(renyi(xi, make_gaussian(0.4, 1.0), make_gaussian(0.0, 1.0)), std::log(m) / (xi - 1), 1e-12);
  }
}

TEST(Tilt, LimitsAndClosedForms) {
  const TestingProblem b = bern(0.5, 0.75);
  EXPECT_NEAR(std::get<Bernoulli>(tilt(b, 1e-12)).p, 0.75, 1e-11);
  // Two-point normalisation of p0(x) L_eta(x), L_eta = (p1/p0)^(1/(1-eta)).
  const double eta = 0.5, xi = 2.0;
  const double w1 = 0.5 * std::pow(0.75 / 0.5, xi), w0 = 0.5 * std::pow(0.25 / 0.5, xi);
  EXPECT_NEAR(std::get<Bernoulli>(tilt(b, eta)).p, w1 / (w1 + w0), 1e-15);

  const TestingProblem g = gauss(0.6);
  const double eta_star = 2.0 / (0.36 * 10 + 2.0);
  const auto t = std::get<Gaussian>(tilt(g, eta_star));
  EXPECT_NEAR(t.mu, 0.6 + 2.0 / (0.6 * 10.0), 1e-14);
  EXPECT_EQ(t.sigma, 1.0);
  EXPECT_THROW(tilt(g, 0.0), DomainError);
  EXPECT_THROW(tilt(g, 1.0), DomainError);
}

TEST(Tilt, ProofIdentityByTwoPointSums) {
  // E_alt[(dpi_eta/dpi0)^eta] = E_null[L_eta]^(1-eta).
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.05, 0.95), e(0.01, 0.95);
  for (int i = 0; i < 500; ++i) {
    const double p0 = u(rng), p1 = u(rng), eta = e(rng);
    if (std::abs(p0 - p1) < 1e-3) continue;
    const TestingProblem pr = bern(p0, p1);
    const double ps = std::get<Bernoulli>(tilt(pr, eta)).p;
    const double lhs = p1 * std::pow(ps / p0, eta) + (1 - p1) * std::pow((1 - ps) / (1 - p0), eta);
    const double xi = 1 / (1 - eta);
    const double norm = p0 * std::pow(p1 / p0, xi) + (1 - p0) * std::pow((1 - p1) / (1 - p0), xi);
    EXPECT_NEAR(lhs, std::pow(norm, 1 - eta), 1e-10 * lhs) << p0 << " " << p1 << " " << eta;
  }
}

TEST(Families, IntervalsAndIdentity) {
  EXPECT_EQ(action_interval(BernoulliBet{0.3}), std::make_pair(0.0, 1.0));
  EXPECT_EQ(action_interval(GaussianShift{0.0, 1.0}), std::make_pair(0.0, 4.0));
  const auto [lo, hi] = action_interval(CoinBet{0.0});
  EXPECT_DOUBLE_EQ(lo, -1.0);
  EXPECT_DOUBLE_EQ(hi, 1.0);
  EXPECT_EQ(identity_action(BernoulliBet{0.3}), 0.3);
  EXPECT_EQ(identity_action(GaussianShift{0.0, 1.0}), 0.0);
  EXPECT_EQ(identity_action(CoinBet{0.0}), 0.0);
  EXPECT_TRUE(std::holds_alternative<BernoulliBet>(default_family(bern(0.4, 0.6))));
  EXPECT_TRUE(std::holds_alternative<GaussianShift>(default_family(gauss(0.6))));
}
