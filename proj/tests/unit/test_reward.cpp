#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tsbet/errors.hpp"
#include "tsbet/reward.hpp"

using namespace tsbet;

TEST(Evaluate, Examples) {
  const RewardSpec hd = make_hard_deadline(30);
  EXPECT_EQ(evaluate(hd, 30), 1.0);
  EXPECT_EQ(evaluate(hd, 31), 0.0);
  EXPECT_EQ(evaluate(make_logistic(30, 2), 30), 0.5);
  EXPECT_EQ(evaluate(make_exponential(10), 0), 1.0);
  EXPECT_NEAR(evaluate(make_exponential(10), 7), std::exp(-0.7), 1e-16);
  EXPECT_NEAR(evaluate(make_logistic(30, 2), 34), 1.0 / (1.0 + std::exp(2.0)), 1e-16);
}

TEST(Evaluate, NeverRejectedIsWorthNothing) {
  for (const auto& spec : {make_hard_deadline(5), make_logistic(3, 1), make_exponential(2), make_table({1, 0.5})})
    EXPECT_EQ(evaluate(spec, kNeverRejected), 0.0);
}

TEST(Evaluate, TableIndexesByRound) {
  const RewardSpec t = make_table({1.0, 0.8, 0.3});
  EXPECT_EQ(evaluate(t, 0), 1.0);
  EXPECT_EQ(evaluate(t, 2), 0.3);
  EXPECT_EQ(evaluate(t, 3), 0.0);
}

TEST(Evaluate, Validation) {
  EXPECT_THROW(make_hard_deadline(0), DomainError);
  EXPECT_THROW(make_logistic(30, 0), DomainError);
  EXPECT_THROW(make_exponential(-1), DomainError);
  EXPECT_THROW(make_table({0.5, 0.7}), DomainError);
  EXPECT_THROW(make_table({-0.1}), DomainError);
  EXPECT_THROW(evaluate(make_exponential(1), -1), DomainError);
}

TEST(EffectiveHorizon, Examples) {
  EXPECT_EQ(effective_horizon(make_hard_deadline(30), 0.5), 30);
  EXPECT_EQ(effective_horizon(make_exponential(10), 1e-6), 139);
  EXPECT_EQ(effective_horizon(make_logistic(30, 2), 1e-6), 58);
  EXPECT_EQ(effective_horizon(make_logistic(30, 2), 1e-6),
            static_cast<std::int64_t>(std::ceil(30 + 2 * std::log(1e6 - 1))));
  EXPECT_EQ(solver_horizon(make_exponential(10, 150)), 150);
  EXPECT_EQ(solver_horizon(make_exponential(10)), 139);
}

TEST(Properties, MonotoneAndSmallBeyondHorizon) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.5, 60.0);
  for (int i = 0; i < 300; ++i) {
    std::vector<RewardSpec> specs{make_hard_deadline(1 + static_cast<std::int64_t>(u(rng))),
                                  make_logistic(u(rng), 0.1 + u(rng) / 10), make_exponential(u(rng))};
    std::vector<double> values;
    double v = 1.0;
    for (int k = 0; k < 20; ++k) values.push_back(v *= 0.5 + 0.5 * u(rng) / 60.0);
    specs.push_back(make_table(values));
    for (const auto& spec : specs) {
      for (double eps : {1e-2, 1e-6}) {
        const std::int64_t H = effective_horizon(spec, eps);
        for (std::int64_t t = 0; t <= H + 200; ++t) {
          ASSERT_GE(evaluate(spec, t), evaluate(spec, t + 1)) << describe(spec) << " t=" << t;
          ASSERT_GE(evaluate(spec, t), 0.0);
          if (t > H) ASSERT_LT(evaluate(spec, t), eps) << describe(spec) << " t=" << t;
        }
      }
    }
  }
}
