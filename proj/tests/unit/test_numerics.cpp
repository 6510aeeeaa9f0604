#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "tsbet/errors.hpp"
#include "tsbet/quadrature.hpp"
#include "tsbet/rational.hpp"
#include "tsbet/root_finding.hpp"
#include "tsbet/special_functions.hpp"

using namespace tsbet;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

double reference_quantile(double p) {
  boost::math::normal_distribution<Big> n;
  return static_cast<double>(boost::math::quantile(n, Big(p)));
}

}  // namespace

TEST(InverseNormal, MatchesFiftyDigitQuantile) {
  std::vector<double> ps{1e-300, 1e-100, 1e-20, 1e-10, 1e-5, 0.001, 0.01, 0.025, 0.05, 0.1, 0.2, 0.3,
                         0.4,    0.45,   0.49,  0.5,   0.51, 0.6,   0.75, 0.9,   0.95, 0.975, 0.99, 0.999999};
  for (int i = 1; i < 200; ++i) ps.push_back(i / 200.0);
  for (double p : ps) {
    const double want = reference_quantile(p);
    const double got = inverse_normal_cdf(p);
    EXPECT_NEAR(got, want, 1e-13 * std::max(1.0, std::abs(want))) << "p=" << p;
  }
}

TEST(InverseNormal, RoundTripsThroughCdf) {
  // Go through the lower tail, where the probability is well conditioned;
  // the upper half follows by symmetry.
  for (double x = -8.0; x <= 8.0; x += 0.37) {
    const double back = x <= 0 ? inverse_normal_cdf(normal_cdf(x)) : -inverse_normal_cdf(normal_sf(x));
    EXPECT_NEAR(back, x, 1e-11 * std::max(1.0, std::abs(x))) << x;
  }
}

TEST(InverseNormal, RejectsClosedEndpoints) {
  EXPECT_THROW(inverse_normal_cdf(0.0), DomainError);
  EXPECT_THROW(inverse_normal_cdf(1.0), DomainError);
  EXPECT_THROW(inverse_normal_cdf(std::nan("")), DomainError);
}

TEST(NormalCdf, TailsAgreeWithHighPrecisionErfc) {
  for (double x : {-30.0, -10.0, -3.0, -1.0, 0.0, 0.5, 2.0, 6.0, 12.0, 35.0}) {
    const Big want_sf = boost::math::erfc(Big(x) / boost::multiprecision::sqrt(Big(2))) / 2;
    const Big want_cdf = boost::math::erfc(-Big(x) / boost::multiprecision::sqrt(Big(2))) / 2;
    const double w = static_cast<double>(want_sf);
    const double wc = static_cast<double>(want_cdf);
    // d log sf / d log x is about x^2, so rounding x/sqrt(2) alone costs x^2 ulps.
    const double rel = 4 * std::numeric_limits<double>::epsilon() * (1 + x * x);
    EXPECT_NEAR(normal_sf(x), w, rel * w) << x;
    EXPECT_NEAR(normal_cdf(x), wc, rel * wc) << x;
  }
}

TEST(Quadrature, WeightsAndNodesOf41PointRule) {
  const NormalRule& r = normal_rule(41);
  ASSERT_EQ(r.nodes.size(), 41u);
  double total = 0.0;
  for (double w : r.weights) {
    EXPECT_GT(w, 0.0);
    total += w;
  }
  EXPECT_NEAR(total, 1.0, 1e-14);
  for (std::size_t i = 0; i < 41; ++i) {
    EXPECT_NEAR(r.nodes[i], -r.nodes[40 - i], 1e-13);
    if (i) { EXPECT_LT(r.nodes[i - 1], r.nodes[i]); }
  }
  EXPECT_EQ(r.nodes[20], 0.0);
}

TEST(Quadrature, IntegratesPolynomialMomentsExactly) {
  // E[Z^2m] = (2m-1)!!, and an n-point rule is exact up to degree 2n-1.
  double double_factorial = 1.0;
  for (int m = 1; m <= 12; ++m) {
    double_factorial *= 2 * m - 1;
    const double got = normal_expectation([m](double z) { return std::pow(z, 2 * m); }, 0.0, 1.0, 41);
    EXPECT_NEAR(got, double_factorial, 1e-11 * double_factorial) << m;
    const double odd = normal_expectation([m](double z) { return std::pow(z, 2 * m - 1); }, 0.0, 1.0, 41);
    EXPECT_NEAR(odd, 0.0, 1e-9 * double_factorial);
  }
}

TEST(Quadrature, LognormalMeanAndOtherSizes) {
  for (std::size_t n : {5u, 20u, 41u, 80u}) {
    const double got = normal_expectation([](double x) { return std::exp(x); }, 0.3, 1.0, n);
    EXPECT_NEAR(got, std::exp(0.3 + 0.5), n >= 20 ? 1e-12 : 1e-3) << n;
  }
}

TEST(RootFinding, CubeRootToTolerance) {
  const RootResult r = bracketed_root([](double x) { return x * x * x - 2.0; }, 0.0, 3.0, 1e-14);
  EXPECT_NEAR(r.root, std::cbrt(2.0), 1e-13);
}

TEST(RootFinding, AgreesWithPlainBisection) {
  auto f = [](double x) { return std::exp(-x) - x; };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(bracketed_root(f, 0.0, 1.0, 1e-15).root, lo, 1e-14);
}

TEST(RootFinding, ReportsMissingSignChangeAndIterationLimit) {
  EXPECT_THROW(bracketed_root([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12), SolverError);
  EXPECT_THROW(bracketed_root([](double x) { return x * x * x - 0.3; }, 0.0, 1.0, 1e-300, 0.0, 3), ConvergenceError);
}

TEST(Binomial, LogBinomialAndTailAgreeWithRationals) {
  EXPECT_NEAR(log_binomial(20, 10), std::log(184756.0), 1e-12);
  for (int n : {5, 17, 30}) {
    for (double p : {0.1, 0.4, 0.5, 0.83}) {
      const Rational rp = exact_rational(p);
      for (int k = -1; k <= n + 1; ++k) {
        Rational tail = 0;
        for (int j = std::max(k, 0); j <= n; ++j) tail += Rational(binomial(n, j)) * power(rp, j) * power(1 - rp, n - j);
        const double want = to_double(tail);
        EXPECT_NEAR(binomial_upper_tail(n, k, p), want, 1e-13 * std::max(want, 1e-300) + 1e-300)
            << n << " " << k << " " << p;
      }
    }
  }
}

TEST(CompensatedSum, RecoversCancelledTerms) {
  CompensatedSum s;
  for (double x : {1.0, 1e100, 1.0, -1e100}) s.add(x);
  EXPECT_EQ(s.value(), 2.0);
}

TEST(Rational, SnapsDecimalInputs) {
  EXPECT_EQ(snap_probability(0.4), Rational(2, 5));
  EXPECT_EQ(snap_probability(2.0 / 3.0), Rational(2, 3));
  EXPECT_EQ(snap_probability(0.05), Rational(1, 20));
  const double odd = 0.123456789012345;
  EXPECT_EQ(snap_probability(odd), exact_rational(odd));
  EXPECT_NE(exact_rational(0.1), Rational(1, 10));
  EXPECT_EQ(to_double(exact_rational(0.1)), 0.1);
}

TEST(Rational, CombinatoricsAndFormatting) {
  EXPECT_EQ(binomial(20, 10), BigInt(184756));
  EXPECT_EQ(binomial(60, 30), BigInt("118264581564861424"));
  EXPECT_EQ(binomial(5, 7), BigInt(0));
  EXPECT_EQ(power(Rational(3, 4), 3), Rational(27, 64));
  EXPECT_EQ(to_string(Rational(36, 64)), "9/16");
  EXPECT_EQ(to_string(Rational(4)), "4");
  EXPECT_EQ(floor_div(Rational(106, 1) + Rational(1, 3)), BigInt(106));
}
