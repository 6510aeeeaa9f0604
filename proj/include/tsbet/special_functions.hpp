#pragma once

#include <cstdint>

namespace tsbet {

// Standard normal cdf F(x), evaluated through erfc to keep the lower tail accurate.
double normal_cdf(double x);

// Upper tail 1 - F(x).
double normal_sf(double x);

// F^{-1}(p) for p in (0,1). Rational approximation refined by one Halley step;
// relative error below 1e-14 over the whole open interval.
double inverse_normal_cdf(double p);

// log C(n, k), exact to rounding via lgamma.
double log_binomial(std::int64_t n, std::int64_t k);

// P(Bin(n, p) >= k) computed from log-space pmf terms with compensated
// summation. Returns 1 for k <= 0 and 0 for k > n.
double binomial_upper_tail(std::int64_t n, std::int64_t k, double p);

// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace tsbet
