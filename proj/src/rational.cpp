#include "tsbet/rational.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <vector>

#include "tsbet/errors.hpp"

namespace tsbet {

Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw DomainError("exact_rational: non-finite input");
  if (x == 0.0) return Rational(0);
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);
  // mantissa * 2^53 is an integer
  const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  Rational q(scaled);
  exponent -= 53;
  if (exponent >= 0) {
    q *= Rational(BigInt(1) << exponent);
  } else {
    q /= Rational(BigInt(1) << (-exponent));
  }
  return q;
}

Rational snap_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("snap_probability: p outside [0,1]");
  // Continued-fraction convergents; accept the first one with a small
  // denominator that rounds back to within a few ulps of p.
  const double tolerance = 4.0 * std::numeric_limits<double>::epsilon() * std::max(p, 1e-300);
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double x = p;
  for (int i = 0; i < 64; ++i) {
    const double a = std::floor(x);
    if (a > 1e12) break;
    const auto ai = static_cast<long long>(a);
    const long long h2 = ai * h1 + h0;
    const long long k2 = ai * k1 + k0;
    if (k2 > 1000000) break;
    h0 = h1;
    h1 = h2;
    k0 = k1;
    k1 = k2;
    const double approx = static_cast<double>(h1) / static_cast<double>(k1);
    if (std::abs(approx - p) <= tolerance) return Rational(h1, k1);
    const double frac = x - a;
    if (frac == 0.0) break;
    x = 1.0 / frac;
  }
  return exact_rational(p);
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

BigInt binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return BigInt(0);
  static std::mutex mutex;
  static std::vector<std::vector<BigInt>> pascal{{BigInt(1)}};
  std::lock_guard<std::mutex> lock(mutex);
  while (static_cast<int>(pascal.size()) <= n) {
    const auto& prev = pascal.back();
    std::vector<BigInt> row(prev.size() + 1);
    row.front() = 1;
    row.back() = 1;
    for (std::size_t j = 1; j + 1 < row.size(); ++j) row[j] = prev[j - 1] + prev[j];
    pascal.push_back(std::move(row));
  }
  return pascal[n][k];
}

Rational power(const Rational& b, int e) {
  if (e < 0) throw DomainError("power: negative exponent");
  Rational result(1);
  Rational base = b;
  while (e > 0) {
    if (e & 1) result *= base;
    e >>= 1;
    if (e) base *= base;
  }
  return result;
}

std::string to_string(const Rational& q) {
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

BigInt floor_div(const Rational& q) {
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  BigInt quotient = num / den;  // truncates toward zero
  if (num < 0 && quotient * den != num) quotient -= 1;
  return quotient;
}

}  // namespace tsbet
