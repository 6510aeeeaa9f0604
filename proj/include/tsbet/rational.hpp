#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

namespace tsbet {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Decimal-looking inputs (0.4, 2/3 rounded to double) map to the nearby small
// rational; anything else keeps its exact binary value.
Rational snap_probability(double p);

// Exact binary value of a finite double.
Rational exact_rational(double x);

double to_double(const Rational& q);

BigInt binomial(int n, int k);

// b^e for non-negative integer e.
Rational power(const Rational& b, int e);

// "num/den", or "num" for integers.
std::string to_string(const Rational& q);

BigInt floor_div(const Rational& q);

}  // namespace tsbet
