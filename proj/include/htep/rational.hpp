#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace htep {

// Exact rational time arithmetic. Strict inequalities in schedules are decided
// exactly, so consistency verdicts do not depend on floating-point rounding.
using Rational = boost::rational<long long>;

inline Rational rat(long long num, long long den = 1) { return Rational(num, den); }

std::string to_string(const Rational& r);

// Accepts "3", "-3", "3/2" and decimal literals like "2.5" or ".125".
std::optional<Rational> parse_rational(const std::string& text);

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

}  // namespace htep
