#include "htep/rational.hpp"

#include <cctype>
#include <cstdlib>

namespace htep {

std::string to_string(const Rational& r) {
  std::string s = std::to_string(r.numerator());
  if (r.denominator() != 1) {
    s += '/';
    s += std::to_string(r.denominator());
  }
  return s;
}

std::optional<Rational> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '-' || text[i] == '+') {
    neg = text[i] == '-';
    ++i;
  }
  long long num = 0;
  long long den = 1;
  bool any_digit = false;
  for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
    num = num * 10 + (text[i] - '0');
    any_digit = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      num = num * 10 + (text[i] - '0');
      den *= 10;
      any_digit = true;
    }
  } else if (i < text.size() && text[i] == '/') {
    ++i;
    long long d = 0;
    bool den_digit = false;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      d = d * 10 + (text[i] - '0');
      den_digit = true;
    }
    if (!den_digit || d == 0) return std::nullopt;
    den = d;
  }
  if (!any_digit || i != text.size()) return std::nullopt;
  Rational r(num, den);
  return neg ? -r : r;
}

}  // namespace htep
