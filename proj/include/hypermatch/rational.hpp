#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hypermatch {

/// Non-negative exact rational used for every user-facing constant
/// (mu, eps, beta, ...). Thresholds like ceil(mu * n^r) are computed from it
/// without touching floating point.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  constexpr Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    auto g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  /// Accepts "3", "3/8", "0.005", "1e-3".
  static Rational parse(std::string_view text);

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;

  bool positive() const { return num > 0; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, std::int64_t d) { return Rational(a.num, a.den * d); }
};

/// ceil(q * m) for non-negative q and m, exact.
std::uint64_t ceil_times(const Rational& q, std::uint64_t m);

/// q * m <= count, exact.
bool at_least(std::uint64_t count, const Rational& q, std::uint64_t m);

}  // namespace hypermatch
