#include "hypermatch/rational.hpp"

#include <cctype>
#include <limits>

namespace hypermatch {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("rational overflow");
  return out;
}

std::int64_t parse_int(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty integer");
  std::int64_t v = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) throw std::invalid_argument("bad digit in number");
    v = checked_mul(v, 10);
    if (__builtin_add_overflow(v, c - '0', &v)) throw std::overflow_error("rational overflow");
  }
  return v;
}

std::int64_t pow10(int e) {
  std::int64_t p = 1;
  for (int i = 0; i < e; ++i) p = checked_mul(p, 10);
  return p;
}

}  // namespace

Rational Rational::parse(std::string_view text) {
  auto original = text;
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  try {
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
      Rational r(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
      return negative ? Rational(-r.num, r.den) : r;
    }
    int exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
      auto exp_text = text.substr(e + 1);
      bool neg_exp = false;
      if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
        neg_exp = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      exponent = static_cast<int>(parse_int(exp_text));
      if (neg_exp) exponent = -exponent;
      text = text.substr(0, e);
    }
    std::int64_t num = 0;
    std::int64_t den = 1;
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
      auto whole = text.substr(0, dot);
      auto frac = text.substr(dot + 1);
      if (whole.empty() && frac.empty()) throw std::invalid_argument("empty number");
      den = pow10(static_cast<int>(frac.size()));
      num = checked_mul(whole.empty() ? 0 : parse_int(whole), den);
      if (!frac.empty()) num += parse_int(frac);
    } else {
      num = parse_int(text);
    }
    if (exponent > 0) num = checked_mul(num, pow10(exponent));
    if (exponent < 0) den = checked_mul(den, pow10(-exponent));
    return Rational(negative ? -num : num, den);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("not a rational number: '" + std::string(original) + "'");
  }
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Rational operator*(const Rational& a, const Rational& b) {
  return Rational(checked_mul(a.num, b.num), checked_mul(a.den, b.den));
}

Rational operator+(const Rational& a, const Rational& b) {
  std::int64_t num;
  if (__builtin_add_overflow(checked_mul(a.num, b.den), checked_mul(b.num, a.den), &num))
    throw std::overflow_error("rational overflow");
  return Rational(num, checked_mul(a.den, b.den));
}

std::uint64_t ceil_times(const Rational& q, std::uint64_t m) {
  if (q.num <= 0) return 0;
  unsigned __int128 prod = static_cast<unsigned __int128>(q.num) * m;
  unsigned __int128 den = static_cast<unsigned __int128>(q.den);
  unsigned __int128 out = (prod + den - 1) / den;
  if (out > std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("threshold overflow");
  return static_cast<std::uint64_t>(out);
}

bool at_least(std::uint64_t count, const Rational& q, std::uint64_t m) {
  if (q.num <= 0) return true;
  return static_cast<unsigned __int128>(count) * static_cast<unsigned __int128>(q.den) >=
         static_cast<unsigned __int128>(q.num) * m;
}

}  // namespace hypermatch
