#include "hypermatch/combinatorics.hpp"

namespace hypermatch {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("binomial overflow");
  }
  return static_cast<std::uint64_t>(r);
}

std::uint64_t ipow(std::uint64_t n, unsigned e) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < e; ++i)
    if (__builtin_mul_overflow(r, n, &r)) throw std::overflow_error("power overflow");
  return r;
}

BinomialTable::BinomialTable(std::size_t max_n, std::size_t max_k)
    : max_k_(max_k), table_((max_n + 1) * (max_k + 1), 0) {
  for (std::size_t a = 0; a <= max_n; ++a) {
    table_[a * (max_k_ + 1)] = 1;
    for (std::size_t b = 1; b <= max_k_ && b <= a; ++b) {
      std::uint64_t left = table_[(a - 1) * (max_k_ + 1) + b - 1];
      std::uint64_t up = b <= a - 1 ? table_[(a - 1) * (max_k_ + 1) + b] : 0;
      if (__builtin_add_overflow(left, up, &table_[a * (max_k_ + 1) + b]))
        throw std::overflow_error("binomial table overflow");
    }
  }
}

}  // namespace hypermatch
