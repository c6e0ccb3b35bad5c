#pragma once

#include <bit>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hypermatch {

using Vertex = std::uint32_t;

/// Vertex subset of a host with at most 64 vertices. All brute-force oracles
/// work on masks; larger hosts are handled through induced sub-hypergraphs.
using VertexMask = std::uint64_t;

inline constexpr int kMaskBits = 64;

constexpr VertexMask bit(Vertex v) { return VertexMask{1} << v; }

inline int popcount(VertexMask m) { return std::popcount(m); }

inline Vertex lowest_vertex(VertexMask m) { return static_cast<Vertex>(std::countr_zero(m)); }

inline VertexMask full_mask(std::size_t n) {
  if (n > static_cast<std::size_t>(kMaskBits)) throw std::length_error("vertex mask supports at most 64 vertices");
  return n == 64 ? ~VertexMask{0} : (VertexMask{1} << n) - 1;
}

inline std::vector<Vertex> mask_vertices(VertexMask m) {
  std::vector<Vertex> out;
  out.reserve(static_cast<std::size_t>(popcount(m)));
  while (m) {
    out.push_back(lowest_vertex(m));
    m &= m - 1;
  }
  return out;
}

template <typename Range>
VertexMask to_mask(const Range& vertices) {
  VertexMask m = 0;
  for (auto v : vertices) {
    if (v >= static_cast<decltype(v)>(kMaskBits)) throw std::length_error("vertex id exceeds mask width");
    m |= bit(static_cast<Vertex>(v));
  }
  return m;
}

/// C(n, k) with overflow detection; 0 when k > n.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// n^e with overflow detection.
std::uint64_t ipow(std::uint64_t n, unsigned e);

/// Visits every sorted k-subset of `pool` (in lexicographic order of
/// positions). The callback receives the current combination; returning
/// false stops the walk. Returns false iff stopped early.
template <typename T, typename F>
bool for_each_combination(const std::vector<T>& pool, std::size_t k, F&& visit) {
  const std::size_t n = pool.size();
  if (k > n) return true;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  std::vector<T> current(k);
  while (true) {
    for (std::size_t i = 0; i < k; ++i) current[i] = pool[idx[i]];
    if (!visit(static_cast<const std::vector<T>&>(current))) return false;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return true;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

/// Every k-subset of the vertices in `pool` as a mask, in increasing
/// lexicographic order of sorted vertex tuples.
template <typename F>
bool for_each_submask(VertexMask pool, int k, F&& visit) {
  auto vs = mask_vertices(pool);
  return for_each_combination(vs, static_cast<std::size_t>(k), [&](const std::vector<Vertex>& c) {
    return visit(to_mask(c));
  });
}

/// Pascal table C(a, b) for a <= max_n, b <= max_k; used for colex ranks.
class BinomialTable {
 public:
  BinomialTable(std::size_t max_n, std::size_t max_k);
  std::uint64_t operator()(std::size_t a, std::size_t b) const {
    return b > max_k_ || a < b ? 0 : table_[a * (max_k_ + 1) + b];
  }
  /// Colexicographic rank of a sorted k-subset: sum_i C(s_i, i + 1).
  std::uint64_t colex_rank(const Vertex* sorted, std::size_t k) const {
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < k; ++i) r += (*this)(sorted[i], i + 1);
    return r;
  }

 private:
  std::size_t max_k_;
  std::vector<std::uint64_t> table_;
};

}  // namespace hypermatch
