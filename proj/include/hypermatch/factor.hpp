#pragma once

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "hypermatch/hypergraph.hpp"

namespace hypermatch {

/// Vertex-disjoint copies of F, each given by its sorted vertex set.
struct PackingWitness {
  std::vector<std::vector<Vertex>> copies;
  bool disjoint = true;

  std::size_t covered() const;
};

/// Checks disjointness, that each set spans a copy of F in h, and (when
/// `must_cover` is set) that every vertex is covered.
bool verify_packing(const Hypergraph& h, const PatternGraph& f, const PackingWitness& w, bool must_cover);

struct MatchingCount {
  std::uint64_t count = 0;
  bool divisible = true;  ///< false when k does not divide n (count is then 0)
};

/// Exact number of perfect matchings (n <= 64). Memoised recursion that
/// branches on the uncovered vertex with the fewest usable edges.
MatchingCount count_perfect_matchings(const Hypergraph& h);

/// Perfect matchings of h[s] for a vertex subset s.
std::uint64_t count_perfect_matchings(const Hypergraph& h, VertexMask s);

/// Decides F-factorability of induced sub-hypergraphs H[S], S a vertex mask,
/// with a memo shared by all queries. Safe for concurrent queries: lookups
/// take a shared lock, insertions an exclusive one.
class FactorOracle {
 public:
  FactorOracle(const Hypergraph& h, const PatternGraph& f);

  std::size_t n() const { return n_; }
  int r() const { return r_; }
  const std::vector<VertexMask>& copy_sets() const { return copy_sets_; }

  bool has_factor(VertexMask s) const;

  /// A factor of H[s] as copy vertex sets, if one exists.
  std::optional<std::vector<VertexMask>> find_factor(VertexMask s) const;

  std::size_t memo_size() const;

 private:
  bool solve(VertexMask s) const;
  Vertex branch_vertex(VertexMask s) const;

  std::size_t n_;
  int r_;
  std::vector<VertexMask> copy_sets_;
  std::vector<std::vector<VertexMask>> by_vertex_;
  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<VertexMask, bool> memo_;
};

/// Perfect F-packing of the whole host, if any.
std::optional<PackingWitness> has_f_factor(const Hypergraph& h, const PatternGraph& f);

}  // namespace hypermatch
