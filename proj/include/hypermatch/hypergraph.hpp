#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hypermatch/combinatorics.hpp"

namespace hypermatch {

/// Per-part intersection sizes of a vertex set with an ordered partition.
struct IndexVector {
  std::vector<int> coords;

  IndexVector() = default;
  explicit IndexVector(std::size_t d) : coords(d, 0) {}
  IndexVector(std::initializer_list<int> c) : coords(c) {}
  explicit IndexVector(std::vector<int> c) : coords(std::move(c)) {}

  std::size_t dim() const { return coords.size(); }
  int operator[](std::size_t i) const { return coords[i]; }
  int& operator[](std::size_t i) { return coords[i]; }

  /// |v|: sum of the coordinates.
  int norm() const;

  IndexVector& operator+=(const IndexVector& o);
  IndexVector& operator-=(const IndexVector& o);
  friend IndexVector operator+(IndexVector a, const IndexVector& b) { return a += b; }
  friend IndexVector operator-(IndexVector a, const IndexVector& b) { return a -= b; }

  static IndexVector unit(std::size_t d, std::size_t j);

  friend auto operator<=>(const IndexVector&, const IndexVector&) = default;
  friend bool operator==(const IndexVector&, const IndexVector&) = default;

  std::string str() const;
};

/// All r-vectors of dimension d (non-negative, summing to r) in increasing
/// lexicographic order. There are C(r + d - 1, r) of them.
std::vector<IndexVector> all_vectors_of_norm(std::size_t d, int r);

/// How the (k-1)-set link index is materialised.
struct LinkIndexPolicy {
  /// Eager CSR index when n * C(n, k-1) is at most this many entries.
  std::uint64_t eager_budget = 50'000'000;
};

/// k-uniform hypergraph on vertices {0, ..., n-1}. Edges are stored sorted
/// and deduplicated in lexicographic order ("canonical edge order").
/// Immutable after construction and safe to share between threads.
class Hypergraph {
 public:
  Hypergraph() = default;

  /// Validates and canonicalises. Throws std::invalid_argument for wrong
  /// arity, repeated vertices inside an edge or out-of-range ids; duplicate
  /// edges are merged.
  Hypergraph(int k, std::size_t n, std::vector<std::vector<Vertex>> edges, LinkIndexPolicy policy = {});

  int k() const { return k_; }
  std::size_t n() const { return n_; }
  std::size_t edge_count() const { return k_ == 0 ? 0 : flat_.size() / static_cast<std::size_t>(k_); }
  bool empty() const { return edge_count() == 0; }

  std::span<const Vertex> edge(std::size_t i) const {
    return {flat_.data() + i * static_cast<std::size_t>(k_), static_cast<std::size_t>(k_)};
  }
  /// Edge as a mask (requires n <= 64).
  VertexMask edge_mask(std::size_t i) const { return masks_.at(i); }
  const std::vector<VertexMask>& edge_masks() const { return masks_; }
  bool mask_capable() const { return n_ <= static_cast<std::size_t>(kMaskBits); }

  /// Position of a sorted k-set in canonical edge order, if present.
  std::optional<std::size_t> find_edge(std::span<const Vertex> sorted) const;
  bool has_edge(std::span<const Vertex> sorted) const { return find_edge(sorted).has_value(); }

  /// Vertices v with S + {v} an edge, for a sorted (k-1)-set S.
  std::vector<Vertex> link(std::span<const Vertex> sorted) const;

  /// deg(S) for any sorted S with |S| <= k.
  std::uint64_t codegree(std::span<const Vertex> sorted) const;

  bool link_index_eager() const { return eager_; }

  /// Sub-hypergraph induced on `vertices`, relabelled so that vertices[i]
  /// becomes i.
  Hypergraph induced(std::span<const Vertex> vertices) const;

  /// Same vertex set, keeping only the edges whose positions are listed.
  Hypergraph with_edge_subset(std::span<const std::size_t> positions) const;

  std::vector<std::vector<Vertex>> edge_list() const;

  /// Canonical form of an arbitrary vertex list (sorted); throws on repeats
  /// or out-of-range ids.
  std::vector<Vertex> canonical_set(std::span<const Vertex> s) const;

  friend bool operator==(const Hypergraph& a, const Hypergraph& b) {
    return a.k_ == b.k_ && a.n_ == b.n_ && a.flat_ == b.flat_;
  }

 private:
  struct LazyLinks;
  void build_index(LinkIndexPolicy policy);
  std::vector<Vertex> scan_link(std::span<const Vertex> sorted) const;

  int k_ = 0;
  std::size_t n_ = 0;
  std::vector<Vertex> flat_;
  std::vector<VertexMask> masks_;
  bool eager_ = false;
  std::shared_ptr<const BinomialTable> binom_;
  std::vector<std::uint64_t> link_offsets_;
  std::vector<Vertex> link_vertices_;
  std::shared_ptr<LazyLinks> lazy_;
};

/// delta_l(H): minimum codegree over all l-subsets, 1 <= l <= k-1.
std::uint64_t min_degree(const Hypergraph& h, int l);

/// Ordered partition V_1, ..., V_d of {0, ..., n-1}; every part nonempty.
class VertexPartition {
 public:
  VertexPartition() = default;
  VertexPartition(std::size_t d, std::vector<int> assignment);

  static VertexPartition trivial(std::size_t n) { return VertexPartition(1, std::vector<int>(n, 0)); }
  static VertexPartition from_parts(std::size_t n, const std::vector<std::vector<Vertex>>& parts);

  std::size_t d() const { return d_; }
  std::size_t n() const { return assignment_.size(); }
  int part_of(Vertex v) const { return assignment_.at(v); }
  const std::vector<int>& assignment() const { return assignment_; }
  const std::vector<std::vector<Vertex>>& parts() const { return parts_; }
  std::size_t part_size(std::size_t j) const { return parts_[j].size(); }
  std::size_t min_part_size() const;

  /// Restriction to an ordered vertex subset; parts that become empty are
  /// kept (index vectors stay d-dimensional), so this returns only the
  /// assignment, not a VertexPartition.
  std::vector<int> restricted_assignment(std::span<const Vertex> vertices) const;

  friend bool operator==(const VertexPartition& a, const VertexPartition& b) {
    return a.d_ == b.d_ && a.assignment_ == b.assignment_;
  }

 private:
  std::size_t d_ = 0;
  std::vector<int> assignment_;
  std::vector<std::vector<Vertex>> parts_;
};

/// i_P(S). Throws std::out_of_range for vertices outside the host.
IndexVector index_vector(const VertexPartition& p, std::span<const Vertex> s);
IndexVector index_vector(const VertexPartition& p, VertexMask s);

/// Small pattern hypergraph F on {0, ..., r-1}.
class PatternGraph {
 public:
  PatternGraph(int r, int k, std::vector<std::vector<Vertex>> edges);

  static PatternGraph single_edge(int k);
  static PatternGraph clique(int r);  ///< K_r as a 2-graph
  static PatternGraph path(int r);    ///< path on r vertices as a 2-graph
  static PatternGraph cycle(int r);   ///< cycle on r vertices as a 2-graph

  int r() const { return r_; }
  int k() const { return k_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<std::vector<Vertex>>& edges() const { return edges_; }
  bool is_single_edge() const { return r_ == k_ && edges_.size() == 1; }

  /// |Aut(F)|, by brute force over the r! relabellings.
  std::uint64_t automorphisms() const { return automorphisms_; }

  /// Every bijection V(F) -> targets (given as r host ids) that maps edges to
  /// host edges, counted. Divided by |Aut(F)| this is the number of copies
  /// of F spanning exactly `targets`.
  std::uint64_t embeddings_onto(const Hypergraph& host, std::span<const Vertex> targets) const;

  std::string str() const;

 private:
  int r_;
  int k_;
  std::vector<std::vector<Vertex>> edges_;
  std::uint64_t automorphisms_ = 1;
};

}  // namespace hypermatch
