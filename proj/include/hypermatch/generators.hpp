#pragma once

#include <cstdint>

#include "hypermatch/hypergraph.hpp"

namespace hypermatch {

/// K_n^(k): every k-subset is an edge.
Hypergraph complete_kgraph(std::size_t n, int k);

/// X = {0, ..., x-1}; edges are the k-sets meeting X in an even number of
/// vertices. With x odd and k | n there is no perfect matching.
Hypergraph divisibility_barrier(std::size_t n, int k, std::size_t x);

/// Binomial random k-graph: every k-subset independently with probability
/// p, decided in lexicographic order of k-subsets.
Hypergraph random_kgraph(std::size_t n, int k, double p, std::uint64_t seed);

/// Divisibility barrier with every k-subset's membership flipped
/// independently with probability `flip`.
Hypergraph perturbed_barrier(std::size_t n, int k, std::size_t x, double flip, std::uint64_t seed);

/// H_p: each edge kept independently with probability p, consuming one
/// uniform draw per edge in canonical edge order.
Hypergraph sparsify(const Hypergraph& h, double p, std::uint64_t seed);

/// Positions (canonical order) of the edges sparsify would keep.
std::vector<std::size_t> sparsify_positions(const Hypergraph& h, double p, std::uint64_t seed);

}  // namespace hypermatch
