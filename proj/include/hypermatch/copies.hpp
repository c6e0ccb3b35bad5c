#pragma once

#include <cstdint>
#include <functional>
#include <map>

#include "hypermatch/hypergraph.hpp"

namespace hypermatch {

using CopyCounts = std::map<IndexVector, std::uint64_t>;

/// Number of copies of F (edge subsets of H isomorphic to F) whose vertex
/// set is exactly `sorted_set`.
std::uint64_t copies_on(const Hypergraph& h, const PatternGraph& f, std::span<const Vertex> sorted_set);

/// Calls visit(R, copies) for every r-set R spanning at least one copy of F,
/// R in lexicographic order.
void for_each_copy_set(const Hypergraph& h, const PatternGraph& f,
                       const std::function<void(std::span<const Vertex>, std::uint64_t)>& visit);

/// Copies of F bucketed by the index vector of their vertex set.
CopyCounts pattern_copies(const Hypergraph& h, const PatternGraph& f, const VertexPartition& p);

}  // namespace hypermatch
