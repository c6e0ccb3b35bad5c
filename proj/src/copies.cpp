#include "hypermatch/copies.hpp"

#include <numeric>
#include <stdexcept>

namespace hypermatch {

std::uint64_t copies_on(const Hypergraph& h, const PatternGraph& f, std::span<const Vertex> sorted_set) {
  return f.embeddings_onto(h, sorted_set) / f.automorphisms();
}

void for_each_copy_set(const Hypergraph& h, const PatternGraph& f,
                       const std::function<void(std::span<const Vertex>, std::uint64_t)>& visit) {
  if (h.k() != f.k()) throw std::invalid_argument("pattern and host uniformity differ");
  if (static_cast<std::size_t>(f.r()) > h.n()) throw std::invalid_argument("pattern has more vertices than host");
  if (f.is_single_edge()) {
    for (std::size_t e = 0; e < h.edge_count(); ++e) visit(h.edge(e), 1);
    return;
  }
  std::vector<Vertex> all(h.n());
  std::iota(all.begin(), all.end(), 0);
  for_each_combination(all, static_cast<std::size_t>(f.r()), [&](const std::vector<Vertex>& set) {
    if (auto c = copies_on(h, f, set)) visit(set, c);
    return true;
  });
}

CopyCounts pattern_copies(const Hypergraph& h, const PatternGraph& f, const VertexPartition& p) {
  if (p.n() != h.n()) throw std::invalid_argument("partition does not cover the host");
  CopyCounts out;
  for_each_copy_set(h, f, [&](std::span<const Vertex> set, std::uint64_t c) { out[index_vector(p, set)] += c; });
  return out;
}

}  // namespace hypermatch
