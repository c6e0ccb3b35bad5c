#include "hypermatch/generators.hpp"

#include <numeric>
#include <stdexcept>

#include "hypermatch/random.hpp"

namespace hypermatch {

namespace {

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("probability must lie in [0, 1]");
}

std::vector<Vertex> iota_vertices(std::size_t n) {
  std::vector<Vertex> vs(n);
  std::iota(vs.begin(), vs.end(), 0);
  return vs;
}

template <typename Keep>
Hypergraph filtered_complete(std::size_t n, int k, Keep&& keep) {
  if (k < 2) throw std::invalid_argument("uniformity must be at least 2");
  std::vector<std::vector<Vertex>> edges;
  for_each_combination(iota_vertices(n), static_cast<std::size_t>(k), [&](const std::vector<Vertex>& e) {
    if (keep(e)) edges.push_back(e);
    return true;
  });
  return Hypergraph(k, n, std::move(edges));
}

std::size_t meet(const std::vector<Vertex>& e, std::size_t x) {
  std::size_t c = 0;
  for (Vertex v : e) c += v < x;
  return c;
}

}  // namespace

Hypergraph complete_kgraph(std::size_t n, int k) {
  if (static_cast<std::size_t>(k) > n) throw std::invalid_argument("k exceeds n");
  return filtered_complete(n, k, [](const auto&) { return true; });
}

Hypergraph divisibility_barrier(std::size_t n, int k, std::size_t x) {
  if (k < 3) throw std::invalid_argument("divisibility barrier needs k >= 3");
  if (x == 0 || x >= n) throw std::invalid_argument("barrier needs 0 < x < n");
  return filtered_complete(n, k, [&](const auto& e) { return meet(e, x) % 2 == 0; });
}

Hypergraph random_kgraph(std::size_t n, int k, double p, std::uint64_t seed) {
  check_probability(p);
  Rng rng(seed);
  return filtered_complete(n, k, [&](const auto&) { return rng.bernoulli(p); });
}

Hypergraph perturbed_barrier(std::size_t n, int k, std::size_t x, double flip, std::uint64_t seed) {
  check_probability(flip);
  if (k < 3) throw std::invalid_argument("divisibility barrier needs k >= 3");
  if (x == 0 || x >= n) throw std::invalid_argument("barrier needs 0 < x < n");
  Rng rng(seed);
  return filtered_complete(n, k, [&](const auto& e) { return (meet(e, x) % 2 == 0) != rng.bernoulli(flip); });
}

std::vector<std::size_t> sparsify_positions(const Hypergraph& h, double p, std::uint64_t seed) {
  check_probability(p);
  Rng rng(seed);
  std::vector<std::size_t> kept;
  for (std::size_t e = 0; e < h.edge_count(); ++e)
    if (rng.bernoulli(p)) kept.push_back(e);
  return kept;
}

Hypergraph sparsify(const Hypergraph& h, double p, std::uint64_t seed) {
  auto kept = sparsify_positions(h, p, seed);
  return h.with_edge_subset(kept);
}

}  // namespace hypermatch
