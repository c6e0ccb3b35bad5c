#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hypermatch/copies.hpp"
#include "hypermatch/generators.hpp"
#include "hypermatch/io.hpp"
#include "hypermatch/random.hpp"

using namespace hypermatch;

namespace {

std::uint64_t naive_codegree(const Hypergraph& h, std::vector<Vertex> s) {
  std::sort(s.begin(), s.end());
  std::uint64_t c = 0;
  for (const auto& e : h.edge_list())
    if (std::includes(e.begin(), e.end(), s.begin(), s.end())) ++c;
  return c;
}

std::uint64_t naive_min_degree(const Hypergraph& h, int l) {
  std::vector<Vertex> all(h.n());
  std::iota(all.begin(), all.end(), 0);
  std::uint64_t best = ~std::uint64_t{0};
  for_each_combination(all, static_cast<std::size_t>(l), [&](const std::vector<Vertex>& s) {
    best = std::min(best, naive_codegree(h, s));
    return true;
  });
  return best;
}

std::vector<Vertex> random_subset(Rng& rng, std::size_t n, std::size_t size) {
  std::vector<Vertex> all(n);
  std::iota(all.begin(), all.end(), 0);
  rng.shuffle(std::span<Vertex>(all));
  all.resize(size);
  return all;
}

}  // namespace

TEST_CASE("parse small hypergraph") {
  auto parsed = parse_hypergraph("3 4\n0 1 2\n0 1 3\n");
  CHECK(parsed.graph.k() == 3);
  CHECK(parsed.graph.n() == 4);
  CHECK(parsed.graph.edge_count() == 2);
  CHECK(parsed.warnings.empty());
}

TEST_CASE("parse rejects malformed input") {
  CHECK_THROWS_AS(parse_hypergraph("3 4\n0 1 1\n"), ParseError);
  CHECK_THROWS_AS(parse_hypergraph("3 4\n0 1\n"), ParseError);
  CHECK_THROWS_AS(parse_hypergraph("3 4\n0 1 4\n"), ParseError);
  CHECK_THROWS_AS(parse_hypergraph("3\n0 1 2\n"), ParseError);
  CHECK_THROWS_AS(parse_hypergraph(""), ParseError);
  CHECK_THROWS_AS(parse_hypergraph("3 4\n0 1 x\n"), ParseError);
}

TEST_CASE("duplicate edges warn or fail") {
  auto parsed = parse_hypergraph("# c\n3 4\n0 1 2\n\n2 1 0\n");
  CHECK(parsed.graph.edge_count() == 1);
  CHECK(parsed.warnings.size() == 1);
  ParseOptions strict;
  strict.duplicate_edge_is_error = true;
  CHECK_THROWS_AS(parse_hypergraph("3 4\n0 1 2\n2 1 0\n", strict), ParseError);
}

TEST_CASE("serialize round trip on random instances") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 4 + rng.below(8);
    int k = 2 + static_cast<int>(rng.below(3));
    if (static_cast<std::size_t>(k) > n) continue;
    auto h = random_kgraph(n, k, 0.4, rng.next());
    // Shuffle edge order and vertex order inside each edge, add comments.
    auto edges = h.edge_list();
    rng.shuffle(std::span<std::vector<Vertex>>(edges));
    std::string text = "# random instance\n" + std::to_string(k) + " " + std::to_string(n) + "\n";
    for (auto& e : edges) {
      rng.shuffle(std::span<Vertex>(e));
      for (auto v : e) text += std::to_string(v) + " ";
      text += "\n# between edges\n";
    }
    auto parsed = parse_hypergraph(text);
    CHECK(parsed.graph == h);
    CHECK(serialize_hypergraph(parsed.graph) == serialize_hypergraph(h));
    CHECK(serialize_hypergraph(parse_hypergraph(serialize_hypergraph(h)).graph) == serialize_hypergraph(h));
  }
}

TEST_CASE("partition round trip") {
  VertexPartition p(2, {0, 1, 0, 1, 1, 0});
  auto q = parse_partition(serialize_partition(p), 6);
  CHECK(q == p);
  CHECK_THROWS_AS(parse_partition("2\n0 0\n1 0\n", 2), ParseError);  // part 1 empty
  CHECK_THROWS_AS(parse_partition("2\n0 0\n", 2), ParseError);
  CHECK_THROWS_AS(parse_partition("2\n0 0\n0 1\n", 2), ParseError);
}

TEST_CASE("codegree on complete and empty graphs") {
  auto k6 = complete_kgraph(6, 3);
  std::vector<Vertex> s{1, 4};
  CHECK(k6.codegree(s) == 4);
  Hypergraph empty(3, 6, {});
  CHECK(empty.codegree(s) == 0);
  std::vector<Vertex> too_big{0, 1, 2, 3};
  CHECK_THROWS(k6.codegree(too_big));
  std::vector<Vertex> out_of_range{0, 6};
  CHECK_THROWS(k6.codegree(out_of_range));
}

TEST_CASE("codegree index agrees with naive scan") {
  Rng rng(5);
  LinkIndexPolicy lazy;
  lazy.eager_budget = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 5 + rng.below(10);
    int k = 3 + static_cast<int>(rng.below(2));
    auto base = random_kgraph(n, k, 0.5, rng.next());
    Hypergraph lazy_h(k, n, base.edge_list(), lazy);
    CHECK(base.link_index_eager());
    CHECK_FALSE(lazy_h.link_index_eager());
    std::size_t size = 1 + rng.below(static_cast<std::uint64_t>(k));
    auto s = random_subset(rng, n, size);
    auto expected = naive_codegree(base, s);
    CHECK(base.codegree(s) == expected);
    CHECK(lazy_h.codegree(s) == expected);
    auto t = random_subset(rng, n, static_cast<std::size_t>(k - 1));
    std::sort(t.begin(), t.end());
    auto link = base.link(t);
    for (Vertex v = 0; v < n; ++v) {
      std::vector<Vertex> e = t;
      if (std::find(e.begin(), e.end(), v) != e.end()) continue;
      e.push_back(v);
      std::sort(e.begin(), e.end());
      CHECK(base.has_edge(e) == std::binary_search(link.begin(), link.end(), v));
    }
    CHECK(lazy_h.link(t) == link);
  }
}

TEST_CASE("min degree") {
  CHECK(min_degree(complete_kgraph(9, 3), 2) == 7);
  auto barrier = divisibility_barrier(12, 3, 5);
  CHECK(min_degree(barrier, 2) == naive_min_degree(barrier, 2));
  CHECK(min_degree(barrier, 2) >= 4);
  CHECK(min_degree(barrier, 1) == naive_min_degree(barrier, 1));
  Hypergraph isolated(3, 5, {{0, 1, 2}, {1, 2, 3}});
  CHECK(min_degree(isolated, 1) == 0);
  CHECK_THROWS(min_degree(isolated, 3));
  CHECK_THROWS(min_degree(isolated, 0));
}

TEST_CASE("index vectors") {
  VertexPartition p(2, {0, 1, 0, 1, 0, 1});
  std::vector<Vertex> s{0, 1, 2};
  CHECK(index_vector(p, s) == IndexVector{2, 1});
  CHECK(index_vector(p, std::span<const Vertex>{}) == IndexVector{0, 0});
  std::vector<Vertex> bad{7};
  CHECK_THROWS_AS(index_vector(p, bad), std::out_of_range);

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t n = 6 + rng.below(20);
    std::size_t d = 1 + rng.below(4);
    std::vector<int> assignment(n);
    for (std::size_t v = 0; v < n; ++v) assignment[v] = static_cast<int>(v < d ? v : rng.below(d));
    VertexPartition q(d, assignment);
    auto all = random_subset(rng, n, n);
    std::size_t a = rng.below(n / 2 + 1), b = rng.below(n / 2 + 1);
    std::vector<Vertex> A(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(a));
    std::vector<Vertex> B(all.begin() + static_cast<std::ptrdiff_t>(a), all.begin() + static_cast<std::ptrdiff_t>(a + b));
    std::vector<Vertex> U = A;
    U.insert(U.end(), B.begin(), B.end());
    CHECK(index_vector(q, U) == index_vector(q, A) + index_vector(q, B));
    CHECK(index_vector(q, U).norm() == static_cast<int>(U.size()));
    CHECK(index_vector(q, to_mask(U)) == index_vector(q, U));
  }
}

TEST_CASE("all vectors of given norm") {
  auto vs = all_vectors_of_norm(3, 3);
  CHECK(vs.size() == binomial(5, 3));
  CHECK(std::is_sorted(vs.begin(), vs.end()));
  for (const auto& v : vs) CHECK(v.norm() == 3);
}

TEST_CASE("sparsify endpoints and determinism") {
  auto h = complete_kgraph(8, 3);
  CHECK(sparsify(h, 0.0, 1).edge_count() == 0);
  CHECK(sparsify(h, 1.0, 1) == h);
  CHECK(sparsify(h, 0.5, 42) == sparsify(h, 0.5, 42));
  CHECK_FALSE(sparsify(h, 0.5, 42) == sparsify(h, 0.5, 43));
  CHECK_THROWS(sparsify(h, 1.5, 1));
  CHECK_THROWS(sparsify(h, -0.1, 1));
}

TEST_CASE("sparsify keeps a binomial number of edges") {
  std::vector<std::vector<Vertex>> edges;
  for (Vertex i = 0; i < 20; ++i) edges.push_back({i, static_cast<Vertex>(i + 1), static_cast<Vertex>(i + 2)});
  Hypergraph h(3, 22, edges);
  const int trials = 10000;
  double total = 0;
  for (int t = 0; t < trials; ++t) total += static_cast<double>(sparsify(h, 0.5, split_seed(99, t)).edge_count());
  double mean = total / trials;
  double sigma_of_mean = std::sqrt(20 * 0.25 / trials);
  CHECK(std::abs(mean - 10.0) <= 3 * sigma_of_mean);
}

TEST_CASE("divisibility barrier structure") {
  auto h = divisibility_barrier(6, 3, 3);
  for (const auto& e : h.edge_list()) {
    int in_x = 0;
    for (auto v : e) in_x += v < 3;
    CHECK(in_x % 2 == 0);
  }
  CHECK(h.edge_count() == 1 + 3 * 3);
  CHECK_THROWS(divisibility_barrier(6, 3, 0));
  CHECK_THROWS(divisibility_barrier(6, 3, 6));
  CHECK_THROWS(divisibility_barrier(6, 2, 3));
}

TEST_CASE("pattern copies") {
  auto edge3 = PatternGraph::single_edge(3);
  CHECK(edge3.automorphisms() == 6);
  auto counts = pattern_copies(complete_kgraph(4, 3), edge3, VertexPartition::trivial(4));
  CHECK(counts.size() == 1);
  CHECK(counts[IndexVector{3}] == 4);

  auto barrier = divisibility_barrier(6, 3, 3);
  VertexPartition p(2, {0, 0, 0, 1, 1, 1});
  auto bc = pattern_copies(barrier, edge3, p);
  std::uint64_t total = 0;
  for (const auto& [v, c] : bc) {
    CHECK((v == IndexVector{0, 3} || v == IndexVector{2, 1}));
    total += c;
  }
  CHECK(total == barrier.edge_count());
  CHECK(bc[IndexVector{0, 3}] == 1);
  CHECK(bc[IndexVector{2, 1}] == 9);

  auto triangle = PatternGraph::clique(3);
  CHECK(triangle.automorphisms() == 6);
  auto tc = pattern_copies(complete_kgraph(5, 2), triangle, VertexPartition::trivial(5));
  CHECK(tc[IndexVector{3}] == 10);

  // Three copies of P_3 live on every triangle's vertex set.
  auto p3 = PatternGraph::path(3);
  CHECK(p3.automorphisms() == 2);
  auto pc = pattern_copies(complete_kgraph(4, 2), p3, VertexPartition::trivial(4));
  CHECK(pc[IndexVector{3}] == 4 * 3);
  CHECK_THROWS(pattern_copies(complete_kgraph(2, 2), triangle, VertexPartition::trivial(2)));
}

TEST_CASE("induced subgraph relabels") {
  auto h = divisibility_barrier(8, 3, 3);
  std::vector<Vertex> keep{7, 0, 1, 5};
  auto sub = h.induced(keep);
  CHECK(sub.n() == 4);
  for (const auto& e : sub.edge_list()) {
    std::vector<Vertex> orig;
    for (auto v : e) orig.push_back(keep[v]);
    std::sort(orig.begin(), orig.end());
    CHECK(h.has_edge(orig));
  }
  std::size_t expected = 0;
  for_each_combination(keep, 3, [&](const std::vector<Vertex>& c) {
    std::vector<Vertex> s = c;
    std::sort(s.begin(), s.end());
    expected += h.has_edge(s);
    return true;
  });
  CHECK(sub.edge_count() == expected);
}
