#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "hypermatch/generators.hpp"
#include "hypermatch/random.hpp"
#include "hypermatch/robustness.hpp"
#include "oracles.hpp"

using namespace hypermatch;

namespace {

VertexPartition split_at(std::size_t n, std::size_t x) {
  std::vector<int> a(n, 1);
  for (std::size_t v = 0; v < x; ++v) a[v] = 0;
  return VertexPartition(2, a);
}

Hypergraph two_cliques(std::size_t each, int k) {
  std::vector<std::vector<Vertex>> edges;
  for (const auto& e : complete_kgraph(each, k).edge_list()) {
    edges.push_back(e);
    std::vector<Vertex> shifted;
    for (auto v : e) shifted.push_back(static_cast<Vertex>(v + each));
    edges.push_back(shifted);
  }
  return Hypergraph(k, 2 * each, edges);
}

std::uint64_t naive_reachable(const Hypergraph& h, const PatternGraph& f, Vertex u, Vertex v, int i) {
  auto sets = oracle::copy_masks(h, f);
  VertexMask pool = full_mask(h.n()) & ~bit(u) & ~bit(v);
  std::uint64_t count = 0;
  for_each_submask(pool, i * f.r() - 1, [&](VertexMask s) {
    count += oracle::exact_cover(sets, s | bit(u)) && oracle::exact_cover(sets, s | bit(v));
    return true;
  });
  return count;
}

std::uint64_t naive_lo_markstrom(const Hypergraph& h, Vertex u, Vertex v, const Rational& alpha) {
  std::vector<Vertex> pool;
  for (Vertex w = 0; w < h.n(); ++w)
    if (w != u && w != v) pool.push_back(w);
  auto edges = h.edge_list();
  auto edge_with = [&](std::vector<Vertex> s, Vertex x) {
    s.push_back(x);
    std::sort(s.begin(), s.end());
    return std::find(edges.begin(), edges.end(), s) != edges.end();
  };
  std::uint64_t count = 0;
  for_each_combination(pool, static_cast<std::size_t>(h.k() - 1), [&](const std::vector<Vertex>& s) {
    if (!edge_with(s, u) || !edge_with(s, v)) return true;
    std::uint64_t nbrs = 0;
    for (Vertex w = 0; w < h.n(); ++w)
      if (std::find(s.begin(), s.end(), w) == s.end()) nbrs += edge_with(s, w);
    // |N(S)| >= alpha n, compared as integers.
    if (static_cast<std::int64_t>(nbrs) * alpha.den >= alpha.num * static_cast<std::int64_t>(h.n())) ++count;
    return true;
  });
  return count;
}

Hypergraph relabel(const Hypergraph& h, const std::vector<Vertex>& perm) {
  std::vector<std::vector<Vertex>> edges;
  for (const auto& e : h.edge_list()) {
    std::vector<Vertex> m;
    for (auto v : e) m.push_back(perm[v]);
    edges.push_back(m);
  }
  return Hypergraph(h.k(), h.n(), edges);
}

}  // namespace

TEST_CASE("robust profile of a complete graph") {
  auto h = complete_kgraph(6, 3);
  auto prof = robust_profile(h, PatternGraph::single_edge(3), VertexPartition::trivial(6), Rational(1, 1000));
  REQUIRE(prof.robust_vectors.size() == 1);
  CHECK(prof.robust_vectors[0] == IndexVector({3}));
  for (auto c : prof.link_counts) CHECK(c == 10);
}

TEST_CASE("robust profile of the small barrier matches direct counts") {
  auto h = divisibility_barrier(6, 3, 3);
  auto p = split_at(6, 3);
  Rational mu(5, 1000);
  auto prof = robust_profile(h, PatternGraph::single_edge(3), p, mu);
  const std::uint64_t threshold = ceil_times(mu, 216);
  CHECK(prof.threshold == threshold);
  std::map<IndexVector, std::uint64_t> direct;
  for (auto e : h.edge_masks()) ++direct[index_vector(p, e)];
  std::vector<IndexVector> expected;
  for (const auto& [v, c] : direct)
    if (c >= threshold) expected.push_back(v);
  CHECK(prof.robust_vectors == expected);
  for (const auto& v : prof.robust_vectors) CHECK((v == IndexVector({0, 3}) || v == IndexVector({2, 1})));
}

TEST_CASE("robust profile at mu = 1 is empty") {
  for (auto h : {divisibility_barrier(6, 3, 3), complete_kgraph(6, 3)}) {
    auto prof = robust_profile(h, PatternGraph::single_edge(3), VertexPartition::trivial(6), Rational(1));
    CHECK(prof.robust_vectors.empty());
  }
  CHECK_THROWS(robust_profile(complete_kgraph(6, 3), PatternGraph::single_edge(3), VertexPartition::trivial(6),
                              Rational(0)));
}

TEST_CASE("robust profile invariants on random hosts") {
  auto e = PatternGraph::single_edge(3);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto h = random_kgraph(10, 3, 0.4, seed);
    auto p = split_at(10, 4);
    auto lo = robust_profile(h, e, p, Rational(1, 200));
    auto hi = robust_profile(h, e, p, Rational(1, 50));
    for (const auto& v : hi.robust_vectors) CHECK(lo.is_robust(v));
    for (const auto& [v, c] : lo.raw_counts) CHECK(lo.is_robust(v) == (c >= lo.threshold));
    for (auto c : lo.link_counts) CHECK(c <= binomial(9, 2));
  }
}

TEST_CASE("reachable counts") {
  auto e = PatternGraph::single_edge(3);
  FactorOracle k8(complete_kgraph(8, 3), e);
  CHECK(reachable_count(k8, 0, 5, 1) == binomial(6, 2));
  CHECK(reachable_count(k8, 3, 7, 1) == binomial(6, 2));

  FactorOracle apart(two_cliques(5, 3), e);
  CHECK(reachable_count(apart, 0, 7, 1) == 0);
  CHECK(reachable_count(apart, 0, 3, 1) > 0);

  CHECK_THROWS(reachable_count(k8, 2, 2, 1));
  CHECK_THROWS(reachable_count(k8, 0, 1, 3));
}

TEST_CASE("reachable counts agree with brute force and are symmetric") {
  auto e = PatternGraph::single_edge(3);
  auto tri = PatternGraph::clique(3);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto h3 = random_kgraph(9, 3, 0.4, seed);
    FactorOracle o3(h3, e);
    auto h2 = random_kgraph(9, 2, 0.6, seed);
    FactorOracle o2(h2, tri);
    for (Vertex u = 0; u < 3; ++u)
      for (Vertex v = 5; v < 8; ++v) {
        CHECK(reachable_count(o3, u, v, 1) == naive_reachable(h3, e, u, v, 1));
        CHECK(reachable_count(o3, u, v, 2) == naive_reachable(h3, e, u, v, 2));
        CHECK(reachable_count(o3, u, v, 2) == reachable_count(o3, v, u, 2));
        CHECK(reachable_count(o2, u, v, 1) == naive_reachable(h2, tri, u, v, 1));
        CHECK(reachable_count(o2, u, v, 2) == reachable_count(o2, v, u, 2));
      }
  }
}

TEST_CASE("reachable counts are invariant under relabelling") {
  auto e = PatternGraph::single_edge(3);
  Rng rng(99);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto h = random_kgraph(9, 3, 0.45, seed);
    std::vector<Vertex> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<Vertex>(perm));
    FactorOracle a(h, e);
    FactorOracle b(relabel(h, perm), e);
    for (Vertex u = 0; u < 9; ++u)
      for (Vertex v = u + 1; v < 9; ++v) CHECK(reachable_count(a, u, v, 1) == reachable_count(b, perm[u], perm[v], 1));
  }
}

TEST_CASE("reachability lifts one level when a disjoint copy is available") {
  auto e = PatternGraph::single_edge(3);
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto h = random_kgraph(11, 3, 0.35, seed);
    FactorOracle o(h, e);
    auto sets = oracle::copy_masks(h, e);
    for (Vertex u = 0; u < 4; ++u)
      for (Vertex v = 6; v < 9; ++v) {
        // Witness S for level 1, then a copy avoiding S, u and v.
        bool lifts_expected = false;
        VertexMask pool = full_mask(11) & ~bit(u) & ~bit(v);
        for_each_submask(pool, 2, [&](VertexMask s) {
          if (!o.has_factor(s | bit(u)) || !o.has_factor(s | bit(v))) return true;
          for (auto c : sets)
            if (!(c & (s | bit(u) | bit(v)))) lifts_expected = true;
          return !lifts_expected;
        });
        if (!lifts_expected) continue;
        ++checked;
        CHECK(reachable_count(o, u, v, 2) >= 1);
      }
  }
  CHECK(checked > 0);
}

TEST_CASE("Lo-Markstrom test") {
  auto k10 = complete_kgraph(10, 3);
  for (Vertex u = 0; u < 10; ++u)
    for (Vertex v = u + 1; v < 10; ++v) CHECK(lo_markstrom_test(k10, u, v, Rational(1, 10)));
  Hypergraph empty(3, 8, {});
  CHECK_FALSE(lo_markstrom_test(empty, 0, 1, Rational(1, 10)));
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto h = random_kgraph(9, 3, 0.5, seed);
    for (Vertex u = 0; u < 9; u += 2)
      for (Vertex v = u + 1; v < 9; v += 3) {
        auto c = lo_markstrom_count(h, u, v, Rational(1, 4));
        CHECK(c == naive_lo_markstrom(h, u, v, Rational(1, 4)));
        CHECK(lo_markstrom_test(h, u, v, Rational(1, 4)) == (c * 4 >= binomial(9, 2)));
      }
  }
}

TEST_CASE("partition of a complete graph is trivial") {
  auto out = build_partition(complete_kgraph(12, 3), PatternGraph::single_edge(3), {});
  CHECK(out.good.partition.d() == 1);
  CHECK(out.u0.empty());
  CHECK(out.relocations.empty());
}

TEST_CASE("partition of the odd barrier separates X") {
  auto h = divisibility_barrier(12, 3, 5);
  PartitionParams params;
  auto out = build_partition(h, PatternGraph::single_edge(3), params);
  CHECK(out.good.partition == split_at(12, 5));

  params.stage1 = ReachabilityTest::Exact;
  auto exact = build_partition(h, PatternGraph::single_edge(3), params);
  CHECK(exact.good.partition == split_at(12, 5));

  VerifyParams vp;
  vp.beta = params.beta1;
  vp.eps = params.eps;
  vp.mu = params.mu;
  auto rep = verify_partition(h, PatternGraph::single_edge(3), out.good, vp);
  CHECK(rep.pass());
  CHECK(rep.exhaustive);
}

TEST_CASE("built partitions keep robust links after relocation") {
  auto e = PatternGraph::single_edge(3);
  PartitionParams params;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto h = perturbed_barrier(12, 3, 4 + seed % 2, 0.05, seed);
    PartitionBuild out;
    try {
      out = build_partition(h, e, params);
    } catch (const RelocationError&) {
      continue;
    }
    CAPTURE(seed);
    for (auto c : out.final_profile.link_counts) CHECK(c >= out.relocation_threshold);
  }
}

TEST_CASE("verification on complete graphs and barriers") {
  auto e = PatternGraph::single_edge(3);
  auto k9 = complete_kgraph(9, 3);
  GoodPartition trivial{VertexPartition::trivial(9), Rational(1, 1000), 1, Rational(1, 3), {}};
  CHECK(verify_partition(k9, e, trivial, {}).pass());

  GoodPartition split{split_at(9, 4), Rational(1, 1000), 1, Rational(1, 3), {}};
  CHECK(verify_partition(k9, e, split, {}).pass());

  auto b = divisibility_barrier(12, 3, 5);
  GoodPartition forced{VertexPartition::trivial(12), Rational(1, 1000), 1, Rational(1, 3), {}};
  auto rep = verify_partition(b, e, forced, {});
  CHECK(rep.sizes.pass);
  CHECK_FALSE(rep.closedness.pass);
  CHECK_FALSE(rep.closedness.counterexamples.empty());

  VerifyParams sampled;
  sampled.mode = VerifyMode::Sampled;
  auto srep = verify_partition(b, e, forced, sampled);
  CHECK_FALSE(srep.exhaustive);
  CHECK_FALSE(srep.closedness.pass);
}

TEST_CASE("verification flags small parts") {
  GoodPartition lopsided{split_at(9, 1), Rational(1, 1000), 1, Rational(1, 3), {}};
  auto rep = verify_partition(complete_kgraph(9, 3), PatternGraph::single_edge(3), lopsided, {});
  CHECK_FALSE(rep.sizes.pass);
}

TEST_CASE("an isolated vertex makes relocation fail and the fallback skips it") {
  auto h = divisibility_barrier(9, 3, 1);
  auto f = PatternGraph::single_edge(3);
  CHECK_THROWS_AS(build_partition(h, f, {}), RelocationError);
  auto build = build_partition_or_unrelocated(h, f, {});
  CHECK(build.relocation_skipped);
  CHECK_FALSE(build.warnings.empty());
  CHECK(build.good.partition.part_of(0) != build.good.partition.part_of(1));

  auto ok = build_partition_or_unrelocated(complete_kgraph(9, 3), f, {});
  CHECK_FALSE(ok.relocation_skipped);
  CHECK(ok.good.partition.d() == 1);
}
