#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hypermatch/clustering.hpp"
#include "hypermatch/decision.hpp"
#include "hypermatch/generators.hpp"
#include "oracles.hpp"

using namespace hypermatch;

namespace {

VertexPartition split_at(std::size_t n, std::size_t x) {
  std::vector<int> a(n, 1);
  for (std::size_t v = 0; v < x; ++v) a[v] = 0;
  return VertexPartition(2, a);
}

// Owns everything a ClusterContext points at.
struct Setup {
  Hypergraph h;
  PatternGraph f;
  VertexPartition p;
  RobustProfile profile;
  ClusterContext ctx;

  Setup(Hypergraph host, PatternGraph pattern, VertexPartition part, int q)
      : h(std::move(host)),
        f(std::move(pattern)),
        p(std::move(part)),
        profile(robust_profile(h, f, p, Rational(1, 1000))),
        ctx(h, f, p, profile, q) {}
};

bool is_partition_of(const std::vector<std::vector<Vertex>>& clusters, std::size_t n) {
  std::vector<int> seen(n, 0);
  for (const auto& c : clusters)
    for (auto v : c) {
      if (v >= n) return false;
      ++seen[v];
    }
  return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

bool has_reason(const ClusterFlags& f, const std::string& r) {
  return std::find(f.reasons.begin(), f.reasons.end(), r) != f.reasons.end();
}

bool valid_cycle(const std::vector<std::vector<bool>>& arcs, const std::vector<std::size_t>& cyc) {
  const std::size_t m = arcs.size();
  if (cyc.size() != m) return false;
  std::vector<std::size_t> sorted = cyc;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < m; ++i)
    if (sorted[i] != i) return false;
  if (m == 1) return true;
  for (std::size_t i = 0; i < m; ++i)
    if (!arcs[cyc[i]][cyc[(i + 1) % m]]) return false;
  return true;
}

bool exhaustive_hamiltonian(const std::vector<std::vector<bool>>& arcs) {
  std::vector<std::size_t> perm(arcs.size());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    if (valid_cycle(arcs, perm)) return true;
  } while (std::next_permutation(perm.begin() + 1, perm.end()));
  return false;
}

}  // namespace

TEST_CASE("first window and window sizes") {
  CHECK(first_window_size(24, 12, WindowMode::Wide) == 24);
  CHECK(first_window_size(40, 4, WindowMode::Wide) == 16);
  CHECK(first_window_size(40, 4, WindowMode::Compact) == 4);
  CHECK(first_window_size(36, 6, WindowMode::Compact) == 6);
  CHECK_THROWS_AS(first_window_size(5, 6, WindowMode::Wide), std::invalid_argument);

  Rng rng(1);
  for (std::size_t c : {3u, 4u, 6u})
    for (std::size_t n = c; n <= 80; ++n)
      for (auto mode : {WindowMode::Wide, WindowMode::Compact}) {
        auto raw = sample_clusters(n, c, mode, rng);
        std::size_t total = 0;
        for (std::size_t i = 0; i < raw.clusters.size(); ++i) {
          total += raw.clusters[i].size();
          CHECK(raw.clusters[i].size() == (i == 0 ? raw.first_window : c - 1));
        }
        CHECK(total == n);
        CHECK(is_partition_of(raw.clusters, n));
        if (raw.first_window < n) CHECK((raw.clusters.size() - 1) % c == 0);
      }
}

TEST_CASE("n equal to the first window gives one cluster") {
  Rng rng(3);
  auto raw = sample_clusters(24, 12, WindowMode::Wide, rng);
  REQUIRE(raw.clusters.size() == 1);
  CHECK(raw.clusters[0].size() == 24);
}

TEST_CASE("vertex placement is exchangeable") {
  // P[v in U'_i] = |U'_i| / n for every v; checked for one vertex and two windows.
  const std::size_t n = 40, c = 4;
  const int trials = 10000;
  int in_first = 0, in_second = 0;
  for (int s = 0; s < trials; ++s) {
    Rng rng(split_seed(77, static_cast<std::uint64_t>(s)));
    auto raw = sample_clusters(n, c, WindowMode::Wide, rng);
    auto has = [](const std::vector<Vertex>& cl, Vertex v) { return std::binary_search(cl.begin(), cl.end(), v); };
    in_first += has(raw.clusters[0], 7);
    in_second += has(raw.clusters[1], 7);
  }
  auto within = [&](int hits, double p) {
    double sigma = std::sqrt(p * (1 - p) / trials);
    return std::abs(static_cast<double>(hits) / trials - p) <= 3 * sigma;
  };
  CHECK(within(in_first, 16.0 / 40));
  CHECK(within(in_second, 3.0 / 40));
}

TEST_CASE("complete host has no bad clusters") {
  Setup s(complete_kgraph(36, 3), PatternGraph::single_edge(3), VertexPartition::trivial(36), 1);
  Rng rng(5);
  auto raw = sample_clusters(36, 6, WindowMode::Compact, rng);
  REQUIRE(raw.clusters.size() == 7);
  auto cls = classify_bad_clusters(s.ctx, raw, ClusterThresholds{});
  CHECK(cls.bad.empty());
  CHECK(cls.acceptable);
  for (const auto& f : cls.flags) CHECK(f.reasons.empty());
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j) CHECK(cls.digraph[i][j] == (i != j));
}

TEST_CASE("a planted sparse cluster is flagged by the degree condition") {
  Rng rng(11);
  auto raw = sample_clusters(36, 6, WindowMode::Compact, rng);
  const auto& target = raw.clusters[3];
  const VertexMask inside = to_mask(target);
  std::vector<std::vector<Vertex>> edges;
  for (const auto& e : complete_kgraph(36, 3).edge_list())
    if ((to_mask(e) & ~inside) != 0) edges.push_back(e);
  Setup s(Hypergraph(3, 36, edges), PatternGraph::single_edge(3), VertexPartition::trivial(36), 1);

  // Direct check: no edge lies inside the cluster, so its 2-degree is 0.
  auto sub = s.h.induced(target);
  REQUIRE(sub.edge_count() == 0);

  ClusterThresholds th;
  th.degree_fraction = Rational(1, 2);
  auto cls = classify_bad_clusters(s.ctx, raw, th);
  CHECK(has_reason(cls.flags[3], "A4"));
  CHECK(std::find(cls.bad.begin(), cls.bad.end(), 3u) != cls.bad.end());
  for (std::size_t i = 0; i < raw.clusters.size(); ++i)
    if (i != 3) CHECK_FALSE(has_reason(cls.flags[i], "A4"));
}

TEST_CASE("flag counts on dense random hosts") {
  Setup s(random_kgraph(36, 3, 0.8, 21), PatternGraph::single_edge(3), VertexPartition::trivial(36), 1);
  ClusterThresholds th;
  th.degree_fraction = Rational(1, 2);
  double sum = 0, sum_sq = 0;
  const int seeds = 100;
  for (int seed = 0; seed < seeds; ++seed) {
    Rng rng(split_seed(9, static_cast<std::uint64_t>(seed)));
    auto raw = sample_clusters(36, 6, WindowMode::Compact, rng);
    auto cls = classify_bad_clusters(s.ctx, raw, th);
    double b = static_cast<double>(cls.bad.size());
    sum += b;
    sum_sq += b * b;
    CHECK(cls.bad.size() <= 6);
  }
  double mean = sum / seeds;
  double sd = std::sqrt(std::max(0.0, sum_sq / seeds - mean * mean));
  MESSAGE("bad clusters per sample on G(36, 0.8): mean " << mean << ", sd " << sd);
}

TEST_CASE("random bipartite matching and Hall violators") {
  Rng rng(2);
  std::vector<std::vector<std::size_t>> full(5, {0, 1, 2, 3, 4});
  auto res = random_bipartite_matching(full, 5, rng);
  REQUIRE(std::holds_alternative<std::vector<std::size_t>>(res));
  auto m = std::get<std::vector<std::size_t>>(res);
  std::sort(m.begin(), m.end());
  CHECK(m == std::vector<std::size_t>{0, 1, 2, 3, 4});

  std::vector<std::vector<std::size_t>> tight{{0}, {0}, {1, 2}};
  auto bad = random_bipartite_matching(tight, 3, rng);
  REQUIRE(std::holds_alternative<HallViolator>(bad));
  const auto& hv = std::get<HallViolator>(bad);
  CHECK(hv.neighbourhood.size() < hv.left.size());
  std::vector<std::size_t> nb;
  for (auto a : hv.left) nb.insert(nb.end(), tight[a].begin(), tight[a].end());
  std::sort(nb.begin(), nb.end());
  nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  CHECK(nb == hv.neighbourhood);
}

TEST_CASE("one bad cluster on a complete host is absorbed") {
  Setup s(complete_kgraph(36, 3), PatternGraph::single_edge(3), VertexPartition::trivial(36), 1);
  Rng rng(8);
  auto raw = sample_clusters(36, 6, WindowMode::Compact, rng);
  auto cls = classify_bad_clusters(s.ctx, raw, ClusterThresholds{});
  cls.bad = {4};

  Rng a(100), b(100);
  auto plan = redistribute(s.ctx, raw, cls, a);
  auto again = redistribute(s.ctx, raw, cls, b);
  CHECK(plan.clusters == again.clusters);
  CHECK(plan.l_sets == again.l_sets);

  REQUIRE(plan.clusters.size() == 6);
  CHECK(plan.dissolved == std::vector<std::size_t>{4});
  CHECK(is_partition_of(plan.clusters, 36));
  CHECK(plan.common_size);
  for (std::size_t i = 1; i < plan.clusters.size(); ++i) {
    CHECK(plan.clusters[i].size() == 6);
    const auto& l = plan.l_sets[i];
    REQUIRE(l.size() == 3);
    for (auto v : l) {
      CHECK(std::binary_search(plan.clusters[i].begin(), plan.clusters[i].end(), v));
      CHECK(std::find(plan.t_sets[i].begin(), plan.t_sets[i].end(), v) == plan.t_sets[i].end());
    }
    CHECK(s.profile.is_robust(index_vector(s.p, std::span<const Vertex>(l))));
  }
  for (const auto& ab : plan.absorptions)
    CHECK(std::binary_search(raw.clusters[4].begin(), raw.clusters[4].end(), ab.vertex));
}

TEST_CASE("Hamilton cycles") {
  std::vector<std::vector<bool>> complete(4, std::vector<bool>(4, true));
  for (int i = 0; i < 4; ++i) complete[i][i] = false;
  auto rep = hamilton_order(complete);
  CHECK(rep.found);
  CHECK(rep.ghouila_houri);
  CHECK(valid_cycle(complete, rep.cycle));

  std::vector<std::vector<bool>> tri(3, std::vector<bool>(3, false));
  tri[0][1] = tri[1][2] = tri[2][0] = true;
  rep = hamilton_order(tri);
  CHECK(rep.found);
  CHECK(rep.cycle == std::vector<std::size_t>{0, 1, 2});

  Rng rng(31);
  int found = 0;
  for (int t = 0; t < 200; ++t) {
    std::size_t m = 2 + static_cast<std::size_t>(rng.below(7));
    std::vector<std::vector<bool>> arcs(m, std::vector<bool>(m, false));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) (rng.bernoulli(0.5) ? arcs[i][j] : arcs[j][i]) = true;
    auto r = hamilton_order(arcs);
    CHECK(r.found == exhaustive_hamiltonian(arcs));
    if (r.found) {
      CHECK(valid_cycle(arcs, r.cycle));
      ++found;
    }
  }
  CHECK(found > 0);
}

TEST_CASE("residue fix in a two-element quotient") {
  auto lat = IntegerLattice::from_generators(2, {{3, 0}, {1, 2}});
  ResidueContext res(lat, 3);
  const IntVector off{2, 1};
  REQUIRE_FALSE(lat.contains(off));

  auto fix = residue_fix(res, IntVector{-2, -1}, 1);
  REQUIRE(fix.has_value());
  REQUIRE(fix->size() == 1);
  IntVector total{2 + (*fix)[0][0], 1 + (*fix)[0][1]};
  CHECK(lat.contains(total));
  CHECK(res.residue((*fix)[0]) == res.residue(off));

  CHECK_FALSE(residue_fix(res, IntVector{-2, -1}, 0).has_value());
  auto none = residue_fix(res, IntVector{-3, 0}, 0);
  REQUIRE(none.has_value());
  CHECK(none->empty());
}

TEST_CASE("pigeonhole shrinking keeps the residue sum") {
  auto lat = IntegerLattice::from_generators(2, {{3, 0}, {1, 2}});
  ResidueContext res(lat, 3);
  Rng rng(4);
  auto vectors = all_vectors_of_norm(2, 3);
  for (int t = 0; t < 100; ++t) {
    std::vector<IndexVector> sets;
    std::size_t len = 1 + static_cast<std::size_t>(rng.below(7));
    IntVector before(2, 0);
    for (std::size_t i = 0; i < len; ++i) {
      sets.push_back(vectors[static_cast<std::size_t>(rng.below(vectors.size()))]);
      before[0] += sets.back()[0];
      before[1] += sets.back()[1];
    }
    auto shrunk = pigeonhole_shrink(res, sets, 2);
    CHECK(shrunk.size() <= 1);
    IntVector after(2, 0);
    for (const auto& w : shrunk) {
      after[0] += w[0];
      after[1] += w[1];
    }
    CHECK(lat.contains(IntVector{before[0] - after[0], before[1] - after[1]}));
  }
}

TEST_CASE("residue correction with nothing to fix makes no moves") {
  Setup s(complete_kgraph(36, 3), PatternGraph::single_edge(3), VertexPartition::trivial(36), 1);
  Rng rng(12);
  auto raw = sample_clusters(36, 6, WindowMode::Compact, rng);
  auto cls = classify_bad_clusters(s.ctx, raw, ClusterThresholds{});
  auto plan = redistribute(s.ctx, raw, cls, rng);
  auto cor = residue_correct(s.ctx, plan, cls.digraph);
  CHECK(cor.hamilton.found);
  CHECK(cor.warnings.empty());
  CHECK(cor.order.front() == 0);
  for (const auto& st : cor.steps) CHECK(st.moved.empty());
  CHECK(conservation_check(s.ctx, "corrected", cor.clusters).ok());
}

TEST_CASE("residue correction moves r-sets from the next cluster") {
  // Two parts, robust vectors (3,0) and (1,2): lattice span{(3,0),(1,2)}, two cosets.
  const std::size_t n = 48;
  std::vector<int> part(n);
  for (std::size_t v = 0; v < n; ++v) part[v] = static_cast<int>(v % 2);
  VertexPartition p(2, part);
  std::vector<std::vector<Vertex>> edges;
  for (const auto& e : complete_kgraph(n, 3).edge_list()) {
    int a = 0;
    for (auto v : e) a += part[v] == 0;
    if (a == 3 || a == 1) edges.push_back(e);
  }
  Hypergraph h(3, n, edges);
  auto f = PatternGraph::single_edge(3);
  auto profile = robust_profile(h, f, p, Rational(1, 1000));
  ClusterContext ctx(h, f, p, profile, 2);
  REQUIRE(coset_group(ctx.lattice(), 3).size() == std::optional<std::uint64_t>(2));

  // Hand-built plan: part sizes (8,7), (9,9), (7,8); the first two are off the lattice.
  ClusterPlan plan;
  std::vector<Vertex> evens, odds;
  for (Vertex v = 0; v < n; ++v) (v % 2 ? odds : evens).push_back(v);
  const std::size_t shape[3][2] = {{8, 7}, {9, 9}, {7, 8}};
  std::vector<std::vector<Vertex>> clusters(3);
  std::size_t e = 0, o = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < shape[i][0]; ++j) clusters[i].push_back(evens[e++]);
    for (std::size_t j = 0; j < shape[i][1]; ++j) clusters[i].push_back(odds[o++]);
    std::sort(clusters[i].begin(), clusters[i].end());
  }
  for (std::size_t i = 0; i < 3; ++i) {
    plan.clusters.push_back(clusters[i]);
    plan.raw_index.push_back(i);
    plan.t_sets.push_back(choose_t_set(ctx, clusters[i]));
    plan.l_sets.push_back({});
    REQUIRE(plan.t_sets.back().size() == 12);
  }
  std::vector<std::vector<bool>> digraph(3, std::vector<bool>(3, true));
  for (int i = 0; i < 3; ++i) digraph[i][i] = false;

  auto cor = residue_correct(ctx, plan, digraph);
  REQUIRE(cor.clusters.size() == 3);
  CHECK(is_partition_of(cor.clusters, n));
  for (const auto& cl : cor.clusters) CHECK(ctx.lattice().contains(to_int_vector(index_vector(p, std::span<const Vertex>(cl)))));
  std::size_t moves = 0;
  for (const auto& st : cor.steps) {
    CHECK(st.moved.size() <= 1);
    moves += st.moved.size();
    for (const auto& set : st.moved) CHECK(set.size() == 3);
  }
  CHECK(moves >= 1);
  for (std::size_t i = 0; i + 1 < cor.imported.size(); ++i)
    for (auto v : cor.imported[i]) {
      const auto& t = plan.t_sets[cor.order[i + 1]];
      CHECK(std::find(t.begin(), t.end(), v) != t.end());
    }
  CHECK(conservation_check(ctx, "corrected", cor.clusters).ok());
}

TEST_CASE("pipeline on a single complete cluster") {
  Setup s(complete_kgraph(12, 3), PatternGraph::single_edge(3), VertexPartition::trivial(12), 1);
  PipelineParams params;
  params.c = 12;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto res = sample_f_factor(s.ctx, params, seed);
    REQUIRE(res.success);
    CHECK(res.factor.copies.size() == 4);
    CHECK(verify_packing(s.h, s.f, res.factor, true));
    CHECK(res.conservation_ok());
  }
}

TEST_CASE("pipeline fails on the divisibility barrier") {
  auto h = divisibility_barrier(12, 3, 5);
  REQUIRE(oracle::count_pm(h) == 0);
  auto f = PatternGraph::single_edge(3);
  auto p = split_at(12, 5);
  auto profile = robust_profile(h, f, p, Rational(1, 1000));
  auto lat = IntegerLattice::from_index_vectors(2, profile.robust_vectors);
  int q = default_q(coset_group(lat, 3), true);
  ClusterContext ctx(h, f, p, profile, q);
  PipelineParams params;
  params.c = 12;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto res = sample_f_factor(ctx, params, seed);
    CHECK_FALSE(res.success);
    CHECK((res.stage == PipelineStage::ResidueCorrection || res.stage == PipelineStage::ClusterFactor));
    CHECK_FALSE(res.message.empty());
    CHECK(res.factor.copies.empty());
  }
}

TEST_CASE("pipeline on K_24 with C = 12") {
  Setup s(complete_kgraph(24, 3), PatternGraph::single_edge(3), VertexPartition::trivial(24), 1);
  PipelineParams params;
  params.c = 12;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto res = sample_f_factor(s.ctx, params, seed);
    REQUIRE(res.success);
    CHECK(verify_packing(s.h, s.f, res.factor, true));
  }
}

TEST_CASE("compact windows give a multi-cluster run") {
  Setup s(complete_kgraph(36, 3), PatternGraph::single_edge(3), VertexPartition::trivial(36), 1);
  PipelineParams params;
  params.c = 6;
  params.window = WindowMode::Compact;
  params.thresholds = ClusterThresholds{};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto res = sample_f_factor(s.ctx, params, seed);
    REQUIRE_MESSAGE(res.success, res.message);
    REQUIRE(res.corrected.has_value());
    CHECK(res.corrected->clusters.size() == 6);
    CHECK(verify_packing(s.h, s.f, res.factor, true));
    CHECK(res.conservation_ok());
    CHECK(std::none_of(res.final_cluster_of.begin(), res.final_cluster_of.end(), [](int c) { return c < 0; }));
  }
}
