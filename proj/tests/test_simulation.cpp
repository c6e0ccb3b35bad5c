#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numeric>

#include "hypermatch/clustering.hpp"
#include "hypermatch/generators.hpp"
#include "hypermatch/simulation.hpp"
#include "oracles.hpp"

using namespace hypermatch;

TEST_CASE("parallel trials do not depend on the worker count") {
  auto run = [](int threads) {
    std::vector<std::uint64_t> out(500);
    parallel_trials(out.size(), threads, [&](std::size_t i) {
      Rng rng(split_seed(42, i));
      out[i] = rng.next();
    });
    return out;
  };
  auto one = run(1);
  CHECK(one == run(3));
  CHECK(one == run(8));

  CHECK_THROWS_AS(parallel_trials(10, 2, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("thread count from the environment") {
  setenv("HYPERMATCH_THREADS", "3", 1);
  CHECK(default_thread_count() == 3);
  setenv("HYPERMATCH_THREADS", "junk", 1);
  CHECK(default_thread_count() >= 1);
  unsetenv("HYPERMATCH_THREADS");
  CHECK(default_thread_count() >= 1);
}

TEST_CASE("uniform sampler enumerates every perfect matching") {
  auto k6 = complete_kgraph(6, 3);
  UniformPmSampler s6(k6);
  CHECK(s6.count() == oracle::count_pm(k6));
  auto k9 = complete_kgraph(9, 3);
  UniformPmSampler s9(k9);
  CHECK(s9.count() == oracle::count_pm(k9));
  UniformPmSampler none(divisibility_barrier(9, 3, 3));
  CHECK(none.count() == 0);
  Rng rng(1);
  CHECK_THROWS_AS(none.sample(rng), std::logic_error);
  for (int i = 0; i < 20; ++i) CHECK(verify_packing(k9, PatternGraph::single_edge(3), s9.sample(rng), true));
}

TEST_CASE("Wilson intervals") {
  auto [lo, hi] = wilson_interval(5, 10);
  CHECK(lo == doctest::Approx(0.2366).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.7634).epsilon(1e-3));
  auto zero = wilson_interval(0, 100);
  CHECK(zero.first == 0.0);
  CHECK(zero.second > 0.0);
  auto all = wilson_interval(100, 100);
  CHECK(all.second == 1.0);
  CHECK(all.first < 1.0);
}

TEST_CASE("Monte Carlo threshold curve") {
  auto k6 = complete_kgraph(6, 3);
  std::vector<double> grid{0.0, 0.2, 0.5, 1.0};
  auto curve = mc_threshold(k6, grid, 200, 5, 1);
  REQUIRE(curve.points.size() == 4);
  CHECK(curve.points.front().successes == 0);
  CHECK(curve.points.back().successes == 200);
  CHECK(curve.monotone_within(3.0));
  CHECK(curve.csv().rfind("p,trials,successes,lower,upper\n", 0) == 0);

  auto threaded = mc_threshold(k6, grid, 200, 5, 4);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(threaded.points[i].successes == curve.points[i].successes);

  // Direct check of a single p: the same split seeds, decided by the counting oracle.
  std::size_t direct = 0;
  for (std::size_t t = 0; t < 200; ++t) direct += oracle::count_pm(sparsify(k6, 0.5, split_seed(split_seed(5, 2), t))) > 0;
  CHECK(curve.points[2].successes == direct);

  CHECK_THROWS_AS(mc_threshold(k6, {}, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(mc_threshold(k6, {1.5}, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(mc_threshold(k6, {0.5}, 0, 1), std::invalid_argument);

  McCurve dropping;
  dropping.points = {{0.1, 100, 90, 0.82, 0.95}, {0.2, 100, 10, 0.05, 0.18}};
  CHECK_FALSE(dropping.monotone_within(3.0));
}

TEST_CASE("vertex spread of a single-cluster pipeline") {
  auto h = complete_kgraph(24, 3);
  auto f = PatternGraph::single_edge(3);
  auto p = VertexPartition::trivial(24);
  auto profile = robust_profile(h, f, p, Rational(1, 1000));
  ClusterContext ctx(h, f, p, profile, 1);
  PipelineParams params;
  params.c = 12;
  PlacementSampler sampler = [&](std::uint64_t seed) -> std::optional<std::vector<int>> {
    auto res = sample_f_factor(ctx, params, seed);
    if (!res.success) return std::nullopt;
    return res.final_cluster_of;
  };
  SpreadOptions opt;
  opt.trials = 50;
  opt.scale = 24;
  opt.constant = 24;
  auto est = estimate_vertex_spread(sampler, 24, opt);
  CHECK(est.samples == 50);
  CHECK(est.max_single_frequency == 1.0);
  CHECK(est.max_pair_frequency == 1.0);
  CHECK(est.fitted_constant == doctest::Approx(24.0));
  CHECK(est.exceedances.empty());
  for (const auto& [key, count] : est.single_counts) CHECK(count == 50);
}

TEST_CASE("factor spread of the uniform sampler on K_6") {
  auto k6 = complete_kgraph(6, 3);
  UniformPmSampler sampler(k6);
  // Oracle: how many perfect matchings contain each edge.
  std::vector<VertexMask> edges;
  for (std::size_t i = 0; i < k6.edge_count(); ++i) edges.push_back(k6.edge_mask(i));
  std::vector<std::vector<VertexMask>> all;
  std::vector<VertexMask> current;
  oracle::enumerate_pm(edges, full_mask(6), current, all);

  SpreadOptions opt;
  opt.trials = 4000;
  opt.seed = 17;
  opt.scale = 6;
  opt.constant = 6;
  auto est = estimate_factor_spread(
      [&](std::uint64_t seed) -> std::optional<PackingWitness> {
        Rng rng(seed);
        return sampler.sample(rng);
      },
      opt);
  CHECK(est.samples == 4000);
  for (std::size_t i = 0; i < k6.edge_count(); ++i) {
    std::size_t containing = 0;
    for (const auto& m : all) containing += std::find(m.begin(), m.end(), edges[i]) != m.end();
    const double expect = static_cast<double>(containing) / static_cast<double>(all.size());
    auto key = mask_vertices(edges[i]);
    auto it = est.single_counts.find(std::vector<std::uint32_t>(key.begin(), key.end()));
    const double got = it == est.single_counts.end() ? 0.0 : static_cast<double>(it->second) / 4000.0;
    CHECK(std::abs(got - expect) <= 3 * std::sqrt(expect * (1 - expect) / 4000.0));
  }
}

TEST_CASE("codegree survives in random subsets of a complete host") {
  auto h = complete_kgraph(30, 3);
  InheritanceParams ip;
  ip.property = InheritedProperty::Codegree;
  ip.ell = 15;
  ip.d = 2;
  ip.trials = 200;
  auto rep = subset_inheritance_test(h, PatternGraph::single_edge(3), VertexPartition::trivial(30), ip);
  CHECK(rep.failures == 0);
  CHECK(rep.constants.at("gamma") == "1");
  CHECK(rep.within_bound());
}

TEST_CASE("robust links on a dense random host") {
  auto h = random_kgraph(30, 3, 0.8, 4);
  InheritanceParams ip;
  ip.property = InheritedProperty::RobustLinks;
  ip.ell = 15;
  ip.trials = 500;
  ip.seed = 3;
  auto rep = subset_inheritance_test(h, PatternGraph::single_edge(3), VertexPartition::trivial(30), ip);
  MESSAGE("robust-link failure rate " << rep.rate << " against bound " << rep.bound << " (gamma "
                                      << rep.constants.at("gamma") << ")");
  CHECK(rep.within_bound());

  auto again = subset_inheritance_test(h, PatternGraph::single_edge(3), VertexPartition::trivial(30), ip);
  CHECK(again.failures == rep.failures);
  ip.threads = 3;
  CHECK(subset_inheritance_test(h, PatternGraph::single_edge(3), VertexPartition::trivial(30), ip).failures ==
        rep.failures);
}

TEST_CASE("reachability on random subsets of a complete host") {
  auto h = complete_kgraph(12, 3);
  InheritanceParams ip;
  ip.property = InheritedProperty::Reachability;
  ip.ell = 8;
  ip.trials = 50;
  auto rep = subset_inheritance_test(h, PatternGraph::single_edge(3), VertexPartition::trivial(12), ip);
  CHECK(rep.failures == 0);
  CHECK(rep.constants.at("eta") == "0");

  // Two disjoint halves with no crossing edges: cross pairs are never reachable.
  std::vector<std::vector<Vertex>> edges;
  for (const auto& e : complete_kgraph(12, 3).edge_list())
    if (std::all_of(e.begin(), e.end(), [](Vertex v) { return v < 6; }) ||
        std::all_of(e.begin(), e.end(), [](Vertex v) { return v >= 6; }))
      edges.push_back(e);
  Hypergraph split(3, 12, edges);
  ip.beta = Rational(1, 100);
  auto bad = subset_inheritance_test(split, PatternGraph::single_edge(3), VertexPartition::trivial(12), ip);
  CHECK(bad.failures == bad.trials);
  CHECK(bad.within_bound());
}
