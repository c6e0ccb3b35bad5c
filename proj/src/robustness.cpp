#include "hypermatch/robustness.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "hypermatch/random.hpp"

namespace hypermatch {

namespace {

/// passing / total >= q, exactly.
bool fraction_at_least(std::uint64_t passing, std::uint64_t total, const Rational& q) {
  return at_least(passing, q, total);
}

struct PartFraction {
  std::uint64_t passing = 0;
  std::uint64_t total = 0;
  bool better_than(const PartFraction& o) const {
    // passing/total > o.passing/o.total
    return static_cast<unsigned __int128>(passing) * o.total > static_cast<unsigned __int128>(o.passing) * total;
  }
};

PartFraction cross_fraction(const std::vector<Vertex>& a, const std::vector<Vertex>& b,
                            const std::vector<std::vector<bool>>& pass) {
  PartFraction f;
  for (Vertex u : a)
    for (Vertex v : b) f.passing += pass[u][v];
  f.total = static_cast<std::uint64_t>(a.size()) * b.size();
  return f;
}

std::string pair_str(Vertex u, Vertex v) { return std::to_string(u) + "," + std::to_string(v); }

}  // namespace

bool RobustProfile::is_robust(const IndexVector& v) const {
  return std::binary_search(robust_vectors.begin(), robust_vectors.end(), v);
}

RobustProfile robust_profile(const Hypergraph& h, const PatternGraph& f, const VertexPartition& p, const Rational& mu) {
  if (!mu.positive() || Rational(1) < mu) throw std::invalid_argument("mu must lie in (0, 1]");
  if (p.n() != h.n()) throw std::invalid_argument("partition does not cover the host");
  RobustProfile out;
  out.mu = mu;
  out.threshold = ceil_times(mu, ipow(h.n(), static_cast<unsigned>(f.r())));
  out.raw_counts = pattern_copies(h, f, p);
  for (const auto& [v, c] : out.raw_counts)
    if (c >= out.threshold) out.robust_vectors.push_back(v);
  out.link_counts.assign(h.n(), 0);
  for_each_copy_set(h, f, [&](std::span<const Vertex> set, std::uint64_t) {
    if (out.is_robust(index_vector(p, set)))
      for (Vertex v : set) ++out.link_counts[v];
  });
  return out;
}

std::vector<std::vector<VertexMask>> robust_copy_sets_by_vertex(const Hypergraph& h, const PatternGraph& f,
                                                                const VertexPartition& p,
                                                                const RobustProfile& profile) {
  std::vector<std::vector<VertexMask>> out(h.n());
  for_each_copy_set(h, f, [&](std::span<const Vertex> set, std::uint64_t) {
    if (!profile.is_robust(index_vector(p, set))) return;
    auto m = to_mask(set);
    for (Vertex v : set) out[v].push_back(m);
  });
  return out;
}

std::uint64_t reachable_count(const FactorOracle& oracle, Vertex u, Vertex v, int i) {
  if (u == v) throw std::invalid_argument("reachability needs distinct vertices");
  if (u >= oracle.n() || v >= oracle.n()) throw std::out_of_range("vertex outside host");
  if (i < 1) throw std::invalid_argument("reachability level must be at least 1");
  const long size = static_cast<long>(i) * oracle.r() - 1;
  if (size > static_cast<long>(oracle.n()) - 2) throw std::invalid_argument("reachability set larger than the host");
  VertexMask pool = full_mask(oracle.n()) & ~bit(u) & ~bit(v);
  std::uint64_t count = 0;
  for_each_submask(pool, static_cast<int>(size), [&](VertexMask s) {
    if (oracle.has_factor(s | bit(u)) && oracle.has_factor(s | bit(v))) ++count;
    return true;
  });
  return count;
}

std::uint64_t lo_markstrom_count(const Hypergraph& h, Vertex u, Vertex v, const Rational& alpha) {
  if (u == v) throw std::invalid_argument("Lo-Markstrom test needs distinct vertices");
  if (u >= h.n() || v >= h.n()) throw std::out_of_range("vertex outside host");
  std::vector<Vertex> pool;
  for (Vertex w = 0; w < h.n(); ++w)
    if (w != u && w != v) pool.push_back(w);
  std::uint64_t count = 0;
  std::vector<Vertex> with(static_cast<std::size_t>(h.k()));
  auto is_edge_with = [&](const std::vector<Vertex>& s, Vertex x) {
    std::copy(s.begin(), s.end(), with.begin());
    with.back() = x;
    std::sort(with.begin(), with.end());
    return h.has_edge(with);
  };
  for_each_combination(pool, static_cast<std::size_t>(h.k() - 1), [&](const std::vector<Vertex>& s) {
    if (is_edge_with(s, u) && is_edge_with(s, v) && at_least(h.link(s).size(), alpha, h.n())) ++count;
    return true;
  });
  return count;
}

bool lo_markstrom_test(const Hypergraph& h, Vertex u, Vertex v, const Rational& alpha) {
  return at_least(lo_markstrom_count(h, u, v, alpha), alpha, binomial(h.n(), static_cast<std::uint64_t>(h.k() - 1)));
}

PartitionBuild build_partition(const Hypergraph& h, const PatternGraph& f, const PartitionParams& params) {
  if (h.k() != f.k()) throw std::invalid_argument("pattern and host uniformity differ");
  const std::size_t n = h.n();
  const int r = f.r();
  PartitionBuild out;
  out.alpha = params.alpha.value_or(Rational(1, h.k() + 1));
  out.min_part_fraction = params.min_part_fraction.value_or(Rational(1, h.k()));

  // Stage 1: pairwise reachability surrogate, then agglomerative merging.
  std::vector<std::vector<bool>> pass(n, std::vector<bool>(n, false));
  std::optional<FactorOracle> oracle;
  std::uint64_t exact_threshold = 0;
  if (params.stage1 == ReachabilityTest::Exact) {
    oracle.emplace(h, f);
    exact_threshold = ceil_times(params.beta1, ipow(n, static_cast<unsigned>(r - 1)));
  }
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = u + 1; v < n; ++v) {
      bool ok = params.stage1 == ReachabilityTest::Exact ? reachable_count(*oracle, u, v, 1) >= exact_threshold
                                                         : lo_markstrom_test(h, u, v, out.alpha);
      pass[u][v] = pass[v][u] = ok;
      out.stage1_passing_pairs += ok;
    }

  std::vector<std::vector<Vertex>> parts;
  for (Vertex v = 0; v < n; ++v) parts.push_back({v});
  auto merge = [&](std::size_t a, std::size_t b) {
    parts[a].insert(parts[a].end(), parts[b].begin(), parts[b].end());
    std::sort(parts[a].begin(), parts[a].end());
    parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(b));
  };
  while (parts.size() > 1) {
    std::size_t ba = 0, bb = 0;
    PartFraction best{0, 1};
    bool found = false;
    for (std::size_t a = 0; a < parts.size(); ++a)
      for (std::size_t b = a + 1; b < parts.size(); ++b) {
        auto fr = cross_fraction(parts[a], parts[b], pass);
        if (!found || fr.better_than(best)) {
          best = fr;
          ba = a;
          bb = b;
          found = true;
        }
      }
    if (!found || !fraction_at_least(best.passing, best.total, params.merge_fraction)) break;
    merge(ba, bb);
  }

  const std::uint64_t min_size = ceil_times(out.min_part_fraction, n);
  while (true) {
    // Smallest undersized part that has a partner with some passing pair.
    std::optional<std::size_t> small;
    std::size_t partner = 0;
    std::vector<std::size_t> order(parts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return parts[x].size() < parts[y].size(); });
    for (auto a : order) {
      if (parts[a].size() >= min_size || parts.size() == 1) continue;
      PartFraction best{0, 1};
      std::optional<std::size_t> who;
      for (std::size_t b = 0; b < parts.size(); ++b) {
        if (b == a) continue;
        auto fr = cross_fraction(parts[a], parts[b], pass);
        if (fr.passing > 0 && (!who || fr.better_than(best))) {
          best = fr;
          who = b;
        }
      }
      if (who) {
        small = a;
        partner = *who;
        break;
      }
    }
    if (!small) break;
    merge(std::min(*small, partner), std::max(*small, partner));
  }
  std::sort(parts.begin(), parts.end());
  for (const auto& part : parts)
    if (part.size() < min_size) {
      out.small_part_vertices.insert(out.small_part_vertices.end(), part.begin(), part.end());
      out.warnings.push_back("stage 1 part starting at vertex " + std::to_string(part.front()) + " has size " +
                             std::to_string(part.size()) + " < " + std::to_string(min_size));
    }
  out.stage1_parts = parts;
  VertexPartition stage1 = VertexPartition::from_parts(n, parts);

  // Stage 2: vertices with few robust links.
  out.initial_profile = robust_profile(h, f, stage1, params.mu);
  const std::uint64_t nr1 = ipow(n, static_cast<unsigned>(r - 1));
  out.low_link_threshold = ceil_times(params.eps + params.eps, nr1);
  out.relocation_threshold = ceil_times(params.eps, nr1);
  for (Vertex v = 0; v < n; ++v)
    if (out.initial_profile.link_counts[v] < out.low_link_threshold) out.u0.push_back(v);

  // Stage 3: move each v in U0 to the smallest part i for which some robust
  // vector w has enough (r-1)-sets R with i_P(R) = w - u_i completing a copy
  // with v. All moves are decided against the stage-1 partition.
  std::vector<int> assignment = stage1.assignment();
  if (params.relocate && !out.u0.empty()) {
    std::vector<std::vector<VertexMask>> copies_through(n);
    for_each_copy_set(h, f, [&](std::span<const Vertex> set, std::uint64_t) {
      auto m = to_mask(set);
      for (Vertex v : set) copies_through[v].push_back(m);
    });
    for (Vertex v : out.u0) {
      std::map<IndexVector, std::uint64_t> rest_counts;
      for (auto m : copies_through[v]) ++rest_counts[index_vector(stage1, m & ~bit(v))];
      std::optional<Relocation> chosen;
      for (std::size_t i = 0; i < stage1.d() && !chosen; ++i)
        for (const auto& w : out.initial_profile.robust_vectors) {
          if (w[i] < 1) continue;
          auto target = w - IndexVector::unit(stage1.d(), i);
          auto it = rest_counts.find(target);
          if (it != rest_counts.end() && it->second >= out.relocation_threshold) {
            chosen = Relocation{v, stage1.part_of(v), static_cast<int>(i), w, it->second};
            break;
          }
        }
      if (!chosen) throw RelocationError(v);
      out.relocations.push_back(*chosen);
    }
    for (const auto& rel : out.relocations) assignment[rel.vertex] = rel.to;
  }

  // Drop parts emptied by relocation, keeping relative order.
  std::vector<int> remap(stage1.d(), -1);
  int next = 0;
  for (std::size_t j = 0; j < stage1.d(); ++j)
    if (std::find(assignment.begin(), assignment.end(), static_cast<int>(j)) != assignment.end())
      remap[j] = next++;
  if (next != static_cast<int>(stage1.d())) out.warnings.push_back("relocation emptied a part; parts renumbered");
  for (auto& a : assignment) a = remap[static_cast<std::size_t>(a)];
  for (auto& rel : out.relocations) rel.to = remap[static_cast<std::size_t>(rel.to)];

  out.good.partition = VertexPartition(static_cast<std::size_t>(next), std::move(assignment));
  out.good.beta = params.beta1;
  out.good.t = 1;
  out.good.min_part_fraction = out.min_part_fraction;
  out.final_profile = robust_profile(h, f, out.good.partition, params.mu / 2);
  for (std::size_t j = 0; j < out.good.partition.d(); ++j)
    if (out.good.partition.part_size(j) < min_size)
      out.warnings.push_back("output part " + std::to_string(j) + " has size " +
                             std::to_string(out.good.partition.part_size(j)) + " < " + std::to_string(min_size));
  return out;
}

VerifyReport verify_partition(const Hypergraph& h, const PatternGraph& f, const GoodPartition& gp,
                              const VerifyParams& params) {
  const auto& p = gp.partition;
  const std::size_t n = h.n();
  const int r = f.r();
  constexpr std::size_t kMaxExamples = 20;
  VerifyReport rep;

  rep.size_threshold = ceil_times(gp.min_part_fraction, n);
  for (std::size_t j = 0; j < p.d(); ++j)
    if (p.part_size(j) < rep.size_threshold) {
      rep.sizes.pass = false;
      rep.sizes.counterexamples.push_back("part " + std::to_string(j) + " size " + std::to_string(p.part_size(j)));
    }

  auto profile = robust_profile(h, f, p, params.mu);
  rep.link_threshold = ceil_times(params.eps, ipow(n, static_cast<unsigned>(r - 1)));
  for (Vertex v = 0; v < n; ++v)
    if (profile.link_counts[v] < rep.link_threshold) {
      rep.robust_links.pass = false;
      if (rep.robust_links.counterexamples.size() < kMaxExamples)
        rep.robust_links.counterexamples.push_back("vertex " + std::to_string(v) + " has " +
                                                   std::to_string(profile.link_counts[v]) + " robust links");
    }

  const long set_size = static_cast<long>(params.t) * r - 1;
  rep.reach_threshold = ceil_times(params.beta, ipow(n, static_cast<unsigned>(set_size)));
  std::uint64_t pairs = 0;
  for (std::size_t j = 0; j < p.d(); ++j) pairs += binomial(p.part_size(j), 2);
  if (set_size > static_cast<long>(n) - 2) {
    if (pairs > 0 && rep.reach_threshold > 0) {
      rep.closedness.pass = false;
      rep.closedness.counterexamples.push_back("no swap sets of size " + std::to_string(set_size) + " exist");
    }
    return rep;
  }
  const std::uint64_t per_pair = binomial(n - 2, static_cast<std::uint64_t>(set_size));
  unsigned __int128 work = static_cast<unsigned __int128>(pairs) * per_pair * 2;
  rep.exhaustive = params.mode == VerifyMode::Exhaustive ||
                   (params.mode == VerifyMode::Auto && work <= params.work_budget);

  FactorOracle oracle(h, f);
  Rng rng(params.seed);
  for (std::size_t j = 0; j < p.d(); ++j) {
    PartCertificate cert;
    cert.part = j;
    cert.exhaustive = rep.exhaustive;
    cert.confidence = rep.exhaustive ? 1.0 : 0.95;
    const auto& part = p.parts()[j];
    for (std::size_t a = 0; a < part.size(); ++a)
      for (std::size_t b = a + 1; b < part.size(); ++b) {
        Vertex u = part[a], v = part[b];
        bool ok;
        std::string detail;
        if (rep.exhaustive) {
          auto c = reachable_count(oracle, u, v, params.t);
          ok = c >= rep.reach_threshold;
          detail = std::to_string(c);
        } else {
          std::vector<Vertex> pool;
          for (Vertex w = 0; w < n; ++w)
            if (w != u && w != v) pool.push_back(w);
          std::size_t hits = 0;
          for (std::size_t s = 0; s < params.samples_per_pair; ++s) {
            rng.shuffle(std::span<Vertex>(pool));
            VertexMask m = 0;
            for (long x = 0; x < set_size; ++x) m |= bit(pool[static_cast<std::size_t>(x)]);
            hits += oracle.has_factor(m | bit(u)) && oracle.has_factor(m | bit(v));
          }
          double estimate = static_cast<double>(hits) / static_cast<double>(params.samples_per_pair) *
                            static_cast<double>(per_pair);
          ok = estimate >= static_cast<double>(rep.reach_threshold);
          detail = "~" + std::to_string(static_cast<std::uint64_t>(estimate + 0.5));
        }
        ++cert.pairs_checked;
        cert.pairs_passed += ok;
        if (!ok) {
          rep.closedness.pass = false;
          if (rep.closedness.counterexamples.size() < kMaxExamples)
            rep.closedness.counterexamples.push_back("pair " + pair_str(u, v) + " reachable via " + detail + " < " +
                                                     std::to_string(rep.reach_threshold) + " sets");
        }
      }
    rep.certificates.push_back(cert);
  }
  return rep;
}

PartitionBuild build_partition_or_unrelocated(const Hypergraph& h, const PatternGraph& f,
                                              const PartitionParams& params) {
  try {
    return build_partition(h, f, params);
  } catch (const RelocationError& e) {
    PartitionParams plain = params;
    plain.relocate = false;
    auto build = build_partition(h, f, plain);
    build.relocation_skipped = true;
    build.warnings.push_back(std::string(e.what()) + "; partition left unrelocated");
    return build;
  }
}

}  // namespace hypermatch
