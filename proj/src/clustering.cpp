#include "hypermatch/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "hypermatch/copies.hpp"

namespace hypermatch {

namespace {

VertexMask mask_of(const std::vector<Vertex>& vs) { return to_mask(std::span<const Vertex>(vs)); }

IntVector vector_of(const VertexPartition& p, const std::vector<Vertex>& vs) {
  return to_int_vector(index_vector(p, std::span<const Vertex>(vs)));
}

IntVector negate(IntVector v) {
  for (auto& x : v) x = -x;
  return v;
}

std::vector<Vertex> sorted(std::vector<Vertex> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

std::size_t first_window_size(std::size_t n, std::size_t c, WindowMode mode) {
  if (c < 2) throw std::invalid_argument("cluster size C must be at least 2");
  if (n < c) throw std::invalid_argument("n = " + std::to_string(n) + " is too small for one window of size C = " +
                                         std::to_string(c));
  const std::size_t block = c * (c - 1);
  std::size_t c1;
  if (mode == WindowMode::Wide) {
    c1 = block + n % block;
  } else {
    c1 = n % block;
    while (c1 < c) c1 += block;
  }
  return std::min(c1, n);
}

RawClusters sample_clusters(std::size_t n, std::size_t c, WindowMode mode, Rng& rng) {
  RawClusters out;
  out.c = c;
  out.first_window = first_window_size(n, c, mode);
  std::vector<Vertex> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<Vertex>(order));
  out.clusters.emplace_back(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(out.first_window));
  for (std::size_t pos = out.first_window; pos < n; pos += c - 1)
    out.clusters.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(pos),
                              order.begin() + static_cast<std::ptrdiff_t>(pos + c - 1));
  for (auto& cl : out.clusters) std::sort(cl.begin(), cl.end());
  return out;
}

ClusterThresholds default_thresholds(const Hypergraph& h, const VertexPartition& p, const PatternGraph& f,
                                     std::size_t c, int q, const Rational& part_c, const Rational& eps,
                                     const Rational& beta, const Rational& mu, const Rational& delta, int ell) {
  ClusterThresholds th;
  th.part_fraction = part_c * Rational(2, 3);
  const double rqd = static_cast<double>(f.r()) * q * static_cast<double>(p.d());
  th.in_degree_fraction = std::max(0.0, 1.0 - rqd / std::sqrt(static_cast<double>(c)));
  th.link_fraction = eps * Rational(2, 3);
  const double e = eps.to_double();
  th.weak_vertex_fraction = std::exp(-e * e * static_cast<double>(c) / 50.0);
  th.ell = ell;
  // delta + 2 gamma / 3 where delta + gamma is the measured degree ratio of H.
  Rational ratio(static_cast<std::int64_t>(min_degree(h, ell)),
                 static_cast<std::int64_t>(binomial(h.n() - static_cast<std::size_t>(ell),
                                                    static_cast<std::uint64_t>(h.k() - ell))));
  th.degree_fraction = (delta + ratio + ratio) / 3;
  th.closed_beta = beta * Rational(2, 3);
  th.robust_mu = mu * Rational(2, 3);
  return th;
}

ClusterContext::ClusterContext(const Hypergraph& h, const PatternGraph& f, const VertexPartition& p,
                               const RobustProfile& profile, int q)
    : h_(&h),
      f_(&f),
      p_(&p),
      profile_(&profile),
      q_(q),
      lattice_(IntegerLattice::from_index_vectors(p.d(), profile.robust_vectors)),
      residues_(lattice_, f.r()) {
  if (!h.mask_capable()) throw std::length_error("the cluster pipeline supports at most 64 vertices");
  if (p.n() != h.n()) throw std::invalid_argument("partition does not cover the host");
  if (q < 1) throw std::invalid_argument("q must be positive");
  robust_by_vertex_.assign(h.n(), {});
  for_each_copy_set(h, f, [&](std::span<const Vertex> set, std::uint64_t) {
    auto m = to_mask(set);
    copies_.push_back(m);
    if (profile.is_robust(index_vector(p, set))) {
      robust_copies_.push_back(m);
      for (Vertex v : set) robust_by_vertex_[v].push_back(m);
    }
  });
}

std::uint64_t ClusterContext::robust_links_into(Vertex v, VertexMask y) const {
  std::uint64_t count = 0;
  const VertexMask allowed = y | bit(v);
  for (auto m : robust_by_vertex_[v]) count += (m & ~allowed) == 0;
  return count;
}

std::vector<Vertex> choose_t_set(const ClusterContext& ctx, const std::vector<Vertex>& cluster) {
  const auto& p = ctx.partition();
  const std::size_t need = static_cast<std::size_t>(ctx.r()) * static_cast<std::size_t>(ctx.q());
  std::vector<std::size_t> taken(p.d(), 0);
  std::vector<Vertex> t;
  for (Vertex v : cluster) {
    auto j = static_cast<std::size_t>(p.part_of(v));
    if (taken[j] < need) {
      ++taken[j];
      t.push_back(v);
    }
  }
  for (auto c : taken)
    if (c < need) return {};
  return t;
}

std::vector<std::vector<bool>> auxiliary_digraph(const ClusterContext& ctx,
                                                 const std::vector<std::vector<Vertex>>& clusters,
                                                 const std::vector<std::vector<Vertex>>& t_sets,
                                                 const Rational& link_fraction) {
  const std::size_t m = clusters.size();
  std::vector<std::vector<bool>> arcs(m, std::vector<bool>(m, false));
  for (std::size_t j = 0; j < m; ++j) {
    const VertexMask y = mask_of(clusters[j]);
    const std::uint64_t scale = ipow(clusters[j].size(), static_cast<unsigned>(ctx.r() - 1));
    for (std::size_t i = 0; i < m; ++i) {
      if (i == j || t_sets[i].empty()) continue;
      arcs[i][j] = std::all_of(t_sets[i].begin(), t_sets[i].end(), [&](Vertex v) {
        return at_least(ctx.robust_links_into(v, y), link_fraction, scale);
      });
    }
  }
  return arcs;
}

namespace {

bool parts_closed(const ClusterContext& ctx, const std::vector<Vertex>& cluster, const Rational& beta) {
  const int r = ctx.r();
  const std::size_t u = cluster.size();
  auto sub = ctx.host().induced(cluster);
  const auto& p = ctx.partition();
  std::vector<std::vector<Vertex>> by_part(p.d());
  for (Vertex i = 0; i < u; ++i) by_part[static_cast<std::size_t>(p.part_of(cluster[i]))].push_back(i);
  const std::uint64_t need = ceil_times(beta, ipow(u, static_cast<unsigned>(r - 1)));
  FactorOracle oracle(sub, ctx.pattern());
  for (const auto& part : by_part)
    for (std::size_t a = 0; a < part.size(); ++a)
      for (std::size_t b = a + 1; b < part.size(); ++b)
        if (reachable_count(oracle, part[a], part[b], 1) < need) return false;
  return true;
}

bool keeps_robust_vectors(const ClusterContext& ctx, const std::vector<Vertex>& cluster, const Rational& mu) {
  auto sub = ctx.host().induced(cluster);
  const auto& p = ctx.partition();
  std::map<IndexVector, std::uint64_t> counts;
  std::vector<Vertex> original;
  for_each_copy_set(sub, ctx.pattern(), [&](std::span<const Vertex> set, std::uint64_t copies) {
    original.clear();
    for (Vertex x : set) original.push_back(cluster[x]);
    counts[index_vector(p, std::span<const Vertex>(original))] += copies;
  });
  const std::uint64_t need = ceil_times(mu, ipow(cluster.size(), static_cast<unsigned>(ctx.r())));
  for (const auto& w : ctx.profile().robust_vectors) {
    auto it = counts.find(w);
    if (it == counts.end() || it->second < need) return false;
  }
  return true;
}

}  // namespace

Classification classify_bad_clusters(const ClusterContext& ctx, const RawClusters& raw, const ClusterThresholds& th) {
  const auto& h = ctx.host();
  const auto& p = ctx.partition();
  const std::size_t m = raw.clusters.size();
  const std::size_t n = h.n();
  Classification cls;
  for (const auto& cl : raw.clusters) cls.t_sets.push_back(choose_t_set(ctx, cl));
  cls.digraph = auxiliary_digraph(ctx, raw.clusters, cls.t_sets, th.link_fraction);

  for (std::size_t i = 0; i < m; ++i) {
    const auto& cl = raw.clusters[i];
    ClusterFlags fl;
    fl.index = i;
    if (cls.t_sets[i].empty()) fl.reasons.push_back("T");

    std::vector<std::size_t> per_part(p.d(), 0);
    for (Vertex v : cl) ++per_part[static_cast<std::size_t>(p.part_of(v))];
    if (std::any_of(per_part.begin(), per_part.end(),
                    [&](std::size_t c) { return !at_least(c, th.part_fraction, cl.size()); }))
      fl.reasons.push_back("A1");

    std::size_t in_degree = 0;
    for (std::size_t j = 0; j < m; ++j) in_degree += cls.digraph[j][i];
    if (static_cast<double>(in_degree) < th.in_degree_fraction * static_cast<double>(m)) fl.reasons.push_back("A2");

    const VertexMask y = mask_of(cl);
    const std::uint64_t scale = ipow(cl.size(), static_cast<unsigned>(ctx.r() - 1));
    std::size_t weak = 0;
    for (Vertex v = 0; v < n; ++v) weak += !at_least(ctx.robust_links_into(v, y), th.link_fraction, scale);
    if (static_cast<double>(weak) >= th.weak_vertex_fraction * static_cast<double>(n)) fl.reasons.push_back("A3");

    bool degree_ok = true;
    if (cl.size() >= static_cast<std::size_t>(h.k())) {
      auto sub = h.induced(cl);
      degree_ok = at_least(min_degree(sub, th.ell), th.degree_fraction,
                           binomial(cl.size() - static_cast<std::size_t>(th.ell),
                                    static_cast<std::uint64_t>(h.k() - th.ell)));
    }
    if (!degree_ok || !parts_closed(ctx, cl, th.closed_beta)) fl.reasons.push_back("A4");
    if (!keeps_robust_vectors(ctx, cl, th.robust_mu)) fl.reasons.push_back("A5");

    if (i > 0 && fl.bad()) cls.bad.push_back(i);
    cls.flags.push_back(std::move(fl));
  }

  const auto& first = cls.flags.front().reasons;
  bool first_ok = std::none_of(first.begin(), first.end(),
                               [](const std::string& s) { return s == "A1" || s == "A4" || s == "A5"; });
  cls.acceptable = first_ok && cls.bad.size() * raw.c <= m - 1;
  return cls;
}

std::variant<std::vector<std::size_t>, HallViolator> random_bipartite_matching(
    const std::vector<std::vector<std::size_t>>& adj, std::size_t right, Rng& rng) {
  const std::size_t left = adj.size();
  if (left != right) throw std::invalid_argument("bipartite sides differ in size");
  std::vector<std::vector<std::size_t>> nbrs = adj;
  for (auto& list : nbrs) rng.shuffle(std::span<std::size_t>(list));
  std::vector<std::size_t> order(left);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<std::size_t>(order));

  constexpr std::size_t kFree = ~std::size_t{0};
  std::vector<std::size_t> match_left(left, kFree), match_right(right, kFree);
  std::vector<char> seen_right;
  std::vector<std::size_t> tree_left;
  std::function<bool(std::size_t)> augment = [&](std::size_t a) {
    tree_left.push_back(a);
    for (auto b : nbrs[a]) {
      if (seen_right[b]) continue;
      seen_right[b] = 1;
      if (match_right[b] == kFree || augment(match_right[b])) {
        match_left[a] = b;
        match_right[b] = a;
        return true;
      }
    }
    return false;
  };
  for (auto a : order) {
    seen_right.assign(right, 0);
    tree_left.clear();
    if (augment(a)) continue;
    // The alternating tree from a is a Hall violator: its right side is
    // fully matched back into the tree, one short of the left side.
    HallViolator hv;
    hv.left = tree_left;
    std::sort(hv.left.begin(), hv.left.end());
    for (std::size_t b = 0; b < right; ++b)
      if (seen_right[b]) hv.neighbourhood.push_back(b);
    return hv;
  }
  return match_left;
}

ClusterPlan redistribute(const ClusterContext& ctx, const RawClusters& raw, const Classification& cls, Rng& rng) {
  const std::size_t m = raw.clusters.size();
  ClusterPlan plan;
  plan.clusters.push_back(raw.clusters[0]);
  plan.raw_index.push_back(0);
  plan.t_sets.push_back(cls.t_sets[0]);
  plan.l_sets.push_back({});
  if (m > 1) {
    if ((m - 1) % raw.c != 0) throw std::invalid_argument("cluster count is not 1 plus a multiple of C");
    const std::size_t quota = (m - 1) / raw.c;
    if (cls.bad.size() > quota)
      throw std::invalid_argument("more bad clusters than can be redistributed");
    std::vector<bool> dissolved(m, false);
    for (auto b : cls.bad) dissolved[b] = true;
    std::vector<std::size_t> spare;
    for (std::size_t i = 1; i < m; ++i)
      if (!dissolved[i]) spare.push_back(i);
    rng.shuffle(std::span<std::size_t>(spare));
    for (std::size_t j = 0; j < quota - cls.bad.size(); ++j) dissolved[spare[j]] = true;

    std::vector<Vertex> pool;
    std::vector<std::size_t> kept;
    for (std::size_t i = 1; i < m; ++i) {
      if (dissolved[i]) {
        plan.dissolved.push_back(i);
        pool.insert(pool.end(), raw.clusters[i].begin(), raw.clusters[i].end());
      } else {
        kept.push_back(i);
      }
    }
    std::sort(pool.begin(), pool.end());

    // u -- U'_i when some robust copy through u lies in (U'_i minus T_i) + u.
    std::vector<VertexMask> room(kept.size());
    for (std::size_t b = 0; b < kept.size(); ++b)
      room[b] = mask_of(raw.clusters[kept[b]]) & ~mask_of(cls.t_sets[kept[b]]);
    std::vector<std::vector<std::size_t>> adj(pool.size());
    for (std::size_t a = 0; a < pool.size(); ++a)
      for (std::size_t b = 0; b < kept.size(); ++b) {
        const VertexMask allowed = room[b] | bit(pool[a]);
        const auto& through = ctx.robust_copies_through(pool[a]);
        if (std::any_of(through.begin(), through.end(), [&](VertexMask c) { return (c & ~allowed) == 0; }))
          adj[a].push_back(b);
      }
    auto result = random_bipartite_matching(adj, kept.size(), rng);
    if (auto* hv = std::get_if<HallViolator>(&result)) {
      std::string msg = "no perfect matching between dissolved vertices and kept clusters: vertices {";
      for (std::size_t x = 0; x < hv->left.size(); ++x) msg += (x ? "," : "") + std::to_string(pool[hv->left[x]]);
      msg += "} reach only " + std::to_string(hv->neighbourhood.size()) + " clusters";
      throw RedistributionError(msg, *hv);
    }
    const auto& match = std::get<std::vector<std::size_t>>(result);
    std::vector<Vertex> owner(kept.size());
    for (std::size_t a = 0; a < pool.size(); ++a) owner[match[a]] = pool[a];

    for (std::size_t b = 0; b < kept.size(); ++b) {
      const Vertex u = owner[b];
      const VertexMask allowed = room[b] | bit(u);
      std::vector<VertexMask> certs;
      for (auto c : ctx.robust_copies_through(u))
        if ((c & ~allowed) == 0) certs.push_back(c);
      const VertexMask chosen = certs[static_cast<std::size_t>(rng.below(certs.size()))];
      auto cluster = raw.clusters[kept[b]];
      cluster.push_back(u);
      std::sort(cluster.begin(), cluster.end());
      plan.clusters.push_back(std::move(cluster));
      plan.raw_index.push_back(kept[b]);
      plan.t_sets.push_back(cls.t_sets[kept[b]]);
      plan.l_sets.push_back(mask_vertices(chosen));
      plan.absorptions.push_back({kept[b], u, mask_vertices(chosen)});
    }
  }
  for (const auto& cl : plan.clusters) plan.sizes.push_back(cl.size());
  for (std::size_t i = 2; i < plan.sizes.size(); ++i)
    if (plan.sizes[i] != plan.sizes[1]) plan.common_size = false;
  return plan;
}

HamiltonReport hamilton_order(const std::vector<std::vector<bool>>& arcs) {
  const std::size_t m = arcs.size();
  HamiltonReport rep;
  if (m == 0) return rep;
  std::size_t min_semi = m;
  for (std::size_t v = 0; v < m; ++v) {
    std::size_t out = 0, in = 0;
    for (std::size_t w = 0; w < m; ++w)
      if (w != v) {
        out += arcs[v][w];
        in += arcs[w][v];
      }
    min_semi = std::min({min_semi, out, in});
  }
  rep.ghouila_houri = 2 * min_semi >= m;
  if (m == 1) {
    rep.cycle = {0};
    rep.found = true;
    return rep;
  }
  std::vector<std::size_t> path{0};
  std::vector<bool> used(m, false);
  used[0] = true;
  std::function<bool()> extend = [&]() {
    if (path.size() == m) return static_cast<bool>(arcs[path.back()][0]);
    for (std::size_t w = 1; w < m; ++w) {
      if (used[w] || !arcs[path.back()][w]) continue;
      used[w] = true;
      path.push_back(w);
      if (extend()) return true;
      path.pop_back();
      used[w] = false;
    }
    return false;
  };
  if (extend()) {
    rep.cycle = path;
    rep.found = true;
  }
  return rep;
}

std::optional<std::vector<IndexVector>> residue_fix(const ResidueContext& ctx, const IntVector& target,
                                                    int max_sets) {
  const auto vectors = all_vectors_of_norm(ctx.dim(), ctx.r());
  for (int size = 0; size <= max_sets; ++size) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(size), 0);
    while (true) {
      IntVector rest = target;
      for (auto i : idx)
        for (std::size_t c = 0; c < rest.size(); ++c) rest[c] -= vectors[i][c];
      if (ctx.is_zero(rest)) {
        std::vector<IndexVector> out;
        for (auto i : idx) out.push_back(vectors[i]);
        return out;
      }
      std::size_t j = idx.size();
      while (j > 0 && idx[j - 1] == vectors.size() - 1) --j;
      if (j == 0) break;
      ++idx[j - 1];
      for (std::size_t t = j; t < idx.size(); ++t) idx[t] = idx[j - 1];
    }
  }
  return std::nullopt;
}

std::vector<IndexVector> pigeonhole_shrink(const ResidueContext& ctx, std::vector<IndexVector> sets, int q) {
  if (q < 1) throw std::invalid_argument("q must be positive");
  while (sets.size() >= static_cast<std::size_t>(q)) {
    std::vector<IntVector> prefix{IntVector(ctx.dim(), 0)};
    for (std::size_t j = 0; j < static_cast<std::size_t>(q); ++j) {
      IntVector next = prefix.back();
      for (std::size_t c = 0; c < next.size(); ++c) next[c] += sets[j][c];
      prefix.push_back(next);
    }
    bool cut = false;
    for (std::size_t a = 0; a < prefix.size() && !cut; ++a)
      for (std::size_t b = a + 1; b < prefix.size() && !cut; ++b)
        if (ctx.residue(prefix[a]) == ctx.residue(prefix[b])) {
          sets.erase(sets.begin() + static_cast<std::ptrdiff_t>(a), sets.begin() + static_cast<std::ptrdiff_t>(b));
          cut = true;
        }
    if (!cut) throw std::logic_error("coset group has more than q classes");
  }
  return sets;
}

CorrectedPlan residue_correct(const ClusterContext& ctx, const ClusterPlan& plan,
                              const std::vector<std::vector<bool>>& digraph) {
  const auto& p = ctx.partition();
  const std::size_t m = plan.clusters.size();
  CorrectedPlan out;

  std::vector<std::vector<bool>> arcs(m, std::vector<bool>(m, false));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) arcs[a][b] = a != b && digraph[plan.raw_index[a]][plan.raw_index[b]];
  out.hamilton = hamilton_order(arcs);

  // Order o_1 = 0, o_2, ... with arcs (o_i, o_{i-1}): vertices of T_{o_i}
  // have many robust links into the cluster before them.
  if (out.hamilton.found) {
    out.order.push_back(out.hamilton.cycle[0]);
    for (std::size_t j = m; j-- > 1;) out.order.push_back(out.hamilton.cycle[j]);
  } else {
    std::vector<bool> used(m, false);
    std::vector<std::size_t> path{0};
    used[0] = true;
    std::function<bool()> extend = [&]() {
      if (path.size() == m) return true;
      for (std::size_t w = 1; w < m; ++w) {
        if (used[w] || !arcs[w][path.back()]) continue;
        used[w] = true;
        path.push_back(w);
        if (extend()) return true;
        path.pop_back();
        used[w] = false;
      }
      return false;
    };
    if (!extend()) throw ResidueCorrectionError("the auxiliary digraph has no usable ordering of the clusters");
    out.order = path;
    out.warnings.push_back("no directed Hamilton cycle; using a Hamilton path ending at the first cluster");
  }

  const auto& res = ctx.residues();
  std::vector<Vertex> carried_out;  // J_i of the current cluster
  for (std::size_t pos = 0; pos < m; ++pos) {
    const std::size_t ci = out.order[pos];
    std::vector<Vertex> current;
    std::set_difference(plan.clusters[ci].begin(), plan.clusters[ci].end(), carried_out.begin(), carried_out.end(),
                        std::back_inserter(current));
    const IntVector here = vector_of(p, current);
    std::vector<Vertex> imported;
    if (pos + 1 < m) {
      CorrectionStep step;
      step.cluster = pos;
      step.deficit = res.residue(here);
      auto fix = residue_fix(res, negate(here), ctx.q() - 1);
      if (!fix)
        throw ResidueCorrectionError("no residue fix with at most " + std::to_string(ctx.q() - 1) +
                                     " sets for cluster " + std::to_string(pos));
      const auto& t = plan.t_sets[out.order[pos + 1]];
      std::vector<bool> taken(t.size(), false);
      for (const auto& w : *fix) {
        std::vector<Vertex> set;
        for (std::size_t j = 0; j < p.d(); ++j) {
          LatticeInt need = w[j];
          for (std::size_t x = 0; x < t.size() && need > 0; ++x)
            if (!taken[x] && static_cast<std::size_t>(p.part_of(t[x])) == j) {
              taken[x] = true;
              set.push_back(t[x]);
              --need;
            }
          if (need > 0)
            throw ResidueCorrectionError("T set of cluster " + std::to_string(pos + 1) + " cannot host the residue fix");
        }
        std::sort(set.begin(), set.end());
        imported.insert(imported.end(), set.begin(), set.end());
        step.moved.push_back(std::move(set));
      }
      out.steps.push_back(std::move(step));
    }
    std::sort(imported.begin(), imported.end());
    auto cluster = current;
    cluster.insert(cluster.end(), imported.begin(), imported.end());
    std::sort(cluster.begin(), cluster.end());
    if (!res.is_zero(vector_of(p, cluster))) {
      if (pos + 1 == m)
        throw ResidueCorrectionError("the last cluster is off the lattice: i_P(V(H)) is not in L");
      throw std::logic_error("residue correction left a cluster off the lattice");
    }
    out.clusters.push_back(std::move(cluster));
    out.imported.push_back(imported);
    carried_out = std::move(imported);
  }
  return out;
}

StageCheck conservation_check(const ClusterContext& ctx, const std::string& stage,
                              const std::vector<std::vector<Vertex>>& clusters) {
  const auto& p = ctx.partition();
  const std::size_t n = ctx.host().n();
  StageCheck chk;
  chk.stage = stage;
  std::vector<int> seen(n, 0);
  IntVector sum(p.d(), 0);
  bool sizes_divisible = true;
  for (const auto& cl : clusters) {
    for (Vertex v : cl) {
      if (v >= n) {
        chk.partition_ok = false;
        continue;
      }
      ++seen[v];
    }
    auto vec = vector_of(p, cl);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += vec[j];
    if (cl.size() % static_cast<std::size_t>(ctx.r()) != 0) sizes_divisible = false;
  }
  chk.partition_ok = chk.partition_ok && std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
  std::vector<Vertex> all(n);
  std::iota(all.begin(), all.end(), 0);
  const IntVector total = vector_of(p, all);
  chk.vector_sum_ok = sum == total;
  if (sizes_divisible && n % static_cast<std::size_t>(ctx.r()) == 0) {
    const auto& res = ctx.residues();
    IntVector residue_sum(p.d(), 0);
    for (const auto& cl : clusters) {
      auto rv = res.residue(vector_of(p, cl));
      for (std::size_t j = 0; j < rv.size(); ++j) residue_sum[j] += rv[j];
    }
    chk.residue_ok = res.residue(residue_sum) == res.residue(total);
  }
  return chk;
}

std::string stage_name(PipelineStage s) {
  switch (s) {
    case PipelineStage::Sampling: return "sampling";
    case PipelineStage::Redistribution: return "redistribution";
    case PipelineStage::ResidueCorrection: return "residue_correction";
    case PipelineStage::ClusterFactor: return "cluster_factor";
    case PipelineStage::Validation: return "validation";
    case PipelineStage::Done: return "done";
  }
  return "unknown";
}

bool PipelineResult::conservation_ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const StageCheck& c) { return c.ok(); });
}

namespace {

/// Covers the required copies of cluster `cl` greedily, then finds a factor
/// of the rest under a random relabelling. Empty optional on failure.
std::optional<std::vector<std::vector<Vertex>>> factor_cluster(const ClusterContext& ctx,
                                                               const std::vector<Vertex>& cl,
                                                               const std::vector<Vertex>& l_set,
                                                               const std::vector<Vertex>& imported, Rng& rng) {
  const auto& h = ctx.host();
  const VertexMask inside = mask_of(cl);
  VertexMask used = 0;
  std::vector<std::vector<Vertex>> copies;
  if (!l_set.empty()) {
    used |= mask_of(l_set);
    copies.push_back(l_set);
  }
  for (Vertex v : imported) {
    if (used & bit(v)) continue;
    std::vector<VertexMask> options;
    for (auto c : ctx.robust_copies_through(v))
      if ((c & ~inside) == 0 && (c & used) == 0) options.push_back(c);
    if (options.empty()) return std::nullopt;
    const VertexMask pick = options[static_cast<std::size_t>(rng.below(options.size()))];
    used |= pick;
    copies.push_back(mask_vertices(pick));
  }
  std::vector<Vertex> rest;
  for (Vertex v : cl)
    if (!(used & bit(v))) rest.push_back(v);
  rng.shuffle(std::span<Vertex>(rest));
  if (!rest.empty()) {
    auto sub = h.induced(rest);
    FactorOracle oracle(sub, ctx.pattern());
    auto factor = oracle.find_factor(full_mask(rest.size()));
    if (!factor) return std::nullopt;
    for (auto c : *factor) {
      std::vector<Vertex> set;
      for (VertexMask x = c; x; x &= x - 1) set.push_back(rest[lowest_vertex(x)]);
      copies.push_back(sorted(std::move(set)));
    }
  }
  return copies;
}

}  // namespace

PipelineResult sample_f_factor(const ClusterContext& ctx, const PipelineParams& params, std::uint64_t seed) {
  const auto& h = ctx.host();
  const auto& f = ctx.pattern();
  const std::size_t n = h.n();
  const std::size_t r = static_cast<std::size_t>(f.r());
  if (params.c % r != 0) throw std::invalid_argument("r must divide C");
  if (n % r != 0) throw std::invalid_argument("r must divide n");
  const auto th = params.thresholds.value_or(default_thresholds(h, ctx.partition(), f, params.c, ctx.q(),
                                                                params.part_c, params.eps, params.beta,
                                                                ctx.profile().mu, params.delta, h.k() - 1));
  Rng rng(seed);
  PipelineResult res;
  res.final_cluster_of.assign(n, -1);

  std::optional<RawClusters> raw;
  std::optional<Classification> cls;
  for (int attempt = 0; attempt < params.retry_cap; ++attempt) {
    RawClusters candidate = sample_clusters(n, params.c, params.window, rng);
    Classification c = classify_bad_clusters(ctx, candidate, th);
    if (c.acceptable) {
      raw = std::move(candidate);
      cls = std::move(c);
      break;
    }
    ++res.resamples;
  }
  if (!raw) {
    res.stage = PipelineStage::Sampling;
    res.message = "no acceptable cluster sample in " + std::to_string(params.retry_cap) + " draws";
    return res;
  }
  res.checks.push_back(conservation_check(ctx, "sampled", raw->clusters));

  try {
    res.plan = redistribute(ctx, *raw, *cls, rng);
  } catch (const RedistributionError& e) {
    res.stage = PipelineStage::Redistribution;
    res.message = e.what();
    return res;
  }
  res.plan->seed = seed;
  res.checks.push_back(conservation_check(ctx, "redistributed", res.plan->clusters));

  try {
    res.corrected = residue_correct(ctx, *res.plan, cls->digraph);
  } catch (const ResidueCorrectionError& e) {
    res.stage = PipelineStage::ResidueCorrection;
    res.message = e.what();
    return res;
  }
  res.checks.push_back(conservation_check(ctx, "corrected", res.corrected->clusters));

  const auto& cor = *res.corrected;
  for (std::size_t pos = 0; pos < cor.clusters.size(); ++pos) {
    const auto& l_set = res.plan->l_sets[cor.order[pos]];
    std::optional<std::vector<std::vector<Vertex>>> copies;
    for (int attempt = 0; attempt < params.cluster_attempts && !copies; ++attempt)
      copies = factor_cluster(ctx, cor.clusters[pos], l_set, cor.imported[pos], rng);
    if (!copies) {
      res.stage = PipelineStage::ClusterFactor;
      res.message = "cluster " + std::to_string(pos) + " (" + std::to_string(cor.clusters[pos].size()) +
                    " vertices) has no F-factor extending its required copies after " +
                    std::to_string(params.cluster_attempts) + " attempts";
      return res;
    }
    for (auto& c : *copies) res.factor.copies.push_back(std::move(c));
    for (Vertex v : cor.clusters[pos]) res.final_cluster_of[v] = static_cast<int>(pos);
  }
  std::sort(res.factor.copies.begin(), res.factor.copies.end());
  res.checks.push_back(conservation_check(ctx, "factored", cor.clusters));

  if (!verify_packing(h, f, res.factor, true)) {
    res.stage = PipelineStage::Validation;
    res.message = "assembled packing failed verification";
    res.factor = {};
    return res;
  }
  res.success = true;
  res.stage = PipelineStage::Done;
  return res;
}

}  // namespace hypermatch
