#include "hypermatch/decision.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "hypermatch/copies.hpp"
#include "hypermatch/generators.hpp"

namespace hypermatch {

bool EdgeOracle::query(std::size_t edge) {
  if (auto it = answers_.find(edge); it != answers_.end()) return it->second;
  bool present = lookup(edge);
  answers_.emplace(edge, present);
  reveals_.push_back({edge, present});
  return present;
}

SparsifiedEdgeOracle::SparsifiedEdgeOracle(const Hypergraph& h, double p, std::uint64_t seed)
    : kept_(h.edge_count(), false) {
  for (auto pos : sparsify_positions(h, p, seed)) kept_[pos] = true;
}

namespace {

/// Backtracking over a multiset of requirements, one item per requirement,
/// items drawn from per-requirement candidate lists and pairwise disjoint.
/// Equal consecutive requirements take candidates in increasing position.
class DisjointPicker {
 public:
  DisjointPicker(std::size_t n, std::vector<const std::vector<std::size_t>*> lists,
                 std::function<std::span<const Vertex>(std::size_t)> vertices_of, std::vector<bool> same_as_previous,
                 const std::function<bool(std::size_t)>& accept)
      : used_(n, false),
        lists_(std::move(lists)),
        vertices_of_(std::move(vertices_of)),
        same_(std::move(same_as_previous)),
        accept_(accept),
        chosen_(lists_.size()),
        chosen_slot_(lists_.size()) {}

  void forbid(Vertex v) { used_[v] = true; }

  std::optional<std::vector<std::size_t>> run() {
    if (pick(0)) return chosen_;
    return std::nullopt;
  }

 private:
  bool pick(std::size_t j) {
    if (j == lists_.size()) return true;
    const auto& list = *lists_[j];
    std::size_t start = (j > 0 && same_[j]) ? chosen_slot_[j - 1] + 1 : 0;
    for (std::size_t slot = start; slot < list.size(); ++slot) {
      auto item = list[slot];
      auto vs = vertices_of_(item);
      if (std::any_of(vs.begin(), vs.end(), [&](Vertex v) { return used_[v]; })) continue;
      if (accept_ && !accept_(item)) continue;
      for (Vertex v : vs) used_[v] = true;
      chosen_[j] = item;
      chosen_slot_[j] = slot;
      if (pick(j + 1)) return true;
      for (Vertex v : vs) used_[v] = false;
    }
    return false;
  }

  std::vector<bool> used_;
  std::vector<const std::vector<std::size_t>*> lists_;
  std::function<std::span<const Vertex>(std::size_t)> vertices_of_;
  std::vector<bool> same_;
  const std::function<bool(std::size_t)>& accept_;
  std::vector<std::size_t> chosen_;
  std::vector<std::size_t> chosen_slot_;
};

std::map<IndexVector, std::vector<std::size_t>> edges_by_vector(const Hypergraph& h, const VertexPartition& p) {
  std::map<IndexVector, std::vector<std::size_t>> out;
  for (std::size_t e = 0; e < h.edge_count(); ++e) out[index_vector(p, h.edge(e))].push_back(e);
  return out;
}

std::optional<std::vector<std::size_t>> pick_edges(const Hypergraph& h,
                                                   const std::map<IndexVector, std::vector<std::size_t>>& buckets,
                                                   std::vector<IndexVector> vectors, VertexMask forbidden,
                                                   const std::function<bool(std::size_t)>& present) {
  std::sort(vectors.begin(), vectors.end());
  static const std::vector<std::size_t> kEmpty;
  std::vector<const std::vector<std::size_t>*> lists;
  std::vector<bool> same;
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    auto it = buckets.find(vectors[j]);
    if (it == buckets.end()) return std::nullopt;
    lists.push_back(&it->second);
    same.push_back(j > 0 && vectors[j] == vectors[j - 1]);
  }
  DisjointPicker picker(h.n(), lists, [&](std::size_t e) { return h.edge(e); }, same, present);
  for (VertexMask m = forbidden; m; m &= m - 1) picker.forbid(lowest_vertex(m));
  return picker.run();
}

/// Calls visit(multiset) for every nondecreasing index sequence of the given
/// length over [0, count), in lexicographic order; stops when visit returns true.
template <typename Visit>
bool for_each_multiset(std::size_t count, std::size_t length, Visit&& visit) {
  std::vector<std::size_t> idx(length, 0);
  if (length > 0 && count == 0) return false;
  while (true) {
    if (visit(static_cast<const std::vector<std::size_t>&>(idx))) return true;
    std::size_t j = length;
    while (j > 0 && idx[j - 1] == count - 1) --j;
    if (j == 0) return false;
    ++idx[j - 1];
    for (std::size_t t = j; t < length; ++t) idx[t] = idx[j - 1];
  }
}

}  // namespace

std::optional<std::vector<std::size_t>> find_matching_with_vectors(const Hypergraph& h, const VertexPartition& p,
                                                                   std::vector<IndexVector> vectors,
                                                                   VertexMask forbidden,
                                                                   const std::function<bool(std::size_t)>& present) {
  for (const auto& v : vectors)
    if (v.dim() != p.d() || v.norm() != h.k())
      throw std::invalid_argument("requested vector " + v.str() + " is not a k-vector over the partition");
  return pick_edges(h, edges_by_vector(h, p), std::move(vectors), forbidden, present);
}

std::optional<PackingWitness> find_q_solution(const Hypergraph& h, const PatternGraph& f, const VertexPartition& p,
                                              const IntegerLattice& l, int q) {
  if (l.dim() != p.d()) throw std::invalid_argument("lattice dimension differs from partition size");
  const int r = f.r();
  if (h.n() % static_cast<std::size_t>(r) != 0) return std::nullopt;
  ResidueContext ctx(l, r);

  std::vector<std::vector<Vertex>> copy_sets;
  std::map<IndexVector, std::vector<std::size_t>> buckets;
  for_each_copy_set(h, f, [&](std::span<const Vertex> set, std::uint64_t) {
    buckets[index_vector(p, set)].push_back(copy_sets.size());
    copy_sets.emplace_back(set.begin(), set.end());
  });
  std::vector<IndexVector> vectors;
  for (const auto& [v, _] : buckets) vectors.push_back(v);

  std::vector<Vertex> everything(h.n());
  for (Vertex v = 0; v < h.n(); ++v) everything[v] = v;
  const auto target = to_int_vector(index_vector(p, everything));

  std::optional<PackingWitness> found;
  for (int size = 0; size <= q && !found; ++size) {
    for_each_multiset(vectors.size(), static_cast<std::size_t>(size), [&](const std::vector<std::size_t>& idx) {
      IntVector rest = target;
      for (auto i : idx)
        for (std::size_t c = 0; c < rest.size(); ++c) rest[c] -= vectors[i][c];
      if (!ctx.is_zero(rest)) return false;
      std::vector<const std::vector<std::size_t>*> lists;
      std::vector<bool> same;
      for (std::size_t j = 0; j < idx.size(); ++j) {
        lists.push_back(&buckets[vectors[idx[j]]]);
        same.push_back(j > 0 && idx[j] == idx[j - 1]);
      }
      std::function<bool(std::size_t)> any;
      DisjointPicker picker(
          h.n(), lists, [&](std::size_t c) { return std::span<const Vertex>(copy_sets[c]); }, same, any);
      auto pick = picker.run();
      if (!pick) return false;
      PackingWitness w;
      for (auto c : *pick) w.copies.push_back(copy_sets[c]);
      found = std::move(w);
      return true;
    });
  }
  return found;
}

int default_q(const CosetGroup& group, bool hypotheses_certified) {
  if (hypotheses_certified && group.finite()) return static_cast<int>(std::max<std::uint64_t>(1, *group.size()));
  return static_cast<int>(trivial_coset_bound(group.d, group.r));
}

DecisionOutcome procedure_perfect_matching(const Hypergraph& h, const VertexPartition& p,
                                           const RobustProfile& profile, const ProcedureParams& params,
                                           EdgeOracle& oracle) {
  const int k = h.k();
  const std::size_t n = h.n();
  if (n % static_cast<std::size_t>(k) != 0) throw std::invalid_argument("k must divide n");
  if (p.n() != n) throw std::invalid_argument("partition does not cover the host");
  DecisionOutcome out;

  const auto lattice = IntegerLattice::from_index_vectors(p.d(), profile.robust_vectors);
  std::vector<Vertex> everything(n);
  for (Vertex v = 0; v < n; ++v) everything[v] = v;
  const auto target = index_vector(p, everything);

  out.eta_threshold = ceil_times(params.eta, ipow(n, static_cast<unsigned>(k)));
  for (const auto& [v, c] : profile.raw_counts)
    if (c >= out.eta_threshold) out.eta_robust.push_back(v);
  auto eta_robust = [&](const IndexVector& v) {
    return std::binary_search(out.eta_robust.begin(), out.eta_robust.end(), v);
  };

  const auto buckets = edges_by_vector(h, p);
  const auto k_vectors = all_vectors_of_norm(p.d(), k);
  const int max_vectors = params.max_vectors >= 0 ? params.max_vectors : k - 1;
  std::function<bool(std::size_t)> present = [&](std::size_t e) { return oracle.query(e); };

  bool accepted = false;
  std::vector<std::size_t> chosen_idx;
  for (int size = 0; size <= max_vectors && !accepted; ++size) {
    accepted = for_each_multiset(k_vectors.size(), static_cast<std::size_t>(size), [&](const std::vector<std::size_t>& idx) {
      ++out.vector_sets_tried;
      IndexVector rest = target;
      for (auto i : idx) rest -= k_vectors[i];
      if (!lattice.contains(rest)) return false;
      ++out.lattice_valid_sets;
      std::vector<IndexVector> nonrobust;
      for (auto i : idx)
        if (!eta_robust(k_vectors[i])) nonrobust.push_back(k_vectors[i]);
      auto matching = pick_edges(h, buckets, nonrobust, 0, present);
      if (!matching) return false;
      chosen_idx = idx;
      out.nonrobust_part = nonrobust;
      out.witness = *matching;
      return true;
    });
  }
  out.revealed = oracle.reveals();
  if (!accepted) {
    out.verdict = Verdict::Reject;
    out.certificate = "no perfect matching: " + std::to_string(out.vector_sets_tried) + " vector sets of size <= " +
                      std::to_string(max_vectors) + " examined, " + std::to_string(out.lattice_valid_sets) +
                      " pass the lattice test and none has its non-robust part realised in H_p";
    return out;
  }
  out.verdict = Verdict::Accept;
  for (auto i : chosen_idx) out.vector_set.push_back(k_vectors[i]);

  if (params.extend) {
    ExtensionResult ext;
    ext.matching = out.witness;
    std::vector<bool> used(n, false);
    for (auto e : ext.matching)
      for (Vertex v : h.edge(e)) used[v] = true;
    const std::size_t before = oracle.reveals().size();
    for (const auto& v : out.vector_set) {
      if (!eta_robust(v)) continue;
      std::uint64_t spent = 0;
      bool placed = false;
      auto it = buckets.find(v);
      if (it != buckets.end())
        for (auto e : it->second) {
          auto ev = h.edge(e);
          if (std::any_of(ev.begin(), ev.end(), [&](Vertex x) { return used[x]; })) continue;
          if (spent >= out.eta_threshold) break;
          ++spent;
          if (oracle.query(e)) {
            for (Vertex x : ev) used[x] = true;
            ext.matching.push_back(e);
            placed = true;
            break;
          }
        }
      if (!placed) {
        ext.complete = false;
        ext.warning = "extension found no present edge with vector " + v.str() + " within " +
                      std::to_string(out.eta_threshold) + " reveals";
        break;
      }
    }
    const auto& all = oracle.reveals();
    ext.reveals.assign(all.begin() + static_cast<std::ptrdiff_t>(before), all.end());
    ext.remainder = target;
    for (auto e : ext.matching) ext.remainder -= index_vector(p, h.edge(e));
    ext.remainder_in_lattice = lattice.contains(ext.remainder);
    out.extension = std::move(ext);
  }
  return out;
}

std::string ThresholdCurve::str() const {
  std::string s = "n^(" + exponent.str() + ")";
  if (log_power.positive()) s += " * log(n)^(" + log_power.str() + ")";
  return s;
}

DensityParams density_params(const PatternGraph& f) {
  const int r = f.r();
  if (r < 2) throw std::invalid_argument("density parameters need at least two vertices");
  DensityParams out;
  out.v_f = static_cast<std::size_t>(r);
  out.e_f = f.edge_count();
  out.d1 = Rational(static_cast<std::int64_t>(out.e_f), r - 1);
  std::vector<VertexMask> edge_masks;
  for (const auto& e : f.edges()) edge_masks.push_back(to_mask(e));
  bool strict = true;
  const VertexMask all = full_mask(static_cast<std::size_t>(r));
  for (VertexMask w = 1; w <= all; ++w) {
    int size = popcount(w);
    if (size < 2) continue;
    std::size_t inside = 0;
    for (auto e : edge_masks) inside += (e & w) == e;
    SubgraphDensity sd{mask_vertices(w), inside, Rational(static_cast<std::int64_t>(inside), size - 1)};
    if (out.subgraphs.empty() || out.m1 < sd.d1) out.m1 = sd.d1;
    if (w != all && !(sd.d1 < out.d1)) strict = false;
    out.subgraphs.push_back(std::move(sd));
  }
  out.strictly_1_balanced = strict;
  if (!out.m1.positive()) throw std::invalid_argument("pattern has no edges");
  out.factor_threshold.exponent = Rational(-out.m1.den, out.m1.num);
  out.factor_threshold.log_power = strict ? Rational(1, static_cast<std::int64_t>(out.e_f)) : Rational(1);
  return out;
}

}  // namespace hypermatch
