#include "hypermatch/hypergraph.hpp"

#include <algorithm>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace hypermatch {

int IndexVector::norm() const { return std::accumulate(coords.begin(), coords.end(), 0); }

IndexVector& IndexVector::operator+=(const IndexVector& o) {
  if (o.dim() != dim()) throw std::invalid_argument("index vector dimension mismatch");
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] += o.coords[i];
  return *this;
}

IndexVector& IndexVector::operator-=(const IndexVector& o) {
  if (o.dim() != dim()) throw std::invalid_argument("index vector dimension mismatch");
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] -= o.coords[i];
  return *this;
}

IndexVector IndexVector::unit(std::size_t d, std::size_t j) {
  IndexVector v(d);
  v.coords.at(j) = 1;
  return v;
}

std::string IndexVector::str() const {
  std::string s = "(";
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(coords[i]);
  }
  return s + ")";
}

std::vector<IndexVector> all_vectors_of_norm(std::size_t d, int r) {
  std::vector<IndexVector> out;
  if (d == 0) return out;
  IndexVector cur(d);
  auto rec = [&](auto&& self, std::size_t pos, int remaining) -> void {
    if (pos + 1 == d) {
      cur.coords[pos] = remaining;
      out.push_back(cur);
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      cur.coords[pos] = c;
      self(self, pos + 1, remaining - c);
    }
  };
  rec(rec, 0, r);
  return out;
}

struct Hypergraph::LazyLinks {
  std::mutex mutex;
  std::unordered_map<std::uint64_t, std::vector<Vertex>> cache;
};

Hypergraph::Hypergraph(int k, std::size_t n, std::vector<std::vector<Vertex>> edges, LinkIndexPolicy policy)
    : k_(k), n_(n) {
  if (k < 1) throw std::invalid_argument("uniformity must be at least 1");
  if (n > std::numeric_limits<Vertex>::max()) throw std::invalid_argument("too many vertices");
  for (auto& e : edges) {
    if (e.size() != static_cast<std::size_t>(k))
      throw std::invalid_argument("edge has " + std::to_string(e.size()) + " vertices, expected " + std::to_string(k));
    std::sort(e.begin(), e.end());
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] >= n) throw std::invalid_argument("vertex " + std::to_string(e[i]) + " out of range");
      if (i && e[i] == e[i - 1]) throw std::invalid_argument("edge repeats vertex " + std::to_string(e[i]));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  flat_.reserve(edges.size() * static_cast<std::size_t>(k));
  for (const auto& e : edges) flat_.insert(flat_.end(), e.begin(), e.end());
  if (mask_capable()) {
    masks_.reserve(edges.size());
    for (const auto& e : edges) masks_.push_back(to_mask(e));
  }
  build_index(policy);
}

void Hypergraph::build_index(LinkIndexPolicy policy) {
  const auto km1 = static_cast<std::size_t>(k_ - 1);
  binom_ = std::make_shared<BinomialTable>(n_ + 1, km1 + 1);
  std::uint64_t slots = (*binom_)(n_, km1);
  unsigned __int128 footprint = static_cast<unsigned __int128>(slots) * n_;
  eager_ = footprint <= policy.eager_budget;
  if (!eager_) {
    lazy_ = std::make_shared<LazyLinks>();
    return;
  }
  std::vector<std::uint64_t> counts(slots + 1, 0);
  std::vector<Vertex> rest(km1);
  auto for_each_face = [&](auto&& visit) {
    for (std::size_t e = 0; e < edge_count(); ++e) {
      auto edge_vs = edge(e);
      for (std::size_t drop = 0; drop < edge_vs.size(); ++drop) {
        std::size_t w = 0;
        for (std::size_t i = 0; i < edge_vs.size(); ++i)
          if (i != drop) rest[w++] = edge_vs[i];
        visit(binom_->colex_rank(rest.data(), km1), edge_vs[drop]);
      }
    }
  };
  for_each_face([&](std::uint64_t rank, Vertex) { ++counts[rank + 1]; });
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  link_offsets_ = counts;
  link_vertices_.resize(link_offsets_.back());
  auto cursor = counts;
  for_each_face([&](std::uint64_t rank, Vertex v) { link_vertices_[cursor[rank]++] = v; });
  for (std::uint64_t s = 0; s < slots; ++s)
    std::sort(link_vertices_.begin() + static_cast<std::ptrdiff_t>(link_offsets_[s]),
              link_vertices_.begin() + static_cast<std::ptrdiff_t>(link_offsets_[s + 1]));
}

std::vector<Vertex> Hypergraph::canonical_set(std::span<const Vertex> s) const {
  std::vector<Vertex> out(s.begin(), s.end());
  std::sort(out.begin(), out.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] >= n_) throw std::out_of_range("vertex " + std::to_string(out[i]) + " out of range");
    if (i && out[i] == out[i - 1]) throw std::invalid_argument("vertex set repeats " + std::to_string(out[i]));
  }
  return out;
}

std::optional<std::size_t> Hypergraph::find_edge(std::span<const Vertex> sorted) const {
  if (sorted.size() != static_cast<std::size_t>(k_)) return std::nullopt;
  const auto k = static_cast<std::size_t>(k_);
  std::size_t lo = 0, hi = edge_count();
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    const Vertex* e = flat_.data() + mid * k;
    if (std::lexicographical_compare(e, e + k, sorted.begin(), sorted.end()))
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo < edge_count() && std::equal(sorted.begin(), sorted.end(), flat_.data() + lo * k)) return lo;
  return std::nullopt;
}

std::vector<Vertex> Hypergraph::scan_link(std::span<const Vertex> sorted) const {
  std::vector<Vertex> out;
  for (std::size_t e = 0; e < edge_count(); ++e) {
    auto ev = edge(e);
    if (std::includes(ev.begin(), ev.end(), sorted.begin(), sorted.end())) {
      for (Vertex v : ev)
        if (!std::binary_search(sorted.begin(), sorted.end(), v)) out.push_back(v);
    }
  }
  return out;
}

std::vector<Vertex> Hypergraph::link(std::span<const Vertex> sorted) const {
  if (sorted.size() + 1 != static_cast<std::size_t>(k_)) throw std::invalid_argument("link needs a (k-1)-set");
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] >= n_) throw std::out_of_range("vertex " + std::to_string(sorted[i]) + " out of range");
    if (i && sorted[i] <= sorted[i - 1]) throw std::invalid_argument("link argument must be sorted and distinct");
  }
  std::uint64_t rank = binom_->colex_rank(sorted.data(), sorted.size());
  if (eager_) {
    return {link_vertices_.begin() + static_cast<std::ptrdiff_t>(link_offsets_[rank]),
            link_vertices_.begin() + static_cast<std::ptrdiff_t>(link_offsets_[rank + 1])};
  }
  {
    std::lock_guard lock(lazy_->mutex);
    if (auto it = lazy_->cache.find(rank); it != lazy_->cache.end()) return it->second;
  }
  auto computed = scan_link(sorted);
  std::lock_guard lock(lazy_->mutex);
  return lazy_->cache.emplace(rank, std::move(computed)).first->second;
}

std::uint64_t Hypergraph::codegree(std::span<const Vertex> s) const {
  if (s.size() > static_cast<std::size_t>(k_)) throw std::invalid_argument("codegree set larger than k");
  auto sorted = canonical_set(s);
  if (sorted.size() + 1 == static_cast<std::size_t>(k_)) return link(sorted).size();
  if (sorted.size() == static_cast<std::size_t>(k_)) return has_edge(sorted) ? 1 : 0;
  if (sorted.empty()) return edge_count();
  std::uint64_t count = 0;
  for (std::size_t e = 0; e < edge_count(); ++e) {
    auto ev = edge(e);
    if (std::includes(ev.begin(), ev.end(), sorted.begin(), sorted.end())) ++count;
  }
  return count;
}

Hypergraph Hypergraph::induced(std::span<const Vertex> vertices) const {
  constexpr Vertex kAbsent = std::numeric_limits<Vertex>::max();
  std::vector<Vertex> relabel(n_, kAbsent);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    Vertex v = vertices[i];
    if (v >= n_) throw std::out_of_range("vertex " + std::to_string(v) + " out of range");
    if (relabel[v] != kAbsent) throw std::invalid_argument("induced vertex list repeats " + std::to_string(v));
    relabel[v] = static_cast<Vertex>(i);
  }
  std::vector<std::vector<Vertex>> kept;
  for (std::size_t e = 0; e < edge_count(); ++e) {
    auto ev = edge(e);
    std::vector<Vertex> mapped;
    mapped.reserve(ev.size());
    for (Vertex v : ev) {
      if (relabel[v] == kAbsent) break;
      mapped.push_back(relabel[v]);
    }
    if (mapped.size() == ev.size()) kept.push_back(std::move(mapped));
  }
  return Hypergraph(k_, vertices.size(), std::move(kept));
}

Hypergraph Hypergraph::with_edge_subset(std::span<const std::size_t> positions) const {
  std::vector<std::vector<Vertex>> kept;
  kept.reserve(positions.size());
  for (auto pos : positions) {
    auto ev = edge(pos);
    kept.emplace_back(ev.begin(), ev.end());
  }
  return Hypergraph(k_, n_, std::move(kept));
}

std::vector<std::vector<Vertex>> Hypergraph::edge_list() const {
  std::vector<std::vector<Vertex>> out;
  out.reserve(edge_count());
  for (std::size_t e = 0; e < edge_count(); ++e) {
    auto ev = edge(e);
    out.emplace_back(ev.begin(), ev.end());
  }
  return out;
}

std::uint64_t min_degree(const Hypergraph& h, int l) {
  if (l < 1 || l > h.k() - 1) throw std::invalid_argument("min_degree needs 1 <= l <= k-1");
  if (h.n() < static_cast<std::size_t>(l)) throw std::invalid_argument("fewer vertices than l");
  BinomialTable binom(h.n() + 1, static_cast<std::size_t>(l) + 1);
  std::vector<std::uint64_t> counts(binom(h.n(), static_cast<std::size_t>(l)), 0);
  for (std::size_t e = 0; e < h.edge_count(); ++e) {
    auto ev = h.edge(e);
    std::vector<Vertex> pool(ev.begin(), ev.end());
    for_each_combination(pool, static_cast<std::size_t>(l), [&](const std::vector<Vertex>& s) {
      ++counts[binom.colex_rank(s.data(), s.size())];
      return true;
    });
  }
  return *std::min_element(counts.begin(), counts.end());
}

VertexPartition::VertexPartition(std::size_t d, std::vector<int> assignment)
    : d_(d), assignment_(std::move(assignment)), parts_(d) {
  if (d == 0) throw std::invalid_argument("partition needs at least one part");
  for (std::size_t v = 0; v < assignment_.size(); ++v) {
    int p = assignment_[v];
    if (p < 0 || static_cast<std::size_t>(p) >= d)
      throw std::invalid_argument("vertex " + std::to_string(v) + " assigned to invalid part " + std::to_string(p));
    parts_[static_cast<std::size_t>(p)].push_back(static_cast<Vertex>(v));
  }
  for (std::size_t j = 0; j < d; ++j)
    if (parts_[j].empty()) throw std::invalid_argument("part " + std::to_string(j) + " is empty");
}

VertexPartition VertexPartition::from_parts(std::size_t n, const std::vector<std::vector<Vertex>>& parts) {
  std::vector<int> assignment(n, -1);
  for (std::size_t j = 0; j < parts.size(); ++j) {
    for (Vertex v : parts[j]) {
      if (v >= n) throw std::invalid_argument("vertex " + std::to_string(v) + " out of range");
      if (assignment[v] != -1) throw std::invalid_argument("vertex " + std::to_string(v) + " in two parts");
      assignment[v] = static_cast<int>(j);
    }
  }
  for (std::size_t v = 0; v < n; ++v)
    if (assignment[v] == -1) throw std::invalid_argument("vertex " + std::to_string(v) + " has no part");
  return VertexPartition(parts.size(), std::move(assignment));
}

std::size_t VertexPartition::min_part_size() const {
  std::size_t m = n();
  for (const auto& p : parts_) m = std::min(m, p.size());
  return m;
}

std::vector<int> VertexPartition::restricted_assignment(std::span<const Vertex> vertices) const {
  std::vector<int> out;
  out.reserve(vertices.size());
  for (Vertex v : vertices) out.push_back(part_of(v));
  return out;
}

IndexVector index_vector(const VertexPartition& p, std::span<const Vertex> s) {
  IndexVector out(p.d());
  for (Vertex v : s) {
    if (v >= p.n()) throw std::out_of_range("vertex " + std::to_string(v) + " outside partition host");
    ++out.coords[static_cast<std::size_t>(p.part_of(v))];
  }
  return out;
}

IndexVector index_vector(const VertexPartition& p, VertexMask s) {
  IndexVector out(p.d());
  while (s) {
    Vertex v = lowest_vertex(s);
    if (v >= p.n()) throw std::out_of_range("vertex " + std::to_string(v) + " outside partition host");
    ++out.coords[static_cast<std::size_t>(p.part_of(v))];
    s &= s - 1;
  }
  return out;
}

PatternGraph::PatternGraph(int r, int k, std::vector<std::vector<Vertex>> edges) : r_(r), k_(k) {
  if (r < 1 || k < 1 || k > r) throw std::invalid_argument("pattern needs 1 <= k <= r");
  if (r > 12) throw std::invalid_argument("pattern graphs are limited to 12 vertices");
  Hypergraph canon(k, static_cast<std::size_t>(r), std::move(edges));
  edges_ = canon.edge_list();
  std::vector<Vertex> perm(static_cast<std::size_t>(r));
  std::iota(perm.begin(), perm.end(), 0);
  std::uint64_t aut = 0;
  do {
    bool ok = true;
    for (const auto& e : edges_) {
      std::vector<Vertex> img;
      for (Vertex v : e) img.push_back(perm[v]);
      std::sort(img.begin(), img.end());
      if (!canon.has_edge(img)) {
        ok = false;
        break;
      }
    }
    if (ok) ++aut;
  } while (std::next_permutation(perm.begin(), perm.end()));
  automorphisms_ = aut;
}

PatternGraph PatternGraph::single_edge(int k) {
  std::vector<Vertex> e(static_cast<std::size_t>(k));
  std::iota(e.begin(), e.end(), 0);
  return PatternGraph(k, k, {e});
}

PatternGraph PatternGraph::clique(int r) {
  std::vector<std::vector<Vertex>> edges;
  for (Vertex a = 0; a < static_cast<Vertex>(r); ++a)
    for (Vertex b = a + 1; b < static_cast<Vertex>(r); ++b) edges.push_back({a, b});
  return PatternGraph(r, 2, std::move(edges));
}

PatternGraph PatternGraph::path(int r) {
  std::vector<std::vector<Vertex>> edges;
  for (Vertex a = 0; a + 1 < static_cast<Vertex>(r); ++a) edges.push_back({a, a + 1});
  return PatternGraph(r, 2, std::move(edges));
}

PatternGraph PatternGraph::cycle(int r) {
  if (r < 3) throw std::invalid_argument("cycle needs at least 3 vertices");
  auto edges = path(r).edges();
  edges.push_back({0, static_cast<Vertex>(r - 1)});
  return PatternGraph(r, 2, std::move(edges));
}

std::uint64_t PatternGraph::embeddings_onto(const Hypergraph& host, std::span<const Vertex> targets) const {
  if (targets.size() != static_cast<std::size_t>(r_)) throw std::invalid_argument("target set must have r vertices");
  if (host.k() != k_) throw std::invalid_argument("pattern and host uniformity differ");
  if (is_single_edge()) {
    std::vector<Vertex> sorted(targets.begin(), targets.end());
    std::sort(sorted.begin(), sorted.end());
    return host.has_edge(sorted) ? automorphisms_ : 0;
  }
  std::vector<Vertex> image(targets.begin(), targets.end());
  std::sort(image.begin(), image.end());
  std::uint64_t count = 0;
  std::vector<Vertex> mapped(static_cast<std::size_t>(k_));
  do {
    bool ok = true;
    for (const auto& e : edges_) {
      for (std::size_t i = 0; i < e.size(); ++i) mapped[i] = image[e[i]];
      std::sort(mapped.begin(), mapped.end());
      if (!host.has_edge(mapped)) {
        ok = false;
        break;
      }
    }
    if (ok) ++count;
  } while (std::next_permutation(image.begin(), image.end()));
  return count;
}

std::string PatternGraph::str() const {
  std::string s = "r=" + std::to_string(r_) + " k=" + std::to_string(k_) + " edges=[";
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (i) s += " ";
    s += "{";
    for (std::size_t j = 0; j < edges_[i].size(); ++j) {
      if (j) s += ",";
      s += std::to_string(edges_[i][j]);
    }
    s += "}";
  }
  return s + "]";
}

}  // namespace hypermatch
