#include "hypermatch/factor.hpp"

#include <mutex>
#include <stdexcept>

#include "hypermatch/copies.hpp"

namespace hypermatch {

std::size_t PackingWitness::covered() const {
  std::size_t c = 0;
  for (const auto& s : copies) c += s.size();
  return c;
}

bool verify_packing(const Hypergraph& h, const PatternGraph& f, const PackingWitness& w, bool must_cover) {
  std::vector<bool> used(h.n(), false);
  for (const auto& copy : w.copies) {
    if (copy.size() != static_cast<std::size_t>(f.r())) return false;
    for (std::size_t i = 0; i < copy.size(); ++i) {
      if (copy[i] >= h.n() || used[copy[i]]) return false;
      if (i && copy[i] <= copy[i - 1]) return false;
      used[copy[i]] = true;
    }
    if (copies_on(h, f, copy) == 0) return false;
  }
  if (must_cover)
    for (bool u : used)
      if (!u) return false;
  return true;
}

namespace {

struct PmCounter {
  std::vector<std::vector<VertexMask>> by_vertex;
  std::unordered_map<VertexMask, std::uint64_t> memo;

  std::uint64_t count(VertexMask s) {
    if (s == 0) return 1;
    if (auto it = memo.find(s); it != memo.end()) return it->second;
    // Every perfect matching covers the branch vertex exactly once, so any
    // choice is exact; the least-flexible one keeps the tree small.
    Vertex best = 0;
    std::size_t best_options = ~std::size_t{0};
    for (VertexMask rest = s; rest; rest &= rest - 1) {
      Vertex v = lowest_vertex(rest);
      std::size_t options = 0;
      for (auto e : by_vertex[v]) options += (e & s) == e;
      if (options < best_options) {
        best_options = options;
        best = v;
        if (options == 0) break;
      }
    }
    std::uint64_t total = 0;
    if (best_options > 0)
      for (auto e : by_vertex[best])
        if ((e & s) == e && __builtin_add_overflow(total, count(s & ~e), &total))
          throw std::overflow_error("perfect matching count overflows 64 bits");
    memo.emplace(s, total);
    return total;
  }
};

}  // namespace

std::uint64_t count_perfect_matchings(const Hypergraph& h, VertexMask s) {
  if (!h.mask_capable()) throw std::length_error("exact matching counts support at most 64 vertices");
  if (popcount(s) % h.k() != 0) return 0;
  PmCounter counter;
  counter.by_vertex.assign(h.n(), {});
  for (auto e : h.edge_masks())
    if ((e & s) == e)
      for (VertexMask rest = e; rest; rest &= rest - 1) counter.by_vertex[lowest_vertex(rest)].push_back(e);
  return counter.count(s);
}

MatchingCount count_perfect_matchings(const Hypergraph& h) {
  MatchingCount out;
  out.divisible = h.n() % static_cast<std::size_t>(h.k()) == 0;
  if (!out.divisible) return out;
  out.count = count_perfect_matchings(h, full_mask(h.n()));
  return out;
}

FactorOracle::FactorOracle(const Hypergraph& h, const PatternGraph& f) : n_(h.n()), r_(f.r()) {
  if (!h.mask_capable()) throw std::length_error("factor oracle supports at most 64 vertices");
  for_each_copy_set(h, f, [&](std::span<const Vertex> set, std::uint64_t) { copy_sets_.push_back(to_mask(set)); });
  by_vertex_.assign(n_, {});
  for (auto c : copy_sets_)
    for (VertexMask rest = c; rest; rest &= rest - 1) by_vertex_[lowest_vertex(rest)].push_back(c);
}

Vertex FactorOracle::branch_vertex(VertexMask s) const {
  Vertex best = lowest_vertex(s);
  std::size_t best_options = ~std::size_t{0};
  for (VertexMask rest = s; rest; rest &= rest - 1) {
    Vertex v = lowest_vertex(rest);
    std::size_t options = 0;
    for (auto c : by_vertex_[v]) options += (c & s) == c;
    if (options < best_options) {
      best_options = options;
      best = v;
      if (options == 0) break;
    }
  }
  return best;
}

bool FactorOracle::solve(VertexMask s) const {
  if (s == 0) return true;
  if (popcount(s) % r_ != 0) return false;
  {
    std::shared_lock lock(mutex_);
    if (auto it = memo_.find(s); it != memo_.end()) return it->second;
  }
  bool result = false;
  for (auto c : by_vertex_[branch_vertex(s)])
    if ((c & s) == c && solve(s & ~c)) {
      result = true;
      break;
    }
  std::unique_lock lock(mutex_);
  memo_.emplace(s, result);
  return result;
}

bool FactorOracle::has_factor(VertexMask s) const {
  if (s & ~full_mask(n_)) throw std::out_of_range("vertex mask outside host");
  return solve(s);
}

std::optional<std::vector<VertexMask>> FactorOracle::find_factor(VertexMask s) const {
  if (!has_factor(s)) return std::nullopt;
  std::vector<VertexMask> out;
  while (s) {
    bool advanced = false;
    for (auto c : by_vertex_[branch_vertex(s)])
      if ((c & s) == c && solve(s & ~c)) {
        out.push_back(c);
        s &= ~c;
        advanced = true;
        break;
      }
    if (!advanced) throw std::logic_error("factor oracle memo inconsistent");
  }
  return out;
}

std::size_t FactorOracle::memo_size() const {
  std::shared_lock lock(mutex_);
  return memo_.size();
}

std::optional<PackingWitness> has_f_factor(const Hypergraph& h, const PatternGraph& f) {
  if (h.n() % static_cast<std::size_t>(f.r()) != 0) return std::nullopt;
  FactorOracle oracle(h, f);
  auto factor = oracle.find_factor(full_mask(h.n()));
  if (!factor) return std::nullopt;
  PackingWitness w;
  for (auto c : *factor) w.copies.push_back(mask_vertices(c));
  return w;
}

}  // namespace hypermatch
