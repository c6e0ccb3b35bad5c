#pragma once

// Brute-force reference implementations shared by the unit and acceptance
// suites. Nothing here calls into the algorithm it checks.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <set>
#include <vector>

#include "hypermatch/hypergraph.hpp"
#include "hypermatch/lattice.hpp"

namespace oracle {

using hypermatch::IntVector;
using hypermatch::LatticeInt;
using hypermatch::Vertex;
using hypermatch::VertexMask;

/// Every combination sum c_1 g_1 + ... + c_m g_m with |c_i| <= bound.
inline std::set<IntVector> bounded_span(const std::vector<IntVector>& gens, std::size_t d, int bound) {
  std::set<IntVector> current{IntVector(d, 0)};
  for (const auto& g : gens) {
    std::set<IntVector> next;
    for (const auto& v : current)
      for (int c = -bound; c <= bound; ++c) {
        IntVector w = v;
        for (std::size_t i = 0; i < d; ++i) w[i] += c * g[i];
        next.insert(std::move(w));
      }
    current = std::move(next);
  }
  return current;
}

/// Residue classes of L_max / L found by growing representatives from 0 with
/// the L_max generators and merging by membership of differences. Returns 0
/// if more than `limit` classes turn up.
inline std::size_t count_classes_by_closure(std::size_t d, int r, const std::function<bool(const IntVector&)>& member,
                                            std::size_t limit = 5000) {
  std::vector<IntVector> steps;
  IntVector s0(d, 0);
  s0[0] = r;
  steps.push_back(s0);
  for (std::size_t i = 1; i < d; ++i) {
    IntVector s(d, 0);
    s[0] = -1;
    s[i] = 1;
    steps.push_back(s);
  }
  std::vector<IntVector> reps{IntVector(d, 0)};
  for (std::size_t head = 0; head < reps.size(); ++head) {
    for (const auto& s : steps)
      for (int sign : {1, -1}) {
        IntVector cand = reps[head];
        for (std::size_t i = 0; i < d; ++i) cand[i] += sign * s[i];
        bool known = std::any_of(reps.begin(), reps.end(), [&](const IntVector& rep) {
          IntVector diff(d);
          for (std::size_t i = 0; i < d; ++i) diff[i] = cand[i] - rep[i];
          return member(diff);
        });
        if (!known) {
          reps.push_back(cand);
          if (reps.size() > limit) return 0;
        }
      }
  }
  return reps.size();
}

/// Perfect matchings of a k-graph on <= 64 vertices by plain recursion:
/// the lowest uncovered vertex must be matched by some edge.
inline std::uint64_t count_pm(const std::vector<VertexMask>& edges, VertexMask uncovered) {
  if (uncovered == 0) return 1;
  VertexMask low = uncovered & (~uncovered + 1);
  std::uint64_t total = 0;
  for (auto e : edges)
    if ((e & low) && (e & uncovered) == e) total += count_pm(edges, uncovered & ~e);
  return total;
}

inline std::uint64_t count_pm(const hypermatch::Hypergraph& h) {
  if (h.n() % static_cast<std::size_t>(h.k()) != 0) return 0;
  return count_pm(h.edge_masks(), hypermatch::full_mask(h.n()));
}

/// Every perfect matching as a sorted list of edge masks.
inline void enumerate_pm(const std::vector<VertexMask>& edges, VertexMask uncovered, std::vector<VertexMask>& current,
                         std::vector<std::vector<VertexMask>>& out) {
  if (uncovered == 0) {
    out.push_back(current);
    return;
  }
  VertexMask low = uncovered & (~uncovered + 1);
  for (auto e : edges)
    if ((e & low) && (e & uncovered) == e) {
      current.push_back(e);
      enumerate_pm(edges, uncovered & ~e, current, out);
      current.pop_back();
    }
}

/// Vertex masks of r-sets R such that some bijection from F's vertices onto
/// R maps every edge of F to an edge of H. Tries all r! bijections.
inline std::vector<VertexMask> copy_masks(const hypermatch::Hypergraph& h, const hypermatch::PatternGraph& f) {
  std::vector<VertexMask> out;
  std::vector<Vertex> all(h.n());
  std::iota(all.begin(), all.end(), 0);
  hypermatch::for_each_combination(all, static_cast<std::size_t>(f.r()), [&](const std::vector<Vertex>& set) {
    std::vector<Vertex> image = set;
    bool found = false;
    do {
      bool ok = true;
      for (const auto& e : f.edges()) {
        std::vector<Vertex> mapped;
        for (auto x : e) mapped.push_back(image[x]);
        std::sort(mapped.begin(), mapped.end());
        if (!h.has_edge(mapped)) {
          ok = false;
          break;
        }
      }
      found = ok;
    } while (!found && std::next_permutation(image.begin(), image.end()));
    if (found) out.push_back(hypermatch::to_mask(set));
    return true;
  });
  return out;
}

/// Whether `uncovered` splits into disjoint members of `sets`.
inline bool exact_cover(const std::vector<VertexMask>& sets, VertexMask uncovered) {
  if (uncovered == 0) return true;
  VertexMask low = uncovered & (~uncovered + 1);
  for (auto s : sets)
    if ((s & low) && (s & uncovered) == s && exact_cover(sets, uncovered & ~s)) return true;
  return false;
}

/// n! / ((k!)^(n/k) (n/k)!)
inline std::uint64_t complete_pm_formula(std::uint64_t n, std::uint64_t k) {
  long double v = 1;
  for (std::uint64_t i = 2; i <= n; ++i) v *= static_cast<long double>(i);
  long double kf = 1;
  for (std::uint64_t i = 2; i <= k; ++i) kf *= static_cast<long double>(i);
  for (std::uint64_t i = 0; i < n / k; ++i) v /= kf;
  for (std::uint64_t i = 2; i <= n / k; ++i) v /= static_cast<long double>(i);
  return static_cast<std::uint64_t>(v + 0.5L);
}

}  // namespace oracle
