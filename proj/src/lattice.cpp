#include "hypermatch/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <limits>
#include <map>
#include <stdexcept>

namespace hypermatch {

namespace {

LatticeInt mul(LatticeInt a, LatticeInt b) {
  LatticeInt out;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("lattice arithmetic overflow");
  return out;
}

LatticeInt sub(LatticeInt a, LatticeInt b) {
  LatticeInt out;
  if (__builtin_sub_overflow(a, b, &out)) throw std::overflow_error("lattice arithmetic overflow");
  return out;
}

LatticeInt add(LatticeInt a, LatticeInt b) {
  LatticeInt out;
  if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("lattice arithmetic overflow");
  return out;
}

LatticeInt floor_div(LatticeInt a, LatticeInt b) {
  LatticeInt q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

LatticeInt abs_value(LatticeInt a) {
  if (a == std::numeric_limits<LatticeInt>::min()) throw std::overflow_error("lattice arithmetic overflow");
  return a < 0 ? -a : a;
}

/// row_dst -= q * row_src
void axpy_rows(IntMatrix& m, Eigen::Index dst, Eigen::Index src, LatticeInt q) {
  if (q == 0) return;
  for (Eigen::Index c = 0; c < m.cols(); ++c) m(dst, c) = sub(m(dst, c), mul(q, m(src, c)));
}

void axpy_cols(IntMatrix& m, Eigen::Index dst, Eigen::Index src, LatticeInt q) {
  if (q == 0) return;
  for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, dst) = sub(m(r, dst), mul(q, m(r, src)));
}

LatticeInt vector_norm(std::span<const LatticeInt> v) {
  LatticeInt s = 0;
  for (auto x : v) s = add(s, x);
  return s;
}

}  // namespace

IntVector to_int_vector(const IndexVector& v) { return IntVector(v.coords.begin(), v.coords.end()); }

IntegerLattice IntegerLattice::from_generators(std::size_t d, const std::vector<IntVector>& generators) {
  IntegerLattice out(d);
  const auto rows = static_cast<Eigen::Index>(generators.size());
  const auto cols = static_cast<Eigen::Index>(d);
  IntMatrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& g = generators[static_cast<std::size_t>(i)];
    if (g.size() != d)
      throw std::invalid_argument("generator of length " + std::to_string(g.size()) + " in dimension " + std::to_string(d));
    for (Eigen::Index c = 0; c < cols; ++c) a(i, c) = g[static_cast<std::size_t>(c)];
  }

  Eigen::Index top = 0;
  for (Eigen::Index c = 0; c < cols && top < rows; ++c) {
    // Euclid on column c among rows top.., always pivoting on the smallest
    // nonzero magnitude.
    while (true) {
      Eigen::Index best = -1;
      for (Eigen::Index i = top; i < rows; ++i)
        if (a(i, c) != 0 && (best < 0 || abs_value(a(i, c)) < abs_value(a(best, c)))) best = i;
      if (best < 0) break;
      a.row(top).swap(a.row(best));
      bool clean = true;
      for (Eigen::Index i = top + 1; i < rows; ++i) {
        if (a(i, c) == 0) continue;
        axpy_rows(a, i, top, a(i, c) / a(top, c));
        if (a(i, c) != 0) clean = false;
      }
      if (clean) break;
    }
    if (a(top, c) == 0) continue;
    if (a(top, c) < 0)
      for (Eigen::Index k = 0; k < cols; ++k) a(top, k) = sub(0, a(top, k));
    for (Eigen::Index i = 0; i < top; ++i) axpy_rows(a, i, top, floor_div(a(i, c), a(top, c)));
    out.pivots_.push_back(static_cast<std::size_t>(c));
    ++top;
  }
  out.basis_ = a.topRows(top);
  return out;
}

IntegerLattice IntegerLattice::from_index_vectors(std::size_t d, const std::vector<IndexVector>& generators) {
  std::vector<IntVector> gens;
  gens.reserve(generators.size());
  for (const auto& g : generators) gens.push_back(to_int_vector(g));
  return from_generators(d, gens);
}

std::vector<IntVector> IntegerLattice::basis_rows() const {
  std::vector<IntVector> out;
  for (Eigen::Index i = 0; i < basis_.rows(); ++i) {
    IntVector row(d_);
    for (std::size_t c = 0; c < d_; ++c) row[c] = basis_(i, static_cast<Eigen::Index>(c));
    out.push_back(std::move(row));
  }
  return out;
}

void IntegerLattice::check_dim(std::size_t size) const {
  if (size != d_)
    throw std::invalid_argument("vector of length " + std::to_string(size) + " against lattice in dimension " +
                                std::to_string(d_));
}

std::optional<IntVector> IntegerLattice::coefficients(std::span<const LatticeInt> v) const {
  check_dim(v.size());
  IntVector w(v.begin(), v.end());
  IntVector coeffs(rank(), 0);
  std::size_t row = 0;
  for (std::size_t c = 0; c < d_; ++c) {
    if (row < pivots_.size() && pivots_[row] == c) {
      LatticeInt p = basis_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c));
      if (w[c] % p != 0) return std::nullopt;
      LatticeInt q = w[c] / p;
      coeffs[row] = q;
      for (std::size_t k = c; k < d_; ++k)
        w[k] = sub(w[k], mul(q, basis_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k))));
      ++row;
    } else if (w[c] != 0) {
      return std::nullopt;
    }
  }
  return coeffs;
}

bool IntegerLattice::contains(std::span<const LatticeInt> v) const { return coefficients(v).has_value(); }

IntVector IntegerLattice::reduce(std::span<const LatticeInt> v) const {
  check_dim(v.size());
  IntVector w(v.begin(), v.end());
  for (std::size_t row = 0; row < pivots_.size(); ++row) {
    std::size_t c = pivots_[row];
    LatticeInt q = floor_div(w[c], basis_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(c)));
    for (std::size_t k = c; k < d_; ++k)
      w[k] = sub(w[k], mul(q, basis_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k))));
  }
  return w;
}

std::vector<LatticeInt> smith_invariant_factors(IntMatrix m) {
  const Eigen::Index rows = m.rows(), cols = m.cols();
  std::vector<LatticeInt> diag;
  for (Eigen::Index t = 0; t < std::min(rows, cols); ++t) {
    while (true) {
      Eigen::Index bi = -1, bj = -1;
      for (Eigen::Index i = t; i < rows; ++i)
        for (Eigen::Index j = t; j < cols; ++j)
          if (m(i, j) != 0 && (bi < 0 || abs_value(m(i, j)) < abs_value(m(bi, bj)))) {
            bi = i;
            bj = j;
          }
      if (bi < 0) break;
      m.row(t).swap(m.row(bi));
      m.col(t).swap(m.col(bj));
      bool clean = true;
      for (Eigen::Index i = t + 1; i < rows; ++i) {
        axpy_rows(m, i, t, m(i, t) / m(t, t));
        if (m(i, t) != 0) clean = false;
      }
      for (Eigen::Index j = t + 1; j < cols; ++j) {
        axpy_cols(m, j, t, m(t, j) / m(t, t));
        if (m(t, j) != 0) clean = false;
      }
      if (!clean) continue;
      // The pivot must divide the remaining block; otherwise fold the
      // offending row in and repeat.
      Eigen::Index bad = -1;
      for (Eigen::Index i = t + 1; i < rows && bad < 0; ++i)
        for (Eigen::Index j = t + 1; j < cols; ++j)
          if (m(i, j) % m(t, t) != 0) {
            bad = i;
            break;
          }
      if (bad < 0) break;
      for (Eigen::Index j = 0; j < cols; ++j) m(t, j) = add(m(t, j), m(bad, j));
    }
    if (m(t, t) == 0) break;
    diag.push_back(abs_value(m(t, t)));
  }
  return diag;
}

std::optional<std::uint64_t> CosetGroup::size() const {
  if (!finite()) return std::nullopt;
  std::uint64_t s = 1;
  for (auto f : invariant_factors)
    if (__builtin_mul_overflow(s, static_cast<std::uint64_t>(f), &s)) throw std::overflow_error("coset group too large");
  return s;
}

std::string CosetGroup::str() const {
  if (!finite()) return "infinite (free rank " + std::to_string(free_rank) + ")";
  std::string s;
  for (auto f : invariant_factors) {
    if (f == 1) continue;
    if (!s.empty()) s += " x ";
    s += "Z_" + std::to_string(f);
  }
  return s.empty() ? "trivial" : s;
}

CosetGroup coset_group(const IntegerLattice& l, int r) {
  if (r < 1) throw std::invalid_argument("modulus r must be positive");
  if (l.dim() == 0) throw std::invalid_argument("coset group needs d >= 1");
  const auto d = static_cast<Eigen::Index>(l.dim());
  const auto& b = l.basis();
  // Coordinates of v in the basis {r u_1, u_2 - u_1, ..., u_d - u_1} are
  // (|v| / r, v_2, ..., v_d).
  IntMatrix coords(b.rows(), d);
  for (Eigen::Index i = 0; i < b.rows(); ++i) {
    LatticeInt total = 0;
    for (Eigen::Index c = 0; c < d; ++c) total = add(total, b(i, c));
    if (total % r != 0)
      throw std::invalid_argument("lattice is not contained in L_max: basis row sums to " + std::to_string(total));
    coords(i, 0) = total / r;
    for (Eigen::Index c = 1; c < d; ++c) coords(i, c) = b(i, c);
  }
  CosetGroup out;
  out.d = l.dim();
  out.r = r;
  out.invariant_factors = smith_invariant_factors(coords);
  out.free_rank = l.dim() - out.invariant_factors.size();
  return out;
}

std::uint64_t trivial_coset_bound(std::size_t d, int r) {
  return binomial(d + static_cast<std::size_t>(r) - 1, static_cast<std::size_t>(r));
}

ResidueContext::ResidueContext(IntegerLattice l, int r) : lattice_(std::move(l)), r_(r) {
  if (r < 1) throw std::invalid_argument("modulus r must be positive");
  for (const auto& row : lattice_.basis_rows())
    if (vector_norm(row) % r != 0) throw std::invalid_argument("lattice is not contained in L_max");
}

IntVector ResidueContext::residue(std::span<const LatticeInt> v) const {
  if (vector_norm(v) % r_ != 0)
    throw std::invalid_argument("residue needs r | |v|, got |v| = " + std::to_string(vector_norm(v)));
  return lattice_.reduce(v);
}

bool ResidueContext::is_zero(std::span<const LatticeInt> v) const {
  auto w = residue(v);
  return std::all_of(w.begin(), w.end(), [](LatticeInt x) { return x == 0; });
}

std::optional<std::vector<IntVector>> ResidueContext::all_residues(std::size_t limit) const {
  if (!coset_group(lattice_, r_).finite()) return std::nullopt;
  const std::size_t d = dim();
  std::vector<IntVector> steps;
  IntVector first(d, 0);
  first[0] = r_;
  steps.push_back(first);
  for (std::size_t i = 1; i < d; ++i) {
    IntVector s(d, 0);
    s[0] = -1;
    s[i] = 1;
    steps.push_back(s);
  }
  std::map<IntVector, bool> seen;
  std::deque<IntVector> queue;
  IntVector zero(d, 0);
  seen[zero] = true;
  queue.push_back(zero);
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    for (const auto& s : steps) {
      for (int sign : {1, -1}) {
        IntVector next(d);
        for (std::size_t i = 0; i < d; ++i) next[i] = add(cur[i], sign * s[i]);
        auto red = lattice_.reduce(next);
        if (seen.emplace(red, true).second) {
          if (seen.size() > limit) return std::nullopt;
          queue.push_back(red);
        }
      }
    }
  }
  std::vector<IntVector> out;
  for (const auto& [v, _] : seen) out.push_back(v);
  return out;
}

bool is_full(const std::vector<IndexVector>& vectors, int k, std::size_t d) {
  for (const auto& v : vectors)
    if (v.dim() != d || v.norm() != k || std::any_of(v.coords.begin(), v.coords.end(), [](int x) { return x < 0; }))
      throw std::invalid_argument("is_full: " + v.str() + " is not a " + std::to_string(k) + "-vector of dimension " +
                                  std::to_string(d));
  std::vector<IndexVector> sorted = vectors;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& v : all_vectors_of_norm(d, k - 1)) {
    bool extends = false;
    for (std::size_t i = 0; i < d && !extends; ++i) {
      auto w = v;
      ++w.coords[i];
      extends = std::binary_search(sorted.begin(), sorted.end(), w);
    }
    if (!extends) return false;
  }
  return true;
}

std::optional<std::size_t> transfer_index(const IntegerLattice& l, std::span<const LatticeInt> v, std::size_t i) {
  if (v.size() != l.dim()) throw std::invalid_argument("transfer_index: dimension mismatch");
  if (i >= l.dim()) throw std::invalid_argument("transfer_index: part index out of range");
  IntVector w(v.begin(), v.end());
  w[i] = sub(w[i], 1);
  for (std::size_t j = 0; j < l.dim(); ++j) {
    w[j] = add(w[j], 1);
    if (l.contains(w)) return j;
    w[j] = sub(w[j], 1);
  }
  return std::nullopt;
}

}  // namespace hypermatch
