#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hypermatch/hypergraph.hpp"

namespace hypermatch {

using LatticeInt = std::int64_t;
using IntMatrix = Eigen::Matrix<LatticeInt, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using IntVector = std::vector<LatticeInt>;

IntVector to_int_vector(const IndexVector& v);

/// Sublattice of Z^d stored as the nonzero rows of its row-style Hermite
/// normal form: pivot columns strictly increase, pivots are positive and the
/// entries above each pivot lie in [0, pivot).
class IntegerLattice {
 public:
  explicit IntegerLattice(std::size_t d = 0) : d_(d), basis_(0, static_cast<Eigen::Index>(d)) {}

  /// Integer span of `generators`; all must have length d. No generators
  /// gives the zero lattice.
  static IntegerLattice from_generators(std::size_t d, const std::vector<IntVector>& generators);
  static IntegerLattice from_index_vectors(std::size_t d, const std::vector<IndexVector>& generators);

  std::size_t dim() const { return d_; }
  std::size_t rank() const { return static_cast<std::size_t>(basis_.rows()); }
  const IntMatrix& basis() const { return basis_; }
  const std::vector<std::size_t>& pivot_columns() const { return pivots_; }
  std::vector<IntVector> basis_rows() const;

  bool contains(std::span<const LatticeInt> v) const;
  bool contains(const IndexVector& v) const { return contains(to_int_vector(v)); }

  /// Integer coefficients over the basis rows, if v is a member.
  std::optional<IntVector> coefficients(std::span<const LatticeInt> v) const;

  /// Canonical representative of v + L: each pivot coordinate reduced into
  /// [0, pivot). Two vectors reduce equally iff their difference is in L.
  IntVector reduce(std::span<const LatticeInt> v) const;

  friend bool operator==(const IntegerLattice& a, const IntegerLattice& b) {
    return a.d_ == b.d_ && a.basis_.rows() == b.basis_.rows() && a.basis_ == b.basis_;
  }

 private:
  void check_dim(std::size_t size) const;

  std::size_t d_;
  IntMatrix basis_;
  std::vector<std::size_t> pivots_;
};

/// Invariant factors of an integer matrix (Smith normal form diagonal,
/// each dividing the next, nonzero entries only).
std::vector<LatticeInt> smith_invariant_factors(IntMatrix m);

/// Quotient L_max / L where L_max = { v in Z^d : r divides |v| }.
struct CosetGroup {
  std::size_t d = 0;
  int r = 1;
  std::vector<LatticeInt> invariant_factors;  ///< one per rank of L, all >= 1
  std::size_t free_rank = 0;                  ///< d - rank(L); nonzero means infinite

  bool finite() const { return free_rank == 0; }
  std::optional<std::uint64_t> size() const;
  std::string str() const;
};

/// Throws std::invalid_argument if some basis row of L is outside L_max.
CosetGroup coset_group(const IntegerLattice& l, int r);

/// |L_max^d| for d parts and r-vectors: C(d + r - 1, r), the trivial bound
/// on the coset group size.
std::uint64_t trivial_coset_bound(std::size_t d, int r);

/// Residues v + L for vectors of L_max.
class ResidueContext {
 public:
  ResidueContext(IntegerLattice l, int r);

  const IntegerLattice& lattice() const { return lattice_; }
  int r() const { return r_; }
  std::size_t dim() const { return lattice_.dim(); }

  /// Canonical representative; throws if r does not divide |v|.
  IntVector residue(std::span<const LatticeInt> v) const;
  IntVector residue(const IndexVector& v) const { return residue(to_int_vector(v)); }
  bool is_zero(std::span<const LatticeInt> v) const;

  /// Every residue class, by closure from 0 under the L_max generators.
  /// Returns nothing when the quotient is infinite or exceeds `limit`.
  std::optional<std::vector<IntVector>> all_residues(std::size_t limit = 100000) const;

 private:
  IntegerLattice lattice_;
  int r_;
};

/// For every (k-1)-vector v of dimension d there is a part i with v + u_i in
/// `vectors`. Throws if some member is not a k-vector of dimension d.
bool is_full(const std::vector<IndexVector>& vectors, int k, std::size_t d);

/// Smallest j with v - u_i + u_j in L.
std::optional<std::size_t> transfer_index(const IntegerLattice& l, std::span<const LatticeInt> v, std::size_t i);

}  // namespace hypermatch
