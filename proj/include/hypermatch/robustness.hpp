#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypermatch/copies.hpp"
#include "hypermatch/factor.hpp"
#include "hypermatch/hypergraph.hpp"
#include "hypermatch/rational.hpp"

namespace hypermatch {

/// Robust index vectors (at least ceil(mu n^r) copies of F) and per-vertex
/// robust-link counts for a fixed partition.
struct RobustProfile {
  Rational mu;
  std::uint64_t threshold = 0;  ///< ceil(mu * n^r)
  CopyCounts raw_counts;
  std::vector<IndexVector> robust_vectors;  ///< sorted
  std::vector<std::uint64_t> link_counts;   ///< r-sets through v spanning a robust copy

  bool is_robust(const IndexVector& v) const;
};

RobustProfile robust_profile(const Hypergraph& h, const PatternGraph& f, const VertexPartition& p, const Rational& mu);

/// Copy vertex sets (masks) with a robust index vector, listed per vertex.
std::vector<std::vector<VertexMask>> robust_copy_sets_by_vertex(const Hypergraph& h, const PatternGraph& f,
                                                                const VertexPartition& p,
                                                                const RobustProfile& profile);

/// Number of (ir-1)-sets S avoiding u and v with both H[S + u] and
/// H[S + v] F-factorable.
std::uint64_t reachable_count(const FactorOracle& oracle, Vertex u, Vertex v, int i);

/// At least alpha * C(n, k-1) common link (k-1)-sets S of u and v have
/// |N(S)| >= alpha n.
bool lo_markstrom_test(const Hypergraph& h, Vertex u, Vertex v, const Rational& alpha);

/// Number of common link sets of u and v with |N(S)| >= alpha n.
std::uint64_t lo_markstrom_count(const Hypergraph& h, Vertex u, Vertex v, const Rational& alpha);

enum class ReachabilityTest { LoMarkstrom, Exact };

struct PartitionParams {
  std::optional<Rational> alpha;  ///< default 1/(k+1)
  Rational beta1{1, 1000};
  Rational mu{1, 1000};
  Rational eps{1, 100};
  Rational merge_fraction{1, 2};
  std::optional<Rational> min_part_fraction;  ///< c'; default 1/k
  ReachabilityTest stage1 = ReachabilityTest::LoMarkstrom;
  bool relocate = true;
};

struct PartCertificate {
  std::size_t part = 0;
  std::size_t pairs_checked = 0;
  std::size_t pairs_passed = 0;
  bool exhaustive = true;
  double confidence = 1.0;  ///< for sampled checks: Wilson level used
};

struct GoodPartition {
  VertexPartition partition;
  Rational beta{1, 1000};
  int t = 1;
  Rational min_part_fraction{1, 3};
  std::vector<PartCertificate> certificates;
};

struct Relocation {
  Vertex vertex = 0;
  int from = 0;
  int to = 0;
  IndexVector via;            ///< the robust vector certifying the move
  std::uint64_t witnesses = 0;  ///< (r-1)-sets R with i_P(R) = via - u_to spanning F with the vertex
};

struct PartitionBuild {
  GoodPartition good;
  Rational alpha;
  Rational min_part_fraction;
  std::vector<std::vector<Vertex>> stage1_parts;  ///< after merging, before relocation
  std::size_t stage1_passing_pairs = 0;
  std::vector<Vertex> small_part_vertices;  ///< in parts left below ceil(c' n)
  std::uint64_t low_link_threshold = 0;     ///< ceil(2 eps n^(r-1))
  std::uint64_t relocation_threshold = 0;   ///< ceil(eps n^(r-1))
  std::vector<Vertex> u0;
  std::vector<Relocation> relocations;
  RobustProfile initial_profile;  ///< at mu, on the stage-1 partition
  RobustProfile final_profile;    ///< at mu/2, on the output partition
  std::vector<std::string> warnings;
  bool relocation_skipped = false;  ///< set by build_partition_or_unrelocated
};

/// A vertex of U0 had no valid relocation target.
class RelocationError : public std::runtime_error {
 public:
  explicit RelocationError(Vertex v)
      : std::runtime_error("no relocation target for vertex " + std::to_string(v)), vertex_(v) {}
  Vertex vertex() const { return vertex_; }

 private:
  Vertex vertex_;
};

PartitionBuild build_partition(const Hypergraph& h, const PatternGraph& f, const PartitionParams& params);

/// build_partition, retried without relocation when some low-link vertex has
/// no target. Hosts like this sit outside the minimum-degree regime; the
/// stage-1 parts still separate the structure that blocks a factor.
PartitionBuild build_partition_or_unrelocated(const Hypergraph& h, const PatternGraph& f,
                                              const PartitionParams& params);

enum class VerifyMode { Auto, Exhaustive, Sampled };

struct VerifyParams {
  Rational beta{1, 1000};
  int t = 1;
  Rational eps{1, 100};
  Rational mu{1, 1000};
  VerifyMode mode = VerifyMode::Auto;
  std::uint64_t work_budget = 5'000'000;  ///< oracle calls allowed for exhaustive closedness
  std::size_t samples_per_pair = 200;
  std::uint64_t seed = 1;
};

struct PropertyResult {
  bool pass = true;
  std::vector<std::string> counterexamples;
};

struct VerifyReport {
  PropertyResult sizes;       ///< P1
  PropertyResult robust_links;  ///< P2
  PropertyResult closedness;    ///< P3 at the given t
  std::uint64_t size_threshold = 0;
  std::uint64_t link_threshold = 0;
  std::uint64_t reach_threshold = 0;
  bool exhaustive = true;
  std::vector<PartCertificate> certificates;

  bool pass() const { return sizes.pass && robust_links.pass && closedness.pass; }
};

VerifyReport verify_partition(const Hypergraph& h, const PatternGraph& f, const GoodPartition& gp,
                              const VerifyParams& params);

}  // namespace hypermatch
