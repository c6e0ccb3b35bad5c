#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hypermatch/factor.hpp"
#include "hypermatch/hypergraph.hpp"
#include "hypermatch/lattice.hpp"
#include "hypermatch/random.hpp"
#include "hypermatch/rational.hpp"
#include "hypermatch/robustness.hpp"

namespace hypermatch {

/// How the first window W_1 is sized. Wide: C_1 = (C-1)C + (n mod (C-1)C),
/// clamped to n, which leaves a single cluster whenever n < 2C(C-1).
/// Compact: the smallest C_1 >= C with C_1 = n mod C(C-1), so that desk-sized
/// hosts still split into several clusters with (m-1) a multiple of C.
enum class WindowMode { Wide, Compact };

std::size_t first_window_size(std::size_t n, std::size_t c, WindowMode mode);

/// Clusters U'_1, ..., U'_m read off a uniformly random permutation: U'_1
/// gets C_1 vertices, every later cluster C-1. Each cluster is sorted.
struct RawClusters {
  std::size_t c = 0;
  std::size_t first_window = 0;
  std::vector<std::vector<Vertex>> clusters;
};

RawClusters sample_clusters(std::size_t n, std::size_t c, WindowMode mode, Rng& rng);

/// Desk-scale versions of the bad-cluster conditions. Fractions of counts are
/// compared exactly; the two thresholds that involve exp or sqrt are doubles.
struct ClusterThresholds {
  Rational part_fraction{2, 9};          ///< A1: |U cap V_j| >= part_fraction |U|
  double in_degree_fraction = 0.0;       ///< A2: d^-_D(i) >= in_degree_fraction * m
  Rational link_fraction{1, 150};        ///< A3/D: |F(v, U)| >= link_fraction |U|^(r-1)
  double weak_vertex_fraction = 1.0;     ///< A3: bad if >= this fraction of n vertices are weak
  int ell = 2;                           ///< A4: degree of l-sets
  Rational degree_fraction{0};           ///< A4: delta_l(H[U]) >= degree_fraction C(|U|-l, k-l)
  Rational closed_beta{1, 1500};         ///< A4: parts of U are (F, beta, 1)-closed in H[U]
  Rational robust_mu{1, 1500};           ///< A5: every mu-robust vector of H stays robust in H[U]
};

/// Thresholds at the in-proof strengths: part fraction 2c/3, in-degree
/// 1 - rqd/sqrt(C) (clamped at 0), link fraction 2 eps/3, weak-vertex
/// fraction exp(-eps^2 C/50), degree delta + 2 gamma/3 with gamma measured
/// on H, closedness 2 beta/3 and robustness 2 mu/3.
ClusterThresholds default_thresholds(const Hypergraph& h, const VertexPartition& p, const PatternGraph& f,
                                     std::size_t c, int q, const Rational& part_c, const Rational& eps,
                                     const Rational& beta, const Rational& mu, const Rational& delta, int ell);

/// Everything the cluster steps need about (H, F, P, mu), computed once.
class ClusterContext {
 public:
  ClusterContext(const Hypergraph& h, const PatternGraph& f, const VertexPartition& p, const RobustProfile& profile,
                 int q);

  const Hypergraph& host() const { return *h_; }
  const PatternGraph& pattern() const { return *f_; }
  const VertexPartition& partition() const { return *p_; }
  const RobustProfile& profile() const { return *profile_; }
  int q() const { return q_; }
  int r() const { return f_->r(); }
  const IntegerLattice& lattice() const { return lattice_; }
  const ResidueContext& residues() const { return residues_; }

  /// All copy vertex sets of F in H and those with a robust index vector.
  const std::vector<VertexMask>& copy_sets() const { return copies_; }
  const std::vector<VertexMask>& robust_copy_sets() const { return robust_copies_; }
  const std::vector<VertexMask>& robust_copies_through(Vertex v) const { return robust_by_vertex_[v]; }

  /// |F^mu_P(v, Y)|: robust copy sets through v whose other vertices lie in Y.
  std::uint64_t robust_links_into(Vertex v, VertexMask y) const;

 private:
  const Hypergraph* h_;
  const PatternGraph* f_;
  const VertexPartition* p_;
  const RobustProfile* profile_;
  int q_;
  IntegerLattice lattice_;
  ResidueContext residues_;
  std::vector<VertexMask> copies_;
  std::vector<VertexMask> robust_copies_;
  std::vector<std::vector<VertexMask>> robust_by_vertex_;
};

/// T_i: r*q vertices from every part, lowest labels first. Empty when some
/// part of the cluster is too small.
std::vector<Vertex> choose_t_set(const ClusterContext& ctx, const std::vector<Vertex>& cluster);

/// Adjacency matrix of the auxiliary digraph D: (i, j) when every v in T_i
/// has at least link_fraction |U_j|^(r-1) robust links into U_j. No loops.
std::vector<std::vector<bool>> auxiliary_digraph(const ClusterContext& ctx,
                                                 const std::vector<std::vector<Vertex>>& clusters,
                                                 const std::vector<std::vector<Vertex>>& t_sets,
                                                 const Rational& link_fraction);

struct ClusterFlags {
  std::size_t index = 0;
  std::vector<std::string> reasons;  ///< "A1" ... "A5", "T" (no balanced T_i)
  bool bad() const { return !reasons.empty(); }
};

struct Classification {
  std::vector<std::vector<Vertex>> t_sets;
  std::vector<std::vector<bool>> digraph;
  std::vector<ClusterFlags> flags;  ///< one per cluster; cluster 0 is checked but never dissolved
  std::vector<std::size_t> bad;     ///< indices >= 1 violating some condition

  /// Cluster 0 passes A1, A4 and A5 and at most (m-1)/C later clusters are bad.
  bool acceptable = false;
};

Classification classify_bad_clusters(const ClusterContext& ctx, const RawClusters& raw, const ClusterThresholds& th);

/// One absorbed vertex per kept cluster, certified by a robust copy.
struct Absorption {
  std::size_t cluster = 0;  ///< index into the raw clusters
  Vertex vertex = 0;
  std::vector<Vertex> copy;  ///< L_i, sorted
};

struct ClusterPlan {
  std::vector<std::vector<Vertex>> clusters;  ///< U_i after redistribution, sorted
  std::vector<std::size_t> raw_index;         ///< which raw cluster each U_i came from
  std::vector<std::vector<Vertex>> t_sets;    ///< T_i
  std::vector<std::vector<Vertex>> l_sets;    ///< L_i (empty for the first cluster)
  std::vector<std::size_t> dissolved;         ///< raw clusters broken up (bad plus padding)
  std::vector<Absorption> absorptions;
  std::vector<std::size_t> sizes;             ///< sizes after redistribution
  bool common_size = true;                    ///< all clusters after the first share one size
  std::uint64_t seed = 0;
};

/// Left vertices whose joint neighbourhood is smaller than the set itself.
struct HallViolator {
  std::vector<std::size_t> left;
  std::vector<std::size_t> neighbourhood;
};

class RedistributionError : public std::runtime_error {
 public:
  RedistributionError(const std::string& what, HallViolator v) : std::runtime_error(what), violator_(std::move(v)) {}
  const HallViolator& violator() const { return violator_; }

 private:
  HallViolator violator_;
};

/// Breaks up the bad clusters (padded at random to exactly (m-1)/C of them)
/// and hands one of their vertices to each remaining cluster through a
/// random perfect matching of G_pi. Kept clusters appear in raw order.
ClusterPlan redistribute(const ClusterContext& ctx, const RawClusters& raw, const Classification& cls, Rng& rng);

/// Random perfect matching of a bipartite graph with equal sides: augmenting
/// paths over shuffled vertex and neighbour orders. adj[a] lists right
/// vertices. Returns match[a] or a Hall violator.
std::variant<std::vector<std::size_t>, HallViolator> random_bipartite_matching(
    const std::vector<std::vector<std::size_t>>& adj, std::size_t right, Rng& rng);

struct HamiltonReport {
  std::vector<std::size_t> cycle;  ///< consecutive entries (and last -> first) are arcs
  bool found = false;
  bool ghouila_houri = false;  ///< minimum semi-degree >= |D|/2
};

/// Directed Hamilton cycle by backtracking from vertex 0.
HamiltonReport hamilton_order(const std::vector<std::vector<bool>>& arcs);

/// Minimal number of r-vectors (as a list) whose residues sum to `target`,
/// at most `max_sets` of them, lexicographically first among the shortest.
std::optional<std::vector<IndexVector>> residue_fix(const ResidueContext& ctx, const IntVector& target,
                                                    int max_sets);

/// Shrinks a sequence of r-vectors with a given residue sum: while there are
/// at least `q` of them, pigeonhole on prefix sums removes a zero-sum run.
/// Requires the quotient to have at most q classes.
std::vector<IndexVector> pigeonhole_shrink(const ResidueContext& ctx, std::vector<IndexVector> sets, int q);

struct CorrectionStep {
  std::size_t cluster = 0;              ///< position in the corrected order
  IntVector deficit;                    ///< residue of U_i minus J_i before the move
  std::vector<std::vector<Vertex>> moved;  ///< r-sets taken from T_{i+1}
};

struct CorrectedPlan {
  std::vector<std::size_t> order;               ///< plan cluster indices, cluster 0 first
  std::vector<std::vector<Vertex>> clusters;    ///< U'_i in that order, sorted
  std::vector<std::vector<Vertex>> imported;    ///< J_{i+1} added to U'_i
  std::vector<CorrectionStep> steps;
  HamiltonReport hamilton;
  std::vector<std::string> warnings;
};

class ResidueCorrectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Orders the clusters along the auxiliary digraph and moves at most q-1
/// r-sets from T_{i+1} into U_i so that every i_P(U'_i) lies in L.
CorrectedPlan residue_correct(const ClusterContext& ctx, const ClusterPlan& plan,
                              const std::vector<std::vector<bool>>& digraph);

struct StageCheck {
  std::string stage;
  bool partition_ok = true;
  bool vector_sum_ok = true;
  std::optional<bool> residue_ok;  ///< when every cluster size is a multiple of r
  bool ok() const { return partition_ok && vector_sum_ok && residue_ok.value_or(true); }
};

StageCheck conservation_check(const ClusterContext& ctx, const std::string& stage,
                              const std::vector<std::vector<Vertex>>& clusters);

struct PipelineParams {
  std::size_t c = 12;
  WindowMode window = WindowMode::Wide;
  std::optional<ClusterThresholds> thresholds;  ///< default_thresholds with the constants below
  Rational part_c{1, 3};
  Rational eps{1, 100};
  Rational beta{1, 1000};
  Rational delta{0};
  int retry_cap = 100;
  int cluster_attempts = 20;  ///< random restarts of the per-cluster factor step
};

enum class PipelineStage { Sampling, Redistribution, ResidueCorrection, ClusterFactor, Validation, Done };

std::string stage_name(PipelineStage s);

struct PipelineResult {
  bool success = false;
  PipelineStage stage = PipelineStage::Sampling;  ///< failing stage, or Done
  std::string message;
  PackingWitness factor;
  int resamples = 0;
  std::optional<ClusterPlan> plan;
  std::optional<CorrectedPlan> corrected;
  std::vector<StageCheck> checks;
  std::vector<int> final_cluster_of;  ///< per vertex, position in the corrected order (-1 if unknown)
  bool conservation_ok() const;
};

/// The whole randomised construction for one seed: cluster sampling with
/// rejection, redistribution, residue correction, greedy robust copies for
/// L_i and J_{i+1}, then a random brute-force F-factor of what remains in
/// each cluster. A success is verified as an F-factor before it is returned.
PipelineResult sample_f_factor(const ClusterContext& ctx, const PipelineParams& params, std::uint64_t seed);

}  // namespace hypermatch
