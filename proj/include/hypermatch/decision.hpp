#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypermatch/factor.hpp"
#include "hypermatch/hypergraph.hpp"
#include "hypermatch/lattice.hpp"
#include "hypermatch/rational.hpp"
#include "hypermatch/robustness.hpp"

namespace hypermatch {

/// Answers "is this edge of H present in H_p?" one edge at a time and logs
/// every distinct query in order. Repeated queries are answered from the log.
class EdgeOracle {
 public:
  struct Reveal {
    std::size_t edge = 0;  ///< position in canonical edge order of H
    bool present = false;
  };

  virtual ~EdgeOracle() = default;

  bool query(std::size_t edge);
  const std::vector<Reveal>& reveals() const { return reveals_; }
  bool revealed(std::size_t edge) const { return answers_.count(edge) > 0; }

 protected:
  virtual bool lookup(std::size_t edge) = 0;

 private:
  std::vector<Reveal> reveals_;
  std::unordered_map<std::size_t, bool> answers_;
};

/// H_p with the same coin flips as sparsify(h, p, seed).
class SparsifiedEdgeOracle : public EdgeOracle {
 public:
  SparsifiedEdgeOracle(const Hypergraph& h, double p, std::uint64_t seed);

 protected:
  bool lookup(std::size_t edge) override { return kept_.at(edge); }

 private:
  std::vector<bool> kept_;
};

/// Presence decided by a caller-supplied function (e.g. backed by a file).
class CallbackEdgeOracle : public EdgeOracle {
 public:
  explicit CallbackEdgeOracle(std::function<bool(std::size_t)> f) : f_(std::move(f)) {}

 protected:
  bool lookup(std::size_t edge) override { return f_(edge); }

 private:
  std::function<bool(std::size_t)> f_;
};

/// A matching with one edge per requested k-vector (as a multiset), avoiding
/// `forbidden`. Edges are tried in canonical order; `present` filters edges
/// (called only for edges that would be used) and defaults to all of H.
std::optional<std::vector<std::size_t>> find_matching_with_vectors(
    const Hypergraph& h, const VertexPartition& p, std::vector<IndexVector> vectors, VertexMask forbidden = 0,
    const std::function<bool(std::size_t)>& present = {});

/// F-packing M with |M| <= q and i_P(V(H) - V(M)) in L, smallest first.
std::optional<PackingWitness> find_q_solution(const Hypergraph& h, const PatternGraph& f, const VertexPartition& p,
                                              const IntegerLattice& l, int q);

/// Default q: |Q| when the sharp bound's hypotheses hold, else C(d+r-1, r).
int default_q(const CosetGroup& group, bool hypotheses_certified);

enum class Verdict { Accept, Reject };

struct ExtensionResult {
  std::vector<std::size_t> matching;  ///< M' followed by the greedily added robust edges
  std::vector<EdgeOracle::Reveal> reveals;
  bool complete = true;
  std::string warning;
  IndexVector remainder;
  bool remainder_in_lattice = false;
};

struct DecisionOutcome {
  Verdict verdict = Verdict::Reject;
  std::vector<IndexVector> vector_set;        ///< the accepted multiset V
  std::vector<IndexVector> nonrobust_part;    ///< V^eta
  std::vector<std::size_t> witness;           ///< M' (edge positions in H)
  std::vector<EdgeOracle::Reveal> revealed;   ///< queries made by the search
  std::size_t vector_sets_tried = 0;
  std::size_t lattice_valid_sets = 0;
  std::string certificate;                    ///< for Reject
  std::optional<ExtensionResult> extension;
  std::uint64_t eta_threshold = 0;            ///< ceil(eta n^k)
  std::vector<IndexVector> eta_robust;        ///< I^eta_P(H)
};

struct ProcedureParams {
  Rational eta{1, 1000};
  bool extend = true;
  int max_vectors = -1;  ///< defaults to k-1
};

/// The sparsified perfect-matching decision procedure. `profile` is the
/// robust profile of (H, single edge, P) at mu; its robust vectors generate
/// L. Search reveals only edges whose index vector is not eta-robust.
DecisionOutcome procedure_perfect_matching(const Hypergraph& h, const VertexPartition& p,
                                           const RobustProfile& profile, const ProcedureParams& params,
                                           EdgeOracle& oracle);

/// Exponent and log power of a threshold C n^exponent (log n)^log_power.
struct ThresholdCurve {
  Rational exponent;
  Rational log_power;
  std::string str() const;
};

struct SubgraphDensity {
  std::vector<Vertex> vertices;
  std::size_t edges = 0;
  Rational d1;
};

struct DensityParams {
  std::size_t e_f = 0;
  std::size_t v_f = 0;
  Rational d1;  ///< e_F / (v_F - 1)
  Rational m1;  ///< max of d1 over subgraphs with at least two vertices
  bool strictly_1_balanced = false;
  std::vector<SubgraphDensity> subgraphs;  ///< every induced subgraph on >= 2 vertices
  /// n^(-1/m1) (log n)^(1/e_F) when strictly 1-balanced, else n^(-1/m1) log n.
  ThresholdCurve factor_threshold;
};

/// Density parameters by exhaustive vertex-subset enumeration (r <= 12).
DensityParams density_params(const PatternGraph& f);

}  // namespace hypermatch
