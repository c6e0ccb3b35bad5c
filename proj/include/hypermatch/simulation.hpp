#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hypermatch/factor.hpp"
#include "hypermatch/hypergraph.hpp"
#include "hypermatch/random.hpp"
#include "hypermatch/rational.hpp"

namespace hypermatch {

/// Worker count from HYPERMATCH_THREADS, else the hardware concurrency, at least 1.
int default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Bodies must
/// write only to per-index storage; the first exception is rethrown.
template <typename Body>
void parallel_trials(std::size_t count, int threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(count, threads < 1 ? 1 : static_cast<std::size_t>(threads));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Draws a perfect matching uniformly from the full list of perfect
/// matchings, enumerated once at construction.
class UniformPmSampler {
 public:
  explicit UniformPmSampler(const Hypergraph& h, std::size_t limit = 5'000'000);

  std::size_t count() const { return matchings_.size(); }
  const std::vector<std::vector<VertexMask>>& matchings() const { return matchings_; }
  PackingWitness sample(Rng& rng) const;

 private:
  std::vector<std::vector<VertexMask>> matchings_;
};

struct SpreadExceedance {
  std::string event;
  int size = 1;  ///< |S|
  double frequency = 0;
  double bound = 0;  ///< q^|S|
  double sigma = 0;  ///< binomial standard error at the bound
};

/// Empirical placement or containment frequencies of a sampler against a
/// spread bound q^|S| with q = constant / scale.
struct SpreadEstimate {
  std::size_t trials = 0;
  std::size_t samples = 0;  ///< trials where the sampler produced an output
  double max_single_frequency = 0;
  double max_pair_frequency = 0;
  std::string max_single_event;
  std::string max_pair_event;
  double single_se = 0;
  double pair_se = 0;
  double scale = 1;           ///< n for vertex spread, n^(1/m_1) for factor spread
  double constant = 0;        ///< configured C' or C''
  double bound_q = 0;         ///< constant / scale
  double fitted_constant = 0; ///< smallest constant with both maxima within the bound
  std::vector<SpreadExceedance> exceedances;  ///< beyond 3 sigma of the bound
  /// Single-event counts. Keys are sorted copy vertex sets for factor
  /// spread and {vertex, cluster} for vertex spread.
  std::map<std::vector<std::uint32_t>, std::uint64_t> single_counts;
};

struct SpreadOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
  double scale = 1;
  double constant = 1;
};

/// sampler(seed) returns, per vertex, the index of the cluster it ends in.
using PlacementSampler = std::function<std::optional<std::vector<int>>(std::uint64_t)>;
/// sampler(seed) returns an F-factor (or nothing on failure).
using FactorSampler = std::function<std::optional<PackingWitness>(std::uint64_t)>;

SpreadEstimate estimate_vertex_spread(const PlacementSampler& sampler, std::size_t n, const SpreadOptions& opt);
SpreadEstimate estimate_factor_spread(const FactorSampler& sampler, const SpreadOptions& opt);

/// Wilson score interval for `successes` out of `trials` at normal quantile z.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z = 1.96);

struct McPoint {
  double p = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double lower = 0;
  double upper = 1;
  double rate() const { return trials ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0; }
};

struct McCurve {
  std::vector<McPoint> points;
  std::uint64_t seed = 0;

  /// No later point falls below an earlier one by more than `widths` times
  /// the wider of their two Wilson intervals.
  bool monotone_within(double widths) const;
  std::string csv() const;
};

/// P[H_p has a perfect matching] per p, each trial sparsifying with its own
/// split seed and deciding with the exact factor oracle.
McCurve mc_threshold(const Hypergraph& h, const std::vector<double>& grid, std::size_t trials, std::uint64_t seed,
                     int threads = 1, double z = 1.96);

enum class InheritedProperty { RobustLinks, Reachability, Codegree };

std::string property_name(InheritedProperty p);

/// What a uniformly random l-subset A should inherit, and at which strength.
/// Unset constants are measured on H (the largest value for which the
/// hypothesis holds) and the primed ones default to half of them.
struct InheritanceParams {
  InheritedProperty property = InheritedProperty::Codegree;
  std::size_t ell = 10;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  int threads = 1;
  Rational mu{1, 1000};        ///< robustness of copies (robust links)
  std::optional<Rational> gamma;
  std::optional<Rational> gamma_prime;
  std::optional<Rational> beta;  ///< reachability; pairs below it count towards eta
  std::optional<Rational> beta_prime;
  int t = 1;
  int d = 2;                     ///< codegree: size of the d-sets
  Rational delta{0};
  std::vector<Vertex> u;         ///< reachability: the set U (all vertices when empty)
};

struct InheritanceReport {
  InheritedProperty property = InheritedProperty::Codegree;
  std::size_t ell = 0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double rate = 0;
  double standard_error = 0;
  double bound = 0;  ///< the lemma's failure bound at these constants (may exceed 1)
  std::map<std::string, std::string> constants;
  bool within_bound() const { return rate <= bound + 3 * standard_error; }
};

/// Failure rate of the inherited property on random l-subsets:
/// RobustLinks: |F^mu(v, A)| >= gamma' l^(r-1) for a random vertex v, bound 2 exp(-l (gamma-gamma')^2 / 2).
/// Reachability: U cap A is (F, beta', t)-closed in H[A], bound C(l,2) (eta + 2 exp(-(beta-beta')^2 l / 2)).
/// Codegree: delta_d(H[A]) >= (delta + gamma') C(l-d, k-d), bound C(l,d) (alpha + exp(-(gamma-gamma')^2 l / 4)).
InheritanceReport subset_inheritance_test(const Hypergraph& h, const PatternGraph& f, const VertexPartition& p,
                                          const InheritanceParams& params);

}  // namespace hypermatch
