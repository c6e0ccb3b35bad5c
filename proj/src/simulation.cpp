#include "hypermatch/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "hypermatch/combinatorics.hpp"
#include "hypermatch/generators.hpp"
#include "hypermatch/robustness.hpp"

namespace hypermatch {

int default_thread_count() {
  if (const char* env = std::getenv("HYPERMATCH_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

void enumerate_matchings(const std::vector<VertexMask>& edges, VertexMask uncovered, std::vector<VertexMask>& current,
                         std::vector<std::vector<VertexMask>>& out, std::size_t limit) {
  if (uncovered == 0) {
    if (out.size() >= limit) throw std::length_error("more perfect matchings than the enumeration limit");
    out.push_back(current);
    return;
  }
  const VertexMask low = uncovered & (~uncovered + 1);
  for (auto e : edges)
    if ((e & low) && (e & uncovered) == e) {
      current.push_back(e);
      enumerate_matchings(edges, uncovered & ~e, current, out, limit);
      current.pop_back();
    }
}

std::string set_label(const std::vector<std::uint32_t>& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "}";
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double binomial_se(double f, std::size_t samples) {
  return samples ? std::sqrt(f * (1 - f) / static_cast<double>(samples)) : 0.0;
}

// Frequencies of single and pair events collected from many samples.
struct EventTally {
  std::map<std::vector<std::uint32_t>, std::uint64_t> singles;
  std::unordered_map<std::uint64_t, std::uint64_t> pairs;
  std::map<std::vector<std::uint32_t>, std::uint32_t> ids;
  std::vector<std::vector<std::uint32_t>> keys;

  std::uint32_t id_of(const std::vector<std::uint32_t>& key) {
    auto [it, fresh] = ids.emplace(key, static_cast<std::uint32_t>(keys.size()));
    if (fresh) keys.push_back(key);
    return it->second;
  }

  void add_sample(const std::vector<std::vector<std::uint32_t>>& events) {
    std::vector<std::uint32_t> local;
    for (const auto& e : events) {
      ++singles[e];
      local.push_back(id_of(e));
    }
    std::sort(local.begin(), local.end());
    for (std::size_t a = 0; a < local.size(); ++a)
      for (std::size_t b = a + 1; b < local.size(); ++b)
        ++pairs[(static_cast<std::uint64_t>(local[a]) << 32) | local[b]];
  }
};

SpreadEstimate summarise(const EventTally& tally, std::size_t trials, std::size_t samples, const SpreadOptions& opt,
                         const std::function<std::string(const std::vector<std::uint32_t>&)>& label) {
  SpreadEstimate est;
  est.trials = trials;
  est.samples = samples;
  est.scale = opt.scale;
  est.constant = opt.constant;
  est.bound_q = opt.constant / opt.scale;
  est.single_counts = tally.singles;
  if (samples == 0) return est;
  const double s = static_cast<double>(samples);
  const double q = est.bound_q;

  auto check = [&](const std::string& event, int size, double f) {
    const double b = std::pow(q, size);
    if (b >= 1) return;
    const double sigma = binomial_se(b, samples);
    if (f > b + 3 * sigma) est.exceedances.push_back({event, size, f, b, sigma});
  };

  for (const auto& [key, count] : tally.singles) {
    const double f = static_cast<double>(count) / s;
    if (f > est.max_single_frequency) {
      est.max_single_frequency = f;
      est.max_single_event = label(key);
    }
    check(label(key), 1, f);
  }
  // Unordered pair storage; walk in key order so reports are reproducible.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs(tally.pairs.begin(), tally.pairs.end());
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [key, count] : pairs) {
    const double f = static_cast<double>(count) / s;
    const auto& a = tally.keys[key >> 32];
    const auto& b = tally.keys[key & 0xFFFFFFFFu];
    const std::string name = label(a) + "&" + label(b);
    if (f > est.max_pair_frequency) {
      est.max_pair_frequency = f;
      est.max_pair_event = name;
    }
    check(name, 2, f);
  }
  est.single_se = binomial_se(est.max_single_frequency, samples);
  est.pair_se = binomial_se(est.max_pair_frequency, samples);
  est.fitted_constant = opt.scale * std::max(est.max_single_frequency, std::sqrt(est.max_pair_frequency));
  return est;
}

}  // namespace

UniformPmSampler::UniformPmSampler(const Hypergraph& h, std::size_t limit) {
  if (!h.mask_capable()) throw std::length_error("uniform sampler supports at most 64 vertices");
  std::vector<VertexMask> edges;
  for (std::size_t i = 0; i < h.edge_count(); ++i) edges.push_back(h.edge_mask(i));
  std::vector<VertexMask> current;
  if (h.k() > 0 && h.n() % static_cast<std::size_t>(h.k()) == 0)
    enumerate_matchings(edges, full_mask(h.n()), current, matchings_, limit);
}

PackingWitness UniformPmSampler::sample(Rng& rng) const {
  if (matchings_.empty()) throw std::logic_error("no perfect matching to sample");
  const auto& m = matchings_[static_cast<std::size_t>(rng.below(matchings_.size()))];
  PackingWitness w;
  for (auto e : m) w.copies.push_back(mask_vertices(e));
  std::sort(w.copies.begin(), w.copies.end());
  return w;
}

SpreadEstimate estimate_vertex_spread(const PlacementSampler& sampler, std::size_t n, const SpreadOptions& opt) {
  std::vector<std::optional<std::vector<int>>> results(opt.trials);
  parallel_trials(opt.trials, opt.threads,
                  [&](std::size_t t) { results[t] = sampler(split_seed(opt.seed, static_cast<std::uint64_t>(t))); });
  EventTally tally;
  std::size_t samples = 0;
  std::vector<std::vector<std::uint32_t>> events;
  for (const auto& r : results) {
    if (!r) continue;
    if (r->size() != n) throw std::invalid_argument("placement sampler returned the wrong number of vertices");
    ++samples;
    events.clear();
    for (std::size_t v = 0; v < n; ++v)
      if ((*r)[v] >= 0) events.push_back({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>((*r)[v])});
    tally.add_sample(events);
  }
  return summarise(tally, opt.trials, samples, opt, [](const std::vector<std::uint32_t>& e) {
    return "v" + std::to_string(e[0]) + "->U" + std::to_string(e[1]);
  });
}

SpreadEstimate estimate_factor_spread(const FactorSampler& sampler, const SpreadOptions& opt) {
  std::vector<std::optional<PackingWitness>> results(opt.trials);
  parallel_trials(opt.trials, opt.threads,
                  [&](std::size_t t) { results[t] = sampler(split_seed(opt.seed, static_cast<std::uint64_t>(t))); });
  EventTally tally;
  std::size_t samples = 0;
  std::vector<std::vector<std::uint32_t>> events;
  for (const auto& r : results) {
    if (!r) continue;
    ++samples;
    events.clear();
    for (const auto& c : r->copies) {
      std::vector<std::uint32_t> key(c.begin(), c.end());
      std::sort(key.begin(), key.end());
      events.push_back(std::move(key));
    }
    tally.add_sample(events);
  }
  return summarise(tally, opt.trials, samples, opt, set_label);
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1 + z2 / n;
  const double centre = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  // The exact interval touches 0 or 1 at the extremes; keep rounding out of it.
  const double lower = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double upper = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {lower, upper};
}

bool McCurve::monotone_within(double widths) const {
  std::vector<McPoint> sorted = points;
  std::stable_sort(sorted.begin(), sorted.end(), [](const McPoint& a, const McPoint& b) { return a.p < b.p; });
  for (std::size_t i = 0; i < sorted.size(); ++i)
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const double w = std::max(sorted[i].upper - sorted[i].lower, sorted[j].upper - sorted[j].lower);
      if (sorted[i].rate() - sorted[j].rate() > widths * w) return false;
    }
  return true;
}

std::string McCurve::csv() const {
  std::string out = "p,trials,successes,lower,upper\n";
  for (const auto& pt : points)
    out += format_double(pt.p) + "," + std::to_string(pt.trials) + "," + std::to_string(pt.successes) + "," +
           format_double(pt.lower) + "," + format_double(pt.upper) + "\n";
  return out;
}

McCurve mc_threshold(const Hypergraph& h, const std::vector<double>& grid, std::size_t trials, std::uint64_t seed,
                     int threads, double z) {
  if (grid.empty()) throw std::invalid_argument("empty p grid");
  for (double p : grid)
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("grid value " + format_double(p) + " is outside [0, 1]");
  if (trials == 0) throw std::invalid_argument("at least one trial per p is needed");
  if (!h.mask_capable()) throw std::length_error("the matching oracle supports at most 64 vertices");

  const bool divisible = h.k() > 0 && h.n() % static_cast<std::size_t>(h.k()) == 0;
  const auto pattern = PatternGraph::single_edge(h.k());
  std::vector<char> success(grid.size() * trials, 0);
  parallel_trials(success.size(), threads, [&](std::size_t job) {
    const std::size_t i = job / trials, t = job % trials;
    if (!divisible) return;
    auto hp = sparsify(h, grid[i], split_seed(split_seed(seed, i), t));
    FactorOracle oracle(hp, pattern);
    success[job] = oracle.has_factor(full_mask(h.n()));
  });

  McCurve curve;
  curve.seed = seed;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    McPoint pt;
    pt.p = grid[i];
    pt.trials = trials;
    pt.successes = static_cast<std::size_t>(
        std::count(success.begin() + static_cast<std::ptrdiff_t>(i * trials),
                   success.begin() + static_cast<std::ptrdiff_t>((i + 1) * trials), 1));
    std::tie(pt.lower, pt.upper) = wilson_interval(pt.successes, trials, z);
    curve.points.push_back(pt);
  }
  return curve;
}

std::string property_name(InheritedProperty p) {
  switch (p) {
    case InheritedProperty::RobustLinks: return "robust_links";
    case InheritedProperty::Reachability: return "reachability";
    case InheritedProperty::Codegree: return "codegree";
  }
  return "unknown";
}

namespace {

std::vector<Vertex> random_subset(std::size_t n, std::size_t ell, Rng& rng) {
  std::vector<Vertex> all(n);
  std::iota(all.begin(), all.end(), 0);
  rng.shuffle(std::span<Vertex>(all));
  all.resize(ell);
  std::sort(all.begin(), all.end());
  return all;
}

// Degrees of all d-sets that lie in some edge, keyed by mask.
std::unordered_map<VertexMask, std::uint64_t> d_set_degrees(const Hypergraph& h, int d) {
  std::unordered_map<VertexMask, std::uint64_t> deg;
  for (std::size_t i = 0; i < h.edge_count(); ++i)
    for_each_submask(h.edge_mask(i), d, [&](VertexMask s) {
      ++deg[s];
      return true;
    });
  return deg;
}

}  // namespace

InheritanceReport subset_inheritance_test(const Hypergraph& h, const PatternGraph& f, const VertexPartition& p,
                                          const InheritanceParams& params) {
  const std::size_t n = h.n();
  const std::size_t ell = params.ell;
  if (!h.mask_capable()) throw std::length_error("subset tests support at most 64 vertices");
  if (ell == 0 || ell > n) throw std::invalid_argument("subset size must be in [1, n]");
  if (params.trials == 0) throw std::invalid_argument("at least one trial is needed");
  if (p.n() != n) throw std::invalid_argument("partition does not cover the host");

  InheritanceReport rep;
  rep.property = params.property;
  rep.ell = ell;
  rep.trials = params.trials;
  const double l = static_cast<double>(ell);
  std::vector<char> failed(params.trials, 0);
  auto trial_rng = [&](std::size_t t) { return Rng(split_seed(params.seed, static_cast<std::uint64_t>(t))); };

  switch (params.property) {
    case InheritedProperty::RobustLinks: {
      const int r = f.r();
      auto profile = robust_profile(h, f, p, params.mu);
      auto by_vertex = robust_copy_sets_by_vertex(h, f, p, profile);
      std::uint64_t min_links = ~std::uint64_t{0};
      for (const auto& list : by_vertex) min_links = std::min<std::uint64_t>(min_links, list.size());
      const auto scale_n = ipow(n, static_cast<unsigned>(r - 1));
      const Rational gamma = params.gamma.value_or(Rational(static_cast<std::int64_t>(min_links),
                                                            static_cast<std::int64_t>(scale_n)));
      const Rational gamma_p = params.gamma_prime.value_or(gamma / 2);
      const auto scale_l = ipow(ell, static_cast<unsigned>(r - 1));
      parallel_trials(params.trials, params.threads, [&](std::size_t t) {
        Rng rng = trial_rng(t);
        const VertexMask a = to_mask(random_subset(n, ell, rng));
        const Vertex v = static_cast<Vertex>(rng.below(n));
        std::uint64_t links = 0;
        for (auto c : by_vertex[v]) links += ((c & ~bit(v)) & ~a) == 0;
        failed[t] = !at_least(links, gamma_p, scale_l);
      });
      const double gap = gamma.to_double() - gamma_p.to_double();
      rep.bound = 2 * std::exp(-l * gap * gap / 2);
      rep.constants = {{"mu", params.mu.str()}, {"gamma", gamma.str()}, {"gamma_prime", gamma_p.str()}};
      break;
    }
    case InheritedProperty::Reachability: {
      const int ir1 = params.t * f.r() - 1;
      if (params.t < 1) throw std::invalid_argument("t must be positive");
      std::vector<Vertex> u = params.u;
      if (u.empty()) {
        u.resize(n);
        std::iota(u.begin(), u.end(), 0);
      }
      std::sort(u.begin(), u.end());
      FactorOracle whole(h, f);
      std::vector<std::uint64_t> counts;
      for (std::size_t a = 0; a < u.size(); ++a)
        for (std::size_t b = a + 1; b < u.size(); ++b) counts.push_back(reachable_count(whole, u[a], u[b], params.t));
      const auto scale_n = ipow(n, static_cast<unsigned>(ir1));
      std::uint64_t min_count = counts.empty() ? 0 : *std::min_element(counts.begin(), counts.end());
      const Rational beta = params.beta.value_or(Rational(static_cast<std::int64_t>(min_count),
                                                          static_cast<std::int64_t>(scale_n)));
      const Rational beta_p = params.beta_prime.value_or(beta / 2);
      std::size_t below = 0;
      for (auto c : counts) below += !at_least(c, beta, scale_n);
      const double eta = counts.empty() ? 0.0 : static_cast<double>(below) / static_cast<double>(counts.size());
      const VertexMask u_mask = to_mask(u);
      const auto scale_l = ipow(ell, static_cast<unsigned>(ir1));
      parallel_trials(params.trials, params.threads, [&](std::size_t t) {
        Rng rng = trial_rng(t);
        auto a = random_subset(n, ell, rng);
        auto sub = h.induced(a);
        FactorOracle oracle(sub, f);
        std::vector<Vertex> local;
        for (Vertex i = 0; i < a.size(); ++i)
          if (u_mask & bit(a[i])) local.push_back(i);
        bool closed = true;
        for (std::size_t x = 0; x < local.size() && closed; ++x)
          for (std::size_t y = x + 1; y < local.size() && closed; ++y)
            closed = at_least(reachable_count(oracle, local[x], local[y], params.t), beta_p, scale_l);
        failed[t] = !closed;
      });
      const double gap = beta.to_double() - beta_p.to_double();
      rep.bound = static_cast<double>(binomial(ell, 2)) * (eta + 2 * std::exp(-gap * gap * l / 2));
      rep.constants = {{"beta", beta.str()}, {"beta_prime", beta_p.str()}, {"eta", format_double(eta)},
                       {"t", std::to_string(params.t)}};
      break;
    }
    case InheritedProperty::Codegree: {
      const int d = params.d;
      const int k = h.k();
      if (d < 1 || d >= k) throw std::invalid_argument("codegree test needs 1 <= d < k");
      if (ell < static_cast<std::size_t>(2 * d)) throw std::invalid_argument("codegree test needs l >= 2d");
      const auto full_scale = binomial(n - static_cast<std::size_t>(d), static_cast<std::uint64_t>(k - d));
      const auto deg = d_set_degrees(h, d);
      Rational gamma(0);
      double alpha = 0;
      if (params.gamma) {
        gamma = *params.gamma;
        const Rational need = params.delta + gamma;
        std::uint64_t low = binomial(n, static_cast<std::uint64_t>(d));
        for (const auto& [mask, c] : deg) low -= at_least(c, need, full_scale);
        alpha = static_cast<double>(low) / static_cast<double>(binomial(n, static_cast<std::uint64_t>(d)));
      } else {
        // Largest gamma with no exceptional d-sets.
        Rational ratio(static_cast<std::int64_t>(min_degree(h, d)), static_cast<std::int64_t>(full_scale));
        if (params.delta < ratio) {
          // ratio - delta without a subtraction operator
          gamma = Rational(ratio.num * params.delta.den - params.delta.num * ratio.den, ratio.den * params.delta.den);
        } else {
          throw std::invalid_argument("delta is at least the measured minimum d-degree ratio");
        }
      }
      const Rational gamma_p = params.gamma_prime.value_or(gamma / 2);
      const Rational need_sub = params.delta + gamma_p;
      const auto sub_scale = binomial(ell - static_cast<std::size_t>(d), static_cast<std::uint64_t>(k - d));
      parallel_trials(params.trials, params.threads, [&](std::size_t t) {
        Rng rng = trial_rng(t);
        auto a = random_subset(n, ell, rng);
        failed[t] = !at_least(min_degree(h.induced(a), d), need_sub, sub_scale);
      });
      const double gap = gamma.to_double() - gamma_p.to_double();
      rep.bound = static_cast<double>(binomial(ell, static_cast<std::uint64_t>(d))) * (alpha + std::exp(-gap * gap * l / 4));
      rep.constants = {{"d", std::to_string(d)},          {"delta", params.delta.str()},
                       {"gamma", gamma.str()},           {"gamma_prime", gamma_p.str()},
                       {"alpha", format_double(alpha)}};
      break;
    }
  }
  rep.failures = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  rep.rate = static_cast<double>(rep.failures) / static_cast<double>(rep.trials);
  rep.standard_error = binomial_se(rep.rate, rep.trials);
  return rep;
}

}  // namespace hypermatch
