#include "hypermatch/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <iostream>
#include <map>
#include <sstream>

#include "hypermatch/clustering.hpp"
#include "hypermatch/decision.hpp"
#include "hypermatch/generators.hpp"
#include "hypermatch/io.hpp"
#include "hypermatch/lattice.hpp"
#include "hypermatch/robustness.hpp"
#include "hypermatch/simulation.hpp"

#ifndef HYPERMATCH_VERSION
#define HYPERMATCH_VERSION "0.0.0"
#endif

namespace hypermatch {

const char* library_version() { return HYPERMATCH_VERSION; }

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Rational parse_rational(const std::string& name, const std::string& text) {
  try {
    Rational q = Rational::parse(text);
    if (q.num < 0) throw UsageError(name + " must be non-negative, got '" + text + "'");
    return q;
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception&) {
    throw UsageError(name + ": '" + text + "' is not a number or fraction");
  }
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      double p = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      grid.push_back(p);
    } catch (const std::exception&) {
      throw UsageError("--grid: '" + item + "' is not a number");
    }
  }
  if (grid.empty()) throw UsageError("--grid is empty");
  for (double p : grid)
    if (!(p >= 0 && p <= 1)) throw UsageError("--grid values must lie in [0, 1]");
  return grid;
}

std::vector<IntVector> parse_generators(const std::string& text) {
  std::vector<IntVector> gens;
  std::stringstream rows(text);
  std::string row;
  while (std::getline(rows, row, ';')) {
    IntVector v;
    std::stringstream cols(row);
    std::string cell;
    while (std::getline(cols, cell, ',')) {
      try {
        std::size_t used = 0;
        long long x = std::stoll(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        v.push_back(x);
      } catch (const std::exception&) {
        throw UsageError("--generators: '" + cell + "' is not an integer");
      }
    }
    if (v.empty()) throw UsageError("--generators has an empty row");
    if (!gens.empty() && gens.front().size() != v.size()) throw UsageError("--generators rows differ in length");
    gens.push_back(std::move(v));
  }
  if (gens.empty()) throw UsageError("--generators is empty");
  return gens;
}

json to_json(const IndexVector& v) { return json(v.coords); }

json to_json(const std::vector<IndexVector>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back(to_json(v));
  return a;
}

json edges_json(const Hypergraph& h, const std::vector<std::size_t>& positions) {
  json a = json::array();
  for (auto e : positions) {
    auto span = h.edge(e);
    a.push_back(std::vector<Vertex>(span.begin(), span.end()));
  }
  return a;
}

json partition_json(const VertexPartition& p) {
  return json{{"d", p.d()}, {"parts", p.parts()}};
}

PatternGraph parse_pattern(const std::string& text, int k) {
  if (text == "edge") return PatternGraph::single_edge(k);
  auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string kind = text.substr(0, colon);
    int r = 0;
    try {
      r = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw UsageError("--pattern: bad size in '" + text + "'");
    }
    if (k != 2) throw UsageError("--pattern " + kind + " needs a 2-graph host");
    if (r < 2 || r > 12) throw UsageError("--pattern size must be in [2, 12]");
    if (kind == "clique") return PatternGraph::clique(r);
    if (kind == "path") return PatternGraph::path(r);
    if (kind == "cycle") return PatternGraph::cycle(r);
  }
  throw UsageError("--pattern must be edge, clique:r, path:r or cycle:r");
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Everything a subcommand may read; unused fields stay at their defaults.
struct RunConfig {
  std::string input;
  std::string partition;
  std::string output;
  std::string report;
  std::string partition_out;
  std::string csv;
  std::uint64_t seed = 1;
  int threads = 1;
  int verbosity = 0;

  // gen
  std::string kind = "complete";
  std::size_t n = 0;
  int k = 3;
  std::size_t x = 1;
  double edge_p = 0.5;
  double flip = 0.0;

  // constants, kept as text until parsed
  std::string mu = "1/1000";
  std::string eps = "1/100";
  std::string beta = "1/1000";
  std::string eta = "1/1000";
  std::string alpha;
  std::string gamma;
  std::string merge_fraction = "1/2";
  std::string min_part_fraction;
  std::string part_c = "1/3";
  std::string delta = "0";
  std::string stage1 = "lm";
  bool no_relocate = false;

  // decide
  double p = 1.0;
  bool extend = true;
  bool verify_with_oracle = false;
  int max_vectors = -1;

  // lattice
  std::string generators;
  int r = 3;

  // mc / cluster-sim
  std::string grid = "0,0.02,0.05,0.1,0.2,0.5,1";
  std::size_t trials = 500;
  double z = 1.96;
  std::size_t cluster_size = 12;
  std::string window = "wide";
  int q = 0;
  int retry_cap = 100;
  std::string pattern = "edge";
  double vertex_constant = 0;
  double factor_constant = 0;
};

ParsedHypergraph load_host(const RunConfig& cfg) {
  if (cfg.input.empty()) throw UsageError("--input is required");
  return parse_hypergraph(read_file(cfg.input));
}

PartitionParams partition_params(const RunConfig& cfg, int k) {
  PartitionParams pp;
  pp.mu = parse_rational("--mu", cfg.mu);
  pp.eps = parse_rational("--eps", cfg.eps);
  pp.beta1 = parse_rational("--beta", cfg.beta);
  pp.merge_fraction = parse_rational("--merge-fraction", cfg.merge_fraction);
  if (!cfg.alpha.empty()) {
    pp.alpha = parse_rational("--alpha", cfg.alpha);
  } else if (!cfg.gamma.empty()) {
    pp.alpha = Rational(1, k) + parse_rational("--gamma", cfg.gamma);
  }
  if (!cfg.min_part_fraction.empty()) pp.min_part_fraction = parse_rational("--min-part-fraction", cfg.min_part_fraction);
  if (cfg.stage1 == "lm") {
    pp.stage1 = ReachabilityTest::LoMarkstrom;
  } else if (cfg.stage1 == "exact") {
    pp.stage1 = ReachabilityTest::Exact;
  } else {
    throw UsageError("--stage1 must be lm or exact");
  }
  pp.relocate = !cfg.no_relocate;
  return pp;
}

// Reads --partition when given, else builds one; diagnostics go to `info`.
VertexPartition obtain_partition(const RunConfig& cfg, const Hypergraph& h, const PatternGraph& f, json& info) {
  if (!cfg.partition.empty()) {
    info["partition_source"] = "file";
    return parse_partition(read_file(cfg.partition), h.n());
  }
  auto build = build_partition_or_unrelocated(h, f, partition_params(cfg, h.k()));
  info["partition_source"] = build.relocation_skipped ? "built-unrelocated" : "built";
  info["partition_warnings"] = build.warnings;
  return build.good.partition;
}

json cmd_gen(const RunConfig& cfg, std::ostream& out) {
  if (cfg.n == 0) throw UsageError("--n is required");
  if (cfg.k < 1) throw UsageError("--k must be positive");
  Hypergraph h;
  if (cfg.kind == "complete") {
    h = complete_kgraph(cfg.n, cfg.k);
  } else if (cfg.kind == "barrier") {
    h = divisibility_barrier(cfg.n, cfg.k, cfg.x);
  } else if (cfg.kind == "random") {
    if (!(cfg.edge_p >= 0 && cfg.edge_p <= 1)) throw UsageError("--edge-p must lie in [0, 1]");
    h = random_kgraph(cfg.n, cfg.k, cfg.edge_p, cfg.seed);
  } else if (cfg.kind == "perturbed-barrier") {
    if (!(cfg.flip >= 0 && cfg.flip <= 1)) throw UsageError("--flip must lie in [0, 1]");
    h = perturbed_barrier(cfg.n, cfg.k, cfg.x, cfg.flip, cfg.seed);
  } else {
    throw UsageError("--kind must be complete, barrier, random or perturbed-barrier");
  }
  const std::string text = serialize_hypergraph(h);
  if (cfg.output.empty()) {
    out << text;
  } else {
    write_file_atomic(cfg.output, text);
  }
  return json{{"n", h.n()}, {"k", h.k()}, {"edges", h.edge_count()}, {"hypergraph_file", cfg.output}};
}

json cmd_analyze(const RunConfig& cfg) {
  auto parsed = load_host(cfg);
  const auto& h = parsed.graph;
  json degrees = json::object();
  for (int l = 1; l < h.k(); ++l) degrees[std::to_string(l)] = min_degree(h, l);
  json res{{"n", h.n()},
           {"k", h.k()},
           {"edges", h.edge_count()},
           {"min_degree", degrees},
           {"divisible", h.k() > 0 && h.n() % static_cast<std::size_t>(h.k()) == 0},
           {"input_warnings", parsed.warnings}};
  if (h.k() >= 2) {
    const auto codeg = min_degree(h, h.k() - 1);
    res["min_codegree"] = codeg;
    res["codegree_ratio"] = h.n() ? static_cast<double>(codeg) / static_cast<double>(h.n()) : 0.0;
    res["codegree_margin_over_n_over_k"] = static_cast<double>(codeg) - static_cast<double>(h.n()) / h.k();
  }
  return res;
}

json cmd_count(const RunConfig& cfg) {
  auto parsed = load_host(cfg);
  auto mc = count_perfect_matchings(parsed.graph);
  return json{{"perfect_matchings", mc.count},
              {"divisible", mc.divisible},
              {"n", parsed.graph.n()},
              {"k", parsed.graph.k()},
              {"edges", parsed.graph.edge_count()}};
}

json cmd_partition(const RunConfig& cfg) {
  auto parsed = load_host(cfg);
  const auto& h = parsed.graph;
  auto f = parse_pattern(cfg.pattern, h.k());
  auto pp = partition_params(cfg, h.k());
  auto build = build_partition(h, f, pp);
  VerifyParams vp;
  vp.beta = pp.beta1;
  vp.eps = pp.eps;
  vp.mu = pp.mu;
  vp.seed = cfg.seed;
  auto report = verify_partition(h, f, build.good, vp);
  if (!cfg.partition_out.empty()) write_file_atomic(cfg.partition_out, serialize_partition(build.good.partition));

  json relocs = json::array();
  for (const auto& r : build.relocations)
    relocs.push_back({{"vertex", r.vertex}, {"from", r.from}, {"to", r.to}, {"via", to_json(r.via)},
                      {"witnesses", r.witnesses}});
  auto prop = [](const PropertyResult& pr) { return json{{"pass", pr.pass}, {"counterexamples", pr.counterexamples}}; };
  return json{{"partition", partition_json(build.good.partition)},
              {"alpha", build.alpha.str()},
              {"min_part_fraction", build.min_part_fraction.str()},
              {"stage1_parts", build.stage1_parts},
              {"u0", build.u0},
              {"relocations", relocs},
              {"robust_vectors", to_json(build.final_profile.robust_vectors)},
              {"robust_threshold", build.final_profile.threshold},
              {"warnings", build.warnings},
              {"partition_file", cfg.partition_out},
              {"verification",
               {{"pass", report.pass()},
                {"exhaustive", report.exhaustive},
                {"sizes", prop(report.sizes)},
                {"robust_links", prop(report.robust_links)},
                {"closedness", prop(report.closedness)},
                {"size_threshold", report.size_threshold},
                {"link_threshold", report.link_threshold},
                {"reach_threshold", report.reach_threshold}}}};
}

json lattice_json(const IntegerLattice& l, int r) {
  json res{{"dim", l.dim()}, {"rank", l.rank()}, {"basis", l.basis_rows()}};
  auto group = coset_group(l, r);
  res["invariant_factors"] = group.invariant_factors;
  res["free_rank"] = group.free_rank;
  res["finite"] = group.finite();
  res["coset_group"] = group.str();
  if (auto size = group.size()) res["coset_size"] = *size;
  ResidueContext ctx(l, r);
  if (auto all = ctx.all_residues(1000)) {
    res["residues"] = *all;
  } else {
    res["residues"] = nullptr;
  }
  return res;
}

json cmd_lattice(const RunConfig& cfg) {
  if (!cfg.generators.empty()) {
    if (!cfg.input.empty()) throw UsageError("give either --generators or --input, not both");
    auto gens = parse_generators(cfg.generators);
    auto l = IntegerLattice::from_generators(gens.front().size(), gens);
    json res = lattice_json(l, cfg.r);
    res["generators"] = gens;
    res["r"] = cfg.r;
    return res;
  }
  auto parsed = load_host(cfg);
  const auto& h = parsed.graph;
  auto f = parse_pattern(cfg.pattern, h.k());
  json info = json::object();
  auto p = obtain_partition(cfg, h, f, info);
  auto profile = robust_profile(h, f, p, parse_rational("--mu", cfg.mu));
  auto l = IntegerLattice::from_index_vectors(p.d(), profile.robust_vectors);
  json res = lattice_json(l, f.r());
  res["r"] = f.r();
  res["robust_vectors"] = to_json(profile.robust_vectors);
  res["robust_threshold"] = profile.threshold;
  res["partition"] = partition_json(p);
  if (f.is_single_edge()) res["full"] = is_full(profile.robust_vectors, h.k(), p.d());
  res.update(info);
  return res;
}

json cmd_decide(const RunConfig& cfg) {
  if (!(cfg.p >= 0 && cfg.p <= 1)) throw UsageError("--p must lie in [0, 1]");
  auto parsed = load_host(cfg);
  const auto& h = parsed.graph;
  auto f = PatternGraph::single_edge(h.k());
  json info = json::object();
  auto part = obtain_partition(cfg, h, f, info);
  auto profile = robust_profile(h, f, part, parse_rational("--mu", cfg.mu));
  ProcedureParams params;
  params.eta = parse_rational("--eta", cfg.eta);
  params.extend = cfg.extend;
  params.max_vectors = cfg.max_vectors;
  SparsifiedEdgeOracle oracle(h, cfg.p, cfg.seed);
  auto outcome = procedure_perfect_matching(h, part, profile, params, oracle);

  json res{{"verdict", outcome.verdict == Verdict::Accept ? "accept" : "reject"},
           {"certificate", outcome.certificate},
           {"vector_set", to_json(outcome.vector_set)},
           {"nonrobust_part", to_json(outcome.nonrobust_part)},
           {"witness", edges_json(h, outcome.witness)},
           {"revealed_edges", outcome.revealed.size()},
           {"vector_sets_tried", outcome.vector_sets_tried},
           {"lattice_valid_sets", outcome.lattice_valid_sets},
           {"eta_threshold", outcome.eta_threshold},
           {"eta_robust", to_json(outcome.eta_robust)},
           {"robust_vectors", to_json(profile.robust_vectors)},
           {"partition", partition_json(part)},
           {"p", cfg.p}};
  if (outcome.extension) {
    const auto& ext = *outcome.extension;
    res["extension"] = {{"matching", edges_json(h, ext.matching)},
                        {"revealed_edges", ext.reveals.size()},
                        {"complete", ext.complete},
                        {"warning", ext.warning},
                        {"remainder", to_json(ext.remainder)},
                        {"remainder_in_lattice", ext.remainder_in_lattice}};
  }
  if (cfg.verify_with_oracle) {
    auto hp = sparsify(h, cfg.p, cfg.seed);
    auto count = count_perfect_matchings(hp);
    bool consistent = outcome.verdict == Verdict::Accept ? count.count > 0 : count.count == 0;
    res["oracle"] = {{"perfect_matchings", count.count}, {"consistent", consistent}};
  }
  res.update(info);
  return res;
}

json curve_json(const McCurve& curve) {
  json pts = json::array();
  for (const auto& pt : curve.points)
    pts.push_back({{"p", pt.p},
                   {"trials", pt.trials},
                   {"successes", pt.successes},
                   {"rate", pt.rate()},
                   {"lower", pt.lower},
                   {"upper", pt.upper}});
  return pts;
}

json cmd_mc(const RunConfig& cfg) {
  auto grid = parse_grid(cfg.grid);
  if (cfg.trials == 0) throw UsageError("--trials must be positive");
  auto parsed = load_host(cfg);
  auto curve = mc_threshold(parsed.graph, grid, cfg.trials, cfg.seed, cfg.threads, cfg.z);
  if (!cfg.csv.empty()) write_file_atomic(cfg.csv, curve.csv());
  return json{{"points", curve_json(curve)},
              {"monotone_within_3_widths", curve.monotone_within(3.0)},
              {"csv_file", cfg.csv},
              {"z", cfg.z}};
}

json spread_json(const SpreadEstimate& est) {
  json ex = json::array();
  for (const auto& e : est.exceedances)
    ex.push_back({{"event", e.event}, {"size", e.size}, {"frequency", e.frequency}, {"bound", e.bound},
                  {"sigma", e.sigma}});
  return json{{"trials", est.trials},
              {"samples", est.samples},
              {"max_single_frequency", est.max_single_frequency},
              {"max_single_event", est.max_single_event},
              {"single_se", est.single_se},
              {"max_pair_frequency", est.max_pair_frequency},
              {"max_pair_event", est.max_pair_event},
              {"pair_se", est.pair_se},
              {"scale", est.scale},
              {"constant", est.constant},
              {"bound_q", est.bound_q},
              {"fitted_constant", est.fitted_constant},
              {"exceedances", ex}};
}

json cmd_cluster_sim(const RunConfig& cfg) {
  if (cfg.window != "wide" && cfg.window != "compact") throw UsageError("--window must be wide or compact");
  if (cfg.trials == 0) throw UsageError("--trials must be positive");
  auto parsed = load_host(cfg);
  const auto& h = parsed.graph;
  auto f = parse_pattern(cfg.pattern, h.k());
  json info = json::object();
  auto part = obtain_partition(cfg, h, f, info);
  const Rational mu = parse_rational("--mu", cfg.mu);
  auto profile = robust_profile(h, f, part, mu);
  auto lat = IntegerLattice::from_index_vectors(part.d(), profile.robust_vectors);
  int q = cfg.q;
  std::string q_source = "flag";
  if (q <= 0) {
    q = default_q(coset_group(lat, f.r()), true);
    q_source = "coset_group";
  }
  ClusterContext ctx(h, f, part, profile, q);

  PipelineParams params;
  params.c = cfg.cluster_size;
  if (cfg.window == "wide") {
    params.window = WindowMode::Wide;
  } else if (cfg.window == "compact") {
    params.window = WindowMode::Compact;
  } else {
    throw UsageError("--window must be wide or compact");
  }
  params.part_c = parse_rational("--part-c", cfg.part_c);
  params.eps = parse_rational("--eps", cfg.eps);
  params.beta = parse_rational("--beta", cfg.beta);
  params.delta = parse_rational("--delta", cfg.delta);
  params.retry_cap = cfg.retry_cap;
  if (cfg.trials == 0) throw UsageError("--trials must be positive");

  std::vector<PipelineResult> results(cfg.trials);
  std::vector<std::uint64_t> seeds(cfg.trials);
  for (std::size_t t = 0; t < cfg.trials; ++t) seeds[t] = split_seed(cfg.seed, t);
  parallel_trials(cfg.trials, cfg.threads, [&](std::size_t t) { results[t] = sample_f_factor(ctx, params, seeds[t]); });

  std::map<std::uint64_t, std::size_t> by_seed;
  for (std::size_t t = 0; t < cfg.trials; ++t) by_seed[seeds[t]] = t;
  std::size_t successes = 0, resamples = 0;
  bool conservation = true;
  std::map<std::string, std::size_t> stages;
  json runs = json::array();
  std::optional<std::size_t> first_success;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const auto& r = results[t];
    successes += r.success;
    resamples += static_cast<std::size_t>(r.resamples);
    conservation = conservation && r.conservation_ok();
    ++stages[stage_name(r.stage)];
    if (r.success && !first_success) first_success = t;
    runs.push_back({{"seed", seeds[t]}, {"success", r.success}, {"stage", stage_name(r.stage)},
                    {"message", r.message}, {"resamples", r.resamples}, {"conservation_ok", r.conservation_ok()}});
  }

  json res{{"runs", runs},
           {"successes", successes},
           {"trials", cfg.trials},
           {"stages", stages},
           {"resamples", resamples},
           {"conservation_ok", conservation},
           {"q", q},
           {"q_source", q_source},
           {"cluster_size", cfg.cluster_size},
           {"window", cfg.window},
           {"first_window", first_window_size(h.n(), cfg.cluster_size, params.window)},
           {"robust_vectors", to_json(profile.robust_vectors)},
           {"partition", partition_json(part)}};

  if (first_success) {
    const auto& r = results[*first_success];
    json plan{{"seed", seeds[*first_success]}};
    if (r.plan) {
      plan["sizes"] = r.plan->sizes;
      plan["common_size"] = r.plan->common_size;
      plan["t_sets"] = r.plan->t_sets;
      plan["l_sets"] = r.plan->l_sets;
      plan["dissolved"] = r.plan->dissolved;
    }
    if (r.corrected) {
      plan["order"] = r.corrected->order;
      plan["clusters"] = r.corrected->clusters;
      plan["imported"] = r.corrected->imported;
      plan["hamilton_cycle"] = r.corrected->hamilton.found;
      plan["ghouila_houri"] = r.corrected->hamilton.ghouila_houri;
      plan["warnings"] = r.corrected->warnings;
    }
    plan["factor"] = r.factor.copies;
    res["example_plan"] = plan;
  }

  const double n = static_cast<double>(h.n());
  SpreadOptions vopt;
  vopt.trials = cfg.trials;
  vopt.seed = cfg.seed;
  vopt.threads = 1;
  vopt.scale = n;
  vopt.constant = cfg.vertex_constant > 0 ? cfg.vertex_constant : static_cast<double>(cfg.cluster_size);
  auto lookup = [&](std::uint64_t seed) -> const PipelineResult& { return results[by_seed.at(seed)]; };
  res["vertex_spread"] = spread_json(estimate_vertex_spread(
      [&](std::uint64_t seed) -> std::optional<std::vector<int>> {
        const auto& r = lookup(seed);
        if (!r.success) return std::nullopt;
        return r.final_cluster_of;
      },
      h.n(), vopt));

  auto dens = density_params(f);
  SpreadOptions fopt = vopt;
  fopt.scale = std::pow(n, 1.0 / dens.m1.to_double());
  fopt.constant = cfg.factor_constant > 0 ? cfg.factor_constant : static_cast<double>(cfg.cluster_size);
  res["factor_spread"] = spread_json(estimate_factor_spread(
      [&](std::uint64_t seed) -> std::optional<PackingWitness> {
        const auto& r = lookup(seed);
        if (!r.success) return std::nullopt;
        return r.factor;
      },
      fopt));
  res["m1"] = dens.m1.str();
  res.update(info);
  return res;
}

json option_echo(const CLI::App* sub) {
  json opts = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_name();
    if (name.empty() || name == "--help" || name == "-h") continue;
    const auto& results = opt->results();
    if (opt->get_type_size() == 0) {
      opts[name] = opt->count();
    } else if (!results.empty()) {
      opts[name] = results.size() == 1 ? json(results.front()) : json(results);
    } else {
      opts[name] = opt->get_default_str();
    }
  }
  return opts;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  cfg.threads = default_thread_count();
  CLI::App app{"Perfect matchings and F-factors in dense hypergraphs and their sparsifications", "hypermatch"};
  app.set_version_flag("--version", library_version());
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub, bool needs_input) {
    auto* in = sub->add_option("-i,--input", cfg.input, "hypergraph file");
    if (needs_input) in->required();
    sub->add_option("-o,--output", cfg.output, "report path (stdout when omitted)");
    sub->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
    sub->add_flag("-v,--verbose", cfg.verbosity, "more diagnostics on stderr");
  };
  auto add_partition_constants = [&](CLI::App* sub) {
    sub->add_option("--partition", cfg.partition, "partition file (built when omitted)");
    sub->add_option("--mu", cfg.mu, "robustness constant")->capture_default_str();
    sub->add_option("--eps", cfg.eps, "robust-link constant")->capture_default_str();
    sub->add_option("--beta", cfg.beta, "reachability constant")->capture_default_str();
    sub->add_option("--alpha", cfg.alpha, "Lo-Markstrom constant (default 1/(k+1), or 1/k + gamma)");
    sub->add_option("--gamma", cfg.gamma, "codegree excess over n/k");
    sub->add_option("--merge-fraction", cfg.merge_fraction, "merge parts above this reachable fraction")
        ->capture_default_str();
    sub->add_option("--min-part-fraction", cfg.min_part_fraction, "c' (default 1/k)");
    sub->add_option("--stage1", cfg.stage1, "lm or exact")->capture_default_str();
    sub->add_flag("--no-relocate", cfg.no_relocate, "skip the relocation of low-link vertices");
  };

  auto* gen = app.add_subcommand("gen", "generate a hypergraph file");
  add_common(gen, false);
  gen->add_option("--kind", cfg.kind, "complete, barrier, random or perturbed-barrier")->capture_default_str();
  gen->add_option("--n", cfg.n, "number of vertices")->required();
  gen->add_option("--k", cfg.k, "uniformity")->capture_default_str();
  gen->add_option("--x", cfg.x, "barrier part size")->capture_default_str();
  gen->add_option("--edge-p", cfg.edge_p, "edge probability for random")->capture_default_str();
  gen->add_option("--flip", cfg.flip, "flip probability for perturbed-barrier")->capture_default_str();
  gen->add_option("--report", cfg.report, "JSON report path");

  auto* analyze = app.add_subcommand("analyze", "degree statistics of a hypergraph");
  add_common(analyze, true);

  auto* partition = app.add_subcommand("partition", "build and verify a reachability partition");
  add_common(partition, true);
  add_partition_constants(partition);
  partition->add_option("--partition-out", cfg.partition_out, "where to write the partition file");
  partition->add_option("--pattern", cfg.pattern, "edge, clique:r, path:r, cycle:r")->capture_default_str();

  auto* lattice = app.add_subcommand("lattice", "lattice basis, coset group and residues");
  add_common(lattice, false);
  add_partition_constants(lattice);
  lattice->add_option("--generators", cfg.generators, "rows like '3,0;1,2' instead of --input");
  lattice->add_option("--r", cfg.r, "r for the coset group with --generators")->capture_default_str();
  lattice->add_option("--pattern", cfg.pattern, "edge, clique:r, path:r, cycle:r")->capture_default_str();

  auto* decide = app.add_subcommand("decide", "run the sparsified perfect-matching decision procedure");
  add_common(decide, true);
  add_partition_constants(decide);
  decide->add_option("--p", cfg.p, "sparsification probability")->capture_default_str();
  decide->add_option("--eta", cfg.eta, "eta-robustness constant")->capture_default_str();
  decide->add_flag("--extend,!--no-extend", cfg.extend, "extend an accepted matching greedily");
  decide->add_flag("--verify-with-oracle", cfg.verify_with_oracle, "count perfect matchings of H_p");
  decide->add_option("--max-vectors", cfg.max_vectors, "vector-set size cap (default k-1)");

  auto* count = app.add_subcommand("count", "exact number of perfect matchings");
  add_common(count, true);

  auto* mc = app.add_subcommand("mc", "Monte Carlo perfect-matching probability of H_p");
  add_common(mc, true);
  mc->add_option("--grid", cfg.grid, "comma-separated p values")->capture_default_str();
  mc->add_option("--trials", cfg.trials, "trials per p")->capture_default_str();
  mc->add_option("--csv", cfg.csv, "CSV output path");
  mc->add_option("--z", cfg.z, "normal quantile for Wilson intervals")->capture_default_str();
  mc->add_option("--threads", cfg.threads, "worker threads (default from HYPERMATCH_THREADS)");

  auto* sim = app.add_subcommand("cluster-sim", "random clustering F-factor sampler with spread estimates");
  add_common(sim, true);
  add_partition_constants(sim);
  sim->add_option("--C", cfg.cluster_size, "cluster size C")->capture_default_str();
  sim->add_option("--window", cfg.window, "wide or compact")->capture_default_str();
  sim->add_option("--q", cfg.q, "residue budget q (default |Q|)");
  sim->add_option("--part-c", cfg.part_c, "minimum part fraction c")->capture_default_str();
  sim->add_option("--delta", cfg.delta, "degree baseline delta")->capture_default_str();
  sim->add_option("--retry-cap", cfg.retry_cap, "cluster resampling cap")->capture_default_str();
  sim->add_option("--trials", cfg.trials, "number of seeded runs")->capture_default_str();
  sim->add_option("--pattern", cfg.pattern, "edge, clique:r, path:r, cycle:r")->capture_default_str();
  sim->add_option("--vertex-constant", cfg.vertex_constant, "C' in the (C'/n)^s bound (default C)");
  sim->add_option("--factor-constant", cfg.factor_constant, "C'' in the (C''/n^(1/m1))^s bound (default C)");
  sim->add_option("--threads", cfg.threads, "worker threads (default from HYPERMATCH_THREADS)");

  // CLI11 consumes arguments from the back.
  std::vector<std::string> reversed;
  if (args.size() > 1) reversed.assign(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << library_version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (cfg.threads < 1) {
    err << "usage error: --threads must be at least 1\n";
    return kExitUsage;
  }

  const auto started = std::chrono::steady_clock::now();
  const std::string started_utc = utc_now();
  json report;
  try {
    json result;
    if (name == "gen") result = cmd_gen(cfg, out);
    else if (name == "analyze") result = cmd_analyze(cfg);
    else if (name == "partition") result = cmd_partition(cfg);
    else if (name == "lattice") result = cmd_lattice(cfg);
    else if (name == "decide") result = cmd_decide(cfg);
    else if (name == "count") result = cmd_count(cfg);
    else if (name == "mc") result = cmd_mc(cfg);
    else result = cmd_cluster_sim(cfg);

    report = std::move(result);
    report["schema_version"] = 1;
    report["command"] = name;
    report["version"] = library_version();
    report["config"] = {{"argv", std::vector<std::string>(args.begin() + 1, args.end())},
                        {"options", option_echo(sub)}};
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report["timestamp"] = {{"started_utc", started_utc}, {"wall_seconds", seconds}};
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }

  const std::string text = report.dump(2) + "\n";
  try {
    if (name == "gen") {
      if (!cfg.report.empty()) write_file_atomic(cfg.report, text);
      else if (cfg.verbosity > 0) err << text;
    } else if (cfg.output.empty()) {
      out << text;
    } else {
      write_file_atomic(cfg.output, text);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  if (cfg.verbosity > 0 && name != "gen") err << name << ": done\n";
  return kExitOk;
}

}  // namespace hypermatch
