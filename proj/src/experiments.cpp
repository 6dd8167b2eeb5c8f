#include "pcn/experiments.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pcn/csv.hpp"
#include "pcn/metrics.hpp"
#include "pcn/parallel.hpp"
#include "pcn/snapshot.hpp"

namespace pcn {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Centralization:
      return "centralization";
    case Experiment::Correlation:
      return "correlation";
    case Experiment::Replication:
      return "replication";
    case Experiment::Evolution:
      return "evolution";
    case Experiment::ShortTerm:
      return "short_term";
  }
  return "?";
}

Experiment experiment_from_string(const std::string& s) {
  if (s == "centralization") return Experiment::Centralization;
  if (s == "correlation") return Experiment::Correlation;
  if (s == "replication") return Experiment::Replication;
  if (s == "evolution") return Experiment::Evolution;
  if (s == "short_term") return Experiment::ShortTerm;
  throw SpecError("experiment: unknown experiment '" + s + "'");
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

namespace {

// A JSON value together with its path inside the spec, for error messages.
class Field {
 public:
  Field(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw SpecError((path_.empty() ? std::string("spec") : path_) + ": " + msg);
  }

  const std::string& path() const { return path_; }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail("expected an object");
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        Field(value, child_path(key)).fail("unknown field");
      }
    }
  }

  std::optional<Field> get(const char* key) const {
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return std::nullopt;
    return Field(*it, child_path(key));
  }

  Field require(const char* key) const {
    auto f = get(key);
    if (!f) Field(j_, child_path(key)).fail("required field is missing");
    return *f;
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }

  double non_negative() const {
    const double v = number();
    if (!(v >= 0)) fail("must be >= 0");
    return v;
  }

  std::uint64_t unsigned_int() const {
    if (!j_.is_number_unsigned()) fail("expected a non-negative integer");
    return j_.get<std::uint64_t>();
  }

  std::int64_t integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    if (j_.is_number_unsigned() &&
        j_.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      fail("integer out of range");
    }
    return j_.get<std::int64_t>();
  }

  std::size_t positive_size() const {
    const auto v = unsigned_int();
    if (v < 1) fail("must be >= 1");
    return static_cast<std::size_t>(v);
  }

  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }

  bool is_array() const { return j_.is_array(); }
  bool is_string() const { return j_.is_string(); }

  std::vector<Field> items() const {
    if (!j_.is_array()) fail("expected an array");
    std::vector<Field> out;
    for (std::size_t i = 0; i < j_.size(); ++i) {
      out.emplace_back(j_[i], path_ + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  // A scalar or a non-empty array of non-negative numbers.
  std::vector<double> sweep() const {
    if (!j_.is_array()) return {non_negative()};
    std::vector<double> out;
    for (const auto& f : items()) out.push_back(f.non_negative());
    if (out.empty()) fail("needs at least one value");
    return out;
  }

  template <typename Fn>
  auto convert(Fn&& fn) const {
    try {
      return fn(string());
    } catch (const SpecError&) {
      throw;
    } catch (const Error& e) {
      fail(e.what());
    }
  }

 private:
  std::string child_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
};

SamplerSpec parse_sampler(const Field& f) {
  SamplerSpec s;
  const std::string kind = f.require("kind").string();
  if (kind == "constant") {
    f.expect_object({"kind", "value", "zero_prob"});
    s = SamplerSpec::constant(f.require("value").non_negative());
  } else if (kind == "uniform") {
    f.expect_object({"kind", "min", "max", "zero_prob"});
    s = SamplerSpec::uniform(f.require("min").non_negative(), f.require("max").non_negative());
  } else if (kind == "lognormal") {
    f.expect_object({"kind", "median", "sigma", "min", "max", "zero_prob"});
    s = SamplerSpec::lognormal(f.require("median").number(), f.require("sigma").number(),
                               f.require("min").non_negative(), f.require("max").non_negative());
  } else if (kind == "choice") {
    f.expect_object({"kind", "values", "weights", "zero_prob"});
    s.kind = SamplerSpec::Kind::Choice;
    for (const auto& v : f.require("values").items()) s.values.push_back(v.non_negative());
    if (auto w = f.get("weights")) {
      for (const auto& v : w->items()) s.weights.push_back(v.non_negative());
    }
  } else {
    f.require("kind").fail("unknown sampler kind '" + kind + "'");
  }
  if (auto z = f.get("zero_prob")) s.zero_prob = z->number();
  try {
    s.validate("sampler");
  } catch (const Error& e) {
    f.fail(e.what());
  }
  return s;
}

SyntheticSpec parse_synthetic(const Field& f) {
  f.expect_object({"nodes", "m", "capacity", "fee_base", "fee_ppm", "hub_capacity_exponent"});
  SyntheticSpec s;
  if (auto v = f.get("nodes")) s.nodes = v->positive_size();
  if (auto v = f.get("m")) s.m = v->positive_size();
  if (s.nodes < s.m + 1) f.fail("needs nodes >= m + 1");
  if (auto v = f.get("capacity")) s.capacity = parse_sampler(*v);
  if (auto v = f.get("fee_base")) s.fees.base = parse_sampler(*v);
  if (auto v = f.get("fee_ppm")) s.fees.ppm = parse_sampler(*v);
  if (auto v = f.get("hub_capacity_exponent")) s.hub_capacity_exponent = v->number();
  return s;
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : base / p;
}

MoveKind parse_perturbation(const Field& f) {
  const auto kind = f.convert(move_kind_from_string);
  if (kind == MoveKind::ReplicateRatio || kind == MoveKind::ReplicateBc) {
    f.fail("perturbation must be random_fee, random_channel_single or random_channel_dual");
  }
  return kind;
}

void parse_routing(const Field& f, ExperimentSpec& spec) {
  f.expect_object({"algorithm", "alpha", "mu", "bc_mu", "fee_norm_max", "cap_norm_min",
                   "cap_norm_max", "enforce_balances", "fee_cap"});
  auto& r = spec.routing;
  if (auto v = f.get("algorithm")) r.algorithm = v->convert(algorithm_from_string);
  const char* sweep_key = r.algorithm == Algorithm::GreedyAlpha   ? "alpha"
                          : r.algorithm == Algorithm::PickhardtMu ? "mu"
                                                                  : nullptr;
  for (const char* key : {"alpha", "mu"}) {
    auto v = f.get(key);
    if (!v) continue;
    if (sweep_key == nullptr || std::string(key) != sweep_key) {
      v->fail("not used by routing algorithm " + to_string(r.algorithm));
    }
    spec.parameters = v->sweep();
  }
  if (auto v = f.get("bc_mu")) spec.bc_mu = v->non_negative();
  if (auto v = f.get("fee_norm_max")) r.fee_norm_max = v->integer();
  if (auto v = f.get("cap_norm_min")) r.cap_norm_min = v->integer();
  if (auto v = f.get("cap_norm_max")) r.cap_norm_max = v->integer();
  if (auto v = f.get("enforce_balances")) r.enforce_balances = v->boolean();
  if (auto v = f.get("fee_cap")) r.fee_cap = v->integer();
  try {
    r.validate();
  } catch (const Error& e) {
    f.fail(e.what());
  }
}

}  // namespace

ExperimentSpec parse_spec(const std::string& text, const fs::path& base_dir,
                          const SpecOverrides& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("spec: malformed JSON: ") + e.what());
  }
  const Field root(doc, "");
  root.expect_object({"experiment", "seed", "graph", "analysis", "traffic", "routing",
                      "replication", "evolution", "short_term", "output"});

  ExperimentSpec spec;
  spec.sha256 = sha256_hex(text);
  if (auto v = root.get("experiment")) {
    spec.experiment = v->convert(experiment_from_string);
    if (overrides.experiment && *overrides.experiment != spec.experiment) {
      v->fail("spec is for '" + to_string(spec.experiment) + "', not '" +
              to_string(*overrides.experiment) + "'");
    }
  } else if (overrides.experiment) {
    spec.experiment = *overrides.experiment;
  } else {
    root.require("experiment");
  }

  if (overrides.seed) {
    spec.seed = *overrides.seed;
  } else if (auto v = root.get("seed")) {
    spec.seed = v->unsigned_int();
  } else {
    root.require("seed");
  }

  {
    const Field g = root.require("graph");
    g.expect_object({"snapshot", "synthetic"});
    auto snap = g.get("snapshot");
    auto synth = g.get("synthetic");
    if (static_cast<bool>(snap) == static_cast<bool>(synth)) {
      g.fail("give exactly one of snapshot or synthetic");
    }
    if (snap) {
      const fs::path p = resolve(base_dir, snap->string());
      if (!fs::is_regular_file(p)) snap->fail("file not found: " + p.string());
      spec.graph = SnapshotSource{p};
    } else {
      spec.graph = parse_synthetic(*synth);
    }
  }

  if (auto a = root.get("analysis")) {
    a->expect_object({"top_k", "bucket_size"});
    if (auto v = a->get("top_k")) spec.top_k = v->positive_size();
    if (auto v = a->get("bucket_size")) spec.bucket_size = v->positive_size();
  }

  if (auto t = root.get("traffic")) {
    t->expect_object({"distributions", "amount", "count"});
    if (auto v = t->get("distributions")) {
      spec.distributions.clear();
      if (v->is_string()) {
        spec.distributions.push_back(v->convert(distribution_from_string));
      } else {
        for (const auto& d : v->items()) spec.distributions.push_back(d.convert(distribution_from_string));
      }
      if (spec.distributions.empty()) v->fail("needs at least one distribution");
    }
    if (auto v = t->get("amount")) {
      spec.amount = v->integer();
      if (spec.amount < 1) v->fail("must be >= 1");
    }
    if (auto v = t->get("count")) spec.count = v->positive_size();
  }

  spec.routing.algorithm = Algorithm::GreedyAlpha;
  if (auto r = root.get("routing")) parse_routing(*r, spec);
  if (spec.parameters.empty()) {
    if (spec.routing.algorithm == Algorithm::GreedyAlpha) spec.parameters = {0.001, 0.1};
    if (spec.routing.algorithm == Algorithm::PickhardtMu) spec.parameters = {10, 100, 1000};
  }

  if (auto r = root.get("replication")) {
    r->expect_object({"actors", "targets", "mode", "epsilon", "zeta", "iota"});
    auto& s = spec.replication;
    if (auto v = r->get("actors")) s.actors = v->positive_size();
    if (auto v = r->get("targets")) s.targets = v->positive_size();
    if (auto v = r->get("mode")) {
      const auto mode = v->string();
      if (mode == "highest_ratio") {
        s.mode = ReplicationMode::HighestRatio;
      } else if (mode == "highest_bc") {
        s.mode = ReplicationMode::HighestBc;
      } else {
        v->fail("expected highest_ratio or highest_bc");
      }
    }
    if (auto v = r->get("epsilon")) s.params.epsilon = v->integer();
    if (auto v = r->get("zeta")) s.params.zeta = v->integer();
    if (auto v = r->get("iota")) s.params.iota = v->integer();
    try {
      s.params.validate();
    } catch (const Error& e) {
      r->fail(e.what());
    }
  }

  if (auto e = root.get("evolution")) {
    e->expect_object({"rounds", "perturbation", "actor_set", "record_degree_every", "fee_scale",
                      "fee_limit", "fee_cap"});
    auto& s = spec.evolution;
    if (auto v = e->get("rounds")) s.rounds = v->positive_size();
    if (auto v = e->get("perturbation")) s.perturbation = parse_perturbation(*v);
    if (auto v = e->get("actor_set")) {
      if (v->is_string()) {
        if (v->string() != "all") v->fail("expected \"all\" or {\"random_subset\": n}");
      } else {
        v->expect_object({"random_subset"});
        s.random_subset = v->require("random_subset").unsigned_int();
      }
    }
    if (auto v = e->get("record_degree_every")) s.record_degree_every = v->unsigned_int();
    if (auto v = e->get("fee_scale")) {
      s.fee_scale = v->number();
      if (!(s.fee_scale > 0)) v->fail("must be > 0");
    }
    if (auto v = e->get("fee_limit")) {
      s.fee_limit = v->integer();
      if (s.fee_limit < 1) v->fail("must be >= 1");
    }
    if (auto v = e->get("fee_cap")) {
      s.fee_cap = v->integer();
      if (s.fee_cap < 0) v->fail("must be >= 0");
    }
  }

  if (auto e = root.get("short_term")) {
    e->expect_object({"subset_size", "perturbation", "fee_scale", "fee_limit"});
    auto& s = spec.short_term;
    if (auto v = e->get("subset_size")) s.subset_size = v->unsigned_int();
    if (auto v = e->get("perturbation")) s.perturbation = parse_perturbation(*v);
    if (auto v = e->get("fee_scale")) {
      s.fee_scale = v->number();
      if (!(s.fee_scale > 0)) v->fail("must be > 0");
    }
    if (auto v = e->get("fee_limit")) {
      s.fee_limit = v->integer();
      if (s.fee_limit < 1) v->fail("must be >= 1");
    }
  }

  if (auto v = root.get("output")) spec.output = resolve(base_dir, v->string());

  const bool needs_bc_mu =
      spec.experiment == Experiment::Correlation ||
      (spec.experiment == Experiment::Replication &&
       spec.replication.mode == ReplicationMode::HighestBc);
  if (needs_bc_mu && spec.routing.algorithm != Algorithm::PickhardtMu && !spec.bc_mu) {
    throw SpecError("routing.bc_mu: required unless routing.algorithm is pickhardt_mu");
  }
  if (const auto* synth = std::get_if<SyntheticSpec>(&spec.graph)) {
    const std::size_t pool = std::min(spec.top_k, synth->nodes);
    if (spec.evolution.random_subset && *spec.evolution.random_subset > pool) {
      throw SpecError("evolution.actor_set.random_subset: exceeds the analysis set of " +
                      std::to_string(pool) + " nodes");
    }
    if (spec.experiment == Experiment::ShortTerm && spec.short_term.subset_size > pool) {
      throw SpecError("short_term.subset_size: exceeds the analysis set of " +
                      std::to_string(pool) + " nodes");
    }
  }
  return spec;
}

ExperimentSpec load_spec(const fs::path& path, const SpecOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpecError("spec: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str(), path.parent_path(), overrides);
}

NetworkGraph build_graph(const ExperimentSpec& spec) {
  if (const auto* snap = std::get_if<SnapshotSource>(&spec.graph)) return load_snapshot(snap->path);
  return generate_synthetic(std::get<SyntheticSpec>(spec.graph), spec.seed);
}

namespace {

struct Combo {
  std::optional<double> parameter;
  Distribution distribution;
  RoutingConfig routing;
  std::string label;  // column header form, e.g. "mu=10|uniform"
  std::string stem;   // file-name form, e.g. "mu-10_uniform"
};

std::string parameter_name(Algorithm a) {
  return a == Algorithm::GreedyAlpha ? "alpha" : "mu";
}

std::vector<Combo> combos(const ExperimentSpec& spec) {
  std::vector<std::optional<double>> params;
  if (spec.routing.algorithm == Algorithm::FeeOnly) {
    params.push_back(std::nullopt);
  } else {
    params.assign(spec.parameters.begin(), spec.parameters.end());
  }
  std::vector<Combo> out;
  for (const auto& p : params) {
    for (Distribution d : spec.distributions) {
      Combo c{p, d, spec.routing, {}, {}};
      std::string head = "fee_only";
      std::string file_head = "fee_only";
      if (p) {
        (spec.routing.algorithm == Algorithm::GreedyAlpha ? c.routing.alpha : c.routing.mu) = *p;
        head = parameter_name(spec.routing.algorithm) + "=" + format_double(*p);
        file_head = parameter_name(spec.routing.algorithm) + "-" + format_double(*p);
      }
      c.label = head + "|" + to_string(d);
      c.stem = file_head + "_" + to_string(d);
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<NodeIndex> analysis_set(const ExperimentSpec& spec, const NetworkGraph& g) {
  return top_k_by_capacity(g, std::min(spec.top_k, g.node_count()));
}

TrafficConfig traffic_for(const ExperimentSpec& spec, Distribution d) {
  TrafficConfig t;
  t.distribution = d;
  t.amount = spec.amount;
  t.count = spec.count;
  // Every combination sees the same payment stream.
  Rng rng = make_rng(spec.seed, {0x7a});
  t.seed = rng();
  return t;
}

std::string provenance(const ExperimentSpec& spec, const NetworkGraph& g) {
  return "# spec_sha256=" + spec.sha256 + " seed=" + std::to_string(spec.seed) +
         " generation=" + std::to_string(g.generation()) + "\n";
}

OutputFile csv_file(std::string name, const ExperimentSpec& spec, const NetworkGraph& g,
                    const std::string& body) {
  return {std::move(name), provenance(spec, g) + body};
}

BatchResult simulate(const NetworkGraph& g, const TrafficConfig& t, const RoutingConfig& r) {
  NetworkGraph sim = g;
  return run_batch(sim, t, r);
}

}  // namespace

std::vector<OutputFile> cmd_centralization(const ExperimentSpec& spec) {
  const NetworkGraph g = build_graph(spec);
  const auto analysis = analysis_set(spec, g);
  std::vector<OutputFile> out;
  std::ostringstream summary;
  summary << "combination,payments,attempts,mean_fee_msat,nodes,top_bucket_ratio,"
             "bottom_bucket_ratio,gap,flag\n";
  for (const auto& c : combos(spec)) {
    const auto batch = simulate(g, traffic_for(spec, c.distribution), c.routing);
    const auto report = compute_ratios(batch.revenue, g, analysis, spec.bucket_size);

    std::ostringstream ratios;
    ratios << "rank,node,tau_msat,revenue_msat,ratio\n";
    for (std::size_t i = 0; i < report.nodes.size(); ++i) {
      const auto& e = report.nodes[i];
      ratios << i + 1 << ',' << g.node_id(e.node) << ',' << e.tau << ',' << e.revenue << ','
             << format_double(e.ratio) << '\n';
    }
    std::ostringstream buckets;
    buckets << "bucket,size,mean_ratio\n";
    for (const auto& b : report.buckets) {
      buckets << b.index << ',' << b.size << ',' << format_double(b.mean_ratio) << '\n';
    }
    out.push_back(csv_file("ratios_" + c.stem + ".csv", spec, g, ratios.str()));
    out.push_back(csv_file("buckets_" + c.stem + ".csv", spec, g, buckets.str()));

    const bool flagged = c.routing.algorithm == Algorithm::PickhardtMu && c.parameter &&
                         *c.parameter == 0;
    double top = std::nan(""), bottom = std::nan("");
    if (!report.buckets.empty()) {
      top = report.buckets.front().mean_ratio;
      bottom = report.buckets.back().mean_ratio;
    }
    summary << c.label << ',' << batch.records.size() << ',' << batch.attempts << ','
            << format_double(batch.mean_fee()) << ',' << report.nodes.size() << ','
            << format_double(top) << ',' << format_double(bottom) << ','
            << format_double(top - bottom) << ',' << (flagged ? "high_variance" : "") << '\n';
  }
  out.push_back(csv_file("summary.csv", spec, g, summary.str()));
  return out;
}

std::vector<OutputFile> cmd_correlation(const ExperimentSpec& spec) {
  const NetworkGraph g = build_graph(spec);
  const auto analysis = analysis_set(spec, g);
  const auto cols = combos(spec);

  struct Row {
    std::string measure;
    std::string description;
    std::vector<double> rho;
  };
  const std::vector<std::pair<Measure, std::string>> measures{
      {Measure::NodeCapacity, "local balance total tau"},
      {Measure::Degree, "channel count"},
      {Measure::Closeness, "hop closeness"},
      {Measure::Eigenvector, "adjacency eigenvector"},
      {Measure::BcUnit, "betweenness with unit weights"},
      {Measure::BcFee, "betweenness with weight fee_ppm"},
      {Measure::BcInvCap, "betweenness with weight 1/capacity"},
      {Measure::BcCombined, "betweenness with weight 1.5e10/capacity + mu*fee_ppm"},
  };
  std::map<Measure, CentralityVector> fixed;
  for (const auto& [m, desc] : measures) {
    if (m != Measure::BcCombined) fixed.emplace(m, centrality(g, m));
  }
  std::map<double, CentralityVector> combined;
  auto combined_for = [&](const Combo& c) -> const CentralityVector& {
    const double mu = c.routing.algorithm == Algorithm::PickhardtMu ? *c.parameter : *spec.bc_mu;
    auto it = combined.find(mu);
    if (it == combined.end()) it = combined.emplace(mu, betweenness(g, Measure::BcCombined, mu)).first;
    return it->second;
  };

  std::vector<Row> rows;
  for (const auto& [m, desc] : measures) rows.push_back({to_string(m), desc, {}});
  rows.push_back({"ratio", "self-correlation check", {}});

  for (const auto& c : cols) {
    const auto batch = simulate(g, traffic_for(spec, c.distribution), c.routing);
    const auto report = compute_ratios(batch.revenue, g, analysis, spec.bucket_size);
    std::vector<double> ratio;
    for (const auto& e : report.nodes) ratio.push_back(e.ratio);
    auto rho = [&](const CentralityVector& v) {
      std::vector<double> score;
      for (const auto& e : report.nodes) score.push_back(v.score[e.node]);
      try {
        return spearman(ratio, score);
      } catch (const MetricsError&) {
        return std::nan("");
      }
    };
    for (std::size_t i = 0; i < measures.size(); ++i) {
      const Measure m = measures[i].first;
      rows[i].rho.push_back(rho(m == Measure::BcCombined ? combined_for(c) : fixed.at(m)));
    }
    try {
      rows.back().rho.push_back(spearman(ratio, ratio));
    } catch (const MetricsError&) {
      rows.back().rho.push_back(std::nan(""));
    }
  }

  std::ostringstream os;
  os << "measure,description";
  for (const auto& c : cols) os << ',' << c.label;
  os << '\n';
  for (const auto& r : rows) {
    os << r.measure << ',' << r.description;
    for (double v : r.rho) os << ',' << format_double(v);
    os << '\n';
  }
  return {csv_file("correlation.csv", spec, g, os.str())};
}

std::vector<OutputFile> cmd_replication(const ExperimentSpec& spec) {
  const NetworkGraph g = build_graph(spec);
  const auto analysis = analysis_set(spec, g);
  const auto& settings = spec.replication;
  std::vector<OutputFile> out;
  std::ostringstream summary;
  summary << "combination,mode,actors,runs,improved,worse,unchanged\n";

  const auto all_combos = combos(spec);
  for (std::size_t ci = 0; ci < all_combos.size(); ++ci) {
    const auto& c = all_combos[ci];
    const TrafficConfig traffic = traffic_for(spec, c.distribution);
    const auto base = simulate(g, traffic, c.routing);
    const auto report = compute_ratios(base.revenue, g, analysis, spec.bucket_size);

    std::ostringstream actors_csv;
    actors_csv << "node,tau_msat,revenue_msat,status\n";
    std::vector<NodeIndex> actors;
    for (NodeIndex n : analysis) {
      if (actors.size() >= settings.actors) break;
      const Msat rev = base.revenue_of(n);
      actors_csv << g.node_id(n) << ',' << g.tau(n) << ',' << rev << ','
                 << (rev > 0 ? "selected" : "excluded_zero_revenue") << '\n';
      if (rev > 0) actors.push_back(n);
    }

    std::vector<NodeIndex> ranking;
    if (settings.mode == ReplicationMode::HighestRatio) {
      ranking = ratio_ranking(g, report);
    } else {
      const double mu = c.routing.algorithm == Algorithm::PickhardtMu ? *c.parameter : *spec.bc_mu;
      ranking = bc_ranking(g, analysis, mu);
    }

    struct Run {
      NodeIndex actor, target;
      Msat before = 0, after = 0;
      std::size_t closed = 0, opened = 0;
    };
    std::vector<Run> runs;
    for (NodeIndex u : actors) {
      for (NodeIndex v : select_replication_targets(g, u, ranking, settings.targets)) {
        runs.push_back({u, v, base.revenue_of(u)});
      }
    }
    // Each run starts from the pristine graph and replays the baseline's
    // payment stream.
    parallel_for(runs.size(), [&](std::size_t i) {
      Run& r = runs[i];
      NetworkGraph copy = g;
      Rng rng = make_rng(spec.seed, {0x4e9, ci, r.actor, r.target});
      const auto move = replicate(copy, r.actor, r.target, settings.params, rng,
                                  settings.mode == ReplicationMode::HighestRatio
                                      ? MoveKind::ReplicateRatio
                                      : MoveKind::ReplicateBc);
      r.closed = move.closed.size();
      r.opened = move.opened.size();
      NetworkGraph sim = copy;
      r.after = run_batch(sim, traffic, c.routing).revenue_of(r.actor);
    });

    std::ostringstream runs_csv;
    runs_csv << "actor,target,actor_tau_msat,target_tau_msat,revenue_before_msat,"
                "revenue_after_msat,delta_msat,closed,opened\n";
    std::size_t improved = 0, worse = 0;
    for (const auto& r : runs) {
      runs_csv << g.node_id(r.actor) << ',' << g.node_id(r.target) << ',' << g.tau(r.actor) << ','
               << g.tau(r.target) << ',' << r.before << ',' << r.after << ',' << r.after - r.before
               << ',' << r.closed << ',' << r.opened << '\n';
      improved += r.after > r.before;
      worse += r.after < r.before;
    }
    out.push_back(csv_file("replication_" + c.stem + ".csv", spec, g, runs_csv.str()));
    out.push_back(csv_file("replication_actors_" + c.stem + ".csv", spec, g, actors_csv.str()));
    summary << c.label << ','
            << (settings.mode == ReplicationMode::HighestRatio ? "highest_ratio" : "highest_bc")
            << ',' << actors.size() << ',' << runs.size() << ',' << improved << ',' << worse << ','
            << runs.size() - improved - worse << '\n';
  }
  out.push_back(csv_file("summary.csv", spec, g, summary.str()));
  return out;
}

std::vector<OutputFile> cmd_evolution(const ExperimentSpec& spec) {
  const NetworkGraph pristine = build_graph(spec);
  const auto analysis = analysis_set(spec, pristine);
  std::vector<OutputFile> out;
  for (const auto& c : combos(spec)) {
    NetworkGraph g = pristine;
    EvolutionConfig cfg;
    cfg.rounds = spec.evolution.rounds;
    cfg.perturbation = spec.evolution.perturbation;
    cfg.analysis_set = analysis;
    cfg.subset_size = spec.evolution.random_subset;
    cfg.traffic = traffic_for(spec, c.distribution);
    cfg.routing = c.routing;
    cfg.fee_cap = spec.evolution.fee_cap;
    cfg.record_degree_every = spec.evolution.record_degree_every;
    cfg.fee_scale = spec.evolution.fee_scale;
    cfg.fee_limit = spec.evolution.fee_limit;
    cfg.seed = spec.seed;
    const auto rounds = run_evolution(g, cfg);
    out.push_back(csv_file("time_series_" + c.stem + ".csv", spec, g, time_series_csv(rounds)));
    if (cfg.record_degree_every > 0) {
      out.push_back(
          csv_file("degree_histogram_" + c.stem + ".csv", spec, g, degree_histogram_csv(rounds)));
    }
    out.push_back({"moves_" + c.stem + ".jsonl", moves_jsonl(g, cfg.perturbation, rounds)});
    out.push_back({"final_snapshot_" + c.stem + ".json", export_snapshot(g)});
  }
  return out;
}

std::vector<OutputFile> cmd_short_term(const ExperimentSpec& spec) {
  const NetworkGraph pristine = build_graph(spec);
  const auto analysis = analysis_set(spec, pristine);
  std::vector<OutputFile> out;
  std::ostringstream summary;
  summary << "combination,subset,routing_before,changed,increased,decreased,mean_fee_before_msat,"
             "mean_fee_after_msat\n";
  for (const auto& c : combos(spec)) {
    NetworkGraph g = pristine;
    ShortTermConfig cfg;
    cfg.subset_size = spec.short_term.subset_size;
    cfg.analysis_set = analysis;
    cfg.perturbation = spec.short_term.perturbation;
    cfg.fee_scale = spec.short_term.fee_scale;
    cfg.fee_limit = spec.short_term.fee_limit;
    Rng rng = make_rng(spec.seed, {0x5407});
    const auto result = run_short_term(g, cfg, traffic_for(spec, c.distribution), c.routing, rng);

    std::ostringstream rows;
    rows << "node,tau_before_msat,tau_after_msat,revenue_before_msat,revenue_after_msat,"
            "ratio_before,ratio_after,move_applied\n";
    std::size_t routing_before = 0, changed = 0, increased = 0, decreased = 0;
    for (std::size_t i = 0; i < result.subset.size(); ++i) {
      const NodeIndex n = result.subset[i];
      const RatioEntry* b = result.before.find(n);
      const RatioEntry* a = result.after.find(n);
      const double rb = b ? b->ratio : std::nan("");
      const double ra = a ? a->ratio : std::nan("");
      rows << pristine.node_id(n) << ',' << pristine.tau(n) << ',' << g.tau(n) << ','
           << (b ? b->revenue : 0) << ',' << (a ? a->revenue : 0) << ',' << format_double(rb)
           << ',' << format_double(ra) << ',' << (result.moves[i].applied ? "true" : "false")
           << '\n';
      if (b && b->revenue > 0) ++routing_before;
      if (a && b && a->ratio != b->ratio) {
        ++changed;
        increased += a->ratio > b->ratio;
        decreased += a->ratio < b->ratio;
      }
    }
    out.push_back(csv_file("short_term_" + c.stem + ".csv", spec, g, rows.str()));
    summary << c.label << ',' << result.subset.size() << ',' << routing_before << ',' << changed
            << ',' << increased << ',' << decreased << ',' << format_double(result.mean_fee_before)
            << ',' << format_double(result.mean_fee_after) << '\n';
  }
  out.push_back(csv_file("summary.csv", spec, pristine, summary.str()));
  return out;
}

std::vector<OutputFile> run_experiment(const ExperimentSpec& spec) {
  switch (spec.experiment) {
    case Experiment::Centralization:
      return cmd_centralization(spec);
    case Experiment::Correlation:
      return cmd_correlation(spec);
    case Experiment::Replication:
      return cmd_replication(spec);
    case Experiment::Evolution:
      return cmd_evolution(spec);
    case Experiment::ShortTerm:
      return cmd_short_term(spec);
  }
  throw Error("unknown experiment");
}

void write_outputs(const fs::path& dir, const std::vector<OutputFile>& files) {
  fs::create_directories(dir);
  for (const auto& f : files) {
    std::ofstream os(dir / f.name, std::ios::binary | std::ios::trunc);
    os << f.content;
    if (!os) throw Error("cannot write " + (dir / f.name).string());
  }
}

}  // namespace pcn
