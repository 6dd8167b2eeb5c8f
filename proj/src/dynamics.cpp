#include "pcn/dynamics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "pcn/csv.hpp"

namespace pcn {

namespace {

std::vector<NodeIndex> analysis_nodes(const NetworkGraph& g, const std::vector<NodeIndex>& set) {
  if (!set.empty()) return set;
  std::vector<NodeIndex> all(g.node_count());
  std::iota(all.begin(), all.end(), NodeIndex{0});
  return all;
}

std::vector<NodeIndex> pick_subset(std::vector<NodeIndex> pool, std::size_t k, Rng& rng) {
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(k, pool.size()));
  std::sort(pool.begin(), pool.end());
  return pool;
}

StrategyMove apply_move(NetworkGraph& g, MoveKind kind, NodeIndex u, Rng& rng, MoveLocks* locks,
                        double scale, Msat limit, FeeScope scope) {
  switch (kind) {
    case MoveKind::RandomFee:
      return perturb_random_fee(g, u, scale, limit, rng, scope, locks);
    case MoveKind::RandomChannelSingle:
      return perturb_random_channel_single(g, u, rng, locks);
    case MoveKind::RandomChannelDual:
      return perturb_random_channel_dual(g, u, rng, locks);
    default:
      throw DynamicsError("perturbation must be random_fee, random_channel_single or "
                          "random_channel_dual, got " + to_string(kind));
  }
}

void check_perturbation(MoveKind kind, double scale, Msat limit) {
  if (kind == MoveKind::ReplicateRatio || kind == MoveKind::ReplicateBc) {
    throw DynamicsError("perturbation must be random_fee, random_channel_single or "
                        "random_channel_dual, got " + to_string(kind));
  }
  if (!(scale > 0)) throw DynamicsError("fee_scale must be > 0");
  if (limit < 1) throw DynamicsError("fee_limit must be >= 1");
}

}  // namespace

void EvolutionConfig::validate(const NetworkGraph& g) const {
  if (rounds < 1) throw DynamicsError("rounds must be >= 1");
  check_perturbation(perturbation, fee_scale, fee_limit);
  for (NodeIndex n : analysis_set) {
    if (n >= g.node_count()) throw DynamicsError("analysis_set refers to an unknown node");
  }
  const std::size_t pool = analysis_set.empty() ? g.node_count() : analysis_set.size();
  if (subset_size && *subset_size > pool) {
    throw DynamicsError("actor subset of " + std::to_string(*subset_size) +
                        " exceeds the analysis set of " + std::to_string(pool));
  }
  if (fee_cap < 0) throw DynamicsError("fee_cap must be non-negative");
  if (!accept) throw DynamicsError("accept rule is empty");
  traffic.validate();
  routing.validate();
}

std::size_t RoundReport::accepted_count() const {
  return static_cast<std::size_t>(
      std::count_if(actors.begin(), actors.end(), [](const ActorOutcome& a) { return a.accepted; }));
}

std::size_t RoundReport::reverted_count() const {
  return static_cast<std::size_t>(std::count_if(
      actors.begin(), actors.end(), [](const ActorOutcome& a) { return a.applied && !a.accepted; }));
}

std::map<std::size_t, std::size_t> degree_histogram(const NetworkGraph& g) {
  std::map<std::size_t, std::size_t> h;
  for (NodeIndex n = 0; n < g.node_count(); ++n) ++h[g.degree(n)];
  return h;
}

std::vector<RoundReport> run_evolution(NetworkGraph& g, const EvolutionConfig& cfg) {
  cfg.validate(g);
  RoutingConfig routing = cfg.routing;
  routing.fee_cap = cfg.fee_cap;

  std::vector<NodeIndex> actors = analysis_nodes(g, cfg.analysis_set);
  if (cfg.subset_size) {
    Rng pick = make_rng(cfg.seed, {0xac7, 0});
    actors = pick_subset(std::move(actors), *cfg.subset_size, pick);
  }

  auto evaluate = [&](std::uint64_t traffic_seed) {
    NetworkGraph sim = g;
    TrafficConfig traffic = cfg.traffic;
    traffic.seed = traffic_seed;
    return run_batch(sim, traffic, routing);
  };
  auto wants_histogram = [&](std::size_t round) {
    return cfg.record_degree_every > 0 && round % cfg.record_degree_every == 0;
  };

  std::vector<RoundReport> out;
  out.reserve(cfg.rounds + 1);

  std::map<NodeIndex, Msat> kept;
  {
    Rng rng = make_rng(cfg.seed, {0xe70, 0});
    const BatchResult base = evaluate(rng());
    for (NodeIndex a : actors) kept[a] = base.revenue_of(a);
    RoundReport r;
    r.mean_fee_paid = base.mean_fee();
    if (wants_histogram(0)) r.degree_histogram = degree_histogram(g);
    out.push_back(std::move(r));
  }

  for (std::size_t round = 1; round <= cfg.rounds; ++round) {
    Rng rng = make_rng(cfg.seed, {0xe70, round});
    std::vector<NodeIndex> order = actors;
    std::shuffle(order.begin(), order.end(), rng);

    MoveLocks locks;
    std::vector<StrategyMove> moves;
    moves.reserve(order.size());
    for (NodeIndex u : order) {
      moves.push_back(apply_move(g, cfg.perturbation, u, rng, &locks, cfg.fee_scale, cfg.fee_limit,
                                 FeeScope::OneChannel));
    }

    const BatchResult batch = evaluate(rng());

    RoundReport r;
    r.round = round;
    r.mean_fee_paid = batch.mean_fee();
    std::vector<std::size_t> rejected;
    for (std::size_t i = 0; i < moves.size(); ++i) {
      ActorOutcome o;
      o.actor = moves[i].actor;
      o.applied = moves[i].applied;
      o.note = moves[i].note;
      o.revenue_before = kept[o.actor];
      o.revenue_after = batch.revenue_of(o.actor);
      if (o.applied) {
        o.accepted = cfg.accept(o.revenue_before, o.revenue_after);
        if (o.accepted) {
          kept[o.actor] = o.revenue_after;
        } else {
          rejected.push_back(i);
        }
      }
      r.actors.push_back(std::move(o));
    }
    for (auto it = rejected.rbegin(); it != rejected.rend(); ++it) moves[*it].undo(g);
    if (wants_histogram(round)) r.degree_histogram = degree_histogram(g);
    out.push_back(std::move(r));
  }
  return out;
}

ShortTermResult run_short_term(NetworkGraph& g, const ShortTermConfig& cfg,
                               const TrafficConfig& traffic, const RoutingConfig& routing, Rng& rng) {
  check_perturbation(cfg.perturbation, cfg.fee_scale, cfg.fee_limit);
  const auto pool = analysis_nodes(g, cfg.analysis_set);
  if (cfg.subset_size > pool.size()) {
    throw DynamicsError("subset of " + std::to_string(cfg.subset_size) +
                        " exceeds the analysis set of " + std::to_string(pool.size()));
  }

  ShortTermResult out;
  const auto by_capacity = top_k_by_capacity(g, g.node_count());
  {
    auto chosen = pick_subset(pool, cfg.subset_size, rng);
    for (NodeIndex n : by_capacity) {
      if (std::binary_search(chosen.begin(), chosen.end(), n)) out.subset.push_back(n);
    }
  }

  NetworkGraph before_sim = g;
  const BatchResult before = run_batch(before_sim, traffic, routing);
  out.before = compute_ratios(before.revenue, g, out.subset, std::max<std::size_t>(1, out.subset.size()));
  out.mean_fee_before = before.mean_fee();

  for (NodeIndex u : out.subset) {
    out.moves.push_back(apply_move(g, cfg.perturbation, u, rng, nullptr, cfg.fee_scale,
                                   cfg.fee_limit, FeeScope::AllChannels));
  }

  NetworkGraph after_sim = g;
  const BatchResult after = run_batch(after_sim, traffic, routing);
  out.after = compute_ratios(after.revenue, g, out.subset, std::max<std::size_t>(1, out.subset.size()));
  out.mean_fee_after = after.mean_fee();
  return out;
}

std::string time_series_csv(std::span<const RoundReport> rounds) {
  std::ostringstream os;
  os << "round,mean_fee_msat,accepted_count,reverted_count\n";
  for (const auto& r : rounds) {
    os << r.round << ',' << format_double(r.mean_fee_paid) << ',' << r.accepted_count() << ','
       << r.reverted_count() << '\n';
  }
  return os.str();
}

std::string degree_histogram_csv(std::span<const RoundReport> rounds) {
  std::ostringstream os;
  os << "round,degree,count\n";
  for (const auto& r : rounds) {
    if (!r.degree_histogram) continue;
    for (const auto& [degree, count] : *r.degree_histogram) {
      os << r.round << ',' << degree << ',' << count << '\n';
    }
  }
  return os.str();
}

std::string moves_jsonl(const NetworkGraph& g, MoveKind kind, std::span<const RoundReport> rounds) {
  std::string out;
  for (const auto& r : rounds) {
    for (const auto& a : r.actors) {
      nlohmann::ordered_json j;
      j["round"] = r.round;
      j["actor"] = g.node_id(a.actor);
      j["kind"] = to_string(kind);
      j["accepted"] = a.accepted;
      j["revenue_before_msat"] = a.revenue_before;
      j["revenue_after_msat"] = a.revenue_after;
      if (!a.applied) j["note"] = a.note;
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

}  // namespace pcn
