#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcn/metrics.hpp"
#include "pcn/strategies.hpp"
#include "pcn/traffic.hpp"

namespace pcn {

class DynamicsError : public Error {
 public:
  using Error::Error;
};

/// Decides whether an actor keeps its new configuration.
using AcceptRule = std::function<bool(Msat revenue_before, Msat revenue_after)>;

inline bool strict_increase(Msat before, Msat after) { return after > before; }

struct EvolutionConfig {
  std::size_t rounds = 1;
  MoveKind perturbation = MoveKind::RandomFee;
  std::vector<NodeIndex> analysis_set;     // empty = every node
  std::optional<std::size_t> subset_size;  // actor_set random_subset(size); unset = all
  TrafficConfig traffic;
  RoutingConfig routing;
  Msat fee_cap = 500;  // applied to routing for every batch
  std::size_t record_degree_every = 0;  // 0 = never
  double fee_scale = 50;
  Msat fee_limit = 250;
  std::uint64_t seed = 0;
  AcceptRule accept = strict_increase;

  void validate(const NetworkGraph& g) const;
};

struct ActorOutcome {
  NodeIndex actor = kNoNode;
  bool applied = false;
  std::string note;
  Msat revenue_before = 0;  // revenue of the last kept configuration
  Msat revenue_after = 0;   // revenue in this round's batch
  bool accepted = false;
};

struct RoundReport {
  std::size_t round = 0;  // 0 is the baseline batch
  double mean_fee_paid = 0;
  std::vector<ActorOutcome> actors;
  std::optional<std::map<std::size_t, std::size_t>> degree_histogram;

  std::size_t accepted_count() const;
  std::size_t reverted_count() const;  // applied but not kept
};

std::map<std::size_t, std::size_t> degree_histogram(const NetworkGraph& g);

/// Repeated game: each round every actor perturbs one channel, one shared
/// batch evaluates all of them, and moves that did not pay off are undone.
/// Payments run on a copy of g, so g only ever changes through kept moves.
/// Returns rounds 0..cfg.rounds.
std::vector<RoundReport> run_evolution(NetworkGraph& g, const EvolutionConfig& cfg);

struct ShortTermResult {
  std::vector<NodeIndex> subset;  // perturbed actors, in capacity order
  std::vector<StrategyMove> moves;
  RatioReport before;
  RatioReport after;
  double mean_fee_before = 0;
  double mean_fee_after = 0;
};

struct ShortTermConfig {
  std::size_t subset_size = 100;
  std::vector<NodeIndex> analysis_set;  // empty = every node
  MoveKind perturbation = MoveKind::RandomFee;
  double fee_scale = 50;
  Msat fee_limit = 250;
};

/// Baseline batch, one perturbation for each of subset_size random actors,
/// then a comparison batch with the same payment draws. g keeps the moves.
ShortTermResult run_short_term(NetworkGraph& g, const ShortTermConfig& cfg,
                               const TrafficConfig& traffic, const RoutingConfig& routing, Rng& rng);

std::string time_series_csv(std::span<const RoundReport> rounds);
std::string degree_histogram_csv(std::span<const RoundReport> rounds);
/// One JSON object per line: round, actor, kind, accepted, revenue_before_msat,
/// revenue_after_msat.
std::string moves_jsonl(const NetworkGraph& g, MoveKind kind, std::span<const RoundReport> rounds);

}  // namespace pcn
