#include "pcn/strategies.hpp"

#include <algorithm>
#include <cmath>

#include "pcn/routing.hpp"

namespace pcn {

std::string to_string(MoveKind k) {
  switch (k) {
    case MoveKind::ReplicateRatio:
      return "replicate_ratio";
    case MoveKind::ReplicateBc:
      return "replicate_bc";
    case MoveKind::RandomFee:
      return "random_fee";
    case MoveKind::RandomChannelSingle:
      return "random_channel_single";
    case MoveKind::RandomChannelDual:
      return "random_channel_dual";
  }
  return "?";
}

MoveKind move_kind_from_string(const std::string& s) {
  if (s == "replicate_ratio") return MoveKind::ReplicateRatio;
  if (s == "replicate_bc") return MoveKind::ReplicateBc;
  if (s == "random_fee") return MoveKind::RandomFee;
  if (s == "random_channel_single") return MoveKind::RandomChannelSingle;
  if (s == "random_channel_dual") return MoveKind::RandomChannelDual;
  throw StrategyError("unknown move kind: " + s);
}

void StrategyMove::undo(NetworkGraph& g) {
  for (auto it = undo_log.rbegin(); it != undo_log.rend(); ++it) {
    std::visit(
        [&](auto& step) {
          using T = std::decay_t<decltype(step)>;
          if constexpr (std::is_same_v<T, undo::RemoveOpened>) {
            g.close_channel(step.channel);
          } else if constexpr (std::is_same_v<T, undo::RestoreClosed>) {
            g.restore_channel(step.channel, step.saved);
          } else if constexpr (std::is_same_v<T, undo::RestorePolicy>) {
            g.set_policy(step.channel, step.side, step.policy);
          } else {
            g.adjust_capacity(step.channel, step.owner, -step.delta);
          }
        },
        *it);
  }
  undo_log.clear();
}

bool MoveLocks::can_close(ChannelIndex c) const {
  if (state_.contains(c)) return false;
  auto it = policies_.lower_bound({c, Side::A});
  return it == policies_.end() || it->first != c;
}

bool MoveLocks::can_credit(ChannelIndex c) const {
  auto it = state_.find(c);
  return it == state_.end() || it->second == State::Credit;
}

bool MoveLocks::can_set_policy(ChannelIndex c, Side s) const {
  auto it = state_.find(c);
  if (it != state_.end() && it->second == State::Exclusive) return false;
  return !policies_.contains({c, s});
}

void MoveLocks::lock_credit(ChannelIndex c) {
  auto [it, inserted] = state_.emplace(c, State::Credit);
  (void)it;
  (void)inserted;
}

void ReplicationParams::validate() const {
  if (epsilon <= 0 || zeta <= 0 || iota <= 0) {
    throw StrategyError("replication epsilon, zeta and iota must be strictly positive");
  }
}

std::vector<NodeIndex> ratio_ranking(const NetworkGraph& g, const RatioReport& report) {
  std::vector<RatioEntry> entries = report.nodes;
  std::sort(entries.begin(), entries.end(), [&](const RatioEntry& a, const RatioEntry& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    if (a.tau != b.tau) return a.tau < b.tau;
    return g.node_id(a.node) < g.node_id(b.node);
  });
  std::vector<NodeIndex> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.node);
  return out;
}

std::vector<NodeIndex> bc_ranking(const NetworkGraph& g, std::span<const NodeIndex> candidates,
                                  double mu) {
  const auto bc = betweenness(g, Measure::BcCombined, mu);
  std::vector<NodeIndex> out(candidates.begin(), candidates.end());
  std::sort(out.begin(), out.end(), [&](NodeIndex a, NodeIndex b) {
    if (bc.score[a] != bc.score[b]) return bc.score[a] > bc.score[b];
    return g.node_id(a) < g.node_id(b);
  });
  return out;
}

std::vector<NodeIndex> select_replication_targets(const NetworkGraph& g, NodeIndex u,
                                                  std::span<const NodeIndex> ranking,
                                                  std::size_t count) {
  const Msat tau_u = g.tau(u);
  std::vector<NodeIndex> out;
  for (NodeIndex v : ranking) {
    if (out.size() >= count) break;
    if (v != u && g.tau(v) < tau_u) out.push_back(v);
  }
  return out;
}

NodeIndex select_replication_target(const NetworkGraph& g, NodeIndex u,
                                    std::span<const NodeIndex> ranking) {
  auto picked = select_replication_targets(g, u, ranking, 1);
  if (picked.empty()) {
    throw StrategyError("no replication candidate with tau below that of " + g.node_id(u));
  }
  return picked.front();
}

namespace {

FeePolicy undercut(FeePolicy p, const ReplicationParams& params) {
  if (p.fee_ppm > 0) p.fee_ppm = std::max<Msat>(0, p.fee_ppm - params.zeta);
  if (p.fee_base > 0) p.fee_base = std::max<Msat>(0, p.fee_base - params.iota);
  return p;
}

void close_logged(NetworkGraph& g, StrategyMove& move, ChannelIndex c) {
  move.undo_log.push_back(undo::RestoreClosed{c, g.channel(c)});
  g.close_channel(c);
  move.closed.push_back(c);
}

ChannelIndex open_logged(NetworkGraph& g, StrategyMove& move, NodeIndex a, NodeIndex b, Sat cap,
                         Funding funding, FeePolicy pa, FeePolicy pb) {
  const ChannelIndex c = g.open_channel(a, b, cap, funding, pa, pb);
  move.undo_log.push_back(undo::RemoveOpened{c});
  move.opened.push_back(c);
  return c;
}

void adjust_logged(NetworkGraph& g, StrategyMove& move, ChannelIndex c, Side owner, Sat delta) {
  g.adjust_capacity(c, owner, delta);
  move.undo_log.push_back(undo::RevertCapacity{c, owner, delta});
}

// Channels of u that can be closed with compensation for the counterparty:
// the counterparty keeps at least one channel and all of those can be credited.
std::vector<ChannelIndex> closable_channels(const NetworkGraph& g, NodeIndex u,
                                            const MoveLocks* locks) {
  std::vector<ChannelIndex> out;
  for (ChannelIndex c : g.incident(u)) {
    const NodeIndex v = g.channel(c).other(u);
    if (g.degree(v) < 2) continue;
    if (locks) {
      if (!locks->can_close(c)) continue;
      bool ok = true;
      for (ChannelIndex r : g.incident(v)) {
        if (r != c && !locks->can_credit(r)) ok = false;
      }
      if (!ok) continue;
    }
    out.push_back(c);
  }
  return out;
}

// Splits `needed` sats of debit over w's channels in proportion to capacity,
// leaving at least 1 sat of capacity and never more than w's local balance.
std::optional<std::vector<std::pair<ChannelIndex, Sat>>> plan_debit(const NetworkGraph& g,
                                                                     NodeIndex w, Sat needed) {
  const auto inc = g.incident(w);
  std::vector<Sat> avail;
  Sat total_cap = 0, total_avail = 0;
  for (ChannelIndex c : inc) {
    const Channel& ch = g.channel(c);
    const Sat a = std::min(ch.balance[idx(ch.side_of(w))] / kMsatPerSat, ch.capacity - 1);
    avail.push_back(std::max<Sat>(0, a));
    total_cap += ch.capacity;
    total_avail += avail.back();
  }
  if (total_avail < needed) return std::nullopt;
  std::vector<std::pair<ChannelIndex, Sat>> plan;
  Sat assigned = 0;
  for (std::size_t i = 0; i < inc.size(); ++i) {
    const auto share = static_cast<Sat>(static_cast<__int128>(needed) * g.channel(inc[i]).capacity /
                                         total_cap);
    const Sat take = std::min(share, avail[i]);
    plan.emplace_back(inc[i], take);
    assigned += take;
  }
  for (std::size_t i = 0; i < plan.size() && assigned < needed; ++i) {
    const Sat extra = std::min(avail[i] - plan[i].second, needed - assigned);
    plan[i].second += extra;
    assigned += extra;
  }
  std::erase_if(plan, [](const auto& p) { return p.second == 0; });
  return plan;
}

}  // namespace

StrategyMove replicate(NetworkGraph& g, NodeIndex u, NodeIndex v, const ReplicationParams& params,
                       Rng& rng, MoveKind kind) {
  params.validate();
  if (u == v) throw StrategyError("replicate: node cannot replicate itself");
  const Msat tau_v = g.tau(v);
  if (!(g.tau(u) > tau_v)) {
    throw StrategyError("replicate: tau(" + g.node_id(u) + ") must exceed tau(" + g.node_id(v) + ")");
  }
  StrategyMove move;
  move.kind = kind;
  move.actor = u;

  std::vector<ChannelIndex> order(g.incident(u).begin(), g.incident(u).end());
  std::shuffle(order.begin(), order.end(), rng);
  Msat freed = 0;
  for (ChannelIndex c : order) {
    if (freed >= tau_v) break;
    const Channel& ch = g.channel(c);
    freed += ch.balance[idx(ch.side_of(u))];
    close_logged(g, move, c);
  }

  const std::vector<ChannelIndex> template_channels(g.incident(v).begin(), g.incident(v).end());
  for (ChannelIndex c : template_channels) {
    const Channel& ch = g.channel(c);
    const NodeIndex w = ch.other(v);
    if (w == u) continue;
    const FeePolicy mine = undercut(ch.policy[idx(ch.side_of(v))], params);
    const FeePolicy theirs = ch.policy[idx(ch.side_of(w))];
    open_logged(g, move, u, w, ch.capacity + params.epsilon, Funding::Dual, mine, theirs);
  }
  move.applied = true;
  return move;
}

Msat discretized_exponential_fee(double uniform, double scale, Msat limit) {
  if (!(scale > 0)) throw StrategyError("exponential fee: scale must be > 0");
  if (limit < 1) throw StrategyError("exponential fee: limit must be >= 1");
  const double raw = -std::log1p(-uniform) * scale;
  const double up = std::ceil(raw);
  if (!(up < static_cast<double>(limit))) return limit;
  return std::max<Msat>(1, static_cast<Msat>(up));
}

Msat draw_exponential_fee(Rng& rng, double scale, Msat limit, double* raw) {
  const double u = uniform_open01(rng);
  if (raw) *raw = -std::log1p(-u) * scale;
  return discretized_exponential_fee(u, scale, limit);
}

StrategyMove perturb_random_fee(NetworkGraph& g, NodeIndex u, double scale, Msat limit, Rng& rng,
                                FeeScope scope, MoveLocks* locks) {
  StrategyMove move;
  move.kind = MoveKind::RandomFee;
  move.actor = u;
  std::vector<ChannelIndex> targets;
  for (ChannelIndex c : g.incident(u)) {
    if (!locks || locks->can_set_policy(c, g.channel(c).side_of(u))) targets.push_back(c);
  }
  if (targets.empty()) {
    move.note = "no adjustable channel";
    return move;
  }
  if (scope == FeeScope::OneChannel) {
    targets = {targets[uniform_index(rng, targets.size())]};
  }
  for (ChannelIndex c : targets) {
    const Side side = g.channel(c).side_of(u);
    const FeePolicy old = g.channel(c).policy[idx(side)];
    FeePolicy fresh = old;
    fresh.fee_base = draw_exponential_fee(rng, scale, limit);
    fresh.fee_ppm = 0;
    move.undo_log.push_back(undo::RestorePolicy{c, side, old});
    g.set_policy(c, side, fresh);
    if (locks) locks->lock_policy(c, side);
  }
  move.applied = true;
  return move;
}

Msat median_outgoing_fee(const NetworkGraph& g, NodeIndex z, Sat reference_amount) {
  std::vector<Msat> fees;
  for (ChannelIndex c : g.incident(z)) {
    const Channel& ch = g.channel(c);
    const FeePolicy& p = ch.policy[idx(ch.side_of(z))];
    if (p.enabled) fees.push_back(hop_fee(p, reference_amount));
  }
  if (fees.empty()) return 0;
  std::sort(fees.begin(), fees.end());
  const std::size_t mid = fees.size() / 2;
  if (fees.size() % 2 == 1) return fees[mid];
  return static_cast<Msat>(std::llround((static_cast<double>(fees[mid - 1]) +
                                         static_cast<double>(fees[mid])) / 2.0));
}

StrategyMove perturb_random_channel_single(NetworkGraph& g, NodeIndex u, Rng& rng,
                                           MoveLocks* locks, Sat reference_amount) {
  StrategyMove move;
  move.kind = MoveKind::RandomChannelSingle;
  move.actor = u;
  if (g.node_count() < 3) {
    move.note = "graph too small";
    return move;
  }
  const auto eligible = closable_channels(g, u, locks);
  if (eligible.empty()) {
    move.note = "no eligible channel";
    return move;
  }
  const ChannelIndex c = eligible[uniform_index(rng, eligible.size())];
  const NodeIndex v = g.channel(c).other(u);
  NodeIndex z = kNoNode;
  do {
    z = static_cast<NodeIndex>(uniform_index(rng, g.node_count()));
  } while (z == u || z == v);

  close_logged(g, move, c);
  const Channel closed = g.channel(c);
  const auto r = g.redistribute_on_close(closed, v);
  for (ChannelIndex grown : r.grown) {
    if (r.per_channel > 0) {
      move.undo_log.push_back(
          undo::RevertCapacity{grown, g.channel(grown).side_of(v), r.per_channel});
    }
    if (locks) locks->lock_credit(grown);
  }
  const Msat fee = median_outgoing_fee(g, z, reference_amount);
  const FeePolicy policy{fee, 0, true};
  const ChannelIndex fresh =
      open_logged(g, move, u, z, r.released, Funding::SingleFundedByA, policy, policy);
  if (locks) {
    locks->lock_exclusive(c);
    locks->lock_exclusive(fresh);
  }
  move.applied = true;
  return move;
}

bool dual_funding_eligible(const NetworkGraph& g, NodeIndex w, Sat closed_capacity,
                           std::size_t closer_degree) {
  if (closer_degree == 0 || g.degree(w) == 0) return false;
  Sat min_cap = std::numeric_limits<Sat>::max();
  for (ChannelIndex c : g.incident(w)) min_cap = std::min(min_cap, g.channel(c).capacity);
  // c / (2 deg) < min_cap, kept in integers.
  return closed_capacity < 2 * static_cast<Sat>(closer_degree) * min_cap;
}

StrategyMove perturb_random_channel_dual(NetworkGraph& g, NodeIndex u, Rng& rng, MoveLocks* locks,
                                         Sat reference_amount) {
  StrategyMove move;
  move.kind = MoveKind::RandomChannelDual;
  move.actor = u;
  const auto eligible = closable_channels(g, u, locks);
  if (eligible.empty()) {
    move.note = "no eligible channel";
    return move;
  }
  const ChannelIndex c = eligible[uniform_index(rng, eligible.size())];
  const Channel target = g.channel(c);
  const NodeIndex v = target.other(u);
  const std::size_t deg_u = g.degree(u);
  const Sat needed = target.capacity - target.capacity / 2;

  std::vector<NodeIndex> partners;
  for (NodeIndex w = 0; w < g.node_count(); ++w) {
    if (w == u || w == v) continue;
    if (!dual_funding_eligible(g, w, target.capacity, deg_u)) continue;
    bool lockable = true;
    for (ChannelIndex wc : g.incident(w)) {
      if (locks && !locks->can_debit(wc)) lockable = false;
    }
    if (!lockable || !plan_debit(g, w, needed)) continue;
    partners.push_back(w);
  }
  if (partners.empty()) {
    move.note = "no eligible partner";
    return move;
  }
  const NodeIndex w = partners[uniform_index(rng, partners.size())];
  const FeePolicy partner_policy{median_outgoing_fee(g, w, reference_amount), 0, true};
  const FeePolicy own_policy = target.policy[idx(target.side_of(u))];
  // Planned before the close: crediting v may grow a v-w channel, which
  // would otherwise shift the proportional split.
  const auto plan = plan_debit(g, w, needed);

  close_logged(g, move, c);
  const auto r = g.redistribute_on_close(target, v);
  for (ChannelIndex grown : r.grown) {
    if (r.per_channel > 0) {
      move.undo_log.push_back(
          undo::RevertCapacity{grown, g.channel(grown).side_of(v), r.per_channel});
    }
  }
  for (const auto& [wc, amount] : *plan) {
    adjust_logged(g, move, wc, g.channel(wc).side_of(w), -amount);
  }
  const ChannelIndex fresh =
      open_logged(g, move, u, w, target.capacity, Funding::Dual, own_policy, partner_policy);
  if (locks) {
    locks->lock_exclusive(c);
    for (ChannelIndex grown : r.grown) locks->lock_credit(grown);
    for (const auto& [wc, amount] : *plan) locks->lock_exclusive(wc);
    locks->lock_exclusive(fresh);
  }
  move.applied = true;
  return move;
}

}  // namespace pcn
