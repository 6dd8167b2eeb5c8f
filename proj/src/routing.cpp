#include "pcn/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "pcn/parallel.hpp"

namespace pcn {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::FeeOnly:
      return "fee_only";
    case Algorithm::GreedyAlpha:
      return "greedy_alpha";
    case Algorithm::PickhardtMu:
      return "pickhardt_mu";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "fee_only") return Algorithm::FeeOnly;
  if (s == "greedy_alpha") return Algorithm::GreedyAlpha;
  if (s == "pickhardt_mu") return Algorithm::PickhardtMu;
  throw RoutingError("unknown routing algorithm: " + s);
}

std::string to_string(PaymentStatus s) {
  switch (s) {
    case PaymentStatus::Success:
      return "success";
    case PaymentStatus::NoPath:
      return "no_path";
    case PaymentStatus::FeeCapExceeded:
      return "fee_cap_exceeded";
    case PaymentStatus::InsufficientBalance:
      return "insufficient_balance";
  }
  return "?";
}

void RoutingConfig::validate() const {
  if (!(alpha >= 0)) throw RoutingError("alpha must be >= 0");
  if (!(mu >= 0)) throw RoutingError("mu must be >= 0");
  if (fee_norm_max <= 0) throw RoutingError("fee_norm_max must be > 0");
  if (cap_norm_min < 1 || cap_norm_max <= cap_norm_min) {
    throw RoutingError("capacity normalization needs cap_norm_max > cap_norm_min >= 1");
  }
  if (fee_cap && *fee_cap < 0) throw RoutingError("fee_cap must be >= 0");
}

Msat hop_fee(const FeePolicy& policy, Sat amount) {
  if (amount < 0) throw std::invalid_argument("hop_fee: negative amount");
  const __int128 prop = static_cast<__int128>(policy.fee_ppm) * amount / 1000;
  const __int128 total = prop + policy.fee_base;
  if (total > std::numeric_limits<Msat>::max()) throw std::overflow_error("hop_fee overflows int64");
  return static_cast<Msat>(total);
}

double fee_norm(Msat fee, const RoutingConfig& cfg) {
  const Msat clamped = std::clamp<Msat>(fee, 0, cfg.fee_norm_max);
  return static_cast<double>(clamped) / static_cast<double>(cfg.fee_norm_max);
}

double cap_norm(Sat capacity, const RoutingConfig& cfg) {
  const Sat clamped = std::clamp(capacity, cfg.cap_norm_min, cfg.cap_norm_max);
  return static_cast<double>(clamped - cfg.cap_norm_min + 1) /
         static_cast<double>(cfg.cap_norm_max - cfg.cap_norm_min + 1);
}

std::optional<double> edge_weight(const Channel& ch, Side from, const RoutingConfig& cfg,
                                  Sat amount, bool first_hop) {
  const FeePolicy& policy = ch.policy[idx(from)];
  if (!policy.enabled) return std::nullopt;
  const double fee = first_hop ? 0.0 : fee_norm(hop_fee(policy, amount), cfg);
  switch (cfg.algorithm) {
    case Algorithm::FeeOnly:
      return fee;
    case Algorithm::GreedyAlpha:
      return fee + cfg.alpha / cap_norm(ch.capacity, cfg);
    case Algorithm::PickhardtMu: {
      if (amount > ch.capacity) return std::nullopt;
      const double c1 = static_cast<double>(ch.capacity) + 1.0;
      const double reliability = -std::log1p(-static_cast<double>(amount) / c1);
      return reliability + cfg.mu * static_cast<double>(amount) * fee;
    }
  }
  return std::nullopt;
}

double path_weight(const NetworkGraph& g, const Path& path, const RoutingConfig& cfg, Sat amount) {
  double total = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    auto w = edge_weight(g.channel(path[i].channel), path[i].from, cfg, amount, i == 0);
    if (!w) return std::numeric_limits<double>::infinity();
    total += *w;
  }
  return total;
}

bool ShortestPathTree::reaches(NodeIndex target) const {
  return target < dist.size() && std::isfinite(dist[target]);
}

std::optional<Path> ShortestPathTree::path_to(NodeIndex target) const {
  if (target == source || !reaches(target)) return std::nullopt;
  Path path(hops[target]);
  NodeIndex at = target;
  for (std::size_t i = path.size(); i-- > 0;) {
    path[i] = pred[at];
    at = parent[at];
  }
  return path;
}

RoutingView::RoutingView(const NetworkGraph& g, const RoutingConfig& cfg, Sat amount)
    : generation_(g.generation()), cfg_(cfg), amount_(amount) {
  cfg_.validate();
  if (amount < 0) throw RoutingError("negative payment amount");
  std::vector<ChannelIndex> by_id = g.live_channels();
  std::sort(by_id.begin(), by_id.end(),
            [&](ChannelIndex x, ChannelIndex y) { return g.channel(x).id < g.channel(y).id; });
  rank_of_slot_.assign(g.slot_count(), 0);
  for (std::uint32_t r = 0; r < by_id.size(); ++r) rank_of_slot_[by_id[r]] = r;

  const std::size_t n = g.node_count();
  offset_.assign(n + 1, 0);
  for (NodeIndex u = 0; u < n; ++u) offset_[u + 1] = offset_[u] + g.degree(u);
  arcs_.resize(offset_[n]);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (NodeIndex u = 0; u < n; ++u) {
    std::size_t k = offset_[u];
    for (ChannelIndex c : g.incident(u)) {
      const Channel& ch = g.channel(c);
      const Side from = ch.side_of(u);
      auto w = edge_weight(ch, from, cfg_, amount_, false);
      auto wf = edge_weight(ch, from, cfg_, amount_, true);
      arcs_[k++] = Arc{ch.other(u), c, from, rank_of_slot_[c], w.value_or(kInf), wf.value_or(kInf)};
    }
  }
}

bool RoutingView::sequence_less(const ShortestPathTree& t, NodeIndex via, std::uint32_t rank,
                                NodeIndex target) const {
  // Candidate (path to `via` + arc) against target's current label. Both
  // have t.hops[target] hops; compare the channel-rank sequences front to back.
  const std::size_t len = t.hops[target];
  std::vector<std::uint32_t> lhs(len), rhs(len);
  lhs[len - 1] = rank;
  rhs[len - 1] = rank_of_slot_[t.pred[target].channel];
  NodeIndex a = via;
  NodeIndex b = t.parent[target];
  for (std::size_t i = len - 1; i-- > 0;) {
    lhs[i] = rank_of_slot_[t.pred[a].channel];
    rhs[i] = rank_of_slot_[t.pred[b].channel];
    a = t.parent[a];
    b = t.parent[b];
  }
  return lhs < rhs;
}

ShortestPathTree RoutingView::tree_from(NodeIndex source) const {
  const std::size_t n = offset_.size() - 1;
  if (source >= n) throw RoutingError("tree_from: unknown source node");
  ShortestPathTree t;
  t.source = source;
  t.dist.assign(n, std::numeric_limits<double>::infinity());
  t.hops.assign(n, 0);
  t.pred.assign(n, PathHop{});
  t.parent.assign(n, kNoNode);
  std::vector<char> settled(n, 0);

  using Entry = std::tuple<double, std::uint32_t, NodeIndex>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  t.dist[source] = 0;
  pq.emplace(0.0, 0u, source);
  while (!pq.empty()) {
    auto [d, h, u] = pq.top();
    pq.pop();
    if (settled[u] || d != t.dist[u] || h != t.hops[u]) continue;
    settled[u] = 1;
    const bool first = u == source;
    for (std::size_t k = offset_[u]; k < offset_[u + 1]; ++k) {
      const Arc& arc = arcs_[k];
      const double w = first ? arc.weight_first : arc.weight;
      if (std::isinf(w) || settled[arc.to]) continue;
      const double nd = d + w;
      const std::uint32_t nh = h + 1;
      const NodeIndex v = arc.to;
      bool better = nd < t.dist[v];
      if (!better && nd == t.dist[v]) {
        better = nh < t.hops[v] ||
                 (nh == t.hops[v] &&
                  (t.parent[v] == u ? arc.rank < rank_of_slot_[t.pred[v].channel]
                                    : sequence_less(t, u, arc.rank, v)));
      }
      if (better) {
        const bool key_changed = nd != t.dist[v] || nh != t.hops[v];
        t.dist[v] = nd;
        t.hops[v] = nh;
        t.pred[v] = PathHop{arc.channel, arc.from};
        t.parent[v] = u;
        if (key_changed) pq.emplace(nd, nh, v);
      }
    }
  }
  return t;
}

std::optional<Path> find_path(const NetworkGraph& g, NodeIndex sender, NodeIndex receiver,
                              Sat amount, const RoutingConfig& cfg) {
  if (sender == receiver) throw RoutingError("find_path: sender equals receiver");
  if (receiver >= g.node_count()) throw RoutingError("find_path: unknown receiver");
  return RoutingView(g, cfg, amount).tree_from(sender).path_to(receiver);
}

NodeIndex PaymentRecord::intermediary(const NetworkGraph& g, std::size_t i) const {
  const PathHop& hop = path.at(i + 1);
  return g.channel(hop.channel).node(hop.from);
}

PaymentRecord execute_along(NetworkGraph& g, NodeIndex sender, NodeIndex receiver, Sat amount,
                            const RoutingConfig& cfg, std::optional<Path> path) {
  PaymentRecord rec;
  rec.sender = sender;
  rec.receiver = receiver;
  rec.amount = amount;
  if (!path || path->empty()) {
    rec.status = PaymentStatus::NoPath;
    return rec;
  }
  rec.path = std::move(*path);
  const std::size_t k = rec.path.size();
  rec.hop_fees.reserve(k - 1);
  for (std::size_t i = 1; i < k; ++i) {
    const PathHop& hop = rec.path[i];
    rec.hop_fees.push_back(hop_fee(g.channel(hop.channel).policy[idx(hop.from)], amount));
  }
  rec.total_fee = std::accumulate(rec.hop_fees.begin(), rec.hop_fees.end(), Msat{0});
  if (cfg.fee_cap && rec.total_fee > *cfg.fee_cap) {
    rec.status = PaymentStatus::FeeCapExceeded;
    return rec;
  }
  if (cfg.enforce_balances) {
    // Hop i carries the amount plus every fee collected downstream of it.
    std::vector<Msat> carried(k);
    Msat downstream = 0;
    for (std::size_t i = k; i-- > 0;) {
      carried[i] = amount * kMsatPerSat + downstream;
      if (i >= 1) downstream += rec.hop_fees[i - 1];
    }
    for (std::size_t i = 0; i < k; ++i) {
      const Channel& ch = g.channel(rec.path[i].channel);
      if (ch.balance[idx(rec.path[i].from)] < carried[i]) {
        rec.status = PaymentStatus::InsufficientBalance;
        return rec;
      }
    }
    for (std::size_t i = 0; i < k; ++i) g.shift_balance(rec.path[i].channel, rec.path[i].from, carried[i]);
  }
  rec.status = PaymentStatus::Success;
  return rec;
}

PaymentRecord execute_payment(NetworkGraph& g, NodeIndex sender, NodeIndex receiver, Sat amount,
                              const RoutingConfig& cfg) {
  auto path = find_path(g, sender, receiver, amount, cfg);
  return execute_along(g, sender, receiver, amount, cfg, std::move(path));
}

RouteTable::RouteTable(const NetworkGraph& g, const RoutingConfig& cfg, Sat amount)
    : view_(g, cfg, amount), trees_(g.node_count()) {}

void RouteTable::precompute(std::span<const NodeIndex> sources) {
  std::vector<NodeIndex> todo;
  for (NodeIndex s : sources) {
    if (s >= trees_.size()) throw RoutingError("precompute: unknown source");
    if (!trees_[s]) todo.push_back(s);
  }
  std::sort(todo.begin(), todo.end());
  todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
  std::vector<ShortestPathTree> built(todo.size());
  parallel_for(todo.size(), [&](std::size_t i) { built[i] = view_.tree_from(todo[i]); });
  for (std::size_t i = 0; i < todo.size(); ++i) trees_[todo[i]] = std::move(built[i]);
}

const ShortestPathTree& RouteTable::tree(NodeIndex source) {
  if (source >= trees_.size()) throw RoutingError("route lookup: unknown source");
  if (!trees_[source]) trees_[source] = view_.tree_from(source);
  return *trees_[source];
}

std::optional<Path> RouteTable::lookup(const NetworkGraph& g, NodeIndex source, NodeIndex target) {
  if (g.generation() != view_.generation()) {
    throw StaleRouteTable("route table built for generation " +
                          std::to_string(view_.generation()) + ", graph is at " +
                          std::to_string(g.generation()));
  }
  if (source == target) throw RoutingError("route lookup: source equals target");
  return tree(source).path_to(target);
}

RouteTable all_pairs_routes(const NetworkGraph& g, std::span<const NodeIndex> sources,
                            const RoutingConfig& cfg, Sat amount) {
  RouteTable table(g, cfg, amount);
  table.precompute(sources);
  return table;
}

std::string payments_csv(const NetworkGraph& g, std::span<const PaymentRecord> records) {
  std::ostringstream out;
  out << "sender,receiver,amount_sat,total_fee_msat,status,hop_count,path\n";
  for (const auto& r : records) {
    out << g.node_id(r.sender) << ',' << g.node_id(r.receiver) << ',' << r.amount << ','
        << r.total_fee << ',' << to_string(r.status) << ',' << r.path.size() << ',';
    for (std::size_t i = 0; i < r.path.size(); ++i) {
      if (i) out << ';';
      out << g.channel(r.path[i].channel).id;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace pcn
