#include "pcn/graph.hpp"

#include <algorithm>

namespace pcn {

NodeIndex NetworkGraph::add_node(std::string id, std::string alias) {
  if (id.empty()) throw GraphError("node id must not be empty");
  if (node_by_id_.contains(id)) throw GraphError("duplicate node id: " + id);
  const auto n = static_cast<NodeIndex>(nodes_.size());
  node_by_id_.emplace(id, n);
  nodes_.push_back({std::move(id), std::move(alias)});
  incident_.emplace_back();
  ++generation_;
  return n;
}

std::optional<NodeIndex> NetworkGraph::find_node(std::string_view id) const {
  auto it = node_by_id_.find(std::string(id));
  if (it == node_by_id_.end()) return std::nullopt;
  return it->second;
}

NodeIndex NetworkGraph::require_node(std::string_view id) const {
  if (auto n = find_node(id)) return *n;
  throw GraphError("unknown node: " + std::string(id));
}

std::optional<ChannelIndex> NetworkGraph::find_channel(std::string_view id) const {
  auto it = channel_by_id_.find(std::string(id));
  if (it == channel_by_id_.end()) return std::nullopt;
  return it->second;
}

void NetworkGraph::check_live(ChannelIndex c) const {
  if (!alive(c)) throw GraphError("channel slot " + std::to_string(c) + " is not open");
}

void NetworkGraph::link(ChannelIndex c) {
  for (NodeIndex n : channels_[c].endpoint) {
    auto& inc = incident_[n];
    inc.insert(std::lower_bound(inc.begin(), inc.end(), c), c);
  }
}

void NetworkGraph::unlink(ChannelIndex c) {
  for (NodeIndex n : channels_[c].endpoint) {
    auto& inc = incident_[n];
    auto it = std::lower_bound(inc.begin(), inc.end(), c);
    if (it != inc.end() && *it == c) inc.erase(it);
  }
}

ChannelIndex NetworkGraph::add_channel(Channel ch) {
  if (ch.id.empty()) throw GraphError("channel id must not be empty");
  if (channel_by_id_.contains(ch.id)) throw GraphError("duplicate channel id: " + ch.id);
  for (NodeIndex n : ch.endpoint) {
    if (n >= nodes_.size()) throw GraphError("channel " + ch.id + " references an unknown node");
  }
  if (ch.endpoint[0] == ch.endpoint[1]) throw GraphError("self-channel not allowed: " + ch.id);
  if (ch.capacity < 1) throw GraphError("channel " + ch.id + " has capacity below 1 sat");
  if (ch.balance[0] < 0 || ch.balance[1] < 0 ||
      ch.balance[0] + ch.balance[1] != ch.capacity * kMsatPerSat) {
    throw GraphError("channel " + ch.id + " balances do not sum to its capacity");
  }
  for (const auto& p : ch.policy) {
    if (p.fee_base < 0 || p.fee_ppm < 0) throw GraphError("negative fee on channel " + ch.id);
  }
  const auto c = static_cast<ChannelIndex>(channels_.size());
  channel_by_id_.emplace(ch.id, c);
  channels_.push_back(std::move(ch));
  alive_.push_back(true);
  ++live_count_;
  link(c);
  ++generation_;
  return c;
}

std::string NetworkGraph::fresh_channel_id() {
  for (;;) {
    std::string id = "new-" + std::to_string(next_fresh_id_++);
    if (!channel_by_id_.contains(id)) return id;
  }
}

ChannelIndex NetworkGraph::open_channel(NodeIndex a, NodeIndex b, Sat capacity, Funding funding,
                                        FeePolicy policy_a, FeePolicy policy_b) {
  if (a >= nodes_.size() || b >= nodes_.size()) throw GraphError("open_channel: unknown node");
  if (a == b) throw GraphError("open_channel: self-channel for node " + nodes_[a].id);
  if (capacity < 1) throw GraphError("open_channel: capacity below 1 sat");
  Channel ch;
  ch.id = fresh_channel_id();
  ch.endpoint = {a, b};
  ch.capacity = capacity;
  const Msat total = capacity * kMsatPerSat;
  if (funding == Funding::Dual) {
    ch.balance[1] = total / 2;
    ch.balance[0] = total - ch.balance[1];
  } else {
    ch.balance = {total, 0};
  }
  ch.policy = {policy_a, policy_b};
  return add_channel(std::move(ch));
}

Channel NetworkGraph::close_channel(ChannelIndex c) {
  check_live(c);
  unlink(c);
  alive_[c] = false;
  --live_count_;
  channel_by_id_.erase(channels_[c].id);
  ++generation_;
  return channels_[c];
}

Channel NetworkGraph::close_channel(std::string_view channel_id) {
  auto c = find_channel(channel_id);
  if (!c) throw GraphError("unknown channel: " + std::string(channel_id));
  return close_channel(*c);
}

void NetworkGraph::restore_channel(ChannelIndex c, Channel ch) {
  if (c >= channels_.size()) throw GraphError("restore_channel: slot out of range");
  if (alive_[c]) throw GraphError("restore_channel: slot " + std::to_string(c) + " is live");
  if (channel_by_id_.contains(ch.id)) throw GraphError("restore_channel: id in use: " + ch.id);
  channel_by_id_.emplace(ch.id, c);
  channels_[c] = std::move(ch);
  alive_[c] = true;
  ++live_count_;
  link(c);
  ++generation_;
}

void NetworkGraph::set_policy(ChannelIndex c, Side side, FeePolicy p) {
  check_live(c);
  if (p.fee_base < 0 || p.fee_ppm < 0) throw GraphError("set_policy: negative fee");
  channels_[c].policy[idx(side)] = p;
  ++generation_;
}

void NetworkGraph::adjust_capacity(ChannelIndex c, Side owner, Sat delta) {
  check_live(c);
  auto& ch = channels_[c];
  const Msat new_balance = ch.balance[idx(owner)] + delta * kMsatPerSat;
  if (ch.capacity + delta < 1 || new_balance < 0) {
    throw GraphError("adjust_capacity: channel " + ch.id + " cannot absorb " +
                     std::to_string(delta) + " sat");
  }
  ch.capacity += delta;
  ch.balance[idx(owner)] = new_balance;
  ++generation_;
}

void NetworkGraph::shift_balance(ChannelIndex c, Side from, Msat amount) {
  check_live(c);
  auto& ch = channels_[c];
  if (amount < 0 || ch.balance[idx(from)] < amount) {
    throw GraphError("shift_balance: insufficient balance on " + ch.id);
  }
  ch.balance[idx(from)] -= amount;
  ch.balance[idx(opposite(from))] += amount;
}

NetworkGraph::Redistribution NetworkGraph::redistribute_on_close(const Channel& closing,
                                                                 NodeIndex survivor) {
  if (!closing.touches(survivor)) {
    throw GraphError("redistribute_on_close: survivor is not an endpoint of " + closing.id);
  }
  if (auto live = find_channel(closing.id); live && alive(*live)) {
    throw GraphError("redistribute_on_close: channel " + closing.id + " is still open");
  }
  const auto& remaining = incident_.at(survivor);
  if (remaining.empty()) {
    throw GraphError("redistribute_on_close: node " + nodes_[survivor].id +
                     " has no remaining channels");
  }
  Redistribution r;
  r.per_channel = closing.capacity / (2 * static_cast<Sat>(remaining.size()));
  r.grown.assign(remaining.begin(), remaining.end());
  if (r.per_channel > 0) {
    for (ChannelIndex c : r.grown) {
      auto& ch = channels_[c];
      ch.capacity += r.per_channel;
      ch.balance[idx(ch.side_of(survivor))] += r.per_channel * kMsatPerSat;
    }
  }
  r.released = closing.capacity - r.per_channel * static_cast<Sat>(r.grown.size());
  ++generation_;
  return r;
}

std::vector<ChannelIndex> NetworkGraph::live_channels() const {
  std::vector<ChannelIndex> out;
  out.reserve(live_count_);
  for (ChannelIndex c = 0; c < channels_.size(); ++c) {
    if (alive_[c]) out.push_back(c);
  }
  return out;
}

Msat NetworkGraph::tau(NodeIndex n) const {
  Msat sum = 0;
  for (ChannelIndex c : incident_.at(n)) {
    const auto& ch = channels_[c];
    sum += ch.balance[idx(ch.side_of(n))];
  }
  return sum;
}

Sat NetworkGraph::capacity_sum(NodeIndex n) const {
  Sat sum = 0;
  for (ChannelIndex c : incident_.at(n)) sum += channels_[c].capacity;
  return sum;
}

NodeStats NetworkGraph::stats(NodeIndex n) const {
  return {n, tau(n), capacity_sum(n), degree(n)};
}

Sat NetworkGraph::total_capacity() const {
  Sat sum = 0;
  for (ChannelIndex c = 0; c < channels_.size(); ++c) {
    if (alive_[c]) sum += channels_[c].capacity;
  }
  return sum;
}

std::vector<NodeIndex> top_k_by_capacity(const NetworkGraph& g, std::size_t k) {
  if (k > g.node_count()) {
    throw GraphError("top_k_by_capacity: k=" + std::to_string(k) + " exceeds node count " +
                     std::to_string(g.node_count()));
  }
  std::vector<std::pair<Msat, NodeIndex>> keyed;
  keyed.reserve(g.node_count());
  for (NodeIndex n = 0; n < g.node_count(); ++n) keyed.emplace_back(g.tau(n), n);
  auto before = [&](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return g.node_id(x.second) < g.node_id(y.second);
  };
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(k), keyed.end(),
                    before);
  std::vector<NodeIndex> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(keyed[i].second);
  return out;
}

}  // namespace pcn
