#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pcn/types.hpp"

namespace pcn {

struct Channel {
  std::string id;
  std::array<NodeIndex, 2> endpoint{kNoNode, kNoNode};
  Sat capacity = 0;
  std::array<Msat, 2> balance{0, 0};
  std::array<FeePolicy, 2> policy{};

  NodeIndex node(Side s) const { return endpoint[idx(s)]; }
  Side side_of(NodeIndex n) const { return endpoint[0] == n ? Side::A : Side::B; }
  NodeIndex other(NodeIndex n) const { return endpoint[0] == n ? endpoint[1] : endpoint[0]; }
  bool touches(NodeIndex n) const { return endpoint[0] == n || endpoint[1] == n; }

  friend bool operator==(const Channel&, const Channel&) = default;
};

enum class Funding { Dual, SingleFundedByA };

struct NodeStats {
  NodeIndex node = kNoNode;
  Msat tau = 0;
  Sat capacity_sum = 0;
  std::size_t degree = 0;
};

/// Directed multigraph of payment channels.
///
/// Channels live in stable slots. A closed channel leaves a dead slot that
/// still holds its last contents, so records referring to it stay
/// printable and undo can put it back in the same place. Incidence lists are
/// kept sorted by slot, which makes iteration order a pure function of the
/// set of live slots.
///
/// generation() increases on every mutation that can change routing
/// (open, close, restore, policy change, capacity change). Payment balance
/// shifts do not bump it.
class NetworkGraph {
 public:
  NodeIndex add_node(std::string id, std::string alias = {});

  std::size_t node_count() const { return nodes_.size(); }
  const std::string& node_id(NodeIndex n) const { return nodes_.at(n).id; }
  const std::string& node_alias(NodeIndex n) const { return nodes_.at(n).alias; }
  std::optional<NodeIndex> find_node(std::string_view id) const;
  NodeIndex require_node(std::string_view id) const;

  /// Inserts a fully specified channel. Validates endpoints, capacity,
  /// balance conservation and id uniqueness.
  ChannelIndex add_channel(Channel ch);

  ChannelIndex open_channel(NodeIndex a, NodeIndex b, Sat capacity, Funding funding,
                            FeePolicy policy_a, FeePolicy policy_b);

  Channel close_channel(ChannelIndex c);
  Channel close_channel(std::string_view channel_id);

  /// Puts a previously closed channel back into its original slot.
  void restore_channel(ChannelIndex c, Channel ch);

  void set_policy(ChannelIndex c, Side side, FeePolicy p);

  /// Grows (or shrinks, for negative delta) the channel capacity by delta
  /// sats, crediting the change to `owner`'s local balance.
  void adjust_capacity(ChannelIndex c, Side owner, Sat delta);

  /// Moves msat from one side of a channel to the other. Used by payment
  /// execution; does not bump the generation.
  void shift_balance(ChannelIndex c, Side from, Msat amount);

  struct Redistribution {
    Sat per_channel = 0;
    std::vector<ChannelIndex> grown;
    Sat released = 0;  // c - per_channel * grown.size(), left for the caller
  };

  /// Compensates `survivor` for the close of `closing` (which must already
  /// be closed): each remaining channel of the survivor grows by
  /// floor(c / (2 * deg)) sats, deg counted after the close.
  Redistribution redistribute_on_close(const Channel& closing, NodeIndex survivor);

  bool alive(ChannelIndex c) const { return c < alive_.size() && alive_[c]; }
  const Channel& channel(ChannelIndex c) const { return channels_.at(c); }
  std::optional<ChannelIndex> find_channel(std::string_view id) const;
  std::size_t slot_count() const { return channels_.size(); }
  std::size_t channel_count() const { return live_count_; }
  std::vector<ChannelIndex> live_channels() const;

  std::span<const ChannelIndex> incident(NodeIndex n) const { return incident_.at(n); }
  std::size_t degree(NodeIndex n) const { return incident_.at(n).size(); }

  Msat tau(NodeIndex n) const;
  Sat capacity_sum(NodeIndex n) const;
  NodeStats stats(NodeIndex n) const;
  Sat total_capacity() const;

  std::uint64_t generation() const { return generation_; }

 private:
  struct NodeEntry {
    std::string id;
    std::string alias;
  };

  void link(ChannelIndex c);
  void unlink(ChannelIndex c);
  void check_live(ChannelIndex c) const;
  std::string fresh_channel_id();

  std::vector<NodeEntry> nodes_;
  std::unordered_map<std::string, NodeIndex> node_by_id_;
  std::vector<Channel> channels_;
  std::vector<bool> alive_;
  std::unordered_map<std::string, ChannelIndex> channel_by_id_;
  std::vector<std::vector<ChannelIndex>> incident_;
  std::size_t live_count_ = 0;
  std::uint64_t generation_ = 0;
  std::uint64_t next_fresh_id_ = 0;
};

/// Nodes ordered by decreasing tau, ties by node id.
std::vector<NodeIndex> top_k_by_capacity(const NetworkGraph& g, std::size_t k);

}  // namespace pcn
