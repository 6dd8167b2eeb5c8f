#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcn/graph.hpp"

namespace pcn {

enum class Algorithm { FeeOnly, GreedyAlpha, PickhardtMu };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct RoutingConfig {
  Algorithm algorithm = Algorithm::FeeOnly;
  double alpha = 0;
  double mu = 0;
  Msat fee_norm_max = 20'000;
  Sat cap_norm_min = 1;
  Sat cap_norm_max = 500'000'000;
  bool enforce_balances = false;
  std::optional<Msat> fee_cap;

  void validate() const;
};

class RoutingError : public Error {
 public:
  using Error::Error;
};

/// Fee charged by the forwarding side: base + floor(ppm * amount / 1000)
/// msat, amount in sats. Throws std::overflow_error past int64.
Msat hop_fee(const FeePolicy& policy, Sat amount);

double fee_norm(Msat fee, const RoutingConfig& cfg);
double cap_norm(Sat capacity, const RoutingConfig& cfg);

/// Dijkstra weight of forwarding `amount` over `ch` from side `from`.
/// nullopt when the direction is disabled or (Pickhardt) amount > capacity.
/// On the sender's own first hop nobody charges a fee, so the fee term is
/// zero there; the capacity / reliability term still applies.
std::optional<double> edge_weight(const Channel& ch, Side from, const RoutingConfig& cfg,
                                  Sat amount, bool first_hop = false);

struct PathHop {
  ChannelIndex channel = kNoChannel;
  Side from = Side::A;

  friend bool operator==(const PathHop&, const PathHop&) = default;
};
using Path = std::vector<PathHop>;

double path_weight(const NetworkGraph& g, const Path& path, const RoutingConfig& cfg, Sat amount);

struct ShortestPathTree {
  NodeIndex source = kNoNode;
  std::vector<double> dist;
  std::vector<std::uint32_t> hops;
  std::vector<PathHop> pred;
  std::vector<NodeIndex> parent;

  bool reaches(NodeIndex target) const;
  std::optional<Path> path_to(NodeIndex target) const;
};

/// Immutable adjacency with precomputed weights for one (graph generation,
/// config, amount). Trees computed from it are pure functions of the view,
/// so sources can be processed in parallel.
///
/// Paths are ordered by (total weight, hop count, channel-id sequence).
class RoutingView {
 public:
  RoutingView(const NetworkGraph& g, const RoutingConfig& cfg, Sat amount);

  ShortestPathTree tree_from(NodeIndex source) const;
  std::uint64_t generation() const { return generation_; }
  Sat amount() const { return amount_; }
  const RoutingConfig& config() const { return cfg_; }

 private:
  struct Arc {
    NodeIndex to;
    ChannelIndex channel;
    Side from;
    std::uint32_t rank;  // position of the channel id in sorted order
    double weight;
    double weight_first;
  };

  bool sequence_less(const ShortestPathTree& t, NodeIndex via, std::uint32_t rank,
                     NodeIndex target) const;

  std::vector<std::size_t> offset_;
  std::vector<Arc> arcs_;
  std::vector<std::uint32_t> rank_of_slot_;
  std::uint64_t generation_;
  RoutingConfig cfg_;
  Sat amount_;
};

std::optional<Path> find_path(const NetworkGraph& g, NodeIndex sender, NodeIndex receiver,
                              Sat amount, const RoutingConfig& cfg);

enum class PaymentStatus { Success, NoPath, FeeCapExceeded, InsufficientBalance };
std::string to_string(PaymentStatus s);

struct PaymentRecord {
  NodeIndex sender = kNoNode;
  NodeIndex receiver = kNoNode;
  Sat amount = 0;
  Path path;
  std::vector<Msat> hop_fees;  // one per intermediate node, in path order
  Msat total_fee = 0;
  PaymentStatus status = PaymentStatus::NoPath;

  bool ok() const { return status == PaymentStatus::Success; }
  // Node earning hop_fees[i].
  NodeIndex intermediary(const NetworkGraph& g, std::size_t i) const;
};

/// Settles a payment along an already chosen path (or records no_path).
/// Balance updates, when enforced, are all-or-nothing.
PaymentRecord execute_along(NetworkGraph& g, NodeIndex sender, NodeIndex receiver, Sat amount,
                            const RoutingConfig& cfg, std::optional<Path> path);

PaymentRecord execute_payment(NetworkGraph& g, NodeIndex sender, NodeIndex receiver, Sat amount,
                              const RoutingConfig& cfg);

class StaleRouteTable : public RoutingError {
 public:
  using RoutingError::RoutingError;
};

/// Per-source shortest path trees tagged with the graph generation they were
/// computed for. Sources not precomputed are filled on first lookup.
class RouteTable {
 public:
  RouteTable(const NetworkGraph& g, const RoutingConfig& cfg, Sat amount);

  void precompute(std::span<const NodeIndex> sources);
  std::optional<Path> lookup(const NetworkGraph& g, NodeIndex source, NodeIndex target);
  std::uint64_t generation() const { return view_.generation(); }

 private:
  const ShortestPathTree& tree(NodeIndex source);

  RoutingView view_;
  std::vector<std::optional<ShortestPathTree>> trees_;
};

RouteTable all_pairs_routes(const NetworkGraph& g, std::span<const NodeIndex> sources,
                            const RoutingConfig& cfg, Sat amount);

/// sender,receiver,amount_sat,total_fee_msat,status,hop_count,path
std::string payments_csv(const NetworkGraph& g, std::span<const PaymentRecord> records);

}  // namespace pcn
