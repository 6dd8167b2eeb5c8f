#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pcn/graph.hpp"
#include "pcn/metrics.hpp"
#include "pcn/random.hpp"

namespace pcn {

enum class MoveKind { ReplicateRatio, ReplicateBc, RandomFee, RandomChannelSingle, RandomChannelDual };

std::string to_string(MoveKind k);
MoveKind move_kind_from_string(const std::string& s);

class StrategyError : public Error {
 public:
  using Error::Error;
};

namespace undo {
struct RemoveOpened {
  ChannelIndex channel;
};
struct RestoreClosed {
  ChannelIndex channel;
  Channel saved;
};
struct RestorePolicy {
  ChannelIndex channel;
  Side side;
  FeePolicy policy;
};
// Reverses adjust_capacity(channel, owner, delta).
struct RevertCapacity {
  ChannelIndex channel;
  Side owner;
  Sat delta;
};
}  // namespace undo

using UndoStep =
    std::variant<undo::RemoveOpened, undo::RestoreClosed, undo::RestorePolicy, undo::RevertCapacity>;

/// A graph transaction performed on behalf of one actor. Undo replays the
/// inverse steps newest first.
struct StrategyMove {
  MoveKind kind = MoveKind::RandomFee;
  NodeIndex actor = kNoNode;
  bool applied = false;
  std::string note;  // why nothing was applied, when !applied
  std::vector<ChannelIndex> closed;
  std::vector<ChannelIndex> opened;
  std::vector<UndoStep> undo_log;

  void undo(NetworkGraph& g);
};

/// Per-round bookkeeping so that any subset of the round's moves can be
/// undone independently. Capacity credits commute with each other; every
/// other touch (close, open, debit, policy change on a direction) is
/// exclusive.
class MoveLocks {
 public:
  bool can_close(ChannelIndex c) const;
  bool can_credit(ChannelIndex c) const;
  bool can_debit(ChannelIndex c) const { return can_close(c); }
  bool can_set_policy(ChannelIndex c, Side s) const;

  void lock_exclusive(ChannelIndex c) { state_[c] = State::Exclusive; }
  void lock_credit(ChannelIndex c);
  void lock_policy(ChannelIndex c, Side s) { policies_.insert({c, s}); }

 private:
  enum class State { Credit, Exclusive };
  std::map<ChannelIndex, State> state_;
  std::set<std::pair<ChannelIndex, Side>> policies_;
};

struct ReplicationParams {
  Sat epsilon = 1;  // extra capacity per replicated channel
  Msat zeta = 1;    // fee_ppm undercut
  Msat iota = 1;    // fee_base undercut

  void validate() const;
};

enum class ReplicationMode { HighestRatio, HighestBc };

/// Candidates by decreasing ratio (ties: lower tau first, then node id).
std::vector<NodeIndex> ratio_ranking(const NetworkGraph& g, const RatioReport& report);

/// Candidates by decreasing bc_combined with the given mu (ties by node id).
std::vector<NodeIndex> bc_ranking(const NetworkGraph& g, std::span<const NodeIndex> candidates,
                                  double mu);

/// First `count` nodes of the ranking with tau strictly below tau(u).
std::vector<NodeIndex> select_replication_targets(const NetworkGraph& g, NodeIndex u,
                                                  std::span<const NodeIndex> ranking,
                                                  std::size_t count);
NodeIndex select_replication_target(const NetworkGraph& g, NodeIndex u,
                                    std::span<const NodeIndex> ranking);

/// u closes random channels until the closed local balance covers tau(v),
/// then copies every channel of v with capacity + epsilon and fees undercut
/// by zeta / iota (only where v's fee is positive, floored at 0). The far
/// side keeps the fee it charges v.
StrategyMove replicate(NetworkGraph& g, NodeIndex u, NodeIndex v, const ReplicationParams& params,
                       Rng& rng, MoveKind kind = MoveKind::ReplicateRatio);

/// clamp(ceil(-ln(1 - U) * scale), 1, L) for U in (0, 1).
Msat discretized_exponential_fee(double uniform, double scale, Msat limit);
/// Same with a fresh U; `raw` receives -ln(1 - U) * scale before rounding.
Msat draw_exponential_fee(Rng& rng, double scale, Msat limit, double* raw = nullptr);

enum class FeeScope { AllChannels, OneChannel };

/// New fee on u's outgoing directions (all, or one picked at random),
/// stored as fee_base with fee_ppm = 0.
StrategyMove perturb_random_fee(NetworkGraph& g, NodeIndex u, double scale, Msat limit, Rng& rng,
                                FeeScope scope = FeeScope::AllChannels, MoveLocks* locks = nullptr);

/// Median of z's enabled outgoing fees at `reference_amount` (even count:
/// mean rounded to nearest). 0 when z charges nothing anywhere.
Msat median_outgoing_fee(const NetworkGraph& g, NodeIndex z, Sat reference_amount);

inline constexpr Sat kReferenceAmount = 10'000;

/// Closes a random channel u-v (v must keep at least one channel), hands
/// half to v's remaining channels and funds a single-funded channel u-z for
/// a random z with the other half. The new channel charges z's median fee
/// in both directions.
StrategyMove perturb_random_channel_single(NetworkGraph& g, NodeIndex u, Rng& rng,
                                           MoveLocks* locks = nullptr,
                                           Sat reference_amount = kReferenceAmount);

/// Closes a random channel u-v and reopens the same capacity, dual funded,
/// with a random w whose smallest channel exceeds c / (2 deg(u)). v gets
/// half the closed capacity; w's half is debited from its channels in
/// proportion to their capacity. Not applied when no w qualifies.
StrategyMove perturb_random_channel_dual(NetworkGraph& g, NodeIndex u, Rng& rng,
                                         MoveLocks* locks = nullptr,
                                         Sat reference_amount = kReferenceAmount);

/// Whether w may take the replacement channel for a close of `closed_capacity`
/// by a node of degree `closer_degree` (degree counted before the close).
bool dual_funding_eligible(const NetworkGraph& g, NodeIndex w, Sat closed_capacity,
                           std::size_t closer_degree);

}  // namespace pcn
