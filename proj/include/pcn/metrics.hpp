#pragma once

#include <span>
#include <string>
#include <vector>

#include "pcn/graph.hpp"
#include "pcn/traffic.hpp"

namespace pcn {

struct RatioEntry {
  NodeIndex node = kNoNode;
  Msat revenue = 0;
  Msat tau = 0;
  double ratio = 0;  // revenue / tau
};

struct RatioBucket {
  std::size_t index = 0;
  std::size_t size = 0;
  double mean_ratio = 0;
};

struct RatioReport {
  std::vector<RatioEntry> nodes;  // decreasing capacity order, tau > 0 only
  std::vector<RatioBucket> buckets;

  const RatioEntry* find(NodeIndex n) const;
};

/// Ratios for `ordered` (a top-k list, highest tau first) and the means over
/// consecutive groups of bucket_size. Nodes that routed nothing count as 0.
RatioReport compute_ratios(const RevenueMap& revenue, const NetworkGraph& g,
                           std::span<const NodeIndex> ordered, std::size_t bucket_size = 200);
RatioReport compute_ratios(const RevenueMap& revenue, const NetworkGraph& g,
                           std::size_t bucket_size = 200);

enum class Measure {
  NodeCapacity,
  Degree,
  Closeness,
  Eigenvector,
  BcUnit,
  BcFee,
  BcInvCap,
  BcCombined,
};

std::string to_string(Measure m);

struct CentralityVector {
  Measure measure = Measure::Degree;
  std::vector<double> score;  // indexed by NodeIndex
};

class MetricsError : public Error {
 public:
  using Error::Error;
};

// Edge weight of the BC variants. Combined: 15e9 / c + mu * fee_ppm.
inline constexpr double kCombinedCapacityScale = 15'000'000'000.0;
double bc_weight(Measure variant, const Channel& ch, Side from, double mu);

/// Shortest-path betweenness over enabled directions, parallel channels
/// collapsed to their lightest weight per direction. Unnormalized: the sum
/// over ordered pairs (s, t) of the fraction of s-t shortest paths through v.
/// Zero-weight arcs only count towards nodes not yet settled when the arc is
/// scanned.
CentralityVector betweenness(const NetworkGraph& g, Measure variant, double mu = 0);

/// Hop-count closeness (Wasserman-Faust form for partially reachable nodes).
CentralityVector closeness(const NetworkGraph& g);

/// Principal eigenvector of the undirected channel-count adjacency, unit
/// L2 norm. Throws MetricsError after max_iterations without convergence.
CentralityVector eigenvector(const NetworkGraph& g, double tolerance = 1e-9,
                             std::size_t max_iterations = 10'000);

CentralityVector degree_centrality(const NetworkGraph& g);
CentralityVector node_capacity(const NetworkGraph& g);

CentralityVector centrality(const NetworkGraph& g, Measure m, double mu = 0);

class UndefinedCorrelation : public MetricsError {
 public:
  using MetricsError::MetricsError;
};

/// 1-based ranks, ties share the average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average-rank vectors.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace pcn
