#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pcn/random.hpp"
#include "pcn/routing.hpp"

namespace pcn {

enum class Distribution { Uniform, CapacityProportional };

std::string to_string(Distribution d);
Distribution distribution_from_string(const std::string& s);

struct TrafficConfig {
  Distribution distribution = Distribution::Uniform;
  Sat amount = 10'000;
  std::size_t count = 10'000;  // successful payments required
  std::uint64_t seed = 0;
  std::vector<NodeIndex> eligible;  // empty = every node

  void validate() const;
};

class TrafficError : public Error {
 public:
  using Error::Error;
};

/// Draws payment endpoints: uniformly over the eligible set, or with
/// probability tau(u) / sum tau. Weights are frozen at construction.
class EndpointSampler {
 public:
  EndpointSampler(const NetworkGraph& g, const TrafficConfig& cfg);
  NodeIndex draw(Rng& rng) const;

 private:
  std::vector<NodeIndex> nodes_;
  mutable std::discrete_distribution<std::size_t> weighted_;
  bool uniform_;
};

NodeIndex sample_endpoint(const NetworkGraph& g, const TrafficConfig& cfg, Rng& rng);

class BatchAborted : public TrafficError {
 public:
  using TrafficError::TrafficError;
};

using RevenueMap = std::map<NodeIndex, Msat>;

struct BatchResult {
  std::vector<PaymentRecord> records;  // successful payments in draw order
  RevenueMap revenue;                  // msat credited to each intermediary
  std::size_t attempts = 0;

  Msat total_fees() const;
  double mean_fee() const;
  Msat revenue_of(NodeIndex n) const;
};

/// Runs payments until cfg.count succeed. Failed draws are discarded and
/// redrawn; more than 50 * count draws aborts with BatchAborted.
BatchResult run_batch(NetworkGraph& g, const TrafficConfig& traffic, const RoutingConfig& routing);

}  // namespace pcn
