#include "pcn/traffic.hpp"

#include <numeric>

namespace pcn {

std::string to_string(Distribution d) {
  return d == Distribution::Uniform ? "uniform" : "capacity_proportional";
}

Distribution distribution_from_string(const std::string& s) {
  if (s == "uniform") return Distribution::Uniform;
  if (s == "capacity_proportional" || s == "cp") return Distribution::CapacityProportional;
  throw TrafficError("unknown traffic distribution: " + s);
}

void TrafficConfig::validate() const {
  if (count < 1) throw TrafficError("traffic count must be >= 1");
  if (amount < 1) throw TrafficError("traffic amount must be >= 1 sat");
}

EndpointSampler::EndpointSampler(const NetworkGraph& g, const TrafficConfig& cfg)
    : uniform_(cfg.distribution == Distribution::Uniform) {
  if (cfg.eligible.empty()) {
    nodes_.resize(g.node_count());
    std::iota(nodes_.begin(), nodes_.end(), NodeIndex{0});
  } else {
    nodes_ = cfg.eligible;
    for (NodeIndex n : nodes_) {
      if (n >= g.node_count()) throw TrafficError("eligible set references an unknown node");
    }
  }
  if (nodes_.empty()) throw TrafficError("eligible set is empty");
  if (!uniform_) {
    std::vector<double> w;
    w.reserve(nodes_.size());
    double total = 0;
    for (NodeIndex n : nodes_) {
      w.push_back(static_cast<double>(g.tau(n)));
      total += w.back();
    }
    if (total <= 0) throw TrafficError("capacity-proportional sampling with all-zero tau");
    weighted_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }
}

NodeIndex EndpointSampler::draw(Rng& rng) const {
  if (uniform_) return nodes_[uniform_index(rng, nodes_.size())];
  return nodes_[weighted_(rng)];
}

NodeIndex sample_endpoint(const NetworkGraph& g, const TrafficConfig& cfg, Rng& rng) {
  return EndpointSampler(g, cfg).draw(rng);
}

Msat BatchResult::total_fees() const {
  Msat sum = 0;
  for (const auto& r : records) sum += r.total_fee;
  return sum;
}

double BatchResult::mean_fee() const {
  if (records.empty()) return 0;
  return static_cast<double>(total_fees()) / static_cast<double>(records.size());
}

Msat BatchResult::revenue_of(NodeIndex n) const {
  auto it = revenue.find(n);
  return it == revenue.end() ? 0 : it->second;
}

BatchResult run_batch(NetworkGraph& g, const TrafficConfig& traffic, const RoutingConfig& routing) {
  traffic.validate();
  routing.validate();
  const EndpointSampler sampler(g, traffic);
  Rng rng = make_rng(traffic.seed, {0x7aff1c});
  // Route choice depends on policies and capacities only, which payments
  // never touch, so one table serves the whole batch.
  RouteTable routes(g, routing, traffic.amount);

  BatchResult out;
  out.records.reserve(traffic.count);
  const std::size_t ceiling = 50 * traffic.count;
  while (out.records.size() < traffic.count) {
    if (out.attempts >= ceiling) {
      throw BatchAborted("payment batch aborted after " + std::to_string(out.attempts) +
                         " attempts with " + std::to_string(out.records.size()) + " of " +
                         std::to_string(traffic.count) + " payments settled");
    }
    ++out.attempts;
    const NodeIndex sender = sampler.draw(rng);
    const NodeIndex receiver = sampler.draw(rng);
    if (sender == receiver) continue;
    auto rec = execute_along(g, sender, receiver, traffic.amount, routing,
                             routes.lookup(g, sender, receiver));
    if (!rec.ok()) continue;
    for (std::size_t i = 0; i < rec.hop_fees.size(); ++i) {
      out.revenue[rec.intermediary(g, i)] += rec.hop_fees[i];
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

}  // namespace pcn
