#include "pcn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <tuple>

#include "pcn/parallel.hpp"

namespace pcn {

const RatioEntry* RatioReport::find(NodeIndex n) const {
  for (const auto& e : nodes) {
    if (e.node == n) return &e;
  }
  return nullptr;
}

RatioReport compute_ratios(const RevenueMap& revenue, const NetworkGraph& g,
                           std::span<const NodeIndex> ordered, std::size_t bucket_size) {
  if (bucket_size < 1) throw MetricsError("bucket_size must be >= 1");
  RatioReport report;
  report.nodes.reserve(ordered.size());
  for (NodeIndex n : ordered) {
    const Msat tau = g.tau(n);
    if (tau <= 0) continue;
    auto it = revenue.find(n);
    const Msat rev = it == revenue.end() ? 0 : it->second;
    report.nodes.push_back({n, rev, tau, static_cast<double>(rev) / static_cast<double>(tau)});
  }
  for (std::size_t start = 0; start < report.nodes.size(); start += bucket_size) {
    const std::size_t end = std::min(report.nodes.size(), start + bucket_size);
    double sum = 0;
    for (std::size_t i = start; i < end; ++i) sum += report.nodes[i].ratio;
    report.buckets.push_back({report.buckets.size(), end - start,
                              sum / static_cast<double>(end - start)});
  }
  return report;
}

RatioReport compute_ratios(const RevenueMap& revenue, const NetworkGraph& g,
                           std::size_t bucket_size) {
  const auto ordered = top_k_by_capacity(g, g.node_count());
  return compute_ratios(revenue, g, ordered, bucket_size);
}

std::string to_string(Measure m) {
  switch (m) {
    case Measure::NodeCapacity:
      return "node_capacity";
    case Measure::Degree:
      return "degree";
    case Measure::Closeness:
      return "closeness";
    case Measure::Eigenvector:
      return "eigenvector";
    case Measure::BcUnit:
      return "bc_unit";
    case Measure::BcFee:
      return "bc_fee";
    case Measure::BcInvCap:
      return "bc_invcap";
    case Measure::BcCombined:
      return "bc_combined";
  }
  return "?";
}

double bc_weight(Measure variant, const Channel& ch, Side from, double mu) {
  const auto ppm = static_cast<double>(ch.policy[idx(from)].fee_ppm);
  const auto cap = static_cast<double>(ch.capacity);
  switch (variant) {
    case Measure::BcUnit:
      return 1.0;
    case Measure::BcFee:
      return ppm;
    case Measure::BcInvCap:
      return 1.0 / cap;
    case Measure::BcCombined:
      return kCombinedCapacityScale / cap + mu * ppm;
    default:
      throw MetricsError("not a betweenness variant: " + to_string(variant));
  }
}

namespace {

struct WeightedArc {
  NodeIndex to;
  double weight;
};

// Simple digraph: one arc per (u, v) direction with the lightest weight.
std::vector<std::vector<WeightedArc>> collapse(const NetworkGraph& g, Measure variant, double mu) {
  std::vector<std::vector<WeightedArc>> adj(g.node_count());
  for (NodeIndex u = 0; u < g.node_count(); ++u) {
    auto& out = adj[u];
    for (ChannelIndex c : g.incident(u)) {
      const Channel& ch = g.channel(c);
      const Side from = ch.side_of(u);
      if (!ch.policy[idx(from)].enabled) continue;
      const double w = bc_weight(variant, ch, from, mu);
      if (!(w >= 0)) throw MetricsError("negative or NaN betweenness weight on " + ch.id);
      out.push_back({ch.other(u), w});
    }
    std::sort(out.begin(), out.end(), [](const WeightedArc& a, const WeightedArc& b) {
      return std::tie(a.to, a.weight) < std::tie(b.to, b.weight);
    });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const WeightedArc& a, const WeightedArc& b) { return a.to == b.to; }),
              out.end());
  }
  return adj;
}

// Brandes single-source pass; adds the dependencies of `source` into delta_sum.
void brandes_source(const std::vector<std::vector<WeightedArc>>& adj, NodeIndex source,
                    std::vector<double>& delta_sum) {
  const std::size_t n = adj.size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<double> sigma(n, 0.0);
  std::vector<double> delta(n, 0.0);
  std::vector<std::vector<NodeIndex>> preds(n);
  std::vector<char> settled(n, 0);
  std::vector<NodeIndex> order;
  order.reserve(n);

  using Entry = std::pair<double, NodeIndex>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  dist[source] = 0;
  sigma[source] = 1;
  pq.emplace(0.0, source);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (settled[u] || d != dist[u]) continue;
    settled[u] = 1;
    order.push_back(u);
    for (const auto& arc : adj[u]) {
      const NodeIndex v = arc.to;
      if (settled[v]) continue;
      const double nd = d + arc.weight;
      if (nd < dist[v]) {
        dist[v] = nd;
        sigma[v] = sigma[u];
        preds[v].assign(1, u);
        pq.emplace(nd, v);
      } else if (nd == dist[v]) {
        sigma[v] += sigma[u];
        preds[v].push_back(u);
      }
    }
  }
  for (std::size_t i = order.size(); i-- > 0;) {
    const NodeIndex w = order[i];
    for (NodeIndex v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
    if (w != source) delta_sum[w] += delta[w];
  }
}

}  // namespace

CentralityVector betweenness(const NetworkGraph& g, Measure variant, double mu) {
  const auto adj = collapse(g, variant, mu);
  const std::size_t n = g.node_count();
  // Fixed-size chunks summed in chunk order: the result does not depend on
  // the number of worker threads.
  constexpr std::size_t kChunk = 32;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(n, 0.0));
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t s = c * kChunk; s < end; ++s) {
      brandes_source(adj, static_cast<NodeIndex>(s), partial[c]);
    }
  });
  CentralityVector out{variant, std::vector<double>(n, 0.0)};
  for (const auto& p : partial) {
    for (std::size_t v = 0; v < n; ++v) out.score[v] += p[v];
  }
  return out;
}

CentralityVector closeness(const NetworkGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<NodeIndex>> adj(n);
  for (NodeIndex u = 0; u < n; ++u) {
    for (ChannelIndex c : g.incident(u)) {
      const Channel& ch = g.channel(c);
      if (ch.policy[idx(ch.side_of(u))].enabled) adj[u].push_back(ch.other(u));
    }
  }
  CentralityVector out{Measure::Closeness, std::vector<double>(n, 0.0)};
  parallel_for(n, [&](std::size_t s) {
    std::vector<std::int64_t> dist(n, -1);
    std::queue<NodeIndex> q;
    dist[s] = 0;
    q.push(static_cast<NodeIndex>(s));
    std::int64_t total = 0;
    std::size_t reached = 1;
    while (!q.empty()) {
      const NodeIndex u = q.front();
      q.pop();
      for (NodeIndex v : adj[u]) {
        if (dist[v] >= 0) continue;
        dist[v] = dist[u] + 1;
        total += dist[v];
        ++reached;
        q.push(v);
      }
    }
    if (total > 0 && n > 1) {
      const double r = static_cast<double>(reached - 1);
      out.score[s] = (r / static_cast<double>(total)) * (r / static_cast<double>(n - 1));
    }
  });
  return out;
}

CentralityVector eigenvector(const NetworkGraph& g, double tolerance, std::size_t max_iterations) {
  const std::size_t n = g.node_count();
  CentralityVector out{Measure::Eigenvector, {}};
  if (n == 0) return out;
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> next(n);
  const auto live = g.live_channels();
  // Iterate with A + I: same eigenvectors, and the shift keeps bipartite
  // graphs from oscillating.
  for (std::size_t it = 1; it <= max_iterations; ++it) {
    next = x;
    for (ChannelIndex c : live) {
      const auto [a, b] = g.channel(c).endpoint;
      next[a] += x[b];
      next[b] += x[a];
    }
    double norm = 0;
    for (double v : next) norm += v * v;
    norm = std::sqrt(norm);
    double diff = 0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= norm;
      diff = std::max(diff, std::abs(next[i] - x[i]));
    }
    x.swap(next);
    if (diff <= tolerance * std::max(1e-300, *std::max_element(x.begin(), x.end()))) {
      out.score = std::move(x);
      return out;
    }
  }
  throw MetricsError("eigenvector centrality did not converge after " +
                     std::to_string(max_iterations) + " iterations");
}

CentralityVector degree_centrality(const NetworkGraph& g) {
  CentralityVector out{Measure::Degree, std::vector<double>(g.node_count())};
  for (NodeIndex n = 0; n < g.node_count(); ++n) out.score[n] = static_cast<double>(g.degree(n));
  return out;
}

CentralityVector node_capacity(const NetworkGraph& g) {
  CentralityVector out{Measure::NodeCapacity, std::vector<double>(g.node_count())};
  for (NodeIndex n = 0; n < g.node_count(); ++n) out.score[n] = static_cast<double>(g.tau(n));
  return out;
}

CentralityVector centrality(const NetworkGraph& g, Measure m, double mu) {
  switch (m) {
    case Measure::NodeCapacity:
      return node_capacity(g);
    case Measure::Degree:
      return degree_centrality(g);
    case Measure::Closeness:
      return closeness(g);
    case Measure::Eigenvector:
      return eigenvector(g);
    default:
      return betweenness(g, m, mu);
  }
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw MetricsError("spearman: vectors differ in length");
  if (x.size() < 2) throw MetricsError("spearman: need at least two observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw UndefinedCorrelation("spearman: a rank vector is constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace pcn
