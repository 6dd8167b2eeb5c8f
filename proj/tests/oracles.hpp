#pragma once

// Brute-force reference implementations used to cross-check the library.
// They work from the formulas directly and share no code with src/.

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "pcn/graph.hpp"
#include "pcn/routing.hpp"

namespace pcn::oracle {

using boost::multiprecision::cpp_int;

// base + floor(ppm * amount / 1000), in arbitrary precision.
inline cpp_int fee(std::int64_t base, std::int64_t ppm, std::int64_t amount) {
  return cpp_int(base) + cpp_int(ppm) * cpp_int(amount) / 1000;
}

inline double normalized_fee(double fee_msat, double max_fee) {
  return std::min(std::max(fee_msat, 0.0), max_fee) / max_fee;
}

// Weight of forwarding over `ch` from side `from`. The fee term belongs to
// whoever forwards; on the sender's own hop nobody does.
inline std::optional<double> weight(const Channel& ch, Side from, const RoutingConfig& cfg,
                                    Sat amount, bool first_hop) {
  const FeePolicy& p = ch.policy[from == Side::A ? 0 : 1];
  if (!p.enabled) return std::nullopt;
  const double f =
      first_hop ? 0.0
                : normalized_fee(static_cast<double>(fee(p.fee_base, p.fee_ppm, amount)),
                                 static_cast<double>(cfg.fee_norm_max));
  const double c = static_cast<double>(ch.capacity);
  switch (cfg.algorithm) {
    case Algorithm::FeeOnly:
      return f;
    case Algorithm::GreedyAlpha: {
      const double lo = static_cast<double>(cfg.cap_norm_min);
      const double hi = static_cast<double>(cfg.cap_norm_max);
      const double cn = (std::min(std::max(c, lo), hi) - lo + 1.0) / (hi - lo + 1.0);
      return f + cfg.alpha / cn;
    }
    case Algorithm::PickhardtMu: {
      const double a = static_cast<double>(amount);
      if (a > c) return std::nullopt;
      return -std::log((c + 1.0 - a) / (c + 1.0)) + cfg.mu * a * f;
    }
  }
  return std::nullopt;
}

inline std::optional<double> path_cost(const NetworkGraph& g, const Path& path,
                                       const RoutingConfig& cfg, Sat amount) {
  double total = 0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    auto w = weight(g.channel(path[i].channel), path[i].from, cfg, amount, i == 0);
    if (!w) return std::nullopt;
    total += *w;
  }
  return total;
}

// Minimum weight over every simple path, trying each parallel channel.
inline std::optional<double> min_path_weight(const NetworkGraph& g, NodeIndex s, NodeIndex t,
                                             const RoutingConfig& cfg, Sat amount) {
  std::optional<double> best;
  std::vector<char> on_path(g.node_count(), 0);
  std::function<void(NodeIndex, double, bool)> dfs = [&](NodeIndex u, double acc, bool first) {
    if (u == t) {
      if (!best || acc < *best) best = acc;
      return;
    }
    on_path[u] = 1;
    for (ChannelIndex c : g.live_channels()) {
      const Channel& ch = g.channel(c);
      if (!ch.touches(u)) continue;
      const NodeIndex v = ch.other(u);
      if (on_path[v]) continue;
      auto w = weight(ch, ch.side_of(u), cfg, amount, first);
      if (w) dfs(v, acc + *w, false);
    }
    on_path[u] = 0;
  };
  dfs(s, 0.0, true);
  return best;
}

// Betweenness on a simple weighted digraph given as a dense matrix (inf = no
// arc), by counting every shortest simple path explicitly.
inline std::vector<double> betweenness(const std::vector<std::vector<double>>& w) {
  const std::size_t n = w.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  // Floyd-Warshall distances.
  auto d = w;
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];

  std::vector<double> bc(n, 0.0);
  std::vector<char> on(n, 0);
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t || d[s][t] == inf) continue;
      double total = 0;
      std::vector<double> through(n, 0.0);
      std::function<void(std::size_t, double)> dfs = [&](std::size_t u, double acc) {
        const double tol = 1e-12 * d[s][t];
        if (u == t) {
          if (acc <= d[s][t] + tol) {
            total += 1;
            for (std::size_t k = 1; k < stack.size(); ++k) through[stack[k]] += 1;
          }
          return;
        }
        if (acc > d[s][t] + tol) return;
        for (std::size_t v = 0; v < n; ++v) {
          if (w[u][v] == inf || on[v]) continue;
          on[v] = 1;
          if (v != t) stack.push_back(v);
          dfs(v, acc + w[u][v]);
          if (v != t) stack.pop_back();
          on[v] = 0;
        }
      };
      on[s] = 1;
      stack.assign(1, s);
      dfs(s, 0.0);
      on[s] = 0;
      for (std::size_t v = 0; v < n; ++v) {
        if (v != s && v != t && total > 0) bc[v] += through[v] / total;
      }
    }
  }
  return bc;
}

}  // namespace pcn::oracle
