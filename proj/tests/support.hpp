#pragma once

#include <string>
#include <vector>

#include "pcn/graph.hpp"

namespace pcn::test {

struct Edge {
  std::string id;
  std::string a, b;
  Sat capacity;
  FeePolicy pa{0, 0, true};
  FeePolicy pb{0, 0, true};
};

inline NetworkGraph make_graph(const std::vector<std::string>& nodes, const std::vector<Edge>& edges) {
  NetworkGraph g;
  for (const auto& n : nodes) g.add_node(n);
  for (const auto& e : edges) {
    Channel ch;
    ch.id = e.id;
    ch.endpoint = {g.require_node(e.a), g.require_node(e.b)};
    ch.capacity = e.capacity;
    const Msat total = e.capacity * kMsatPerSat;
    ch.balance = {total - total / 2, total / 2};
    ch.policy = {e.pa, e.pb};
    g.add_channel(std::move(ch));
  }
  return g;
}

inline NodeIndex N(const NetworkGraph& g, const std::string& id) { return g.require_node(id); }

inline ChannelIndex C(const NetworkGraph& g, const std::string& id) { return *g.find_channel(id); }

}  // namespace pcn::test
