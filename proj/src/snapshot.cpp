#include "pcn/snapshot.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pcn {
namespace {

using nlohmann::json;

std::int64_t parse_int_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SnapshotError(where + "." + key + ": missing field");
  if (it->is_number_integer()) return it->get<std::int64_t>();
  if (!it->is_string()) throw SnapshotError(where + "." + key + ": expected string-encoded integer");
  const auto& s = it->get_ref<const std::string&>();
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw SnapshotError(where + "." + key + ": not an integer: \"" + s + "\"");
  }
  return value;
}

std::string parse_string_field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw SnapshotError(where + "." + key + ": missing or not a string");
  }
  return it->get<std::string>();
}

FeePolicy parse_policy(const json& edge, const char* key, const std::string& where) {
  auto it = edge.find(key);
  if (it == edge.end() || it->is_null()) return FeePolicy{0, 0, false};
  if (!it->is_object()) throw SnapshotError(where + "." + key + ": expected object or null");
  const std::string here = where + "." + key;
  FeePolicy p;
  p.fee_base = parse_int_field(*it, "fee_base_msat", here);
  p.fee_ppm = parse_int_field(*it, "fee_rate_milli_msat", here);
  p.enabled = true;
  if (auto d = it->find("disabled"); d != it->end()) {
    if (!d->is_boolean()) throw SnapshotError(here + ".disabled: expected bool");
    p.enabled = !d->get<bool>();
  }
  if (p.fee_base < 0 || p.fee_ppm < 0) throw SnapshotError(here + ": negative fee");
  return p;
}

std::string line_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json policy_json(const FeePolicy& p) {
  return json{{"fee_base_msat", std::to_string(p.fee_base)},
              {"fee_rate_milli_msat", std::to_string(p.fee_ppm)},
              {"disabled", !p.enabled}};
}

}  // namespace

NetworkGraph parse_snapshot(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SnapshotError("snapshot parse error at " + line_context(text, e.byte) + ": " +
                        e.what());
  }
  if (!doc.is_object()) throw SnapshotError("snapshot: top level must be an object");
  auto nodes = doc.find("nodes");
  auto edges = doc.find("edges");
  if (nodes == doc.end() || !nodes->is_array()) throw SnapshotError("nodes: missing array");
  if (edges == doc.end() || !edges->is_array()) throw SnapshotError("edges: missing array");

  NetworkGraph g;
  for (std::size_t i = 0; i < nodes->size(); ++i) {
    const auto& n = (*nodes)[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (!n.is_object()) throw SnapshotError(where + ": expected object");
    std::string id = parse_string_field(n, "pub_key", where);
    std::string alias;
    if (auto a = n.find("alias"); a != n.end() && a->is_string()) alias = a->get<std::string>();
    if (g.find_node(id)) throw SnapshotError(where + ".pub_key: duplicate node " + id);
    g.add_node(std::move(id), std::move(alias));
  }

  for (std::size_t i = 0; i < edges->size(); ++i) {
    const auto& e = (*edges)[i];
    const std::string where = "edges[" + std::to_string(i) + "]";
    if (!e.is_object()) throw SnapshotError(where + ": expected object");
    Channel ch;
    ch.id = parse_string_field(e, "channel_id", where);
    if (g.find_channel(ch.id)) throw SnapshotError(where + ".channel_id: duplicate channel " + ch.id);
    for (int s = 0; s < 2; ++s) {
      const char* key = s == 0 ? "node1_pub" : "node2_pub";
      const std::string pub = parse_string_field(e, key, where);
      auto n = g.find_node(pub);
      if (!n) throw SnapshotError(where + "." + key + ": unknown node " + pub);
      ch.endpoint[s] = *n;
    }
    if (ch.endpoint[0] == ch.endpoint[1]) throw SnapshotError(where + ": self-channel");
    ch.capacity = parse_int_field(e, "capacity", where);
    if (ch.capacity < 1) {
      throw SnapshotError(where + ".capacity: must be at least 1 sat, got " +
                          std::to_string(ch.capacity));
    }
    ch.policy[0] = parse_policy(e, "node1_policy", where);
    ch.policy[1] = parse_policy(e, "node2_policy", where);
    const Msat total = ch.capacity * kMsatPerSat;
    if (e.contains("node1_balance_msat") || e.contains("node2_balance_msat")) {
      ch.balance[0] = parse_int_field(e, "node1_balance_msat", where);
      ch.balance[1] = parse_int_field(e, "node2_balance_msat", where);
      if (ch.balance[0] < 0 || ch.balance[1] < 0 || ch.balance[0] + ch.balance[1] != total) {
        throw SnapshotError(where + ": balances do not sum to capacity");
      }
    } else {
      ch.balance[1] = total / 2;
      ch.balance[0] = total - ch.balance[1];
    }
    g.add_channel(std::move(ch));
  }
  return g;
}

NetworkGraph load_snapshot(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_snapshot(buf.str());
}

NetworkGraph load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open snapshot: " + path.string());
  return load_snapshot(in);
}

std::string export_snapshot(const NetworkGraph& g) {
  json nodes = json::array();
  for (NodeIndex n = 0; n < g.node_count(); ++n) {
    nodes.push_back(json{{"pub_key", g.node_id(n)}, {"alias", g.node_alias(n)}});
  }
  json edges = json::array();
  for (ChannelIndex c : g.live_channels()) {
    const auto& ch = g.channel(c);
    edges.push_back(json{{"channel_id", ch.id},
                         {"node1_pub", g.node_id(ch.endpoint[0])},
                         {"node2_pub", g.node_id(ch.endpoint[1])},
                         {"capacity", std::to_string(ch.capacity)},
                         {"node1_policy", policy_json(ch.policy[0])},
                         {"node2_policy", policy_json(ch.policy[1])},
                         {"node1_balance_msat", std::to_string(ch.balance[0])},
                         {"node2_balance_msat", std::to_string(ch.balance[1])}});
  }
  return json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}}.dump(1) + "\n";
}

}  // namespace pcn
