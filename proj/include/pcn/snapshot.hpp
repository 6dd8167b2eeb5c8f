#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include "pcn/graph.hpp"

namespace pcn {

class SnapshotError : public Error {
 public:
  using Error::Error;
};

// Reads the describegraph-style JSON schema: {"nodes": [...], "edges": [...]}.
// Channels without a policy for one side get that direction disabled.
// Balances start at capacity/2 per side unless the optional
// node1_balance_msat / node2_balance_msat fields are present.
NetworkGraph load_snapshot(std::istream& in);
NetworkGraph load_snapshot(const std::filesystem::path& path);
NetworkGraph parse_snapshot(const std::string& text);

// Same schema, nodes in index order and channels in slot order. Includes the
// balance fields so a reload reproduces the graph exactly.
std::string export_snapshot(const NetworkGraph& g);

}  // namespace pcn
