#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace pcn {

// Capacities are whole satoshis; balances and fees are millisatoshis.
using Sat = std::int64_t;
using Msat = std::int64_t;

inline constexpr Msat kMsatPerSat = 1000;

using NodeIndex = std::uint32_t;
using ChannelIndex = std::uint32_t;

inline constexpr NodeIndex kNoNode = std::numeric_limits<NodeIndex>::max();
inline constexpr ChannelIndex kNoChannel = std::numeric_limits<ChannelIndex>::max();

// Which endpoint of a channel. A is node1 in snapshot terms.
enum class Side : std::uint8_t { A = 0, B = 1 };

constexpr Side opposite(Side s) { return s == Side::A ? Side::B : Side::A; }
constexpr std::size_t idx(Side s) { return static_cast<std::size_t>(s); }

struct FeePolicy {
  Msat fee_base = 0;
  Msat fee_ppm = 0;
  bool enabled = true;

  friend bool operator==(const FeePolicy&, const FeePolicy&) = default;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GraphError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcn
