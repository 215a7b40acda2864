#pragma once

#include <bit>
#include <compare>
#include <cstdint>

namespace sadiv {

/// Identifies a user packet by its slot (1-based) and its arrival index
/// within that slot (1-based). Ordered by slot, then arrival index.
struct PacketId {
  std::uint32_t slot = 0;
  std::uint16_t arrival_index = 0;

  friend constexpr auto operator<=>(const PacketId&, const PacketId&) = default;
};

/// Subset of relays as a bitmask; bit k is relay k (0-based).
using RelaySet = std::uint32_t;

constexpr RelaySet full_relay_set(unsigned k_relays) {
  return k_relays >= 32 ? ~RelaySet{0} : (RelaySet{1} << k_relays) - 1;
}

constexpr unsigned subset_size(RelaySet s) { return static_cast<unsigned>(std::popcount(s)); }

constexpr bool contains(RelaySet s, unsigned relay) { return (s >> relay) & 1u; }

}  // namespace sadiv
