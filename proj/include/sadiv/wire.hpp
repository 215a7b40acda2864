#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "sadiv/rlnc.hpp"

namespace sadiv {

// Coded-packet stream: records back to back, no header.
//
//   relay             1 byte
//   coefficient count 4 bytes, little endian
//   per coefficient   slot (4 bytes LE), arrival_index (2 bytes LE), value (L/8 bytes LE)
//   payload           m * L/8 bytes, each symbol little endian
//
// L and m are agreed out of band.

void write_coded_packets(std::ostream& out, std::span<const CodedPacket> packets, unsigned l_bits);

/// Reads records until end of stream. Throws FormatError on a truncated
/// record, a zero coefficient or coefficients out of id order.
std::vector<CodedPacket> read_coded_packets(std::istream& in, unsigned l_bits,
                                            std::size_t payload_symbols);

}  // namespace sadiv
