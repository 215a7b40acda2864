#include "sadiv/wire.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/core.h>

#include "sadiv/errors.hpp"

namespace sadiv {

namespace {

void check_width(unsigned l_bits) {
  if (l_bits != 8 && l_bits != 16)
    throw std::invalid_argument(fmt::format("unsupported symbol width L = {}", l_bits));
}

void put_le(std::ostream& out, std::uint64_t v, unsigned bytes) {
  std::array<char, 8> buf{};
  for (unsigned i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(buf.data(), bytes);
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

  std::uint64_t le(unsigned bytes) {
    std::array<unsigned char, 8> buf{};
    in_.read(reinterpret_cast<char*>(buf.data()), bytes);
    if (in_.gcount() != static_cast<std::streamsize>(bytes))
      throw FormatError(fmt::format("truncated record at byte {}", offset_));
    offset_ += bytes;
    std::uint64_t v = 0;
    for (unsigned i = 0; i < bytes; ++i) v |= std::uint64_t{buf[i]} << (8 * i);
    return v;
  }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace

void write_coded_packets(std::ostream& out, std::span<const CodedPacket> packets, unsigned l_bits) {
  check_width(l_bits);
  const unsigned symbol_bytes = l_bits / 8;
  for (const CodedPacket& p : packets) {
    put_le(out, p.relay, 1);
    put_le(out, p.coefficients.size(), 4);
    for (const CoefficientEntry& e : p.coefficients) {
      put_le(out, e.id.slot, 4);
      put_le(out, e.id.arrival_index, 2);
      put_le(out, e.value, symbol_bytes);
    }
    for (Element s : p.payload) put_le(out, s, symbol_bytes);
  }
  if (!out) throw std::runtime_error("failed writing coded packets");
}

std::vector<CodedPacket> read_coded_packets(std::istream& in, unsigned l_bits,
                                            std::size_t payload_symbols) {
  check_width(l_bits);
  const unsigned symbol_bytes = l_bits / 8;
  Reader r(in);
  std::vector<CodedPacket> out;
  while (!r.at_end()) {
    CodedPacket p;
    p.relay = static_cast<std::uint8_t>(r.le(1));
    const auto count = r.le(4);
    p.coefficients.reserve(std::min<std::uint64_t>(count, 1u << 20));
    for (std::uint64_t i = 0; i < count; ++i) {
      CoefficientEntry e;
      e.id.slot = static_cast<std::uint32_t>(r.le(4));
      e.id.arrival_index = static_cast<std::uint16_t>(r.le(2));
      e.value = static_cast<Element>(r.le(symbol_bytes));
      if (e.value == 0) throw FormatError("zero coefficient in coded packet");
      if (!p.coefficients.empty() && !(p.coefficients.back().id < e.id))
        throw FormatError("coefficients not in strictly increasing id order");
      p.coefficients.push_back(e);
    }
    p.payload.resize(payload_symbols);
    for (Element& s : p.payload) s = static_cast<Element>(r.le(symbol_bytes));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace sadiv
