#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sadiv/channel.hpp"
#include "sadiv/galois.hpp"
#include "sadiv/packet.hpp"
#include "sadiv/random.hpp"
#include "sadiv/uplink.hpp"

namespace sadiv {

/// Downlink slots per uplink slot granted to each relay.
struct RateVector {
  std::vector<double> per_relay;
  double slack = 0.0;
};

/// Symmetric corner of the downlink rate region: every relay gets
/// (1 + slack) * max_s rate_bound(p, s) / s.
RateVector allocate_rates(const ChannelParams& p, double slack);

/// True if every nonempty subset S has sum_{k in S} R_k >= rate_bound(p, |S|)
/// (up to a relative 1e-12).
bool in_rate_region(const RateVector& r, const ChannelParams& p);

/// ceil(n * R_k) coded packets per relay.
std::vector<std::size_t> slot_budgets(const RateVector& r, std::uint64_t n_slots);

/// Symmetric budgets sized from the realized ledger:
/// max over S of ceil(exclusive_count(S) / |S|) for every relay.
std::vector<std::size_t> genie_budgets(const CollectionLedger& ledger);

struct SourcePacket {
  PacketId id;
  std::vector<Element> payload;
};

/// Payload of packet `id`, a deterministic function of (seed, id). Every
/// relay that decoded the packet therefore holds the same symbols.
std::vector<Element> source_payload(const GaloisField& f, std::uint64_t seed, PacketId id,
                                    std::size_t payload_symbols);

/// Source packets held by `relay` in id order.
std::vector<SourcePacket> relay_sources(const CollectionLedger& ledger, unsigned relay,
                                        const GaloisField& f, std::uint64_t seed,
                                        std::size_t payload_symbols);

struct CoefficientEntry {
  PacketId id;
  Element value = 0;

  friend bool operator==(const CoefficientEntry&, const CoefficientEntry&) = default;
};

/// One downlink transmission: a random combination of the relay's packets.
/// `coefficients` is sorted by id, every value is nonzero, and only packets
/// the relay holds appear (erasures carry no coefficient).
struct CodedPacket {
  std::uint8_t relay = 0;
  std::vector<CoefficientEntry> coefficients;
  std::vector<Element> payload;

  friend bool operator==(const CodedPacket&, const CodedPacket&) = default;
};

/// Emits `n_coded` packets from `held`, coefficients uniform on the nonzero
/// field elements. Packets are drawn sequentially from `rng`, so a larger
/// budget extends a smaller one.
std::vector<CodedPacket> encode_relay(std::uint8_t relay, std::span<const SourcePacket> held,
                                      std::size_t n_coded, std::size_t payload_symbols,
                                      const GaloisField& f, RandomStream& rng);

/// Encodes every relay of `ledger` with its own substream of `seed`.
std::vector<CodedPacket> encode_all(const CollectionLedger& ledger,
                                    std::span<const std::size_t> budgets, const GaloisField& f,
                                    std::uint64_t seed, std::size_t payload_symbols);

/// Equations available to a relay subset against the variables only it can
/// resolve.
struct SubsetDiagnostic {
  RelaySet subset = 0;
  std::size_t equations = 0;
  std::size_t required_variables = 0;
};

struct DecodeReport {
  std::size_t n_variables = 0;
  std::size_t rank = 0;
  std::vector<SourcePacket> recovered;  // id order
  bool success = false;
  std::vector<SubsetDiagnostic> subset_diagnostics;  // indexed by mask - 1
};

/// Solves the duplicate-merged system at the gateway.
///
/// `side_information` plays the role of the erasure pattern known from packet
/// headers: it fixes the variable set (the union of collected packets) and
/// which relay may reference which packet. Throws CorruptionError when a
/// coefficient names a packet its relay never collected or when the system
/// is inconsistent.
DecodeReport gateway_decode(std::span<const CodedPacket> coded, const GaloisField& f,
                            const CollectionLedger& side_information);

/// As above, but each relay's collected set is read off its coefficient
/// supports. Relays that sent nothing are taken to hold nothing.
DecodeReport gateway_decode(std::span<const CodedPacket> coded, const GaloisField& f,
                            unsigned k_relays);

struct RankCheck {
  bool ok = true;
  std::vector<RelaySet> violations;
};

/// Subsets S whose equation count falls short of sum_{L subset of S} |P_L|.
RankCheck verify_rank_conditions(const DecodeReport& report);

struct DownlinkConfig {
  ChannelParams params;
  std::uint64_t n_slots = 1000;
  std::uint64_t seed = 1;
  double slack = 0.05;
  std::size_t payload_symbols = 16;
  bool genie = false;
};

/// One end-to-end experiment: uplink, encoding at every relay, decoding.
struct DownlinkTrial {
  std::size_t union_count = 0;
  std::vector<std::size_t> budgets;
  DecodeReport report;
  RankCheck conditions;
  bool bit_exact = true;  // every recovered payload matches its source
};

DownlinkTrial run_downlink_trial(const DownlinkConfig& cfg, const GaloisField& f);

}  // namespace sadiv
