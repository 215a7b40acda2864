#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sadiv/channel.hpp"
#include "sadiv/packet.hpp"
#include "sadiv/random.hpp"

namespace sadiv {

/// Largest relay count the simulator and ledgers accept.
inline constexpr unsigned kMaxSimulatedRelays = 20;

/// What one relay saw in one slot. `unfaded` lists the arrival indices whose
/// packets reached the relay; a packet is decoded only if it is alone there.
struct RelayObservation {
  std::optional<PacketId> packet;
  std::vector<std::uint16_t> unfaded;

  bool erased() const { return !packet.has_value(); }
};

struct SlotOutcome {
  std::uint32_t slot = 0;
  std::uint32_t arrivals = 0;
  std::vector<RelayObservation> per_relay;
};

/// Point estimate with its standard error.
struct Estimate {
  double mean = 0.0;
  double std_err = 0.0;
  std::uint64_t n_samples = 0;

  /// Sample mean and standard error of the mean from running sums.
  static Estimate from_sums(double sum, double sum_sq, std::uint64_t n);
  /// Binomial proportion successes / n.
  static Estimate proportion(std::uint64_t successes, std::uint64_t n);
};

/// Sets A_k^n of packets each relay decoded over a horizon of n slots.
///
/// Besides the per-relay sets the ledger keeps, for every collected packet,
/// the mask of relays holding it. The two views are derived independently so
/// set-algebra results can be cross-checked against mask counting.
class CollectionLedger {
 public:
  struct Entry {
    PacketId id;
    RelaySet holders;
  };

  CollectionLedger() = default;

  /// Sets may be unsorted and must not contain duplicates or slots outside
  /// [1, n_slots]. Throws std::invalid_argument otherwise.
  CollectionLedger(std::uint64_t n_slots, std::vector<std::vector<PacketId>> per_relay_sets);

  std::uint64_t n_slots() const { return n_slots_; }
  unsigned relay_count() const { return static_cast<unsigned>(sets_.size()); }
  std::span<const PacketId> relay_set(unsigned relay) const { return sets_.at(relay); }
  std::size_t union_count() const { return membership_.size(); }

  /// Collected packets in id order with their holder masks.
  std::span<const Entry> membership() const { return membership_; }

  /// |intersection of A_k over k in s|, by sorted-set intersection.
  std::size_t intersection_count(RelaySet s) const;

  /// |union of A_k over S minus union of A_k over the complement|, by set algebra.
  std::size_t exclusive_count(RelaySet s) const;

  /// |P_S| for every nonempty S: packets held by exactly the relays in S.
  /// Indexed by mask; entry 0 is always 0.
  std::vector<std::size_t> partition_counts() const;

 private:
  void check_subset(RelaySet s) const;

  std::uint64_t n_slots_ = 0;
  std::vector<std::vector<PacketId>> sets_;
  std::vector<Entry> membership_;
};

/// Per-slot statistics gathered while the uplink runs.
struct UplinkStatistics {
  Estimate union_rate;              // distinct collected packets per slot
  std::vector<Estimate> relay_rate; // decoded packets per slot, per relay
};

enum class TraceMode { kStreaming, kFull };

struct UplinkRun {
  CollectionLedger ledger;
  UplinkStatistics stats;
  std::vector<SlotOutcome> trace;  // empty in streaming mode
};

/// Simulates slot `slot` (1-based) drawing from `rng`.
SlotOutcome simulate_slot(const ChannelParams& p, std::uint32_t slot, RandomStream& rng);

/// Runs n slots; slot t uses substream t of `seed`.
UplinkRun run_uplink(const ChannelParams& p, std::uint64_t n_slots, std::uint64_t seed,
                     TraceMode mode = TraceMode::kStreaming);

/// Probe-packet loss rate: each trial places one packet among Poisson(rho)
/// interferers and records whether no relay decodes it.
Estimate estimate_plr(const ChannelParams& p, std::uint64_t n_trials, std::uint64_t seed);

/// Slots in which one relay decoded x while the other saw exactly {x, y}
/// unfaded; each such slot yields one extra packet through SIC.
/// Throws UnsupportedConfigurationError unless every slot has two relays.
std::size_t sic_postprocess_two(std::span<const SlotOutcome> trace);

/// Distinct packets collected by the relay set in one slot.
std::size_t collected_in_slot(const SlotOutcome& s);

/// Pr{C = c | U = u}, c = 0..K, by enumerating all 2^(uK) erasure patterns.
/// Throws EnumerationTooLargeError when u*K > 24.
std::vector<double> brute_force_collection_pmf(unsigned u, unsigned k_relays, double eps);

/// Same law, enumerating each relay's 2^u erasure patterns separately and
/// then every joint relay outcome, (u+1)^K of them. Exact; usable for u*K
/// beyond the joint bound. Throws EnumerationTooLargeError past u = 26 or
/// (u+1)^K > 5e7.
std::vector<double> relaywise_collection_pmf(unsigned u, unsigned k_relays, double eps);

/// Uplink throughput by Poisson-weighted enumeration of erasure patterns,
/// truncated once the remaining Poisson tail mass is below 1e-12.
double enumerated_throughput(const ChannelParams& p);

}  // namespace sadiv
