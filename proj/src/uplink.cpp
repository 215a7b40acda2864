#include "sadiv/uplink.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iterator>
#include <stdexcept>

#include <fmt/core.h>

#include "sadiv/errors.hpp"

namespace sadiv {

namespace {

constexpr double kMaxSimulatedLoad = 1000.0;
constexpr std::uint64_t kPlrDomain = 0x706c72;  // "plr"
constexpr unsigned kJointEnumerationBits = 24;
constexpr unsigned kOracleJointBits = 20;
constexpr double kOracleTailMass = 1e-12;

void validate_for_simulation(const ChannelParams& p) {
  p.validate();
  if (p.k_relays > kMaxSimulatedRelays)
    throw UnsupportedConfigurationError(
        fmt::format("simulation supports at most {} relays, got {}", kMaxSimulatedRelays,
                    p.k_relays));
  if (p.rho > kMaxSimulatedLoad)
    throw UnsupportedConfigurationError(
        fmt::format("simulation supports rho <= {}, got {}", kMaxSimulatedLoad, p.rho));
}

std::vector<PacketId> set_union(std::span<const PacketId> a, std::span<const PacketId> b) {
  std::vector<PacketId> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<double> power_table(double base, unsigned n) {
  std::vector<double> t(n + 1, 1.0);
  for (unsigned i = 1; i <= n; ++i) t[i] = t[i - 1] * base;
  return t;
}

/// Neumaier-compensated running sums, one per outcome. The enumerations add
/// up to 2^24 tiny weights, where plain summation loses about 1e-12.
class CompensatedPmf {
 public:
  explicit CompensatedPmf(std::size_t n) : sum_(n, 0.0), comp_(n, 0.0) {}
  void add(std::size_t i, double x) {
    const double t = sum_[i] + x;
    comp_[i] += std::abs(sum_[i]) >= std::abs(x) ? (sum_[i] - t) + x : (x - t) + sum_[i];
    sum_[i] = t;
  }
  std::vector<double> result() const {
    std::vector<double> out(sum_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sum_[i] + comp_[i];
    return out;
  }

 private:
  std::vector<double> sum_;
  std::vector<double> comp_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Estimate

Estimate Estimate::from_sums(double sum, double sum_sq, std::uint64_t n) {
  if (n == 0) return {};
  const double nd = static_cast<double>(n);
  const double mean = sum / nd;
  double se = 0.0;
  if (n > 1) {
    const double var = std::max(0.0, (sum_sq - nd * mean * mean) / (nd - 1.0));
    se = std::sqrt(var / nd);
  }
  return {mean, se, n};
}

Estimate Estimate::proportion(std::uint64_t successes, std::uint64_t n) {
  if (n == 0) return {};
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n};
}

// ---------------------------------------------------------------------------
// CollectionLedger

CollectionLedger::CollectionLedger(std::uint64_t n_slots,
                                   std::vector<std::vector<PacketId>> per_relay_sets)
    : n_slots_(n_slots), sets_(std::move(per_relay_sets)) {
  if (sets_.empty() || sets_.size() > kMaxSimulatedRelays)
    throw std::invalid_argument(
        fmt::format("ledger needs 1..{} relays, got {}", kMaxSimulatedRelays, sets_.size()));

  std::vector<Entry> tagged;
  for (unsigned k = 0; k < sets_.size(); ++k) {
    auto& s = sets_[k];
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
      throw std::invalid_argument(fmt::format("relay {} holds a duplicate packet id", k));
    for (const PacketId& id : s) {
      if (id.slot < 1 || id.slot > n_slots_ || id.arrival_index < 1)
        throw std::invalid_argument(
            fmt::format("packet ({}, {}) lies outside the {}-slot horizon", id.slot,
                        id.arrival_index, n_slots_));
      tagged.push_back({id, RelaySet{1} << k});
    }
  }
  std::sort(tagged.begin(), tagged.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });
  for (const Entry& e : tagged) {
    if (!membership_.empty() && membership_.back().id == e.id)
      membership_.back().holders |= e.holders;
    else
      membership_.push_back(e);
  }
}

void CollectionLedger::check_subset(RelaySet s) const {
  if (s == 0 || (s & ~full_relay_set(relay_count())) != 0)
    throw std::invalid_argument(
        fmt::format("relay subset {:#x} invalid for {} relays", s, relay_count()));
}

std::size_t CollectionLedger::intersection_count(RelaySet s) const {
  check_subset(s);
  std::vector<PacketId> acc;
  bool first = true;
  for (unsigned k = 0; k < relay_count(); ++k) {
    if (!contains(s, k)) continue;
    if (first) {
      acc.assign(sets_[k].begin(), sets_[k].end());
      first = false;
      continue;
    }
    std::vector<PacketId> next;
    std::set_intersection(acc.begin(), acc.end(), sets_[k].begin(), sets_[k].end(),
                          std::back_inserter(next));
    acc = std::move(next);
  }
  return acc.size();
}

std::size_t CollectionLedger::exclusive_count(RelaySet s) const {
  check_subset(s);
  std::vector<PacketId> inside;
  std::vector<PacketId> outside;
  for (unsigned k = 0; k < relay_count(); ++k) {
    auto& target = contains(s, k) ? inside : outside;
    target = set_union(target, sets_[k]);
  }
  std::vector<PacketId> only;
  std::set_difference(inside.begin(), inside.end(), outside.begin(), outside.end(),
                      std::back_inserter(only));
  return only.size();
}

std::vector<std::size_t> CollectionLedger::partition_counts() const {
  std::vector<std::size_t> counts(std::size_t{1} << relay_count(), 0);
  for (const Entry& e : membership_) ++counts[e.holders];
  return counts;
}

// ---------------------------------------------------------------------------
// Simulation

SlotOutcome simulate_slot(const ChannelParams& p, std::uint32_t slot, RandomStream& rng) {
  SlotOutcome out;
  out.slot = slot;
  out.arrivals = static_cast<std::uint32_t>(rng.poisson(p.rho));
  if (out.arrivals > 0xFFFF)
    throw UnsupportedConfigurationError("more than 65535 arrivals in one slot");
  out.per_relay.resize(p.k_relays);
  for (std::uint32_t j = 1; j <= out.arrivals; ++j) {
    for (auto& obs : out.per_relay) {
      if (!rng.bernoulli(p.eps)) obs.unfaded.push_back(static_cast<std::uint16_t>(j));
    }
  }
  for (auto& obs : out.per_relay) {
    if (obs.unfaded.size() == 1) obs.packet = PacketId{slot, obs.unfaded.front()};
  }
  return out;
}

std::size_t collected_in_slot(const SlotOutcome& s) {
  std::uint16_t seen[kMaxSimulatedRelays];
  std::size_t n = 0;
  for (const auto& obs : s.per_relay) {
    if (!obs.packet) continue;
    const std::uint16_t j = obs.packet->arrival_index;
    if (std::find(seen, seen + n, j) == seen + n) seen[n++] = j;
  }
  return n;
}

UplinkRun run_uplink(const ChannelParams& p, std::uint64_t n_slots, std::uint64_t seed,
                     TraceMode mode) {
  validate_for_simulation(p);
  if (n_slots < 1) throw std::invalid_argument("run_uplink needs at least one slot");
  if (n_slots > 0xFFFFFFFFull) throw std::invalid_argument("run_uplink: too many slots");

  std::vector<std::vector<PacketId>> sets(p.k_relays);
  std::vector<std::uint64_t> relay_hits(p.k_relays, 0);
  double union_sum = 0.0;
  double union_sq = 0.0;

  UplinkRun run;
  if (mode == TraceMode::kFull) run.trace.reserve(n_slots);

  for (std::uint64_t t = 1; t <= n_slots; ++t) {
    RandomStream rng = RandomStream::derive(seed, t);
    SlotOutcome s = simulate_slot(p, static_cast<std::uint32_t>(t), rng);
    for (unsigned k = 0; k < p.k_relays; ++k) {
      if (const auto& pkt = s.per_relay[k].packet) {
        sets[k].push_back(*pkt);
        ++relay_hits[k];
      }
    }
    const double c = static_cast<double>(collected_in_slot(s));
    union_sum += c;
    union_sq += c * c;
    if (mode == TraceMode::kFull) run.trace.push_back(std::move(s));
  }

  run.stats.union_rate = Estimate::from_sums(union_sum, union_sq, n_slots);
  for (unsigned k = 0; k < p.k_relays; ++k)
    run.stats.relay_rate.push_back(Estimate::proportion(relay_hits[k], n_slots));
  run.ledger = CollectionLedger(n_slots, std::move(sets));
  return run;
}

Estimate estimate_plr(const ChannelParams& p, std::uint64_t n_trials, std::uint64_t seed) {
  validate_for_simulation(p);
  if (n_trials < 1) throw std::invalid_argument("estimate_plr needs at least one trial");
  const std::uint64_t domain = derive_seed(seed, {kPlrDomain});
  std::uint64_t lost = 0;
  for (std::uint64_t trial = 0; trial < n_trials; ++trial) {
    RandomStream rng = RandomStream::derive(domain, trial);
    const std::uint64_t interferers = rng.poisson(p.rho);
    bool collected = false;
    for (unsigned k = 0; k < p.k_relays; ++k) {
      bool decoded = !rng.bernoulli(p.eps);
      for (std::uint64_t i = 0; i < interferers; ++i) {
        if (!rng.bernoulli(p.eps)) decoded = false;
      }
      collected = collected || decoded;
    }
    if (!collected) ++lost;
  }
  return Estimate::proportion(lost, n_trials);
}

std::size_t sic_postprocess_two(std::span<const SlotOutcome> trace) {
  std::size_t extra = 0;
  for (const SlotOutcome& s : trace) {
    if (s.per_relay.size() != 2)
      throw UnsupportedConfigurationError(
          fmt::format("SIC post-processing models two relays, slot {} has {}", s.slot,
                      s.per_relay.size()));
    for (int a = 0; a < 2; ++a) {
      const auto& decoder = s.per_relay[a];
      const auto& collided = s.per_relay[1 - a];
      if (!decoder.packet || collided.unfaded.size() != 2) continue;
      const std::uint16_t x = decoder.packet->arrival_index;
      if (collided.unfaded[0] == x || collided.unfaded[1] == x) {
        ++extra;
        break;
      }
    }
  }
  return extra;
}

// ---------------------------------------------------------------------------
// Enumeration oracles

std::vector<double> brute_force_collection_pmf(unsigned u, unsigned k_relays, double eps) {
  ChannelParams{0.0, eps, k_relays}.validate();
  const unsigned bits = u * k_relays;
  if (bits > kJointEnumerationBits)
    throw EnumerationTooLargeError(
        fmt::format("joint enumeration of 2^{} patterns exceeds 2^{}", bits, kJointEnumerationBits));

  CompensatedPmf pmf(k_relays + 1);
  const auto unfaded_pow = power_table(1.0 - eps, bits);
  const auto erased_pow = power_table(eps, bits);
  const std::uint32_t relay_mask = u == 0 ? 0 : (std::uint32_t{1} << u) - 1;

  // Bit k*u + j set: packet j reaches relay k unfaded.
  for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << bits); ++pattern) {
    const unsigned unfaded = std::popcount(pattern);
    const double w = unfaded_pow[unfaded] * erased_pow[bits - unfaded];
    std::uint32_t collected = 0;
    for (unsigned k = 0; k < k_relays; ++k) {
      const auto seen = static_cast<std::uint32_t>(pattern >> (k * u)) & relay_mask;
      if (std::popcount(seen) == 1) collected |= seen;
    }
    pmf.add(std::popcount(collected), w);
  }
  return pmf.result();
}

std::vector<double> relaywise_collection_pmf(unsigned u, unsigned k_relays, double eps) {
  ChannelParams{0.0, eps, k_relays}.validate();
  if (u > 26) throw EnumerationTooLargeError("per-relay enumeration limited to u <= 26");
  const double outcomes = std::pow(static_cast<double>(u) + 1.0, k_relays);
  if (outcomes > 5e7)
    throw EnumerationTooLargeError(fmt::format("{} joint relay outcomes exceed 5e7", outcomes));

  // Outcome 0 is an erasure, outcome j decodes packet j.
  CompensatedPmf relay_sums(u + 1);
  const auto unfaded_pow = power_table(1.0 - eps, u);
  const auto erased_pow = power_table(eps, u);
  for (std::uint32_t pattern = 0; pattern < (std::uint32_t{1} << u); ++pattern) {
    const unsigned unfaded = std::popcount(pattern);
    const double w = unfaded_pow[unfaded] * erased_pow[u - unfaded];
    relay_sums.add(unfaded == 1 ? std::countr_zero(pattern) + 1 : 0, w);
  }
  const auto relay_law = relay_sums.result();

  CompensatedPmf pmf(k_relays + 1);
  std::vector<unsigned> digit(k_relays, 0);
  while (true) {
    double w = 1.0;
    std::uint32_t collected = 0;
    for (unsigned k = 0; k < k_relays; ++k) {
      w *= relay_law[digit[k]];
      if (digit[k] != 0) collected |= std::uint32_t{1} << (digit[k] - 1);
    }
    pmf.add(std::popcount(collected), w);

    unsigned k = 0;
    while (k < k_relays && ++digit[k] > u) digit[k++] = 0;
    if (k == k_relays) break;
  }
  return pmf.result();
}

double enumerated_throughput(const ChannelParams& p) {
  p.validate();
  double pmf_u = std::exp(-p.rho);
  double cdf = 0.0;
  double t = 0.0;
  for (unsigned u = 0;; ++u) {
    if (u > 0) pmf_u *= p.rho / u;
    cdf += pmf_u;
    if (u > 0 && pmf_u > 0.0) {
      const auto pmf = u * p.k_relays <= kOracleJointBits
                           ? brute_force_collection_pmf(u, p.k_relays, p.eps)
                           : relaywise_collection_pmf(u, p.k_relays, p.eps);
      double mean_c = 0.0;
      for (unsigned c = 1; c < pmf.size(); ++c) mean_c += c * pmf[c];
      t += pmf_u * mean_c;
    }
    if (1.0 - cdf < kOracleTailMass) break;
  }
  return t;
}

}  // namespace sadiv
