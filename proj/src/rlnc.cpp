#include "sadiv/rlnc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/core.h>

#include "sadiv/analytic.hpp"
#include "sadiv/errors.hpp"

namespace sadiv {

namespace {

constexpr std::uint64_t kPayloadDomain = 0x7061796c;  // "payl"
constexpr std::uint64_t kEncoderDomain = 0x656e63;    // "enc"

std::uint64_t packet_key(PacketId id) {
  return (std::uint64_t{id.slot} << 16) | id.arrival_index;
}

/// Sum over submasks: out[S] = sum_{L subset of S} in[L].
std::vector<std::size_t> subset_sums(std::vector<std::size_t> v, unsigned k_relays) {
  for (unsigned bit = 0; bit < k_relays; ++bit)
    for (std::size_t s = 0; s < v.size(); ++s)
      if (s & (std::size_t{1} << bit)) v[s] += v[s ^ (std::size_t{1} << bit)];
  return v;
}

}  // namespace

RateVector allocate_rates(const ChannelParams& p, double slack) {
  p.validate();
  if (!(slack >= 0.0)) throw std::invalid_argument("slack must be >= 0");
  double per_relay = 0.0;
  for (unsigned s = 1; s <= p.k_relays; ++s)
    per_relay = std::max(per_relay, rate_bound(p, s).bound / s);
  return {std::vector<double>(p.k_relays, (1.0 + slack) * per_relay), slack};
}

bool in_rate_region(const RateVector& r, const ChannelParams& p) {
  p.validate();
  if (r.per_relay.size() != p.k_relays || p.k_relays > kMaxSimulatedRelays) return false;
  std::vector<double> bound(p.k_relays + 1);
  for (unsigned s = 1; s <= p.k_relays; ++s) bound[s] = rate_bound(p, s).bound;
  for (RelaySet s = 1; s <= full_relay_set(p.k_relays); ++s) {
    double sum = 0.0;
    for (unsigned k = 0; k < p.k_relays; ++k)
      if (contains(s, k)) sum += r.per_relay[k];
    const double need = bound[subset_size(s)];
    if (sum < need - 1e-12 * std::max(1.0, std::abs(need))) return false;
  }
  return true;
}

std::vector<std::size_t> slot_budgets(const RateVector& r, std::uint64_t n_slots) {
  std::vector<std::size_t> out;
  out.reserve(r.per_relay.size());
  for (double rate : r.per_relay) {
    if (!(rate >= 0.0)) throw std::invalid_argument("rates must be >= 0");
    out.push_back(static_cast<std::size_t>(std::ceil(static_cast<double>(n_slots) * rate)));
  }
  return out;
}

std::vector<std::size_t> genie_budgets(const CollectionLedger& ledger) {
  const unsigned k = ledger.relay_count();
  const auto exclusive = subset_sums(ledger.partition_counts(), k);
  std::size_t b = 0;
  for (RelaySet s = 1; s <= full_relay_set(k); ++s) {
    const std::size_t size = subset_size(s);
    b = std::max(b, (exclusive[s] + size - 1) / size);
  }
  return std::vector<std::size_t>(k, b);
}

std::vector<Element> source_payload(const GaloisField& f, std::uint64_t seed, PacketId id,
                                    std::size_t payload_symbols) {
  RandomStream rng = RandomStream::derive(derive_seed(seed, {kPayloadDomain}), packet_key(id));
  std::vector<Element> payload(payload_symbols);
  for (Element& x : payload) x = static_cast<Element>(rng.uniform_below(f.size()));
  return payload;
}

std::vector<SourcePacket> relay_sources(const CollectionLedger& ledger, unsigned relay,
                                        const GaloisField& f, std::uint64_t seed,
                                        std::size_t payload_symbols) {
  std::vector<SourcePacket> out;
  for (const PacketId& id : ledger.relay_set(relay))
    out.push_back({id, source_payload(f, seed, id, payload_symbols)});
  return out;
}

std::vector<CodedPacket> encode_relay(std::uint8_t relay, std::span<const SourcePacket> held,
                                      std::size_t n_coded, std::size_t payload_symbols,
                                      const GaloisField& f, RandomStream& rng) {
  std::vector<const SourcePacket*> order;
  for (const SourcePacket& s : held) {
    if (s.payload.size() != payload_symbols)
      throw std::invalid_argument(fmt::format("packet ({}, {}) has {} symbols, expected {}",
                                              s.id.slot, s.id.arrival_index, s.payload.size(),
                                              payload_symbols));
    order.push_back(&s);
  }
  std::sort(order.begin(), order.end(),
            [](const SourcePacket* a, const SourcePacket* b) { return a->id < b->id; });

  std::vector<CodedPacket> out(n_coded);
  for (CodedPacket& c : out) {
    c.relay = relay;
    c.payload.assign(payload_symbols, 0);
    c.coefficients.reserve(order.size());
    for (const SourcePacket* s : order) {
      const auto coeff = static_cast<Element>(1 + rng.uniform_below(f.size() - 1));
      c.coefficients.push_back({s->id, coeff});
      f.axpy(c.payload, coeff, s->payload);
    }
  }
  return out;
}

std::vector<CodedPacket> encode_all(const CollectionLedger& ledger,
                                    std::span<const std::size_t> budgets, const GaloisField& f,
                                    std::uint64_t seed, std::size_t payload_symbols) {
  if (budgets.size() != ledger.relay_count())
    throw std::invalid_argument(fmt::format("{} budgets for {} relays", budgets.size(),
                                            ledger.relay_count()));
  const std::uint64_t domain = derive_seed(seed, {kEncoderDomain});
  std::vector<CodedPacket> all;
  for (unsigned k = 0; k < ledger.relay_count(); ++k) {
    const auto held = relay_sources(ledger, k, f, seed, payload_symbols);
    RandomStream rng = RandomStream::derive(domain, k);
    auto coded = encode_relay(static_cast<std::uint8_t>(k), held, budgets[k], payload_symbols, f,
                              rng);
    all.insert(all.end(), std::make_move_iterator(coded.begin()),
               std::make_move_iterator(coded.end()));
  }
  return all;
}

DecodeReport gateway_decode(std::span<const CodedPacket> coded, const GaloisField& f,
                            const CollectionLedger& side_information) {
  const unsigned k_relays = side_information.relay_count();
  const auto members = side_information.membership();
  const std::size_t n_vars = members.size();

  std::size_t m = coded.empty() ? 0 : coded.front().payload.size();
  for (const CodedPacket& c : coded) {
    if (c.relay >= k_relays)
      throw CorruptionError(fmt::format("coded packet from relay {} but only {} relays exist",
                                        c.relay, k_relays));
    if (c.payload.size() != m) throw CorruptionError("coded payloads differ in length");
  }

  // Relay-exclusive packets first, then pairs, and so on: pivots on the
  // early columns only touch the rows of the relay that holds them.
  std::vector<std::size_t> order(n_vars);
  for (std::size_t i = 0; i < n_vars; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const RelaySet ha = members[a].holders;
    const RelaySet hb = members[b].holders;
    if (subset_size(ha) != subset_size(hb)) return subset_size(ha) < subset_size(hb);
    return ha < hb;
  });
  std::vector<std::size_t> column_of(n_vars);
  for (std::size_t c = 0; c < n_vars; ++c) column_of[order[c]] = c;

  Matrix g(coded.size(), n_vars);
  Matrix rhs(coded.size(), m);
  std::vector<std::size_t> equations(k_relays, 0);
  for (std::size_t r = 0; r < coded.size(); ++r) {
    const CodedPacket& c = coded[r];
    ++equations[c.relay];
    for (const CoefficientEntry& e : c.coefficients) {
      const auto it = std::lower_bound(
          members.begin(), members.end(), e.id,
          [](const CollectionLedger::Entry& x, const PacketId& id) { return x.id < id; });
      if (it == members.end() || it->id != e.id || !contains(it->holders, c.relay))
        throw CorruptionError(fmt::format("relay {} references packet ({}, {}) it never collected",
                                          c.relay, e.id.slot, e.id.arrival_index));
      if (e.value == 0 || !f.contains(e.value))
        throw CorruptionError("coefficient outside the nonzero field elements");
      g.at(r, column_of[static_cast<std::size_t>(it - members.begin())]) = e.value;
    }
    std::copy(c.payload.begin(), c.payload.end(), rhs.row(r).begin());
  }

  EliminationResult elim = gauss_jordan(f, std::move(g), std::move(rhs));
  if (!elim.consistent)
    throw CorruptionError("gateway system is inconsistent: merged packets disagree");

  DecodeReport report;
  report.n_variables = n_vars;
  report.rank = elim.rank;
  for (std::size_t i = 0; i < elim.pivot_columns.size(); ++i) {
    const auto row = elim.reduced.row(i);
    const bool determined = std::all_of(elim.free_columns.begin(), elim.free_columns.end(),
                                        [&](std::size_t c) { return row[c] == 0; });
    if (!determined) continue;
    const auto src = elim.reduced_rhs.row(i);
    report.recovered.push_back(
        {members[order[elim.pivot_columns[i]]].id, std::vector<Element>(src.begin(), src.end())});
  }
  std::sort(report.recovered.begin(), report.recovered.end(),
            [](const SourcePacket& a, const SourcePacket& b) { return a.id < b.id; });
  report.success = report.recovered.size() == n_vars;

  const auto required = subset_sums(side_information.partition_counts(), k_relays);
  for (RelaySet s = 1; s <= full_relay_set(k_relays); ++s) {
    std::size_t eq = 0;
    for (unsigned k = 0; k < k_relays; ++k)
      if (contains(s, k)) eq += equations[k];
    report.subset_diagnostics.push_back({s, eq, required[s]});
  }
  return report;
}

DecodeReport gateway_decode(std::span<const CodedPacket> coded, const GaloisField& f,
                            unsigned k_relays) {
  std::vector<std::vector<PacketId>> held(k_relays);
  std::vector<bool> seen(k_relays, false);
  std::uint32_t last_slot = 1;
  for (const CodedPacket& c : coded) {
    if (c.relay >= k_relays)
      throw CorruptionError(fmt::format("coded packet from relay {} but only {} relays exist",
                                        c.relay, k_relays));
    if (seen[c.relay]) continue;  // every packet of a relay shares one support
    seen[c.relay] = true;
    for (const CoefficientEntry& e : c.coefficients) {
      held[c.relay].push_back(e.id);
      last_slot = std::max(last_slot, e.id.slot);
    }
  }
  return gateway_decode(coded, f, CollectionLedger(last_slot, std::move(held)));
}

RankCheck verify_rank_conditions(const DecodeReport& report) {
  RankCheck check;
  for (const SubsetDiagnostic& d : report.subset_diagnostics) {
    if (d.equations < d.required_variables) check.violations.push_back(d.subset);
  }
  check.ok = check.violations.empty();
  return check;
}

DownlinkTrial run_downlink_trial(const DownlinkConfig& cfg, const GaloisField& f) {
  const UplinkRun up = run_uplink(cfg.params, cfg.n_slots, cfg.seed);
  DownlinkTrial trial;
  trial.union_count = up.ledger.union_count();
  trial.budgets = cfg.genie ? genie_budgets(up.ledger)
                            : slot_budgets(allocate_rates(cfg.params, cfg.slack), cfg.n_slots);
  const auto coded = encode_all(up.ledger, trial.budgets, f, cfg.seed, cfg.payload_symbols);
  trial.report = gateway_decode(coded, f, up.ledger);
  trial.conditions = verify_rank_conditions(trial.report);
  for (const SourcePacket& s : trial.report.recovered) {
    if (s.payload != source_payload(f, cfg.seed, s.id, cfg.payload_symbols)) {
      trial.bit_exact = false;
      break;
    }
  }
  return trial;
}

}  // namespace sadiv
