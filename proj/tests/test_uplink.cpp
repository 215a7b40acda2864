#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "sadiv/analytic.hpp"
#include "sadiv/errors.hpp"
#include "sadiv/uplink.hpp"
#include "support/oracles.hpp"

using namespace sadiv;

namespace {

bool same_ledger(const CollectionLedger& a, const CollectionLedger& b) {
  if (a.relay_count() != b.relay_count() || a.union_count() != b.union_count()) return false;
  for (unsigned k = 0; k < a.relay_count(); ++k)
    if (!std::ranges::equal(a.relay_set(k), b.relay_set(k))) return false;
  return true;
}

bool within(const Estimate& e, double expect, double sigmas) {
  return std::abs(e.mean - expect) <= sigmas * e.std_err;
}

// Subset counts recomputed from the holder masks alone.
void check_set_identities(const CollectionLedger& l) {
  const unsigned k = l.relay_count();
  const RelaySet full = full_relay_set(k);
  const auto parts = l.partition_counts();
  REQUIRE(parts.size() == std::size_t{full} + 1);
  CHECK(parts[0] == 0);
  CHECK(std::accumulate(parts.begin(), parts.end(), std::size_t{0}) == l.union_count());

  for (unsigned r = 0; r < k; ++r) {
    std::size_t held = 0;
    for (RelaySet m = 1; m <= full; ++m)
      if (contains(m, r)) held += parts[m];
    CHECK(held == l.relay_set(r).size());
  }

  long long alternating = 0;
  for (RelaySet s = 1; s <= full; ++s) {
    std::size_t excl = 0;
    std::size_t inter = 0;
    for (RelaySet m = 1; m <= full; ++m) {
      if ((m & ~s) == 0) excl += parts[m];
      if ((m & s) == s) inter += parts[m];
    }
    CHECK(l.exclusive_count(s) == excl);
    CHECK(l.intersection_count(s) == inter);
    const long long sign = (std::popcount(s) % 2 == 1) ? 1 : -1;
    alternating += sign * static_cast<long long>(inter);
  }
  CHECK(alternating == static_cast<long long>(l.union_count()));
  CHECK(l.exclusive_count(full) == l.union_count());
}

}  // namespace

TEST_CASE("random streams") {
  SUBCASE("substreams are reproducible and distinct") {
    auto a = RandomStream::derive(7, 3);
    auto b = RandomStream::derive(7, 3);
    auto c = RandomStream::derive(7, 4);
    auto d = RandomStream::derive(8, 3);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
  }
  SUBCASE("uniform_below stays in range and covers it") {
    auto r = RandomStream::derive(1, 1);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 70000; ++i) {
      const auto v = r.uniform_below(7);
      REQUIRE(v < 7);
      ++hits[v];
    }
    for (int h : hits) CHECK(std::abs(h - 10000) < 500);
  }
  SUBCASE("Poisson moments") {
    for (double mean : {0.3, 2.0, 45.0}) {
      auto r = RandomStream::derive(11, static_cast<std::uint64_t>(mean * 10));
      const int n = 200000;
      double s = 0, ss = 0;
      for (int i = 0; i < n; ++i) {
        const double v = static_cast<double>(r.poisson(mean));
        s += v;
        ss += v * v;
      }
      const double m = s / n;
      const double var = ss / n - m * m;
      CHECK(std::abs(m - mean) < 5 * std::sqrt(mean / n));
      CHECK(var == doctest::Approx(mean).epsilon(0.03));
    }
    auto r = RandomStream::derive(1, 2);
    CHECK(r.poisson(0.0) == 0);
  }
}

TEST_CASE("collection ledger") {
  SUBCASE("hand-built sets") {
    const PacketId a{1, 1}, b{1, 2}, c{2, 1}, d{3, 1};
    CollectionLedger l(3, {{c, a}, {a, b, d}, {d}});
    CHECK(l.union_count() == 4);
    CHECK(l.relay_set(0)[0] == a);  // sorted on construction
    CHECK(l.intersection_count(0b011) == 1);
    CHECK(l.intersection_count(0b110) == 1);
    CHECK(l.intersection_count(0b111) == 0);
    CHECK(l.exclusive_count(0b001) == 1);  // c
    CHECK(l.exclusive_count(0b010) == 1);  // b
    CHECK(l.exclusive_count(0b100) == 0);
    CHECK(l.exclusive_count(0b110) == 2);  // b and d; a is also at relay 0
    const auto parts = l.partition_counts();
    CHECK(parts[0b001] == 1);
    CHECK(parts[0b011] == 1);
    CHECK(parts[0b110] == 1);
    CHECK(parts[0b010] == 1);
    check_set_identities(l);
  }
  SUBCASE("empty") {
    CollectionLedger l(10, {{}, {}});
    CHECK(l.union_count() == 0);
    check_set_identities(l);
  }
  SUBCASE("invalid input") {
    CHECK_THROWS_AS(CollectionLedger(3, {{{1, 1}, {1, 1}}}), std::invalid_argument);
    CHECK_THROWS_AS(CollectionLedger(3, {{{0, 1}}}), std::invalid_argument);
    CHECK_THROWS_AS(CollectionLedger(3, {{{4, 1}}}), std::invalid_argument);
    CHECK_THROWS_AS(CollectionLedger(3, {{{1, 0}}}), std::invalid_argument);
    CHECK_THROWS_AS(CollectionLedger(3, {}), std::invalid_argument);
    CollectionLedger l(3, {{}, {}});
    CHECK_THROWS_AS(l.exclusive_count(0), std::invalid_argument);
    CHECK_THROWS_AS(l.exclusive_count(0b100), std::invalid_argument);
  }
}

TEST_CASE("set identities hold on simulated ledgers") {
  auto pick = RandomStream::derive(2024, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const ChannelParams p{0.1 + 3.0 * pick.uniform(), 0.9 * pick.uniform(),
                          1 + static_cast<unsigned>(pick.uniform_below(6))};
    const auto run = run_uplink(p, 50 + pick.uniform_below(400), pick());
    check_set_identities(run.ledger);
  }
}

TEST_CASE("uplink simulation") {
  const ChannelParams p{1.25, 0.2, 3};

  SUBCASE("determinism and trace independence") {
    const auto a = run_uplink(p, 2000, 5);
    const auto b = run_uplink(p, 2000, 5, TraceMode::kFull);
    const auto c = run_uplink(p, 2000, 6);
    CHECK(same_ledger(a.ledger, b.ledger));
    CHECK(!same_ledger(a.ledger, c.ledger));
    CHECK(a.trace.empty());
    REQUIRE(b.trace.size() == 2000);
    std::size_t total = 0;
    for (const auto& s : b.trace) total += collected_in_slot(s);
    CHECK(total == b.ledger.union_count());
    // A prefix of the horizon reproduces the same slots.
    const auto prefix = run_uplink(p, 500, 5, TraceMode::kFull);
    for (std::size_t t = 0; t < 500; ++t) CHECK(prefix.trace[t].arrivals == b.trace[t].arrivals);
  }

  SUBCASE("slot outcomes are well formed") {
    const auto run = run_uplink(p, 3000, 9, TraceMode::kFull);
    for (const auto& s : run.trace) {
      REQUIRE(s.per_relay.size() == 3);
      for (const auto& obs : s.per_relay) {
        CHECK(std::ranges::is_sorted(obs.unfaded));
        for (auto i : obs.unfaded) CHECK((i >= 1 && i <= s.arrivals));
        if (obs.packet) {
          CHECK(obs.unfaded.size() == 1);
          CHECK(obs.packet->slot == s.slot);
          CHECK(obs.packet->arrival_index == obs.unfaded[0]);
        } else {
          CHECK(obs.unfaded.size() != 1);
        }
      }
    }
  }

  SUBCASE("decode probability given the arrival count") {
    // A relay decodes in a slot with u arrivals w.p. u (1-eps) eps^(u-1).
    const ChannelParams q{2.0, 0.4, 4};
    const auto run = run_uplink(q, 200000, 77, TraceMode::kFull);
    std::map<unsigned, std::pair<std::uint64_t, std::uint64_t>> by_u;  // trials, hits
    for (const auto& s : run.trace)
      for (const auto& obs : s.per_relay) {
        auto& [n, h] = by_u[s.arrivals];
        ++n;
        h += obs.packet ? 1 : 0;
      }
    for (unsigned u = 0; u <= 5; ++u) {
      const auto [n, h] = by_u[u];
      REQUIRE(n > 1000);
      const double expect = u == 0 ? 0.0 : u * (1 - q.eps) * std::pow(q.eps, u - 1.0);
      const double se = std::sqrt(std::max(expect * (1 - expect), 1e-12) / n);
      CHECK(std::abs(static_cast<double>(h) / n - expect) <= 4 * se + 1e-12);
    }
  }

  SUBCASE("rates agree with the closed forms") {
    for (const ChannelParams& q : {ChannelParams{0.5, 0.5, 2}, ChannelParams{1.25, 0.2, 3},
                                   ChannelParams{2.5, 0.7, 5}, ChannelParams{1.0, 0.0, 2}}) {
      const auto run = run_uplink(q, 100000, 13);
      CHECK(within(run.stats.union_rate, throughput_uplink(q), 4));
      for (const auto& r : run.stats.relay_rate) CHECK(within(r, throughput_sa(q), 4));
    }
  }

  SUBCASE("loss estimate") {
    for (const ChannelParams& q : {ChannelParams{0.5, 0.2, 2}, ChannelParams{2.0, 0.5, 4}}) {
      const auto e = estimate_plr(q, 100000, 3);
      CHECK(within(e, packet_loss(q), 4));
    }
  }

  SUBCASE("parameter checks") {
    CHECK_THROWS_AS(run_uplink({1.0, 0.5, 21}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(run_uplink({-1.0, 0.5, 2}, 10, 1), std::invalid_argument);
  }
}

TEST_CASE("collection law by enumeration") {
  SUBCASE("two relays, three arrivals, eps = 1/2") {
    const auto pmf = brute_force_collection_pmf(3, 2, 0.5);
    REQUIRE(pmf.size() == 3);
    CHECK(pmf[0] == doctest::Approx(0.390625).epsilon(1e-15));
    CHECK(pmf[1] == doctest::Approx(0.515625).epsilon(1e-15));
    CHECK(pmf[2] == doctest::Approx(0.09375).epsilon(1e-15));
  }
  SUBCASE("mean count and normalization") {
    for (double eps : {0.0, 0.2, 0.5, 0.9})
      for (unsigned k = 1; k <= 4; ++k)
        for (unsigned u = 0; u * k <= 20 && u <= 6; ++u) {
          const auto pmf = brute_force_collection_pmf(u, k, eps);
          double total = 0, mean = 0;
          for (std::size_t c = 0; c < pmf.size(); ++c) {
            total += pmf[c];
            mean += c * pmf[c];
          }
          CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
          const double q = u == 0 ? 0.0 : oracle::alone_probability(eps, u);
          CHECK(mean == doctest::Approx(u * (1 - std::pow(1 - q, k))).epsilon(1e-12));
        }
  }
  SUBCASE("relaywise enumeration equals joint enumeration") {
    for (double eps : {0.1, 0.5, 0.8})
      for (unsigned k = 1; k <= 4; ++k)
        for (unsigned u = 0; u * k <= 20; ++u) {
          const auto a = brute_force_collection_pmf(u, k, eps);
          const auto b = relaywise_collection_pmf(u, k, eps);
          REQUIRE(a.size() == b.size());
          for (std::size_t c = 0; c < a.size(); ++c) CHECK(std::abs(a[c] - b[c]) < 1e-14);
        }
  }
  SUBCASE("limits") {
    CHECK_THROWS_AS(brute_force_collection_pmf(7, 4, 0.5), EnumerationTooLargeError);
    CHECK_THROWS_AS(relaywise_collection_pmf(30, 2, 0.5), EnumerationTooLargeError);
  }
  SUBCASE("Poisson-weighted enumeration matches the closed form") {
    for (double rho : {0.25, 1.0, 3.0})
      for (double eps : {0.1, 0.5, 0.9})
        for (unsigned k = 1; k <= 4; ++k) {
          const ChannelParams p{rho, eps, k};
          CHECK(std::abs(enumerated_throughput(p) - throughput_uplink(p)) < 1e-9);
        }
  }
}

TEST_CASE("SIC post-processing") {
  const auto obs = [](std::optional<std::uint16_t> decoded, std::vector<std::uint16_t> unfaded) {
    RelayObservation o;
    if (decoded) o.packet = PacketId{1, *decoded};
    o.unfaded = std::move(unfaded);
    return o;
  };
  const auto slot = [](RelayObservation a, RelayObservation b, std::uint32_t u) {
    return SlotOutcome{1, u, {std::move(a), std::move(b)}};
  };

  CHECK(sic_postprocess_two(std::vector{slot(obs(1, {1}), obs({}, {1, 2}), 2)}) == 1);
  CHECK(sic_postprocess_two(std::vector{slot(obs({}, {1, 2}), obs(2, {2}), 2)}) == 1);
  // The collision does not involve the decoded packet.
  CHECK(sic_postprocess_two(std::vector{slot(obs(1, {1}), obs({}, {2, 3}), 3)}) == 0);
  // Three-way collisions cannot be peeled with one known packet.
  CHECK(sic_postprocess_two(std::vector{slot(obs(1, {1}), obs({}, {1, 2, 3}), 3)}) == 0);
  // Both relays decoded on their own.
  CHECK(sic_postprocess_two(std::vector{slot(obs(1, {1}), obs(2, {2}), 2)}) == 0);
  CHECK(sic_postprocess_two(std::vector{slot(obs({}, {1, 2}), obs({}, {1, 2}), 2)}) == 0);

  SlotOutcome three{1, 1, {obs(1, {1}), obs({}, {}), obs({}, {})}};
  CHECK_THROWS_AS(sic_postprocess_two(std::vector{three}), UnsupportedConfigurationError);

  const ChannelParams p{1.25, 0.2, 2};
  const std::uint64_t n = 200000;
  const auto run = run_uplink(p, n, 21, TraceMode::kFull);
  const auto extra = sic_postprocess_two(run.trace);
  const auto e = Estimate::proportion(extra, n);
  CHECK(within(e, sic_gain_two(p), 4));
}
