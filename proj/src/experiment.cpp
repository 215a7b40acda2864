#include "sadiv/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <thread>

#include <fmt/core.h>
#include <json.hpp>

#include "sadiv/analytic.hpp"
#include "sadiv/rlnc.hpp"
#include "sadiv/uplink.hpp"
#include "sadiv/wire.hpp"

namespace sadiv {

namespace {

constexpr double kOracleTolerance = 1e-9;
constexpr double kSimulationSigmas = 4.0;

struct ModeInfo {
  Mode mode;
  std::string_view name;
  bool stochastic;
};

constexpr ModeInfo kModes[] = {
    {Mode::kAnalyticSweep, "analytic-sweep", false},
    {Mode::kSimulate, "simulate", true},
    {Mode::kPlr, "plr", true},
    {Mode::kSic, "sic", true},
    {Mode::kDownlinkE2e, "downlink-e2e", true},
    {Mode::kOracleCheck, "oracle-check", false},
    {Mode::kDownlinkEncode, "downlink-encode", true},
    {Mode::kDownlinkDecode, "downlink-decode", true},
};

const ModeInfo& info(Mode m) {
  for (const auto& i : kModes)
    if (i.mode == m) return i;
  throw std::logic_error("unknown mode");
}

double parse_number(std::string_view s, const std::string& field) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty())
    throw ConfigError(field, fmt::format("'{}' is not a number", s));
  return v;
}

const GaloisField& field_for(unsigned bits) {
  return bits == 16 ? GaloisField::gf65536() : GaloisField::gf256();
}

/// |sim - analytic| within the simulation's own noise.
bool agrees(double sim, double analytic, double std_err) {
  return std::abs(sim - analytic) <= kSimulationSigmas * std_err + 1e-12;
}

struct Point {
  ChannelParams params;
  std::uint64_t seed = 0;
};

using Row = std::vector<Cell>;
struct Result {
  Row cells;
  bool ok = true;
};

bool ledger_identities_hold(const CollectionLedger& ledger) {
  const unsigned k = ledger.relay_count();
  const auto parts = ledger.partition_counts();

  std::vector<RelaySet> subsets;
  if (k <= 5) {
    for (RelaySet s = 1; s <= full_relay_set(k); ++s) subsets.push_back(s);
  } else {
    for (unsigned r = 0; r < k; ++r) {
      subsets.push_back(RelaySet{1} << r);
      subsets.push_back(full_relay_set(k) ^ (RelaySet{1} << r));
    }
    subsets.push_back(full_relay_set(k));
  }
  for (RelaySet s : subsets) {
    std::size_t from_parts = 0;
    for (RelaySet l = s; l != 0; l = (l - 1) & s) from_parts += parts[l];
    if (from_parts != ledger.exclusive_count(s)) return false;
  }
  if (k <= 5) {
    long long incl_excl = 0;
    for (RelaySet s = 1; s <= full_relay_set(k); ++s) {
      const long long c = static_cast<long long>(ledger.intersection_count(s));
      incl_excl += subset_size(s) % 2 == 1 ? c : -c;
    }
    if (incl_excl != static_cast<long long>(ledger.union_count())) return false;
  }
  return true;
}

Result analytic_row(const Point& pt) {
  const auto& p = pt.params;
  const double plr = packet_loss(p);
  Cell gain;
  bool ok = plr >= 0.0 && plr <= 1.0;
  if (p.k_relays >= 2) {
    const double g = incremental_gain(p);
    gain = g;
    ok = ok && g >= -1e-12;
  }
  return {{throughput_sa(p), throughput_uplink(p), gain, plr, rate_bound(p, 1).bound}, ok};
}

Result simulate_row(const Point& pt, const ExperimentConfig& cfg) {
  const auto& p = pt.params;
  const UplinkRun run = run_uplink(p, cfg.n_slots, pt.seed);
  const double t_up = throughput_uplink(p);
  const double t_sa = throughput_sa(p);
  const Estimate& u = run.stats.union_rate;
  const Estimate& r0 = run.stats.relay_rate.front();
  const double union_over_n =
      static_cast<double>(run.ledger.union_count()) / static_cast<double>(cfg.n_slots);
  const bool ok = agrees(u.mean, t_up, u.std_err) && agrees(r0.mean, t_sa, r0.std_err) &&
                  std::abs(union_over_n - u.mean) < 1e-9 && ledger_identities_hold(run.ledger);
  return {{t_up, u.mean, t_sa, r0.mean, u.std_err, r0.std_err}, ok};
}

Result plr_row(const Point& pt, const ExperimentConfig& cfg) {
  const double z = packet_loss(pt.params);
  const Estimate e = estimate_plr(pt.params, cfg.n_trials, pt.seed);
  return {{z, e.mean, e.std_err}, agrees(e.mean, z, e.std_err)};
}

Result sic_row(const Point& pt, const ExperimentConfig& cfg) {
  const auto& p = pt.params;
  // Streams the slots run_uplink would draw; a full trace at 1e6 slots is
  // hundreds of megabytes.
  std::uint64_t events = 0;
  double af_sum = 0.0;
  double af_sq = 0.0;
  for (std::uint64_t t = 1; t <= cfg.n_slots; ++t) {
    RandomStream rng = RandomStream::derive(pt.seed, t);
    const SlotOutcome s = simulate_slot(p, static_cast<std::uint32_t>(t), rng);
    const std::size_t extra = sic_postprocess_two(std::span(&s, 1));
    events += extra;
    const double c = static_cast<double>(collected_in_slot(s) + extra);
    af_sum += c;
    af_sq += c * c;
  }
  const Estimate gain = Estimate::proportion(events, cfg.n_slots);
  const Estimate af = Estimate::from_sums(af_sum, af_sq, cfg.n_slots);
  const double g = sic_gain_two(p);
  const double t_af = throughput_af_two(p);
  const bool ok = agrees(gain.mean, g, gain.std_err) && agrees(af.mean, t_af, af.std_err);
  return {{g, gain.mean, t_af, af.mean, gain.std_err, af.std_err}, ok};
}

Result downlink_row(const Point& pt, const ExperimentConfig& cfg) {
  const GaloisField& f = field_for(cfg.field_bits);
  const RateVector rates = allocate_rates(pt.params, cfg.slack);
  std::uint64_t successes = 0;
  std::int64_t violations = 0;
  std::int64_t corrupt = 0;
  double union_sum = 0.0;
  std::size_t budget = slot_budgets(rates, cfg.n_slots).front();
  bool ok = true;
  for (std::uint64_t run = 0; run < cfg.n_trials; ++run) {
    DownlinkConfig dc{pt.params, cfg.n_slots, derive_seed(pt.seed, {run}), cfg.slack,
                      cfg.payload_symbols, cfg.genie_rates};
    const DownlinkTrial t = run_downlink_trial(dc, f);
    if (cfg.genie_rates) budget = std::max(budget, t.budgets.front());
    union_sum += static_cast<double>(t.union_count);
    if (t.report.success) ++successes;
    if (!t.conditions.ok) ++violations;
    if (!t.bit_exact) ++corrupt;
    ok = ok && t.bit_exact && (!t.report.success || t.conditions.ok);
  }
  const Estimate s = Estimate::proportion(successes, cfg.n_trials);
  const Cell rate = cfg.genie_rates ? Cell{} : Cell{rates.per_relay.front()};
  return {{rate, static_cast<std::int64_t>(budget), union_sum / static_cast<double>(cfg.n_trials),
           s.mean, violations, corrupt, s.std_err},
          ok};
}

Result oracle_row(const Point& pt) {
  const double t = throughput_uplink(pt.params);
  const double o = enumerated_throughput(pt.params);
  const double err = std::abs(t - o);
  return {{t, o, err}, err <= kOracleTolerance};
}

std::vector<std::size_t> budgets_for(const ExperimentConfig& cfg, const Point& pt,
                                     const CollectionLedger& ledger) {
  return cfg.genie_rates ? genie_budgets(ledger)
                         : slot_budgets(allocate_rates(pt.params, cfg.slack), cfg.n_slots);
}

Result encode_row(const Point& pt, const ExperimentConfig& cfg) {
  const GaloisField& f = field_for(cfg.field_bits);
  const UplinkRun run = run_uplink(pt.params, cfg.n_slots, pt.seed);
  const auto budgets = budgets_for(cfg, pt, run.ledger);
  const auto coded = encode_all(run.ledger, budgets, f, pt.seed, cfg.payload_symbols);
  std::ofstream out(cfg.coded_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", cfg.coded_path));
  write_coded_packets(out, coded, f.bits());
  out.flush();
  if (!out) throw IoError(fmt::format("failed writing '{}'", cfg.coded_path));
  return {{static_cast<std::int64_t>(run.ledger.union_count()),
           static_cast<std::int64_t>(budgets.front()), static_cast<std::int64_t>(coded.size()),
           static_cast<std::int64_t>(out.tellp())},
          true};
}

Result decode_row(const Point& pt, const ExperimentConfig& cfg) {
  const GaloisField& f = field_for(cfg.field_bits);
  std::ifstream in(cfg.coded_path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}' for reading", cfg.coded_path));
  const auto coded = read_coded_packets(in, f.bits(), cfg.payload_symbols);
  // The gateway's side information: the uplink erasure pattern, regenerated.
  const UplinkRun run = run_uplink(pt.params, cfg.n_slots, pt.seed);
  const DecodeReport rep = gateway_decode(coded, f, run.ledger);
  const RankCheck rc = verify_rank_conditions(rep);
  bool exact = true;
  for (const SourcePacket& s : rep.recovered)
    exact = exact && s.payload == source_payload(f, pt.seed, s.id, cfg.payload_symbols);
  return {{static_cast<std::int64_t>(rep.n_variables), static_cast<std::int64_t>(rep.rank),
           static_cast<std::int64_t>(rep.recovered.size()), std::int64_t{rep.success},
           std::int64_t{rc.ok}, std::int64_t{exact}},
          exact && (!rep.success || rc.ok)};
}

std::vector<std::string> metric_columns(Mode m) {
  switch (m) {
    case Mode::kAnalyticSweep:
      return {"t_sa", "t_up", "incremental_gain", "plr", "rate_bound_1"};
    case Mode::kSimulate:
      return {"t_up", "t_up_sim", "t_sa", "t_relay_sim", "t_up_sim_stderr", "t_relay_sim_stderr"};
    case Mode::kPlr:
      return {"plr", "plr_sim", "plr_sim_stderr"};
    case Mode::kSic:
      return {"sic_gain", "sic_gain_sim", "t_af", "t_af_sim", "sic_gain_sim_stderr",
              "t_af_sim_stderr"};
    case Mode::kDownlinkE2e:
      return {"rate",           "budget",           "union_mean",         "success_rate",
              "rank_violations", "bit_exact_failures", "success_rate_stderr"};
    case Mode::kOracleCheck:
      return {"t_up", "t_up_oracle", "abs_err"};
    case Mode::kDownlinkEncode:
      return {"union_count", "budget", "coded_packets", "bytes"};
    case Mode::kDownlinkDecode:
      return {"n_variables", "rank", "recovered", "success", "necessary_ok", "bit_exact"};
  }
  return {};
}

Result evaluate(const Point& pt, const ExperimentConfig& cfg) {
  switch (cfg.mode) {
    case Mode::kAnalyticSweep: return analytic_row(pt);
    case Mode::kSimulate: return simulate_row(pt, cfg);
    case Mode::kPlr: return plr_row(pt, cfg);
    case Mode::kSic: return sic_row(pt, cfg);
    case Mode::kDownlinkE2e: return downlink_row(pt, cfg);
    case Mode::kOracleCheck: return oracle_row(pt);
    case Mode::kDownlinkEncode: return encode_row(pt, cfg);
    case Mode::kDownlinkDecode: return decode_row(pt, cfg);
  }
  throw std::logic_error("unknown mode");
}

std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return fmt::format("{:.12g}", *d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return fmt::format("{}", *i);
  return {};
}

}  // namespace

Mode parse_mode(std::string_view s) {
  for (const auto& i : kModes)
    if (i.name == s) return i.mode;
  throw ConfigError("mode", fmt::format("unknown mode '{}'", s));
}

std::string_view mode_name(Mode m) { return info(m).name; }

std::vector<double> parse_axis(std::string_view spec, const std::string& field) {
  std::vector<double> out;
  if (spec.empty()) throw ConfigError(field, "empty range");
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', start), spec.size());
    const std::string_view item = spec.substr(start, comma - start);
    start = comma + 1;

    const std::size_t c1 = item.find(':');
    if (c1 == std::string_view::npos) {
      out.push_back(parse_number(item, field));
      continue;
    }
    const std::size_t c2 = item.find(':', c1 + 1);
    if (c2 == std::string_view::npos || item.find(':', c2 + 1) != std::string_view::npos)
      throw ConfigError(field, fmt::format("range '{}' must be start:stop:step", item));
    const double a = parse_number(item.substr(0, c1), field);
    const double b = parse_number(item.substr(c1 + 1, c2 - c1 - 1), field);
    const double step = parse_number(item.substr(c2 + 1), field);
    if (!(step > 0.0)) throw ConfigError(field, fmt::format("step must be > 0 in '{}'", item));
    if (b < a) throw ConfigError(field, fmt::format("range '{}' is empty", item));
    const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
    if (n > 1000000) throw ConfigError(field, fmt::format("range '{}' is too long", item));
    for (std::size_t i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (rho.empty()) throw ConfigError("rho", "range is empty");
  if (eps.empty()) throw ConfigError("eps", "range is empty");
  if (k.empty()) throw ConfigError("k", "range is empty");
  for (double r : rho)
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("rho", fmt::format("{} is not >= 0", r));
  for (double e : eps)
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("eps", fmt::format("{} is outside [0, 1]", e));
  for (unsigned kk : k)
    if (kk < 1) throw ConfigError("k", "relay count must be >= 1");
  if (field_bits != 8 && field_bits != 16) throw ConfigError("field", "must be gf256 or gf65536");
  if (!(slack >= 0.0)) throw ConfigError("slack", "must be >= 0");
  if (payload_symbols < 1) throw ConfigError("payload-symbols", "must be >= 1");
  if (workers < 1) throw ConfigError("workers", "must be >= 1");

  const bool stochastic = info(mode).stochastic;
  if (stochastic && !seed) throw ConfigError("seed", "required for stochastic modes");
  if (stochastic && n_slots < 1) throw ConfigError("slots", "must be >= 1");
  if (stochastic && n_trials < 1 && mode != Mode::kSimulate && mode != Mode::kSic)
    throw ConfigError("trials", "must be >= 1");
  if (genie_rates && mode != Mode::kDownlinkE2e && mode != Mode::kDownlinkEncode)
    throw ConfigError("genie-rates", "only meaningful for downlink modes");

  if (stochastic) {
    for (unsigned kk : k)
      if (kk > kMaxSimulatedRelays)
        throw ConfigError("k", fmt::format("simulation supports at most {} relays",
                                           kMaxSimulatedRelays));
    for (double r : rho)
      if (r > 1000.0) throw ConfigError("rho", "simulation supports rho <= 1000");
  }
  if (mode == Mode::kSic) {
    for (unsigned kk : k)
      if (kk != 2) throw ConfigError("k", "sic mode models exactly two relays");
  }
  if (mode == Mode::kOracleCheck) {
    for (unsigned kk : k)
      if (kk > 5) throw ConfigError("k", "oracle enumeration supports k <= 5");
    for (double r : rho)
      if (r > 5.0) throw ConfigError("rho", "oracle enumeration supports rho <= 5");
  }
  if (mode == Mode::kDownlinkEncode || mode == Mode::kDownlinkDecode) {
    if (rho.size() != 1 || eps.size() != 1 || k.size() != 1)
      throw ConfigError("rho", "downlink encode/decode take a single grid point");
    if (coded_path.empty()) throw ConfigError(
        mode == Mode::kDownlinkEncode ? "coded-out" : "coded-in", "path required");
  }
}

Table run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  std::vector<Point> points;
  for (std::size_t i = 0; i < cfg.rho.size(); ++i)
    for (std::size_t j = 0; j < cfg.eps.size(); ++j)
      for (std::size_t l = 0; l < cfg.k.size(); ++l)
        points.push_back({{cfg.rho[i], cfg.eps[j], cfg.k[l]},
                          derive_seed(cfg.seed.value_or(0), {i, j, l})});

  std::vector<Result> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        results[i] = evaluate(points[i], cfg);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(cfg.workers, points.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  Table table;
  table.columns = {"rho", "eps", "k"};
  for (auto& c : metric_columns(cfg.mode)) table.columns.push_back(std::move(c));
  table.columns.push_back("ok");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i].params;
    Row row{p.rho, p.eps, static_cast<std::int64_t>(p.k_relays)};
    row.insert(row.end(), results[i].cells.begin(), results[i].cells.end());
    row.push_back(std::int64_t{results[i].ok});
    table.all_ok = table.all_ok && results[i].ok;
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_table(std::ostream& out, const Table& table, OutputFormat format) {
  if (format == OutputFormat::kCsv) {
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      out << (c ? "," : "") << table.columns[c];
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_cell(row[c]);
      out << '\n';
    }
  } else {
    for (const auto& row : table.rows) {
      nlohmann::ordered_json obj;
      for (std::size_t c = 0; c < row.size(); ++c) {
        const auto& cell = row[c];
        if (const auto* d = std::get_if<double>(&cell))
          obj[table.columns[c]] = *d;
        else if (const auto* i = std::get_if<std::int64_t>(&cell))
          obj[table.columns[c]] = *i;
        else
          obj[table.columns[c]] = nullptr;
      }
      out << obj.dump() << '\n';
    }
  }
  if (!out) throw IoError("failed writing results");
}

}  // namespace sadiv
