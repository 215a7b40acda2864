// Command-line driver: parameter sweeps, simulation-vs-analytic checks and
// end-to-end downlink experiments. Results go to --out (or stdout), progress
// to stderr.
//
// Exit codes: 0 success, 1 usage, 2 invariant-check failure, 3 I/O.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "sadiv/errors.hpp"
#include "sadiv/experiment.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitIo = 3;

unsigned default_workers() {
  if (const char* env = std::getenv("SADIV_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
    fmt::print(stderr, "ignoring invalid SADIV_WORKERS='{}'\n", env);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Slotted Aloha with receiver diversity: analysis, simulation, RLNC downlink"};
  app.set_config("--config", "", "flat key=value file; command-line flags take precedence");

  std::string mode = "analytic-sweep";
  std::string rho = "1";
  std::string eps = "0";
  std::string k = "1";
  std::string field = "gf256";
  std::string format = "csv";
  std::string out_path;
  std::string coded_out;
  std::string coded_in;
  sadiv::ExperimentConfig cfg;
  std::uint64_t seed = 0;
  unsigned workers = default_workers();

  app.add_option("--mode", mode,
                 "analytic-sweep | simulate | plr | sic | downlink-e2e | oracle-check | "
                 "downlink-encode | downlink-decode")
      ->capture_default_str();
  app.add_option("--rho", rho, "load: value, a:b:step, or comma list")->capture_default_str();
  app.add_option("--eps", eps, "erasure probability: value, a:b:step, or comma list")
      ->capture_default_str();
  app.add_option("--k", k, "relay count: value, a:b:step, or comma list")->capture_default_str();
  app.add_option("--slots", cfg.n_slots, "uplink slots per run")->capture_default_str();
  app.add_option("--trials", cfg.n_trials, "PLR probe trials, or downlink runs per point")
      ->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "master seed (required for stochastic modes)");
  app.add_option("--field", field, "gf256 | gf65536")->capture_default_str();
  app.add_option("--slack", cfg.slack, "multiplicative downlink rate margin")->capture_default_str();
  app.add_option("--payload-symbols", cfg.payload_symbols, "symbols per packet payload")
      ->capture_default_str();
  app.add_flag("--genie-rates", cfg.genie_rates, "size downlink budgets from the realized ledger");
  app.add_option("--out", out_path, "output file (default: stdout)");
  app.add_option("--format", format, "csv | jsonl")->capture_default_str();
  app.add_option("--coded-out", coded_out, "downlink-encode: coded packet stream to write");
  app.add_option("--coded-in", coded_in, "downlink-decode: coded packet stream to read");
  app.add_option("--workers", workers, "worker threads (default: $SADIV_WORKERS or #cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  sadiv::Table table;
  try {
    cfg.mode = sadiv::parse_mode(mode);
    cfg.rho = sadiv::parse_axis(rho, "rho");
    cfg.eps = sadiv::parse_axis(eps, "eps");
    cfg.k.clear();
    for (double v : sadiv::parse_axis(k, "k")) {
      if (v < 1 || v != static_cast<unsigned>(v))
        throw sadiv::ConfigError("k", fmt::format("{} is not a positive integer", v));
      cfg.k.push_back(static_cast<unsigned>(v));
    }
    if (field == "gf256")
      cfg.field_bits = 8;
    else if (field == "gf65536")
      cfg.field_bits = 16;
    else
      throw sadiv::ConfigError("field", fmt::format("unknown field '{}'", field));
    if (format == "csv")
      cfg.format = sadiv::OutputFormat::kCsv;
    else if (format == "jsonl")
      cfg.format = sadiv::OutputFormat::kJsonl;
    else
      throw sadiv::ConfigError("format", fmt::format("unknown format '{}'", format));
    if (*seed_opt) cfg.seed = seed;
    cfg.coded_path = cfg.mode == sadiv::Mode::kDownlinkDecode ? coded_in : coded_out;
    cfg.workers = workers;

    fmt::print(stderr, "sadiv: mode {} over {} grid point(s), {} worker(s)\n", mode,
               cfg.rho.size() * cfg.eps.size() * cfg.k.size(), cfg.workers);
    table = sadiv::run_experiment(cfg);
  } catch (const sadiv::ConfigError& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return kExitUsage;
  } catch (const sadiv::IoError& e) {
    fmt::print(stderr, "I/O error: {}\n", e.what());
    return kExitIo;
  } catch (const sadiv::FormatError& e) {
    fmt::print(stderr, "I/O error: {}\n", e.what());
    return kExitIo;
  } catch (const sadiv::CorruptionError& e) {
    fmt::print(stderr, "invariant failure: {}\n", e.what());
    return kExitInvariant;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "usage error: {}\n", e.what());
    return kExitUsage;
  }

  try {
    if (out_path.empty()) {
      sadiv::write_table(std::cout, table, cfg.format);
      std::cout.flush();
    } else {
      std::ofstream out(out_path, std::ios::trunc);
      if (!out) throw sadiv::IoError(fmt::format("cannot open '{}' for writing", out_path));
      sadiv::write_table(out, table, cfg.format);
    }
  } catch (const sadiv::IoError& e) {
    fmt::print(stderr, "I/O error: {}\n", e.what());
    return kExitIo;
  }

  if (!table.all_ok) {
    fmt::print(stderr, "invariant check failed on at least one grid point (see 'ok' column)\n");
    return kExitInvariant;
  }
  return 0;
}
