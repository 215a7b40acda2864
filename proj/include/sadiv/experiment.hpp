#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sadiv {

enum class Mode {
  kAnalyticSweep,
  kSimulate,
  kPlr,
  kSic,
  kDownlinkE2e,
  kOracleCheck,
  kDownlinkEncode,
  kDownlinkDecode,
};

enum class OutputFormat { kCsv, kJsonl };

/// Invalid experiment configuration; `field()` names the offending setting.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  Mode mode = Mode::kAnalyticSweep;
  std::vector<double> rho{1.0};
  std::vector<double> eps{0.0};
  std::vector<unsigned> k{1};
  std::uint64_t n_slots = 100000;
  std::uint64_t n_trials = 100000;
  std::optional<std::uint64_t> seed;
  unsigned field_bits = 8;
  double slack = 0.05;
  std::size_t payload_symbols = 16;
  bool genie_rates = false;
  OutputFormat format = OutputFormat::kCsv;
  std::string coded_path;  // downlink-encode writes it, downlink-decode reads it
  unsigned workers = 1;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

Mode parse_mode(std::string_view s);
std::string_view mode_name(Mode m);

/// Parses "a", "a:b:step" or a comma-separated list of either. The grid
/// a, a+step, ... stops at b (inclusive, to within 1e-9 of a step).
std::vector<double> parse_axis(std::string_view spec, const std::string& field);

using Cell = std::variant<std::monostate, double, std::int64_t>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  bool all_ok = true;
};

/// One row per (rho, eps, k) grid point in grid order, rho outermost.
/// Stochastic points use the seed derive_seed(seed, {i_rho, i_eps, i_k}).
Table run_experiment(const ExperimentConfig& cfg);

void write_table(std::ostream& out, const Table& table, OutputFormat format);

}  // namespace sadiv
