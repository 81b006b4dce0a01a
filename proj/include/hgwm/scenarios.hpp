#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hgwm/weak_process.hpp"

namespace hgwm {

inline constexpr const char* kToolVersion = "0.1.0";

/// Bad command line or configuration (exit code 2).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

enum class Scenario { qfim_scan, cfim_mle, ellipse, homodyne_mc, expt_limits };
enum class OutputFormat { csv, json };

std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& name);

/// Parses "a..b" (inclusive) or a comma list "1,3,5". Empty ranges are usage errors.
std::vector<int> parse_orders(const std::string& spec);

struct RunConfig {
  Scenario scenario = Scenario::expt_limits;

  // physics
  std::string orders = "1";
  double sigma = 1.0;
  double epsilon = 0.01;
  // pauli-z | pauli-z-plus-identity; empty picks pauli-z-plus-identity for
  // homodyne-mc and expt-limits, pauli-z otherwise
  std::string observable;
  double d = 0.0;
  double k = 0.0;
  double lambda0 = 633e-9;

  // qfim-scan: d in [0, d_max] at fixed k, then k in [0, k_max] at fixed d
  double d_max = 0.0;
  double k_max = 0.0;
  int points = 11;
  double fd_step = 1e-5;

  // sampling
  std::size_t samples = 500;         // N'
  double source_photons = 1e7;       // N
  double lo_photons = 1e9;           // N_LO
  std::size_t trials = 2000;
  std::optional<std::uint64_t> seed;
  double confidence = 0.39346934028736658;
  bool allow_degenerate = false;
  bool noiseless = false;

  // output
  std::string out_path;
  OutputFormat format = OutputFormat::csv;

  Observable observable_kind() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ResultRecord {
  Scenario scenario = Scenario::expt_limits;
  RunConfig config;
  Table table;
  nlohmann::json details = nlohmann::json::object();
  std::string version = kToolVersion;
  double wall_time_s = 0.0;
};

ResultRecord run_qfim_scan(const RunConfig& cfg);
ResultRecord run_cfim_mle(const RunConfig& cfg);
ResultRecord run_ellipse(const RunConfig& cfg);
ResultRecord run_homodyne(const RunConfig& cfg);
ResultRecord run_expt_limits(const RunConfig& cfg);

/// Dispatches on cfg.scenario and fills wall_time_s.
ResultRecord run_scenario(const RunConfig& cfg);

/// Numbers with 17 significant digits; NaN and infinities as "nan", "inf", "-inf".
std::string format_number(double v);

void write_csv(const ResultRecord& r, std::ostream& os);
nlohmann::json to_json(const ResultRecord& r);

}  // namespace hgwm
