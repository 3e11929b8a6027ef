#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "iab/channel.hpp"
#include "iab/geometry.hpp"
#include "iab/network.hpp"
#include "iab/optimize.hpp"

namespace iab {

enum class ScenarioKind { kRandom, kGaNonIab, kGaLocations, kGaJoint, kMacroOnly, kExhaustive, kGreedy, kTabu };

std::string to_string(ScenarioKind kind);
/// Throws ConfigError for an unknown name.
ScenarioKind parse_scenario_kind(const std::string& name);

/// Where a forbidden-zone mask applies.
enum class ForbiddenTarget { kNonIab, kSbs };

/// One experiment. Defaults are the urban reference scenario.
struct ExperimentConfig {
  std::string scenario = "urban";
  ScenarioKind kind = ScenarioKind::kRandom;

  double area_km2 = 1.0;
  PointProcessParams densities{};
  double wall_length = 5.0;
  TreeParams trees{};

  ChannelParams channel{};
  TxPowers powers{};
  double backhaul_fraction = 0.5;
  double bandwidth_hz = 1e9;
  double non_iab_fraction = 0.10;

  GaParams ga{};
  TabuParams tabu{};
  std::uint64_t exhaustive_cap = 1'000'000;

  std::vector<double> eta_bps{100e6};
  std::size_t instances = 20;
  int fading_draws = 50;
  bool backhaul_interference = false;
  bool backhaul_fading = false;
  bool split_backhaul = false;
  TemporalBlocking temporal{};
  /// Temporal blocker densities to route around; empty for no routing study.
  std::vector<double> lambda_temp;

  double forbidden_fraction = 0.0;
  double forbidden_cell_m = 50.0;
  ForbiddenTarget forbidden_target = ForbiddenTarget::kNonIab;

  std::uint64_t seed = 1;
  std::string output;

  /// Throws ConfigError naming the offending key.
  void validate() const;
  EvalOptions eval_options() const;
};

/// Sets `key` from its text form. Throws ConfigError for unknown keys or
/// unparsable values.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& config, const std::string& key);
/// Every key, in canonical order.
const std::vector<std::string>& config_keys();

/// `key = value` lines; blank lines and `#` comments ignored. Keys start
/// from the defaults. Throws ConfigError with the line number.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// Canonical `key = value` dump; parse_config(dump) round-trips.
std::string dump_config(const ExperimentConfig& config);
/// FNV-1a of the canonical dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

const char* code_version();

/// One instance at one sweep point.
struct Record {
  std::string scenario;
  ScenarioKind kind = ScenarioKind::kRandom;
  std::size_t instance = 0;
  std::uint64_t instance_seed = 0;
  double eta_bps = 0.0;
  std::size_t n_mbs = 0, n_sbs = 0, n_ue = 0, n_f = 0;
  double rho = 0.0;            ///< independent evaluation seed
  double mean_rate_bps = 0.0;
  double p5_rate_bps = 0.0;
  double p95_rate_bps = 0.0;
  double fitness_rho = -1.0;   ///< optimizer's own score; < 0 for non-optimized kinds
  std::size_t evaluations = 0;
  std::optional<double> lambda_temp;
  double access_update_pct = 0.0;
  double backhaul_update_pct = 0.0;
  double rho_before = 0.0;
  double rho_after = 0.0;
  double rho_frozen = 0.0;
};

struct TraceRow {
  std::size_t instance = 0;
  double eta_bps = 0.0;
  std::size_t iteration = 0;
  double queen_rho = 0.0;
  std::size_t evals_so_far = 0;
};

struct ResultSet {
  ExperimentConfig config;
  std::vector<Record> records;
  std::vector<TraceRow> traces;
  std::string hash;
  std::string version;

  /// Per-instance records with the config's swept parameters as columns.
  void write_csv(std::ostream& out) const;
  void write_trace_csv(std::ostream& out) const;
  /// Mean rho over instances per (eta, lambda_temp) point.
  double mean_rho(double eta_bps, std::optional<double> lambda_temp = std::nullopt) const;
};

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads. The first exception
/// by index is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

/// Samples each instance from its own seed, builds or optimizes the
/// deployment for every eta, evaluates it on an independent seed and, if
/// requested, injects temporal walls and re-routes. Output order depends only
/// on the config.
ResultSet run_experiment(const ExperimentConfig& config, std::size_t jobs = 1);

/// Instance `index` of a config (redrawn until it has an MBS and a UE).
NetworkInstance make_instance(const ExperimentConfig& config, std::size_t index);

/// Flat table emitted by a figure recipe.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void write_csv(std::ostream& out) const;
};

struct FigureOptions {
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::optional<std::size_t> instances;
  std::optional<int> fading_draws;
};

const std::vector<std::string>& figure_names();
/// Runs a figure recipe on reference defaults. Throws ConfigError for an
/// unknown name.
Table run_figure(const std::string& name, const FigureOptions& options);

}  // namespace iab
