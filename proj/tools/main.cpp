// iab-sim: run experiments, sweeps and figure datasets.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "iab/errors.hpp"
#include "iab/harness.hpp"

namespace {

enum Exit { kOk = 0, kConfig = 2, kRuntime = 3, kRefused = 4 };

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw iab::ConfigError("cannot write " + path);
  return out;
}

// `<out>.csv`, `<out>.trace.csv` and `<out>.json`; stdout when `out` is empty.
void write_results(const std::vector<iab::ResultSet>& sets, const std::string& out,
                   const std::string& command) {
  std::ostringstream csv, trace;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    std::ostringstream a, b;
    sets[i].write_csv(a);
    sets[i].write_trace_csv(b);
    std::string sa = a.str(), sb = b.str();
    if (i > 0) {
      sa.erase(0, sa.find('\n') + 1);
      sb.erase(0, sb.find('\n') + 1);
    }
    csv << sa;
    trace << sb;
  }
  if (out.empty()) {
    std::cout << csv.str();
    return;
  }
  open_out(out + ".csv") << csv.str();
  if (trace.str().find('\n') + 1 < trace.str().size()) open_out(out + ".trace.csv") << trace.str();

  nlohmann::json meta;
  meta["command"] = command;
  meta["code_version"] = iab::code_version();
  meta["created"] = timestamp();
  meta["runs"] = nlohmann::json::array();
  for (const auto& s : sets) {
    nlohmann::json run;
    run["config_hash"] = s.hash;
    run["records"] = s.records.size();
    nlohmann::json cfg;
    for (const auto& key : iab::config_keys()) cfg[key] = iab::get_config_value(s.config, key);
    run["config"] = cfg;
    meta["runs"].push_back(run);
  }
  open_out(out + ".json") << meta.dump(2) << '\n';
}

iab::ExperimentConfig load(const std::string& path, std::optional<std::uint64_t> seed) {
  auto c = path.empty() ? iab::ExperimentConfig{} : iab::load_config(path);
  if (seed) c.seed = *seed;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IAB network planning simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string out;
  std::optional<std::size_t> instances;
  app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "Output prefix; stdout when omitted");
  app.add_option("--instances", instances, "Number of instances (overrides the config)")
      ->check(CLI::PositiveNumber);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one experiment config");
  run->add_option("config", config_path, "Config file")->required();

  std::string sweep_config, param;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "Run a config once per value of one key");
  sweep->add_option("config", sweep_config, "Config file (defaults when omitted)");
  sweep->add_option("--param", param, "Config key to vary")->required();
  sweep->add_option("--values", values, "Values for the key")->required();

  std::string figure;
  auto* fig = app.add_subcommand("figure", "Emit a figure dataset on reference defaults");
  fig->add_option("name", figure, "Figure name")->required()->check(CLI::IsMember(iab::figure_names()));

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "Check a config file");
  val->add_option("config", validate_path, "Config file")->required();

  auto* dump = app.add_subcommand("defaults", "Print the default config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfig;
  }

  try {
    if (*run) {
      auto c = load(config_path, seed);
      if (instances) c.instances = *instances;
      const auto target = out.empty() ? c.output : out;
      write_results({iab::run_experiment(c, jobs)}, target, "run " + config_path);
    } else if (*sweep) {
      auto base = load(sweep_config, seed);
      if (instances) base.instances = *instances;
      std::vector<iab::ResultSet> sets;
      for (const auto& v : values) {
        auto c = base;
        iab::set_config_value(c, param, v);
        sets.push_back(iab::run_experiment(c, jobs));
      }
      write_results(sets, out.empty() ? base.output : out, "sweep " + param);
    } else if (*fig) {
      iab::FigureOptions o;
      if (seed) o.seed = *seed;
      o.jobs = jobs;
      o.instances = instances;
      const auto table = iab::run_figure(figure, o);
      if (out.empty()) {
        table.write_csv(std::cout);
      } else {
        auto f = open_out(out + ".csv");
        table.write_csv(f);
        nlohmann::json meta{{"command", "figure " + figure},
                            {"code_version", iab::code_version()},
                            {"created", timestamp()},
                            {"seed", o.seed},
                            {"rows", table.rows.size()}};
        open_out(out + ".json") << meta.dump(2) << '\n';
      }
    } else if (*val) {
      const auto c = load(validate_path, seed);
      std::cout << "ok " << iab::config_hash(c) << '\n';
    } else if (*dump) {
      std::cout << iab::dump_config(iab::ExperimentConfig{});
    }
  } catch (const iab::RefusedError& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kRefused;
  } catch (const iab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kOk;
}
