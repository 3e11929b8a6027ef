#include "iab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "iab/errors.hpp"
#include "iab/routing.hpp"

#ifndef IAB_VERSION
#define IAB_VERSION "0.0.0"
#endif

namespace iab {

const char* code_version() { return IAB_VERSION; }

namespace {

const std::vector<std::pair<ScenarioKind, std::string>> kKindNames = {
    {ScenarioKind::kRandom, "random"},         {ScenarioKind::kGaNonIab, "ga_non_iab"},
    {ScenarioKind::kGaLocations, "ga_locations"}, {ScenarioKind::kGaJoint, "ga_joint"},
    {ScenarioKind::kMacroOnly, "macro_only"},  {ScenarioKind::kExhaustive, "exhaustive"},
    {ScenarioKind::kGreedy, "greedy"},         {ScenarioKind::kTabu, "tabu"},
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size() && std::isfinite(d)) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v[0] != '-') {
      const auto n = std::stoull(v, &used);
      if (used == v.size()) return n;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v, double scale = 1.0) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item) * scale);
  }
  return out;
}

std::string from_list(const std::vector<double>& v, double scale = 1.0) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i] / scale);
  return s;
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

struct Field {
  std::string key;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define IAB_DOUBLE(name, member)                                                                  \
  Field {                                                                                          \
    name, [](ExperimentConfig& c, const std::string& v) { c.member = to_double(name, v); },       \
        [](const ExperimentConfig& c) { return fmt(c.member); }                                    \
  }
#define IAB_UINT(name, member, type)                                                              \
  Field {                                                                                          \
    name, [](ExperimentConfig& c, const std::string& v) { c.member = static_cast<type>(to_uint(name, v)); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }                         \
  }
#define IAB_BOOL(name, member)                                                                    \
  Field {                                                                                          \
    name, [](ExperimentConfig& c, const std::string& v) { c.member = to_bool(name, v); },         \
        [](const ExperimentConfig& c) { return from_bool(c.member); }                              \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      {"scenario", [](ExperimentConfig& c, const std::string& v) { c.scenario = v; },
       [](const ExperimentConfig& c) { return c.scenario; }},
      {"kind", [](ExperimentConfig& c, const std::string& v) { c.kind = parse_scenario_kind(v); },
       [](const ExperimentConfig& c) { return to_string(c.kind); }},
      IAB_DOUBLE("area_km2", area_km2),
      IAB_DOUBLE("lambda_mbs", densities.mbs),
      IAB_DOUBLE("lambda_sbs", densities.sbs),
      IAB_DOUBLE("lambda_ue", densities.ue),
      IAB_DOUBLE("lambda_b", densities.blockers),
      IAB_DOUBLE("wall_length_m", wall_length),
      IAB_DOUBLE("lambda_t", densities.trees),
      IAB_DOUBLE("tree_length_m", trees.length),
      IAB_DOUBLE("tree_depth_m", trees.depth),
      IAB_DOUBLE("in_leaf_fraction", trees.in_leaf_fraction),
      IAB_DOUBLE("carrier_ghz", channel.carrier_ghz),
      IAB_DOUBLE("alpha_los", channel.alpha_los),
      IAB_DOUBLE("alpha_nlos", channel.alpha_nlos),
      IAB_DOUBLE("gain_mbs_dbi", channel.mbs_antenna.main_lobe_dbi),
      IAB_DOUBLE("side_lobe_mbs_dbi", channel.mbs_antenna.side_lobe_dbi),
      IAB_DOUBLE("gain_sbs_dbi", channel.sbs_antenna.main_lobe_dbi),
      IAB_DOUBLE("side_lobe_sbs_dbi", channel.sbs_antenna.side_lobe_dbi),
      IAB_DOUBLE("gain_ue_dbi", channel.ue_gain_dbi),
      IAB_DOUBLE("hpbw_deg", channel.hpbw_deg),
      IAB_DOUBLE("noise_figure_db", channel.noise_figure_db),
      {"noise_power_dbm",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "auto") {
           c.channel.noise_power_override_dbm.reset();
         } else {
           c.channel.noise_power_override_dbm = to_double("noise_power_dbm", v);
         }
       },
       [](const ExperimentConfig& c) {
         return c.channel.noise_power_override_dbm ? fmt(*c.channel.noise_power_override_dbm) : "auto";
       }},
      IAB_DOUBLE("p_m_dbm", powers.mbs_dbm),
      IAB_DOUBLE("p_s_dbm", powers.sbs_dbm),
      IAB_DOUBLE("p_u_dbm", powers.ue_dbm),
      IAB_DOUBLE("psi", backhaul_fraction),
      IAB_DOUBLE("bandwidth_hz", bandwidth_hz),
      IAB_DOUBLE("non_iab_fraction", non_iab_fraction),
      IAB_UINT("ga_k", ga.population, std::size_t),
      IAB_UINT("ga_j", ga.neighbors, std::size_t),
      IAB_UINT("ga_iterations", ga.iterations, std::size_t),
      IAB_UINT("ga_mutation_strength", ga.mutation_strength, std::size_t),
      IAB_DOUBLE("ga_location_step_m", ga.location_step),
      IAB_UINT("tabu_tenure", tabu.tenure, std::size_t),
      IAB_UINT("tabu_iterations", tabu.iterations, std::size_t),
      IAB_UINT("tabu_max_evaluations", tabu.max_evaluations, std::size_t),
      IAB_UINT("exhaustive_cap", exhaustive_cap, std::uint64_t),
      {"eta_mbps", [](ExperimentConfig& c, const std::string& v) { c.eta_bps = to_list("eta_mbps", v, 1e6); },
       [](const ExperimentConfig& c) { return from_list(c.eta_bps, 1e6); }},
      IAB_UINT("instances", instances, std::size_t),
      IAB_UINT("fading_draws", fading_draws, int),
      IAB_BOOL("backhaul_interference", backhaul_interference),
      IAB_BOOL("backhaul_fading", backhaul_fading),
      IAB_BOOL("split_backhaul", split_backhaul),
      IAB_BOOL("temporal_access", temporal.access),
      IAB_BOOL("temporal_backhaul", temporal.backhaul),
      {"lambda_temp", [](ExperimentConfig& c, const std::string& v) { c.lambda_temp = to_list("lambda_temp", v); },
       [](const ExperimentConfig& c) { return from_list(c.lambda_temp); }},
      IAB_DOUBLE("forbidden_fraction", forbidden_fraction),
      IAB_DOUBLE("forbidden_cell_m", forbidden_cell_m),
      {"forbidden_target",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "non_iab") {
           c.forbidden_target = ForbiddenTarget::kNonIab;
         } else if (v == "sbs") {
           c.forbidden_target = ForbiddenTarget::kSbs;
         } else {
           throw ConfigError("forbidden_target: expected non_iab or sbs, got '" + v + "'");
         }
       },
       [](const ExperimentConfig& c) {
         return std::string(c.forbidden_target == ForbiddenTarget::kNonIab ? "non_iab" : "sbs");
       }},
      IAB_UINT("seed", seed, std::uint64_t),
      {"output", [](ExperimentConfig& c, const std::string& v) { c.output = v; },
       [](const ExperimentConfig& c) { return c.output; }},
  };
  return f;
}

#undef IAB_DOUBLE
#undef IAB_UINT
#undef IAB_BOOL

const Field& field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  for (const auto& [k, n] : kKindNames) {
    if (k == kind) return n;
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(const std::string& name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw ConfigError("kind: unknown scenario kind '" + name + "'");
}

void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value) {
  field(key).set(config, trim(value));
}

std::string get_config_value(const ExperimentConfig& config, const std::string& key) {
  return field(key).get(config);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& key, const std::string& what) {
    if (!ok) throw ConfigError(key + ": " + what);
  };
  require(area_km2 > 0.0, "area_km2", "must be > 0");
  require(densities.mbs >= 0.0, "lambda_mbs", "must be >= 0");
  require(densities.sbs >= 0.0, "lambda_sbs", "must be >= 0");
  require(densities.ue > 0.0, "lambda_ue", "must be > 0");
  require(densities.blockers >= 0.0, "lambda_b", "must be >= 0");
  require(densities.trees >= 0.0, "lambda_t", "must be >= 0");
  require(wall_length > 0.0, "wall_length_m", "must be > 0");
  require(trees.length > 0.0, "tree_length_m", "must be > 0");
  require(trees.depth > 0.0, "tree_depth_m", "must be > 0");
  require(trees.in_leaf_fraction >= 0.0 && trees.in_leaf_fraction <= 1.0, "in_leaf_fraction", "must be in [0, 1]");
  require(channel.carrier_ghz > 0.0, "carrier_ghz", "must be > 0");
  require(channel.alpha_los > 0.0, "alpha_los", "must be > 0");
  require(channel.alpha_nlos >= channel.alpha_los, "alpha_nlos", "must be >= alpha_los");
  require(channel.hpbw_deg > 0.0 && channel.hpbw_deg < 360.0, "hpbw_deg", "must be in (0, 360)");
  require(backhaul_fraction >= 0.0 && backhaul_fraction <= 1.0, "psi",
          "must be in [0, 1], got " + fmt(backhaul_fraction));
  require(bandwidth_hz > 0.0, "bandwidth_hz", "must be > 0");
  require(non_iab_fraction >= 0.0 && non_iab_fraction <= 1.0, "non_iab_fraction", "must be in [0, 1]");
  require(ga.population >= 3, "ga_k", "must be >= 3");
  require(ga.neighbors > 0 && ga.neighbors + 1 < ga.population, "ga_j", "must satisfy 0 < J < K - 1");
  require(ga.iterations >= 1, "ga_iterations", "must be >= 1");
  require(ga.mutation_strength >= 1, "ga_mutation_strength", "must be >= 1");
  require(ga.location_step >= 0.0, "ga_location_step_m", "must be >= 0");
  require(tabu.iterations >= 1, "tabu_iterations", "must be >= 1");
  require(!eta_bps.empty(), "eta_mbps", "needs at least one value");
  for (double e : eta_bps) require(e >= 0.0, "eta_mbps", "values must be >= 0");
  require(instances >= 1, "instances", "must be >= 1");
  require(fading_draws >= 1, "fading_draws", "must be >= 1");
  for (double l : lambda_temp) require(l >= 0.0, "lambda_temp", "values must be >= 0");
  require(forbidden_fraction >= 0.0 && forbidden_fraction < 1.0, "forbidden_fraction", "must be in [0, 1)");
  require(forbidden_cell_m > 0.0, "forbidden_cell_m", "must be > 0");
  const bool subset_search = kind == ScenarioKind::kExhaustive || kind == ScenarioKind::kGreedy ||
                             kind == ScenarioKind::kTabu;
  require(!(subset_search && forbidden_fraction > 0.0), "forbidden_fraction",
          "not supported for " + to_string(kind));
}

EvalOptions ExperimentConfig::eval_options() const {
  EvalOptions o;
  o.fading_draws = fading_draws;
  o.backhaul_interference = backhaul_interference;
  o.backhaul_fading = backhaul_fading;
  o.split_backhaul = split_backhaul;
  o.temporal = temporal;
  return o;
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      set_config_value(c, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_config(in);
}

std::string dump_config(const ExperimentConfig& config) {
  std::string s;
  for (const auto& f : fields()) s += f.key + " = " + f.get(config) + "\n";
  return s;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

NetworkInstance make_instance(const ExperimentConfig& config, std::size_t index) {
  const auto inst_seed = split_seed(config.seed, index);
  Rng rng(split_seed(inst_seed, Stream::kGeometry));
  const Region region = Region::from_area_km2(config.area_km2);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    NetworkInstance inst = sample_instance(region, config.densities, config.wall_length, config.trees, rng);
    const bool has_mbs = !inst.mbs.empty() || config.densities.mbs == 0.0;
    if (has_mbs && !inst.ues.empty()) return inst;
  }
  throw ConfigError("lambda_mbs/lambda_ue: no instance with an MBS and a UE after 1000 draws");
}

namespace {

struct InstanceOutput {
  std::vector<Record> records;
  std::vector<TraceRow> traces;
};

std::size_t fixed_count(const ExperimentConfig& c, std::size_t num_sbs) {
  return static_cast<std::size_t>(std::llround(c.non_iab_fraction * static_cast<double>(num_sbs)));
}

void add_trace(InstanceOutput& out, std::size_t instance, double eta, const GaTrace& trace) {
  for (std::size_t i = 0; i < trace.queen_rho.size(); ++i) {
    out.traces.push_back({instance, eta, i + 1, trace.queen_rho[i], trace.evals_so_far[i]});
  }
}

InstanceOutput run_instance(const ExperimentConfig& c, std::size_t index) {
  InstanceOutput out;
  const auto inst_seed = split_seed(c.seed, index);
  const NetworkInstance inst = make_instance(c, index);
  const EvalOptions opts = c.eval_options();
  const std::size_t ns = inst.sbs.size();
  const std::size_t nf = fixed_count(c, ns);

  ForbiddenZones zones;
  if (c.forbidden_fraction > 0.0) {
    Rng zr(split_seed(inst_seed, Stream::kForbidden));
    zones = ForbiddenZones::random(inst.region, c.forbidden_fraction, c.forbidden_cell_m, zr);
  }
  const ForbiddenZones none;
  const ForbiddenZones& sbs_zones = c.forbidden_target == ForbiddenTarget::kSbs ? zones : none;

  std::vector<std::size_t> all(ns);
  for (std::size_t s = 0; s < ns; ++s) all[s] = s;
  std::vector<std::size_t> eligible;
  for (std::size_t s = 0; s < ns; ++s) {
    if (c.forbidden_target == ForbiddenTarget::kSbs || !zones.forbidden(inst.sbs[s])) eligible.push_back(s);
  }

  for (std::size_t e = 0; e < c.eta_bps.size(); ++e) {
    const double eta = c.eta_bps[e];
    Rng dep_rng(split_seed(split_seed(inst_seed, Stream::kDeployment), e));
    Rng opt_rng(split_seed(split_seed(inst_seed, Stream::kOptimizer), e));

    Objective ob;
    ob.instance = &inst;
    ob.base.backhaul_fraction = c.backhaul_fraction;
    ob.base.bandwidth_hz = c.bandwidth_hz;
    ob.base.powers = c.powers;
    ob.channel = c.channel;
    ob.options = opts;
    ob.eta_bps = eta;
    ob.seed = split_seed(inst_seed, Stream::kFitness);

    // SBS layout of the random deployment, moved out of forbidden cells when
    // the mask applies to SBS positions.
    std::vector<Point> layout = inst.sbs;
    for (auto& p : layout) {
      if (sbs_zones.forbidden(p)) p = sbs_zones.sample_feasible(inst.region, dep_rng);
    }
    if (nf > eligible.size()) {
      throw ConfigError("non_iab_fraction: " + std::to_string(nf) + " non-IAB SBSs requested but only " +
                        std::to_string(eligible.size()) + " are outside forbidden zones");
    }
    const auto random_set = random_subset(eligible, nf, dep_rng);

    Record r;
    r.scenario = c.scenario;
    r.kind = c.kind;
    r.instance = index;
    r.instance_seed = inst_seed;
    r.eta_bps = eta;
    r.n_mbs = inst.mbs.size();
    r.n_ue = inst.ues.size();
    r.n_sbs = ns;
    r.n_f = nf;

    Deployment dep = ob.base;
    dep.sbs_positions = layout;
    switch (c.kind) {
      case ScenarioKind::kRandom:
        dep.non_iab = random_set;
        break;
      case ScenarioKind::kMacroOnly:
        dep.sbs_positions.clear();
        r.n_sbs = r.n_f = 0;
        break;
      case ScenarioKind::kGaNonIab: {
        SubsetFitness f(ob, layout);
        auto res = ga_non_iab(f, nf, c.ga, opt_rng, eligible);
        dep.non_iab = res.best.non_iab;
        r.fitness_rho = res.best.rho;
        r.evaluations = res.trace.evaluations();
        add_trace(out, index, eta, res.trace);
        break;
      }
      case ScenarioKind::kGaLocations: {
        auto res = ga_locations(ob, ns, random_set, c.ga, opt_rng, sbs_zones);
        dep.sbs_positions = res.best.positions;
        dep.non_iab = res.best.non_iab;
        r.fitness_rho = res.best.rho;
        r.evaluations = res.trace.evaluations();
        add_trace(out, index, eta, res.trace);
        break;
      }
      case ScenarioKind::kGaJoint: {
        auto res = ga_joint(ob, ns, nf, c.ga, opt_rng, sbs_zones);
        dep.sbs_positions = res.best.positions;
        dep.non_iab = res.best.non_iab;
        r.fitness_rho = res.best.rho;
        r.evaluations = res.trace.evaluations();
        add_trace(out, index, eta, res.trace);
        break;
      }
      case ScenarioKind::kExhaustive: {
        SubsetFitness f(ob, layout);
        auto res = exhaustive_non_iab(f, nf, c.exhaustive_cap);
        dep.non_iab = res.best.non_iab;
        r.fitness_rho = res.best.rho;
        r.evaluations = f.evaluations();
        break;
      }
      case ScenarioKind::kGreedy: {
        SubsetFitness f(ob, layout);
        auto res = greedy_non_iab(f, nf);
        dep.non_iab = res.non_iab;
        r.fitness_rho = res.rho;
        r.evaluations = f.evaluations();
        break;
      }
      case ScenarioKind::kTabu: {
        SubsetFitness f(ob, layout);
        auto res = tabu_non_iab(f, nf, c.tabu, opt_rng);
        dep.non_iab = res.best.non_iab;
        r.fitness_rho = res.best.rho;
        r.evaluations = f.evaluations();
        add_trace(out, index, eta, res.trace);
        break;
      }
    }

    const auto eval_seed = split_seed(inst_seed, Stream::kEvaluation);
    if (c.lambda_temp.empty()) {
      const auto rep = coverage(inst, dep, c.channel, eta, opts, eval_seed, true);
      r.rho = rep.rho;
      r.mean_rate_bps = rep.mean_rate_bps;
      r.p5_rate_bps = rep.p5_rate_bps;
      r.p95_rate_bps = rep.p95_rate_bps;
      out.records.push_back(r);
      continue;
    }
    for (std::size_t t = 0; t < c.lambda_temp.size(); ++t) {
      // Same temporal walls for every deployment kind and eta of an instance.
      Rng tr(split_seed(split_seed(inst_seed, Stream::kTemporal), t));
      const auto scenario = inject_temporal(inst, c.lambda_temp[t], c.wall_length, tr);
      const auto diff = reroute(scenario, dep, c.channel, eta, opts, eval_seed);
      Record rt = r;
      rt.lambda_temp = c.lambda_temp[t];
      rt.access_update_pct = 100.0 * diff.access_fraction();
      rt.backhaul_update_pct = 100.0 * diff.backhaul_fraction();
      rt.rho_before = diff.rho_before;
      rt.rho_after = diff.rho_after;
      rt.rho_frozen = diff.rho_frozen;
      rt.rho = diff.rho_after;
      out.records.push_back(rt);
    }
  }
  return out;
}

}  // namespace

ResultSet run_experiment(const ExperimentConfig& config, std::size_t jobs) {
  config.validate();
  std::vector<InstanceOutput> per(config.instances);
  parallel_for(config.instances, jobs, [&](std::size_t i) { per[i] = run_instance(config, i); });
  ResultSet rs;
  rs.config = config;
  rs.hash = config_hash(config);
  rs.version = code_version();
  for (auto& p : per) {
    rs.records.insert(rs.records.end(), p.records.begin(), p.records.end());
    rs.traces.insert(rs.traces.end(), p.traces.begin(), p.traces.end());
  }
  return rs;
}

void ResultSet::write_csv(std::ostream& out) const {
  const auto& c = config;
  out << "scenario,kind,instance,seed,eta_bps,lambda_mbs,lambda_sbs,lambda_ue,lambda_b,lambda_t,tree_length_m,"
         "psi,p_s_dbm,gain_sbs_dbi,backhaul_interference,n_mbs,n_sbs,n_ue,n_f,rho,mean_rate_bps,p5_rate_bps,"
         "p95_rate_bps,fitness_rho,evaluations,lambda_temp,access_update_pct,backhaul_update_pct,rho_before,"
         "rho_after,rho_frozen\n";
  for (const auto& r : records) {
    out << r.scenario << ',' << to_string(r.kind) << ',' << r.instance << ',' << r.instance_seed << ','
        << fmt(r.eta_bps) << ',' << fmt(c.densities.mbs) << ',' << fmt(c.densities.sbs) << ','
        << fmt(c.densities.ue) << ',' << fmt(c.densities.blockers) << ',' << fmt(c.densities.trees) << ','
        << fmt(c.trees.length) << ',' << fmt(c.backhaul_fraction) << ',' << fmt(c.powers.sbs_dbm) << ','
        << fmt(c.channel.sbs_antenna.main_lobe_dbi) << ',' << (c.backhaul_interference ? 1 : 0) << ','
        << r.n_mbs << ',' << r.n_sbs << ',' << r.n_ue << ',' << r.n_f << ',' << fmt(r.rho) << ',';
    if (r.lambda_temp) {
      out << ",,,";
    } else {
      out << fmt(r.mean_rate_bps) << ',' << fmt(r.p5_rate_bps) << ',' << fmt(r.p95_rate_bps) << ',';
    }
    if (r.fitness_rho >= 0.0) out << fmt(r.fitness_rho);
    out << ',' << r.evaluations << ',';
    if (r.lambda_temp) {
      out << fmt(*r.lambda_temp) << ',' << fmt(r.access_update_pct) << ',' << fmt(r.backhaul_update_pct) << ','
          << fmt(r.rho_before) << ',' << fmt(r.rho_after) << ',' << fmt(r.rho_frozen);
    } else {
      out << ",,,,,";
    }
    out << '\n';
  }
}

void ResultSet::write_trace_csv(std::ostream& out) const {
  out << "scenario,kind,instance,eta_bps,iteration,queen_rho,evals_so_far\n";
  for (const auto& t : traces) {
    out << config.scenario << ',' << to_string(config.kind) << ',' << t.instance << ',' << fmt(t.eta_bps) << ','
        << t.iteration << ',' << fmt(t.queen_rho) << ',' << t.evals_so_far << '\n';
  }
}

double ResultSet::mean_rho(double eta_bps, std::optional<double> lambda_temp) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.eta_bps != eta_bps || r.lambda_temp != lambda_temp) continue;
    sum += r.rho;
    ++n;
  }
  return n ? sum / static_cast<double>(n) : std::nan("");
}

void Table::write_csv(std::ostream& out) const {
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Figure recipes

namespace {

ExperimentConfig figure_base(const FigureOptions& o) {
  ExperimentConfig c;
  c.seed = o.seed;
  if (o.instances) c.instances = *o.instances;
  if (o.fading_draws) c.fading_draws = *o.fading_draws;
  return c;
}

ExperimentConfig with_kind(ExperimentConfig c, ScenarioKind k, const std::string& label) {
  c.kind = k;
  c.scenario = label;
  return c;
}

// Mean Queen fitness per iteration over instances.
std::vector<std::pair<double, std::size_t>> mean_trace(const ResultSet& rs, double eta) {
  std::map<std::size_t, std::pair<double, std::size_t>> acc;
  std::map<std::size_t, std::size_t> evals;
  for (const auto& t : rs.traces) {
    if (t.eta_bps != eta) continue;
    acc[t.iteration].first += t.queen_rho;
    acc[t.iteration].second += 1;
    evals[t.iteration] = std::max(evals[t.iteration], t.evals_so_far);
  }
  std::vector<std::pair<double, std::size_t>> out;
  for (const auto& [it, v] : acc) out.emplace_back(v.first / static_cast<double>(v.second), evals[it]);
  return out;
}

double mean_of(const ResultSet& rs, double eta, double Record::*field,
               std::optional<double> lambda_temp = std::nullopt) {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& r : rs.records) {
    if (r.eta_bps != eta || r.lambda_temp != lambda_temp) continue;
    s += r.*field;
    ++n;
  }
  return n ? s / static_cast<double>(n) : std::nan("");
}

// Iteration-curve figures: GA traces plus flat baselines.
Table iteration_figure(const std::vector<ExperimentConfig>& runs, const FigureOptions& o) {
  Table t{{"iteration", "queen_rho", "scenario"}, {}};
  std::size_t iterations = 1;
  for (const auto& c : runs) iterations = std::max(iterations, c.ga.iterations);
  for (const auto& c : runs) {
    const auto rs = run_experiment(c, o.jobs);
    const double eta = c.eta_bps.front();
    const bool traced = c.kind == ScenarioKind::kGaNonIab || c.kind == ScenarioKind::kGaLocations ||
                        c.kind == ScenarioKind::kGaJoint;
    if (traced) {
      const auto tr = mean_trace(rs, eta);
      for (std::size_t i = 0; i < tr.size(); ++i) t.rows.push_back({std::to_string(i + 1), fmt(tr[i].first), c.scenario});
    } else {
      const double rho = rs.mean_rho(eta);
      for (std::size_t i = 1; i <= iterations; ++i) t.rows.push_back({std::to_string(i), fmt(rho), c.scenario});
    }
  }
  return t;
}

Table fig8(const FigureOptions& o) {
  const auto base = figure_base(o);
  auto constrained = [](ExperimentConfig c) {
    c.forbidden_fraction = 0.4;
    c.forbidden_target = ForbiddenTarget::kNonIab;
    return c;
  };
  auto k10 = with_kind(base, ScenarioKind::kGaNonIab, "ga_k10_j5");
  k10.ga.population = 10;
  k10.ga.neighbors = 5;
  return iteration_figure({with_kind(base, ScenarioKind::kGaNonIab, "ga_k6_j3"), k10,
                           constrained(with_kind(base, ScenarioKind::kGaNonIab, "ga_k6_j3_constrained")),
                           with_kind(base, ScenarioKind::kRandom, "random"),
                           constrained(with_kind(base, ScenarioKind::kRandom, "random_constrained")),
                           with_kind(base, ScenarioKind::kMacroOnly, "macro_only")},
                          o);
}

Table fig9(const FigureOptions& o) {
  const auto base = figure_base(o);
  return iteration_figure({with_kind(base, ScenarioKind::kGaLocations, "ga_locations"),
                           with_kind(base, ScenarioKind::kGaJoint, "ga_joint"),
                           with_kind(base, ScenarioKind::kRandom, "random"),
                           with_kind(base, ScenarioKind::kMacroOnly, "macro_only")},
                          o);
}

Table fig10(const FigureOptions& o) {
  Table t{{"lambda_b", "eta_mbps", "scenario", "rho"}, {}};
  auto base = figure_base(o);
  base.eta_bps = {50e6, 100e6, 150e6};
  for (double lb : {500.0, 1000.0, 1500.0, 2000.0}) {
    for (auto kind : {ScenarioKind::kRandom, ScenarioKind::kGaNonIab}) {
      auto c = with_kind(base, kind, to_string(kind));
      c.densities.blockers = lb;
      const auto rs = run_experiment(c, o.jobs);
      for (double eta : c.eta_bps) t.rows.push_back({fmt(lb), fmt(eta / 1e6), c.scenario, fmt(rs.mean_rho(eta))});
    }
  }
  return t;
}

Table fig11(const FigureOptions& o) {
  Table t{{"lambda_t", "tree_length_m", "scenario", "rho"}, {}};
  auto base = figure_base(o);
  base.densities.sbs = 8.0;
  base.powers.sbs_dbm = 33.0;
  base.eta_bps = {50e6};
  for (double lt : {5.0, 15.0}) {
    for (double lam : {250.0, 500.0, 750.0, 1000.0, 1250.0}) {
      for (auto kind : {ScenarioKind::kRandom, ScenarioKind::kGaNonIab}) {
        auto c = with_kind(base, kind, to_string(kind));
        c.densities.trees = lam;
        c.trees.length = lt;
        const auto rs = run_experiment(c, o.jobs);
        t.rows.push_back({fmt(lam), fmt(lt), c.scenario, fmt(rs.mean_rho(50e6))});
      }
    }
  }
  return t;
}

Table fig12(const FigureOptions& o) {
  Table t{{"p_s_dbm", "scenario", "rho"}, {}};
  auto base = figure_base(o);
  base.eta_bps = {150e6};
  for (double ps : {16.0, 20.0, 24.0, 28.0, 32.0}) {
    for (auto kind : {ScenarioKind::kRandom, ScenarioKind::kGaNonIab, ScenarioKind::kGaLocations}) {
      auto c = with_kind(base, kind, to_string(kind));
      c.powers.sbs_dbm = ps;
      const auto rs = run_experiment(c, o.jobs);
      t.rows.push_back({fmt(ps), c.scenario, fmt(rs.mean_rho(150e6))});
    }
  }
  return t;
}

Table fig13(const FigureOptions& o) {
  Table t{{"gain_sbs_dbi", "scenario", "backhaul_interference", "rho"}, {}};
  auto base = figure_base(o);
  base.eta_bps = {150e6};
  for (double g : {10.0, 14.0, 18.0, 22.0, 26.0}) {
    for (auto kind : {ScenarioKind::kRandom, ScenarioKind::kMacroOnly, ScenarioKind::kGaNonIab}) {
      for (bool bi : {false, true}) {
        auto c = with_kind(base, kind, to_string(kind));
        c.channel.sbs_antenna.main_lobe_dbi = g;
        c.backhaul_interference = bi;
        const auto rs = run_experiment(c, o.jobs);
        t.rows.push_back({fmt(g), c.scenario, bi ? "1" : "0", fmt(rs.mean_rho(150e6))});
      }
    }
  }
  return t;
}

Table fig14(const FigureOptions& o) {
  Table t{{"iteration", "evals_so_far", "queen_rho", "scenario"}, {}};
  auto base = figure_base(o);
  if (!o.instances) base.instances = 1;  // one example channel realization
  base.densities.sbs = 20.0;
  const double eta = base.eta_bps.front();
  base.tabu.iterations = 1000;
  base.tabu.max_evaluations = base.ga.budget();

  const auto ga = run_experiment(with_kind(base, ScenarioKind::kGaNonIab, "ga_non_iab"), o.jobs);
  const auto tr = mean_trace(ga, eta);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    t.rows.push_back({std::to_string(i + 1), std::to_string(tr[i].second), fmt(tr[i].first), "ga_non_iab"});
  }
  const auto tabu = run_experiment(with_kind(base, ScenarioKind::kTabu, "tabu"), o.jobs);
  const auto tt = mean_trace(tabu, eta);
  for (std::size_t i = 0; i < tt.size(); ++i) {
    t.rows.push_back({std::to_string(i + 1), std::to_string(tt[i].second), fmt(tt[i].first), "tabu"});
  }
  for (auto kind : {ScenarioKind::kExhaustive, ScenarioKind::kGreedy}) {
    const auto rs = run_experiment(with_kind(base, kind, to_string(kind)), o.jobs);
    const double rho = mean_of(rs, eta, &Record::fitness_rho);
    std::size_t evals = 0;
    for (const auto& r : rs.records) evals = std::max(evals, r.evaluations);
    for (std::size_t i = 1; i <= base.ga.iterations; ++i) {
      t.rows.push_back({std::to_string(i), std::to_string(evals), fmt(rho), to_string(kind)});
    }
  }
  return t;
}

Table fig15(const FigureOptions& o) {
  Table t{{"lambda_temp", "p_s_dbm", "deployment_kind", "access_update_pct", "backhaul_update_pct", "rho_before",
           "rho_after"},
          {}};
  auto base = figure_base(o);
  base.densities.blockers = 700.0;
  base.lambda_temp = {0.0, 50.0, 100.0, 200.0, 300.0, 500.0};
  const double eta = base.eta_bps.front();
  for (double ps : {24.0, 28.0}) {
    for (auto kind : {ScenarioKind::kRandom, ScenarioKind::kGaNonIab, ScenarioKind::kGaLocations}) {
      auto c = with_kind(base, kind, to_string(kind));
      c.powers.sbs_dbm = ps;
      const auto rs = run_experiment(c, o.jobs);
      for (double lt : c.lambda_temp) {
        t.rows.push_back({fmt(lt), fmt(ps), c.scenario, fmt(mean_of(rs, eta, &Record::access_update_pct, lt)),
                          fmt(mean_of(rs, eta, &Record::backhaul_update_pct, lt)),
                          fmt(mean_of(rs, eta, &Record::rho_before, lt)),
                          fmt(mean_of(rs, eta, &Record::rho_after, lt))});
      }
    }
  }
  return t;
}

const std::vector<std::pair<std::string, Table (*)(const FigureOptions&)>>& recipes() {
  static const std::vector<std::pair<std::string, Table (*)(const FigureOptions&)>> r = {
      {"fig8", fig8},   {"fig9", fig9},   {"fig10", fig10}, {"fig11", fig11}, {"fig12", fig12},
      {"fig13", fig13}, {"fig14", fig14}, {"fig15", fig15}, {"fig16", fig15},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [name, fn] : recipes()) n.push_back(name);
    return n;
  }();
  return names;
}

Table run_figure(const std::string& name, const FigureOptions& options) {
  for (const auto& [n, fn] : recipes()) {
    if (n == name) return fn(options);
  }
  throw ConfigError("unknown figure '" + name + "'");
}

}  // namespace iab
