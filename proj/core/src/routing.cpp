#include "iab/routing.hpp"

#include <algorithm>
#include <istream>
#include <sstream>

#include "iab/errors.hpp"

namespace iab {

NetworkInstance TemporalScenario::base() const {
  NetworkInstance b = instance;
  b.temporal_walls.clear();
  return b;
}

TemporalScenario inject_temporal(const NetworkInstance& base, double lambda_temp, double wall_length,
                                 Rng& rng) {
  if (!(lambda_temp >= 0.0)) throw ParameterError("temporal blocker density must be >= 0");
  TemporalScenario s;
  s.instance = base;
  s.lambda_temp = lambda_temp;
  auto walls = sample_blockers(base.region, lambda_temp, wall_length, rng);
  s.instance.temporal_walls.insert(s.instance.temporal_walls.end(), walls.begin(), walls.end());
  return s;
}

double RoutingDiff::access_fraction() const {
  return access_links ? static_cast<double>(access_changed) / static_cast<double>(access_links) : 0.0;
}

double RoutingDiff::backhaul_fraction() const {
  return backhaul_links ? static_cast<double>(backhaul_changed) / static_cast<double>(backhaul_links) : 0.0;
}

RoutingDiff reroute(const TemporalScenario& scenario, const Deployment& deployment,
                    const ChannelParams& params, double eta_bps, const EvalOptions& options,
                    std::uint64_t seed) {
  deployment.validate();
  const auto& pos = deployment.sbs_positions;
  const NetworkInstance base = scenario.base();

  const CoverageEvaluator before(base, pos, deployment.powers, params, options, seed);
  const AssociationState plan = before.associate(deployment);

  const CoverageEvaluator after(scenario.instance, pos, deployment.powers, params, options, seed);
  const AssociationState now = after.associate(deployment);

  const CoverageEvaluator frozen(scenario.instance, pos, deployment.powers, params, options, seed,
                                 &plan.ue_bs);

  RoutingDiff d;
  d.access_links = plan.ue_bs.size();
  for (std::size_t u = 0; u < plan.ue_bs.size(); ++u) d.access_changed += plan.ue_bs[u] != now.ue_bs[u];
  for (std::size_t s = 0; s < plan.sbs_donor.size(); ++s) {
    if (!plan.sbs_donor[s]) continue;
    ++d.backhaul_links;
    d.backhaul_changed += plan.sbs_donor[s] != now.sbs_donor[s];
  }
  d.rho_before = before.evaluate(deployment, eta_bps).rho;
  d.rho_after = after.evaluate(deployment, eta_bps).rho;
  d.rho_frozen = frozen.evaluate(deployment, eta_bps, false, &plan.sbs_donor).rho;
  return d;
}

// ---------------------------------------------------------------------------

std::array<std::uint8_t, kBapHeaderSize> bap_encode(const BapHeader& h) {
  if (h.reserved > 0x7) throw ParameterError("BAP reserved field exceeds 3 bits");
  if (h.address > 0x3FF) throw ParameterError("BAP address exceeds 10 bits");
  if (h.path_id > 0x3FF) throw ParameterError("BAP path ID exceeds 10 bits");
  return {
      static_cast<std::uint8_t>((h.flag ? 0x80 : 0x00) | (h.reserved << 4) | (h.address >> 6)),
      static_cast<std::uint8_t>(((h.address & 0x3F) << 2) | (h.path_id >> 8)),
      static_cast<std::uint8_t>(h.path_id & 0xFF),
  };
}

BapHeader bap_decode(std::span<const std::uint8_t> o) {
  if (o.size() != kBapHeaderSize) {
    throw ParameterError("BAP header must be 3 octets, got " + std::to_string(o.size()));
  }
  BapHeader h;
  h.flag = (o[0] & 0x80) != 0;
  h.reserved = static_cast<std::uint8_t>((o[0] >> 4) & 0x7);
  h.address = static_cast<std::uint16_t>(((o[0] & 0x0F) << 6) | (o[1] >> 2));
  h.path_id = static_cast<std::uint16_t>(((o[1] & 0x03) << 8) | o[2]);
  return h;
}

// ---------------------------------------------------------------------------

std::size_t BapTopology::add_node(const std::string& name, std::uint16_t address) {
  if (address > 0x3FF) throw ParameterError("BAP address of " + name + " exceeds 10 bits");
  if (by_name_.count(name)) throw ConsistencyError("duplicate node " + name);
  if (std::find(addresses_.begin(), addresses_.end(), address) != addresses_.end()) {
    throw ConsistencyError("duplicate BAP address " + std::to_string(address));
  }
  const std::size_t id = names_.size();
  names_.push_back(name);
  addresses_.push_back(address);
  by_name_[name] = id;
  links_.emplace_back();
  return id;
}

std::size_t BapTopology::id(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ConsistencyError("unknown node " + name);
  return it->second;
}

void BapTopology::add_link(const std::string& from, const std::string& to) {
  const auto a = id(from);
  const auto b = id(to);
  if (std::find(links_[a].begin(), links_[a].end(), b) == links_[a].end()) links_[a].push_back(b);
}

void BapTopology::add_route(const std::string& node, std::uint16_t address, std::uint16_t path_id,
                            const std::string& next_hop) {
  if (address > 0x3FF || path_id > 0x3FF) throw ParameterError("route key exceeds 10 bits");
  routes_[{id(node), address, path_id}] = id(next_hop);
}

void BapTopology::validate() const {
  for (const auto& [key, next] : routes_) {
    const auto node = std::get<0>(key);
    if (next == node) throw ConsistencyError("route at " + names_[node] + " points back at itself");
    const auto& out = links_[node];
    if (std::find(out.begin(), out.end(), next) == out.end()) {
      throw ConsistencyError("route at " + names_[node] + " uses missing link to " + names_[next]);
    }
  }
}

BapTopology::Result BapTopology::forward(const BapHeader& header, const std::string& ingress) const {
  Result r;
  std::vector<std::uint8_t> seen(names_.size(), 0);
  std::size_t at = id(ingress);
  while (true) {
    if (seen[at]) throw ConsistencyError("routing loop at " + names_[at]);
    seen[at] = 1;
    r.path.push_back(at);
    if (addresses_[at] == header.address) {
      r.delivered = true;
      return r;
    }
    auto it = routes_.find({at, header.address, header.path_id});
    if (it == routes_.end()) {
      r.diagnostic = "no entry at " + names_[at] + " for address " + std::to_string(header.address) +
                     " path " + std::to_string(header.path_id);
      return r;
    }
    at = it->second;
  }
}

BapTopology BapTopology::parse(std::istream& in) {
  BapTopology t;
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw ConfigError("topology line " + std::to_string(lineno) + ": " + what);
  };
  auto field = [&](std::istringstream& ss, const char* what) {
    long v = -1;
    if (!(ss >> v) || v < 0 || v > 0x3FF) fail(std::string("bad ") + what);
    return static_cast<std::uint16_t>(v);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) continue;
    try {
      if (kind == "node") {
        std::string name;
        if (!(ss >> name)) fail("node needs a name");
        t.add_node(name, field(ss, "address"));
      } else if (kind == "link") {
        std::string a, b;
        if (!(ss >> a >> b)) fail("link needs two nodes");
        t.add_link(a, b);
      } else if (kind == "route") {
        std::string node, next;
        if (!(ss >> node)) fail("route needs a node");
        const auto addr = field(ss, "address");
        const auto path = field(ss, "path id");
        if (!(ss >> next)) fail("route needs a next hop");
        t.add_route(node, addr, path, next);
      } else {
        fail("unknown statement '" + kind + "'");
      }
    } catch (const ConsistencyError& e) {
      fail(e.what());
    } catch (const ParameterError& e) {
      fail(e.what());
    }
    std::string extra;
    if (ss >> extra) fail("trailing token '" + extra + "'");
  }
  t.validate();
  return t;
}

}  // namespace iab
