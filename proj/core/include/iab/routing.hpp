#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "iab/geometry.hpp"
#include "iab/network.hpp"
#include "iab/random.hpp"

namespace iab {

// ---------------------------------------------------------------------------
// Temporal blockage and re-association

/// Base instance plus walls that appear after planning.
struct TemporalScenario {
  NetworkInstance instance;  ///< base layers untouched; temporal walls in `temporal_walls`
  double lambda_temp = 0.0;  ///< km^-2

  /// The instance without its temporal walls.
  NetworkInstance base() const;
};

/// Adds a PPP of temporal walls (same length and orientation law as the
/// static ones). Throws ParameterError for a negative density.
TemporalScenario inject_temporal(const NetworkInstance& base, double lambda_temp, double wall_length, Rng& rng);

struct RoutingDiff {
  std::size_t access_links = 0;       ///< UEs
  std::size_t access_changed = 0;     ///< UEs whose serving BS changed
  std::size_t backhaul_links = 0;     ///< IAB-backhauled SBSs
  std::size_t backhaul_changed = 0;   ///< of those, donor changed
  double rho_before = 0.0;            ///< base instance
  double rho_after = 0.0;             ///< temporal walls, re-associated
  double rho_frozen = 0.0;            ///< temporal walls, associations kept

  double access_fraction() const;
  double backhaul_fraction() const;
};

/// Recomputes received powers under the temporal walls, re-associates UEs
/// and backhaul, re-allocates bandwidth and compares with the plan made on
/// the base instance. All three coverage figures share `seed`.
RoutingDiff reroute(const TemporalScenario& scenario, const Deployment& deployment,
                    const ChannelParams& params, double eta_bps, const EvalOptions& options,
                    std::uint64_t seed);

// ---------------------------------------------------------------------------
// BAP header

struct BapHeader {
  bool flag = false;          ///< data/control bit
  std::uint8_t reserved = 0;  ///< 3 bits
  std::uint16_t address = 0;  ///< 10 bits, destination node
  std::uint16_t path_id = 0;  ///< 10 bits

  friend bool operator==(const BapHeader&, const BapHeader&) = default;
};

inline constexpr std::size_t kBapHeaderSize = 3;

/// MSB-first layout:
///   octet 0: flag | reserved(3) | address[9:6]
///   octet 1: address[5:0] | path_id[9:8]
///   octet 2: path_id[7:0]
/// Throws ParameterError when a field does not fit its width.
std::array<std::uint8_t, kBapHeaderSize> bap_encode(const BapHeader& header);

/// Inverse of bap_encode. Throws ParameterError unless exactly 3 octets.
BapHeader bap_decode(std::span<const std::uint8_t> octets);

// ---------------------------------------------------------------------------
// Path-based forwarding

/// IAB nodes, their directed links and per-node BAP routing tables.
class BapTopology {
 public:
  /// Returns the node id. Names and addresses must be unique.
  std::size_t add_node(const std::string& name, std::uint16_t address);
  void add_link(const std::string& from, const std::string& to);
  /// At `node`, packets for (address, path) go to `next_hop`.
  void add_route(const std::string& node, std::uint16_t address, std::uint16_t path_id,
                 const std::string& next_hop);

  /// Throws ConsistencyError when a route points at the node itself or at a
  /// node it has no link to.
  void validate() const;

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t id) const { return names_.at(id); }
  std::uint16_t address(std::size_t id) const { return addresses_.at(id); }
  std::size_t id(const std::string& name) const;

  struct Result {
    std::vector<std::size_t> path;  ///< ingress first; ends at the destination when delivered
    bool delivered = false;
    std::string diagnostic;         ///< why the packet was dropped
  };

  /// Hop-by-hop table lookup from `ingress` until the node whose address
  /// matches the header. A missing entry drops the packet; revisiting a
  /// node throws ConsistencyError.
  Result forward(const BapHeader& header, const std::string& ingress) const;

  /// Text format, one statement per line, `#` starts a comment:
  ///   node  <name> <bap-address>
  ///   link  <from> <to>
  ///   route <node> <dest-address> <path-id> <next-hop>
  /// Throws ConfigError with the line number on malformed input.
  static BapTopology parse(std::istream& in);

 private:
  std::vector<std::string> names_;
  std::vector<std::uint16_t> addresses_;
  std::map<std::string, std::size_t> by_name_;
  std::vector<std::vector<std::size_t>> links_;
  std::map<std::tuple<std::size_t, std::uint16_t, std::uint16_t>, std::size_t> routes_;
};

}  // namespace iab
