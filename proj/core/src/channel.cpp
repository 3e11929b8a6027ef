#include "iab/channel.hpp"

#include <algorithm>
#include <string>

#include "iab/errors.hpp"

namespace iab {

void ChannelParams::validate() const {
  if (!(carrier_ghz > 0.0)) throw ParameterError("carrier_ghz must be > 0");
  if (!(alpha_los > 0.0)) throw ParameterError("alpha_los must be > 0");
  if (!(alpha_nlos >= alpha_los)) throw ParameterError("alpha_nlos must be >= alpha_los");
  if (!(hpbw_deg > 0.0 && hpbw_deg < 360.0)) throw ParameterError("hpbw_deg must be in (0, 360)");
  if (!std::isfinite(noise_figure_db)) throw ParameterError("noise_figure_db must be finite");
}

double path_loss_db(double distance_m, bool los, const ChannelParams& params) {
  if (!(distance_m > 0.0)) throw ParameterError("path loss distance must be > 0");
  const double r = std::max(distance_m, 1.0);
  const double alpha = los ? params.alpha_los : params.alpha_nlos;
  return params.reference_loss_db() + 10.0 * alpha * std::log10(r);
}

bool in_main_lobe(double boresight, double target, double hpbw_deg) {
  const double half = 0.5 * hpbw_deg * M_PI / 180.0;
  return std::abs(wrap_angle(target - boresight)) <= half;
}

double antenna_gain_db(double boresight, double target, const AntennaPattern& pattern,
                       double hpbw_deg) {
  return in_main_lobe(boresight, target, hpbw_deg) ? pattern.main_lobe_dbi : pattern.side_lobe_dbi;
}

double foliage_loss_db(bool in_leaf, double depth_m, double carrier_ghz) {
  if (!(depth_m > 0.0)) throw ParameterError("vegetation depth must be > 0");
  if (!(carrier_ghz > 0.0)) throw ParameterError("carrier frequency must be > 0");
  const double f_mhz = carrier_ghz * 1e3;
  return in_leaf ? 0.39 * std::pow(f_mhz, 0.39) * std::pow(depth_m, 0.25)
                 : 0.37 * std::pow(f_mhz, 0.18) * std::pow(depth_m, 0.59);
}

double foliage_loss_db(std::span<const TreeLine> crossings, double carrier_ghz) {
  double total = 0.0;
  for (const auto& t : crossings) total += foliage_loss_db(t.in_leaf, t.depth, carrier_ghz);
  return total;
}

double avg_rx_power_dbm(double tx_power_dbm, double distance_m, bool los, double foliage_db,
                        double tx_gain_dbi, double rx_gain_dbi, const ChannelParams& params) {
  return tx_power_dbm + tx_gain_dbi + rx_gain_dbi - path_loss_db(distance_m, los, params) - foliage_db;
}

LinkBudget make_link_budget(std::size_t tx, std::size_t rx, double tx_power_dbm, double distance_m,
                            bool los, double foliage_db, double tx_gain_dbi, double rx_gain_dbi,
                            const ChannelParams& params) {
  LinkBudget b;
  b.tx = tx;
  b.rx = rx;
  b.distance = distance_m;
  b.los = los;
  b.path_loss = path_loss_db(distance_m, los, params);
  b.foliage_loss = foliage_db;
  b.tx_gain = tx_gain_dbi;
  b.rx_gain = rx_gain_dbi;
  b.avg_rx_power = tx_power_dbm + tx_gain_dbi + rx_gain_dbi - b.path_loss - foliage_db;
  return b;
}

double instantaneous_rx_power_mw(double avg_rx_power_dbm, Rng& rng) {
  return dbm_to_mw(avg_rx_power_dbm) * fading_draw(rng);
}

double noise_power_dbm(double bandwidth_hz, const ChannelParams& params) {
  if (!(bandwidth_hz > 0.0)) throw ParameterError("bandwidth must be > 0");
  if (params.noise_power_override_dbm) return *params.noise_power_override_dbm;
  return -174.0 + 10.0 * std::log10(bandwidth_hz) + params.noise_figure_db;
}

double sinr(double signal_mw, double interference_mw, double bandwidth_hz,
            const ChannelParams& params) {
  if (!(signal_mw >= 0.0) || !(interference_mw >= 0.0)) {
    throw ParameterError("signal and interference powers must be >= 0");
  }
  return signal_mw / (interference_mw + dbm_to_mw(noise_power_dbm(bandwidth_hz, params)));
}

// ---------------------------------------------------------------------------

ObstacleField::ObstacleField(const NetworkInstance& instance, TemporalBlocking temporal)
    : walls_(make_wall_index(instance.region, instance.walls)),
      temporal_walls_(make_wall_index(instance.region, instance.temporal_walls)),
      trees_index_(make_tree_index(instance.region, instance.trees)),
      trees_(instance.trees),
      temporal_(temporal) {}

bool ObstacleField::los(Point a, Point b, bool with_temporal) const {
  if (walls_.any_hit(a, b)) return false;
  return !(with_temporal && temporal_walls_.any_hit(a, b));
}

double ObstacleField::foliage_db(Point a, Point b, double carrier_ghz) const {
  if (trees_.empty()) return 0.0;
  double total = 0.0;
  for (auto id : trees_index_.hits(a, b)) {
    total += foliage_loss_db(trees_[id].in_leaf, trees_[id].depth, carrier_ghz);
  }
  return total;
}

AccessLinkTable::AccessLinkTable(std::span<const Transmitter> bss, std::span<const Point> ues,
                                 const ObstacleField& field, const ChannelParams& params)
    : num_bs_(bss.size()), num_ue_(ues.size()) {
  const std::size_t n = num_bs_ * num_ue_;
  los_.resize(n);
  path_loss_.resize(n);
  foliage_.resize(n);
  bearing_.resize(n);
  avg_power_dbm_.resize(n);
  main_mw_.resize(n);
  side_mw_.resize(n);
  for (std::size_t b = 0; b < num_bs_; ++b) {
    const auto& tx = bss[b];
    for (std::size_t u = 0; u < num_ue_; ++u) {
      const auto k = at(b, u);
      // Co-located endpoints: an unobstructed 1 m link.
      const bool same = tx.position == ues[u];
      const bool los = same || field.access_los(tx.position, ues[u]);
      const double pl = iab::path_loss_db(std::max(distance(tx.position, ues[u]), 1.0), los, params);
      const double fol = same ? 0.0 : field.foliage_db(tx.position, ues[u], params.carrier_ghz);
      const double base = tx.power_dbm + params.ue_gain_dbi - pl - fol;
      los_[k] = los ? 1 : 0;
      path_loss_[k] = pl;
      foliage_[k] = fol;
      bearing_[k] = iab::bearing(tx.position, ues[u]);
      avg_power_dbm_[k] = base + tx.pattern.main_lobe_dbi;
      main_mw_[k] = dbm_to_mw(base + tx.pattern.main_lobe_dbi);
      side_mw_[k] = dbm_to_mw(base + tx.pattern.side_lobe_dbi);
    }
  }
}

BackhaulLinkTable::BackhaulLinkTable(std::span<const Point> mbs, std::span<const Point> sbs,
                                     const ObstacleField& field, const ChannelParams& params)
    : num_mbs_(mbs.size()), num_sbs_(sbs.size()) {
  const std::size_t n = num_mbs_ * num_sbs_;
  los_.resize(n);
  loss_.resize(n);
  foliage_.resize(n);
  bearing_.resize(n);
  for (std::size_t s = 0; s < num_sbs_; ++s) {
    for (std::size_t m = 0; m < num_mbs_; ++m) {
      const auto k = at(s, m);
      const bool same = mbs[m] == sbs[s];
      const bool los = same || field.backhaul_los(mbs[m], sbs[s]);
      const double fol = same ? 0.0 : field.foliage_db(mbs[m], sbs[s], params.carrier_ghz);
      los_[k] = los ? 1 : 0;
      foliage_[k] = fol;
      loss_[k] = iab::path_loss_db(std::max(distance(mbs[m], sbs[s]), 1.0), los, params) + fol;
      bearing_[k] = iab::bearing(mbs[m], sbs[s]);
    }
  }
}

double interference_access(std::size_t ue, std::size_t serving, const AccessLinkTable& links,
                           std::span<const std::optional<double>> boresights,
                           const ChannelParams& params, Rng& rng) {
  if (serving >= links.num_bs()) {
    throw ConsistencyError("serving BS " + std::to_string(serving) + " is not in the BS set");
  }
  if (boresights.size() != links.num_bs()) throw ConsistencyError("one boresight slot per BS required");
  double total = 0.0;
  for (std::size_t b = 0; b < links.num_bs(); ++b) {
    if (b == serving || !boresights[b]) continue;
    const double p = in_main_lobe(*boresights[b], links.bearing(b, ue), params.hpbw_deg)
                         ? links.main_lobe_mw(b, ue)
                         : links.side_lobe_mw(b, ue);
    total += p * fading_draw(rng);
  }
  return total;
}

double interference_backhaul(std::size_t sbs, std::size_t serving_mbs,
                             const BackhaulLinkTable& links,
                             std::span<const std::optional<double>> mbs_boresights,
                             std::span<const double> mbs_power_dbm, const ChannelParams& params,
                             Rng& rng) {
  if (serving_mbs >= links.num_mbs()) {
    throw ConsistencyError("serving MBS " + std::to_string(serving_mbs) + " is not in the MBS set");
  }
  if (mbs_boresights.size() != links.num_mbs() || mbs_power_dbm.size() != links.num_mbs()) {
    throw ConsistencyError("one boresight and power per MBS required");
  }
  const double rx_boresight = links.bearing_from_sbs(sbs, serving_mbs);
  double total = 0.0;
  for (std::size_t m = 0; m < links.num_mbs(); ++m) {
    if (m == serving_mbs || !mbs_boresights[m]) continue;
    const double g_tx =
        antenna_gain_db(*mbs_boresights[m], links.bearing_from_mbs(sbs, m), params.mbs_antenna, params.hpbw_deg);
    const double g_rx =
        antenna_gain_db(rx_boresight, links.bearing_from_sbs(sbs, m), params.sbs_antenna, params.hpbw_deg);
    const double avg = mbs_power_dbm[m] + g_tx + g_rx - links.total_loss_db(sbs, m);
    total += dbm_to_mw(avg) * fading_draw(rng);
  }
  return total;
}

}  // namespace iab
