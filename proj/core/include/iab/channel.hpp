#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "iab/geometry.hpp"
#include "iab/random.hpp"

namespace iab {

/// Sectored (flat-top) antenna pattern.
struct AntennaPattern {
  double main_lobe_dbi = 18.0;
  double side_lobe_dbi = -2.0;
};

struct ChannelParams {
  double carrier_ghz = 28.0;
  double alpha_los = 3.0;
  double alpha_nlos = 4.0;
  AntennaPattern mbs_antenna{18.0, -2.0};
  AntennaPattern sbs_antenna{18.0, -2.0};
  double ue_gain_dbi = 0.0;
  double hpbw_deg = 30.0;
  double noise_figure_db = 5.0;
  /// Fixed noise power in dBm; replaces the thermal-floor computation when set.
  std::optional<double> noise_power_override_dbm;

  /// Close-in reference loss at 1 m: 32.4 + 20 log10(f_GHz).
  double reference_loss_db() const { return 32.4 + 20.0 * std::log10(carrier_ghz); }
  void validate() const;
};

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

/// Close-in path loss in dB. Distances below 1 m are clamped to 1 m.
/// Throws ParameterError for r <= 0.
double path_loss_db(double distance_m, bool los, const ChannelParams& params);

/// Wraps an angle to [-pi, pi].
inline double wrap_angle(double a) {
  if (a >= -M_PI && a <= M_PI) return a;
  return std::remainder(a, 2.0 * M_PI);
}

/// True when target lies inside the half-power beam around boresight
/// (boundary included).
bool in_main_lobe(double boresight, double target, double hpbw_deg);

double antenna_gain_db(double boresight, double target, const AntennaPattern& pattern,
                       double hpbw_deg);

/// FITU-R loss of a single tree line; frequency enters in MHz.
double foliage_loss_db(bool in_leaf, double depth_m, double carrier_ghz);
/// Sum of per-crossing FITU-R losses; zero for no crossings.
double foliage_loss_db(std::span<const TreeLine> crossings, double carrier_ghz);

struct LinkBudget {
  std::size_t tx = 0;
  std::size_t rx = 0;
  double distance = 0.0;
  bool los = true;
  double path_loss = 0.0;     ///< dB
  double foliage_loss = 0.0;  ///< dB
  double tx_gain = 0.0;       ///< dBi
  double rx_gain = 0.0;       ///< dBi
  double avg_rx_power = 0.0;  ///< dBm, fading averaged
};

/// Fading-averaged received power, P_t + G_tx + G_rx - PL - foliage (dB domain).
double avg_rx_power_dbm(double tx_power_dbm, double distance_m, bool los, double foliage_db,
                        double tx_gain_dbi, double rx_gain_dbi, const ChannelParams& params);

LinkBudget make_link_budget(std::size_t tx, std::size_t rx, double tx_power_dbm, double distance_m,
                            bool los, double foliage_db, double tx_gain_dbi, double rx_gain_dbi,
                            const ChannelParams& params);

/// One Rayleigh-faded realization of an average power: linear mW times an
/// Exp(1) power fading draw.
double instantaneous_rx_power_mw(double avg_rx_power_dbm, Rng& rng);

/// Unit-mean exponential draw (Rayleigh power fading).
inline double fading_draw(Rng& rng) { return -std::log1p(-uniform01(rng)); }

/// Thermal floor (-174 dBm/Hz) over the bandwidth plus noise figure, unless
/// the params carry an explicit override.
double noise_power_dbm(double bandwidth_hz, const ChannelParams& params);

/// signal / (interference + noise(bandwidth)). Throws ParameterError for
/// bandwidth <= 0 or negative powers.
double sinr(double signal_mw, double interference_mw, double bandwidth_hz,
            const ChannelParams& params);

/// Which links see the post-planning temporal walls.
struct TemporalBlocking {
  bool access = true;
  bool backhaul = true;
};

/// Obstacle environment of one instance: static walls, temporal walls and
/// tree lines behind grid indices.
class ObstacleField {
 public:
  explicit ObstacleField(const NetworkInstance& instance, TemporalBlocking temporal = {});

  bool access_los(Point a, Point b) const { return los(a, b, temporal_.access); }
  bool backhaul_los(Point a, Point b) const { return los(a, b, temporal_.backhaul); }
  double foliage_db(Point a, Point b, double carrier_ghz) const;

 private:
  bool los(Point a, Point b, bool with_temporal) const;

  SegmentIndex walls_;
  SegmentIndex temporal_walls_;
  SegmentIndex trees_index_;
  std::vector<TreeLine> trees_;
  TemporalBlocking temporal_;
};

/// A base station as seen by the access links.
struct Transmitter {
  Point position{};
  double power_dbm = 0.0;
  AntennaPattern pattern{};
};

/// Precomputed BS -> UE link table (fading-free). Row-major by BS.
class AccessLinkTable {
 public:
  AccessLinkTable(std::span<const Transmitter> bss, std::span<const Point> ues,
                  const ObstacleField& field, const ChannelParams& params);

  std::size_t num_bs() const { return num_bs_; }
  std::size_t num_ue() const { return num_ue_; }

  bool los(std::size_t bs, std::size_t ue) const { return los_[at(bs, ue)] != 0; }
  double path_loss_db(std::size_t bs, std::size_t ue) const { return path_loss_[at(bs, ue)]; }
  double foliage_db(std::size_t bs, std::size_t ue) const { return foliage_[at(bs, ue)]; }
  /// Direction of the UE as seen from the BS.
  double bearing(std::size_t bs, std::size_t ue) const { return bearing_[at(bs, ue)]; }
  /// Fading-averaged received power with the BS beam on the UE, dBm.
  double avg_rx_power_dbm(std::size_t bs, std::size_t ue) const { return avg_power_dbm_[at(bs, ue)]; }
  /// Linear fading-averaged received power, mW, with main or side lobe toward the UE.
  double main_lobe_mw(std::size_t bs, std::size_t ue) const { return main_mw_[at(bs, ue)]; }
  double side_lobe_mw(std::size_t bs, std::size_t ue) const { return side_mw_[at(bs, ue)]; }

 private:
  std::size_t at(std::size_t bs, std::size_t ue) const { return bs * num_ue_ + ue; }

  std::size_t num_bs_ = 0;
  std::size_t num_ue_ = 0;
  std::vector<std::uint8_t> los_;
  std::vector<double> path_loss_;
  std::vector<double> foliage_;
  std::vector<double> bearing_;
  std::vector<double> avg_power_dbm_;
  std::vector<double> main_mw_;
  std::vector<double> side_mw_;
};

/// Precomputed MBS <-> SBS backhaul link table. Row-major by SBS.
class BackhaulLinkTable {
 public:
  BackhaulLinkTable(std::span<const Point> mbs, std::span<const Point> sbs,
                    const ObstacleField& field, const ChannelParams& params);

  std::size_t num_mbs() const { return num_mbs_; }
  std::size_t num_sbs() const { return num_sbs_; }

  bool los(std::size_t sbs, std::size_t mbs) const { return los_[at(sbs, mbs)] != 0; }
  /// Path loss plus foliage loss, dB.
  double total_loss_db(std::size_t sbs, std::size_t mbs) const { return loss_[at(sbs, mbs)]; }
  double foliage_db(std::size_t sbs, std::size_t mbs) const { return foliage_[at(sbs, mbs)]; }
  /// Direction of the SBS seen from the MBS, and of the MBS seen from the SBS.
  double bearing_from_mbs(std::size_t sbs, std::size_t mbs) const { return bearing_[at(sbs, mbs)]; }
  double bearing_from_sbs(std::size_t sbs, std::size_t mbs) const {
    return wrap_angle(bearing_[at(sbs, mbs)] + M_PI);
  }

 private:
  std::size_t at(std::size_t sbs, std::size_t mbs) const { return sbs * num_mbs_ + mbs; }

  std::size_t num_mbs_ = 0;
  std::size_t num_sbs_ = 0;
  std::vector<std::uint8_t> los_;
  std::vector<double> loss_;
  std::vector<double> foliage_;
  std::vector<double> bearing_;
};

/// Aggregate instantaneous access interference at one UE, in mW.
///
/// Every BS other than `serving` that has a beam direction (an idle BS has
/// none) contributes its faded power, with its own gain evaluated from its
/// boresight toward the UE. UE receive gain is the ChannelParams UE gain.
/// Fading draws are consumed in BS index order, one per contributing BS.
/// Throws ConsistencyError if `serving` is not a BS of the table.
double interference_access(std::size_t ue, std::size_t serving, const AccessLinkTable& links,
                           std::span<const std::optional<double>> boresights,
                           const ChannelParams& params, Rng& rng);

/// Aggregate instantaneous backhaul interference at one SBS, in mW: every
/// transmitting MBS except the serving one, with its transmit gain from its
/// own boresight and the SBS receive gain relative to its beam on the donor.
double interference_backhaul(std::size_t sbs, std::size_t serving_mbs,
                             const BackhaulLinkTable& links,
                             std::span<const std::optional<double>> mbs_boresights,
                             std::span<const double> mbs_power_dbm, const ChannelParams& params,
                             Rng& rng);

}  // namespace iab
