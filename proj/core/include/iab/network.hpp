#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "iab/channel.hpp"
#include "iab/geometry.hpp"

namespace iab {

struct TxPowers {
  double mbs_dbm = 40.0;
  double sbs_dbm = 24.0;
  double ue_dbm = 0.0;  ///< carried for completeness; downlink only
};

/// Decision variables plus the resource knobs they are evaluated under.
struct Deployment {
  std::vector<Point> sbs_positions;
  /// SBS indices with dedicated (non-IAB) backhaul, sorted ascending, distinct.
  std::vector<std::size_t> non_iab;
  double backhaul_fraction = 0.5;  ///< share of B reserved for backhaul
  double bandwidth_hz = 1e9;
  TxPowers powers{};

  void validate() const;
  bool is_non_iab(std::size_t sbs) const;
};

/// Base stations are indexed MBSs first (0 .. M-1), then SBSs (M .. M+S-1).
struct AssociationState {
  std::size_t num_mbs = 0;
  std::size_t num_sbs = 0;
  std::vector<std::size_t> ue_bs;                       ///< serving BS per UE
  std::vector<std::optional<std::size_t>> sbs_donor;    ///< donor MBS per SBS; empty for non-IAB
  std::vector<std::size_t> load;                        ///< UEs per BS
  std::vector<double> access_bw_per_ue;                 ///< Hz per UE, per BS
  std::vector<double> backhaul_bw;                      ///< Hz per SBS (0 for non-IAB / idle)

  std::size_t num_bs() const { return num_mbs + num_sbs; }
  bool is_mbs(std::size_t bs) const { return bs < num_mbs; }
  std::size_t sbs_of(std::size_t bs) const { return bs - num_mbs; }
};

/// Transmitters in BS index order for the given SBS layout.
std::vector<Transmitter> make_transmitters(std::span<const Point> mbs, std::span<const Point> sbs,
                                           const TxPowers& powers, const ChannelParams& params);

/// Max average received power association over all BSs; ties go to the
/// lowest BS index. Throws ConfigError when there is no BS.
AssociationState associate_ues(const AccessLinkTable& links, std::size_t num_mbs,
                               std::size_t num_sbs);
AssociationState associate_ues(const NetworkInstance& instance, const Deployment& deployment,
                               const ChannelParams& params);

/// Minimum total loss (path loss + foliage) donor per IAB-backhauled SBS;
/// non-IAB SBSs get no donor. Throws ConfigError if an IAB SBS exists but
/// there is no MBS.
void associate_backhaul(AssociationState& state, const BackhaulLinkTable& links,
                        const Deployment& deployment);
void associate_backhaul(AssociationState& state, const NetworkInstance& instance,
                        const Deployment& deployment, const ChannelParams& params);

/// Fills loads, per-UE access shares and per-donor proportional backhaul
/// shares. Requires ue_bs and sbs_donor to be set.
void allocate_bandwidth(AssociationState& state, const Deployment& deployment);

enum class ServingKind { kMbs, kIabSbs, kNonIabSbs };

ServingKind serving_kind(const AssociationState& state, std::size_t bs);

/// Achievable rate (bps) of a UE given its access SINR and, for IAB-backhauled
/// SBSs, the backhaul SINR of its serving SBS. The backhaul rate of an SBS is
/// split equally among its UEs, and the UE gets the smaller of access and
/// backhaul rate.
double ue_rate(std::size_t ue, const AssociationState& state, double access_sinr,
               double backhaul_sinr, bool split_backhaul = true);

struct EvalOptions {
  int fading_draws = 50;
  /// Add MBS interference on backhaul links (off: noise-limited backhaul).
  bool backhaul_interference = false;
  /// Rayleigh-fade the backhaul signal per draw (off: fading-averaged SNR).
  bool backhaul_fading = false;
  TemporalBlocking temporal{};
  /// Divide an SBS's backhaul rate equally among its UEs (off: every UE is
  /// capped by the whole backhaul rate of its SBS).
  bool split_backhaul = false;
};

struct CoverageReport {
  double rho = 0.0;
  double eta_bps = 0.0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;  ///< UE x draw pairs
  double mean_rate_bps = 0.0;
  double p5_rate_bps = 0.0;
  double p95_rate_bps = 0.0;
  std::vector<double> per_ue_rate;        ///< mean over draws, bps
  std::vector<double> access_sinr_db;     ///< per UE, mean linear SINR over draws, in dB
  std::vector<double> backhaul_sinr_db;   ///< per SBS; NaN when no IAB backhaul
};

/// Monte Carlo coverage of one SBS layout on one instance.
///
/// Construction does the expensive part: link tables, UE association and the
/// fading realizations (signal and access interference for every UE and
/// draw). Everything that changes with the non-IAB selection or the resource
/// split is evaluated afterwards, so many candidate selections share one
/// evaluator and one set of random numbers.
class CoverageEvaluator {
 public:
  CoverageEvaluator(const NetworkInstance& instance, std::span<const Point> sbs_positions,
                    const TxPowers& powers, const ChannelParams& params, const EvalOptions& options,
                    std::uint64_t seed, const std::vector<std::size_t>* forced_ue_bs = nullptr);

  std::size_t num_ue() const { return num_ue_; }
  const std::vector<std::size_t>& ue_association() const { return ue_bs_; }
  const AccessLinkTable& access_links() const { return access_; }
  const BackhaulLinkTable& backhaul_links() const { return backhaul_; }

  /// Full association + allocation for a non-IAB selection.
  AssociationState associate(const Deployment& deployment,
                             const std::vector<std::optional<std::size_t>>* forced_donors = nullptr) const;

  /// Coverage for `deployment` (its sbs_positions must match the evaluator's).
  CoverageReport evaluate(const Deployment& deployment, double eta_bps, bool detailed = false,
                          const std::vector<std::optional<std::size_t>>* forced_donors = nullptr) const;

 private:
  std::size_t num_mbs_;
  std::size_t num_sbs_;
  std::size_t num_ue_;
  int draws_;
  ChannelParams params_;
  EvalOptions options_;
  std::uint64_t seed_;
  TxPowers powers_;
  ObstacleField field_;
  AccessLinkTable access_;
  BackhaulLinkTable backhaul_;
  std::vector<std::size_t> ue_bs_;
  std::vector<double> signal_mw_;        // [draw * num_ue + ue]
  std::vector<double> interference_mw_;  // [draw * num_ue + ue]
};

/// One-shot coverage evaluation; see CoverageEvaluator. Throws
/// UndefinedCoverageError when the instance has no UE and ParameterError for
/// fading_draws < 1.
CoverageReport coverage(const NetworkInstance& instance, const Deployment& deployment,
                        const ChannelParams& params, double eta_bps, const EvalOptions& options,
                        std::uint64_t seed, bool detailed = true);

}  // namespace iab
