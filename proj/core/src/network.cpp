#include "iab/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "iab/errors.hpp"

namespace iab {

void Deployment::validate() const {
  if (!(backhaul_fraction >= 0.0 && backhaul_fraction <= 1.0)) {
    throw ParameterError("psi (backhaul_fraction) must be in [0, 1]");
  }
  if (!(bandwidth_hz > 0.0)) throw ParameterError("bandwidth must be > 0");
  for (std::size_t k = 0; k < non_iab.size(); ++k) {
    if (non_iab[k] >= sbs_positions.size()) throw ParameterError("non-IAB index out of range");
    if (k > 0 && non_iab[k] <= non_iab[k - 1]) throw ParameterError("non-IAB set must be sorted and distinct");
  }
}

bool Deployment::is_non_iab(std::size_t sbs) const {
  return std::binary_search(non_iab.begin(), non_iab.end(), sbs);
}

std::vector<Transmitter> make_transmitters(std::span<const Point> mbs, std::span<const Point> sbs,
                                           const TxPowers& powers, const ChannelParams& params) {
  std::vector<Transmitter> out;
  out.reserve(mbs.size() + sbs.size());
  for (Point p : mbs) out.push_back({p, powers.mbs_dbm, params.mbs_antenna});
  for (Point p : sbs) out.push_back({p, powers.sbs_dbm, params.sbs_antenna});
  return out;
}

AssociationState associate_ues(const AccessLinkTable& links, std::size_t num_mbs,
                               std::size_t num_sbs) {
  if (links.num_bs() == 0) throw ConfigError("no base station to associate UEs with");
  if (links.num_bs() != num_mbs + num_sbs) throw ConsistencyError("link table does not match BS counts");
  AssociationState st;
  st.num_mbs = num_mbs;
  st.num_sbs = num_sbs;
  st.ue_bs.resize(links.num_ue());
  for (std::size_t u = 0; u < links.num_ue(); ++u) {
    std::size_t best = 0;
    double best_p = links.avg_rx_power_dbm(0, u);
    for (std::size_t b = 1; b < links.num_bs(); ++b) {
      const double p = links.avg_rx_power_dbm(b, u);
      if (p > best_p) {
        best_p = p;
        best = b;
      }
    }
    st.ue_bs[u] = best;
  }
  st.sbs_donor.assign(num_sbs, std::nullopt);
  return st;
}

AssociationState associate_ues(const NetworkInstance& instance, const Deployment& deployment,
                               const ChannelParams& params) {
  const ObstacleField field(instance);
  const auto tx = make_transmitters(instance.mbs, deployment.sbs_positions, deployment.powers, params);
  const AccessLinkTable links(tx, instance.ues, field, params);
  return associate_ues(links, instance.mbs.size(), deployment.sbs_positions.size());
}

void associate_backhaul(AssociationState& state, const BackhaulLinkTable& links,
                        const Deployment& deployment) {
  if (links.num_sbs() != state.num_sbs || links.num_mbs() != state.num_mbs) {
    throw ConsistencyError("backhaul table does not match association state");
  }
  state.sbs_donor.assign(state.num_sbs, std::nullopt);
  for (std::size_t s = 0; s < state.num_sbs; ++s) {
    if (deployment.is_non_iab(s)) continue;
    if (links.num_mbs() == 0) throw ConfigError("IAB-backhauled SBS present but no MBS (donor) exists");
    std::size_t best = 0;
    double best_loss = links.total_loss_db(s, 0);
    for (std::size_t m = 1; m < links.num_mbs(); ++m) {
      if (links.total_loss_db(s, m) < best_loss) {
        best_loss = links.total_loss_db(s, m);
        best = m;
      }
    }
    state.sbs_donor[s] = best;
  }
}

void associate_backhaul(AssociationState& state, const NetworkInstance& instance,
                        const Deployment& deployment, const ChannelParams& params) {
  const ObstacleField field(instance);
  const BackhaulLinkTable links(instance.mbs, deployment.sbs_positions, field, params);
  associate_backhaul(state, links, deployment);
}

void allocate_bandwidth(AssociationState& state, const Deployment& deployment) {
  const double B = deployment.bandwidth_hz;
  const double psi = deployment.backhaul_fraction;
  if (state.sbs_donor.size() != state.num_sbs) throw ConsistencyError("backhaul association missing");
  state.load.assign(state.num_bs(), 0);
  for (auto bs : state.ue_bs) {
    if (bs >= state.num_bs()) throw ConsistencyError("UE associated with unknown BS");
    ++state.load[bs];
  }
  state.access_bw_per_ue.assign(state.num_bs(), 0.0);
  for (std::size_t b = 0; b < state.num_bs(); ++b) {
    if (state.load[b] == 0) continue;
    const bool dedicated = !state.is_mbs(b) && !state.sbs_donor[state.sbs_of(b)];
    const double node_bw = dedicated ? B : (1.0 - psi) * B;
    state.access_bw_per_ue[b] = node_bw / static_cast<double>(state.load[b]);
  }
  // Each donor splits its own psi*B among its children in proportion to load.
  std::vector<std::size_t> donor_load(state.num_mbs, 0);
  for (std::size_t s = 0; s < state.num_sbs; ++s) {
    if (state.sbs_donor[s]) donor_load[*state.sbs_donor[s]] += state.load[state.num_mbs + s];
  }
  state.backhaul_bw.assign(state.num_sbs, 0.0);
  for (std::size_t s = 0; s < state.num_sbs; ++s) {
    if (!state.sbs_donor[s]) continue;
    const auto total = donor_load[*state.sbs_donor[s]];
    if (total == 0) continue;
    state.backhaul_bw[s] = psi * B * static_cast<double>(state.load[state.num_mbs + s]) /
                           static_cast<double>(total);
  }
}

ServingKind serving_kind(const AssociationState& state, std::size_t bs) {
  if (state.is_mbs(bs)) return ServingKind::kMbs;
  return state.sbs_donor[state.sbs_of(bs)] ? ServingKind::kIabSbs : ServingKind::kNonIabSbs;
}

double ue_rate(std::size_t ue, const AssociationState& state, double access_sinr,
               double backhaul_sinr, bool split_backhaul) {
  const std::size_t bs = state.ue_bs.at(ue);
  const double access = state.access_bw_per_ue[bs] * std::log2(1.0 + access_sinr);
  if (serving_kind(state, bs) != ServingKind::kIabSbs) return access;
  const std::size_t s = state.sbs_of(bs);
  double backhaul = state.backhaul_bw[s] * std::log2(1.0 + backhaul_sinr);
  if (split_backhaul) backhaul /= static_cast<double>(state.load[bs]);
  return std::min(access, backhaul);
}

// ---------------------------------------------------------------------------

namespace {

std::optional<double> pick_boresight(const std::vector<std::size_t>& served, Rng& rng,
                                     auto&& bearing_of) {
  if (served.empty()) return std::nullopt;
  std::uniform_int_distribution<std::size_t> pick(0, served.size() - 1);
  return bearing_of(served[pick(rng)]);
}

double percentile(std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

CoverageEvaluator::CoverageEvaluator(const NetworkInstance& instance,
                                     std::span<const Point> sbs_positions, const TxPowers& powers,
                                     const ChannelParams& params, const EvalOptions& options,
                                     std::uint64_t seed, const std::vector<std::size_t>* forced_ue_bs)
    : num_mbs_(instance.mbs.size()),
      num_sbs_(sbs_positions.size()),
      num_ue_(instance.ues.size()),
      draws_(options.fading_draws),
      params_(params),
      options_(options),
      seed_(seed),
      powers_(powers),
      field_(instance, options.temporal),
      access_(make_transmitters(instance.mbs, sbs_positions, powers, params), instance.ues, field_, params),
      backhaul_(instance.mbs, sbs_positions, field_, params) {
  params.validate();
  if (draws_ < 1) throw ParameterError("fading draw count must be >= 1");
  if (num_ue_ == 0) throw UndefinedCoverageError("coverage is undefined without UEs");
  if (forced_ue_bs) {
    if (forced_ue_bs->size() != num_ue_) throw ConsistencyError("forced association has wrong size");
    for (auto b : *forced_ue_bs) {
      if (b >= access_.num_bs()) throw ConsistencyError("forced association names unknown BS");
    }
    ue_bs_ = *forced_ue_bs;
  } else {
    ue_bs_ = associate_ues(access_, num_mbs_, num_sbs_).ue_bs;
  }

  const std::size_t nbs = access_.num_bs();
  std::vector<std::vector<std::size_t>> served(nbs);
  for (std::size_t u = 0; u < num_ue_; ++u) served[ue_bs_[u]].push_back(u);

  signal_mw_.resize(static_cast<std::size_t>(draws_) * num_ue_);
  interference_mw_.resize(signal_mw_.size());
  Rng rng(seed);
  std::vector<std::optional<double>> boresights(nbs);
  for (int d = 0; d < draws_; ++d) {
    for (std::size_t b = 0; b < nbs; ++b) {
      boresights[b] = pick_boresight(served[b], rng, [&](std::size_t u) { return access_.bearing(b, u); });
    }
    for (std::size_t u = 0; u < num_ue_; ++u) {
      const auto k = static_cast<std::size_t>(d) * num_ue_ + u;
      signal_mw_[k] = access_.main_lobe_mw(ue_bs_[u], u) * fading_draw(rng);
      interference_mw_[k] = interference_access(u, ue_bs_[u], access_, boresights, params_, rng);
    }
  }
}

AssociationState CoverageEvaluator::associate(
    const Deployment& deployment, const std::vector<std::optional<std::size_t>>* forced_donors) const {
  if (deployment.sbs_positions.size() != num_sbs_) {
    throw ConsistencyError("deployment SBS count differs from the evaluator's layout");
  }
  AssociationState st;
  st.num_mbs = num_mbs_;
  st.num_sbs = num_sbs_;
  st.ue_bs = ue_bs_;
  if (forced_donors) {
    if (forced_donors->size() != num_sbs_) throw ConsistencyError("forced donor map has wrong size");
    st.sbs_donor = *forced_donors;
    // Dedicated backhaul overrides any forced wireless donor.
    for (auto s : deployment.non_iab) st.sbs_donor[s].reset();
  } else {
    associate_backhaul(st, backhaul_, deployment);
  }
  allocate_bandwidth(st, deployment);
  return st;
}

CoverageReport CoverageEvaluator::evaluate(
    const Deployment& deployment, double eta_bps, bool detailed,
    const std::vector<std::optional<std::size_t>>* forced_donors) const {
  const AssociationState st = associate(deployment, forced_donors);
  const std::size_t nbs = st.num_bs();

  // Access noise per serving BS (all its UEs share the same bandwidth).
  std::vector<double> noise_mw(nbs, 0.0);
  for (std::size_t b = 0; b < nbs; ++b) {
    if (st.access_bw_per_ue[b] > 0.0) noise_mw[b] = dbm_to_mw(noise_power_dbm(st.access_bw_per_ue[b], params_));
  }

  // Average backhaul signal and noise per IAB SBS.
  std::vector<double> bh_signal_mw(num_sbs_, 0.0);
  std::vector<double> bh_noise_mw(num_sbs_, 0.0);
  std::vector<double> bh_sinr(num_sbs_, 0.0);
  const double g_bh = params_.mbs_antenna.main_lobe_dbi + params_.sbs_antenna.main_lobe_dbi;
  for (std::size_t s = 0; s < num_sbs_; ++s) {
    if (!st.sbs_donor[s] || st.backhaul_bw[s] <= 0.0) continue;
    bh_signal_mw[s] = dbm_to_mw(powers_.mbs_dbm + g_bh - backhaul_.total_loss_db(s, *st.sbs_donor[s]));
    bh_noise_mw[s] = dbm_to_mw(noise_power_dbm(st.backhaul_bw[s], params_));
    bh_sinr[s] = bh_signal_mw[s] / bh_noise_mw[s];
  }
  const bool per_draw_backhaul = options_.backhaul_interference || options_.backhaul_fading;
  std::vector<std::vector<std::size_t>> children(num_mbs_);
  if (per_draw_backhaul) {
    for (std::size_t s = 0; s < num_sbs_; ++s) {
      if (st.sbs_donor[s] && st.backhaul_bw[s] > 0.0) children[*st.sbs_donor[s]].push_back(s);
    }
  }
  const std::vector<double> mbs_power(num_mbs_, powers_.mbs_dbm);
  Rng bh_rng(split_seed(seed_, Stream::kEvaluation));
  std::vector<std::optional<double>> mbs_boresight(num_mbs_);

  CoverageReport rep;
  rep.eta_bps = eta_bps;
  rep.seed = seed_;
  rep.samples = static_cast<std::size_t>(draws_) * num_ue_;
  std::vector<double> rates;
  if (detailed) {
    rates.reserve(rep.samples);
    rep.per_ue_rate.assign(num_ue_, 0.0);
    rep.access_sinr_db.assign(num_ue_, 0.0);
  }
  // Without per-sample output the rate test reduces to SINR thresholds,
  // which saves a log2 per UE and draw.
  std::vector<double> access_need(nbs, std::numeric_limits<double>::infinity());
  for (std::size_t b = 0; b < nbs; ++b) {
    if (st.access_bw_per_ue[b] > 0.0) access_need[b] = std::exp2(eta_bps / st.access_bw_per_ue[b]) - 1.0;
  }
  std::vector<std::uint8_t> backhaul_ok(num_sbs_, 0);
  auto refresh_backhaul_ok = [&] {
    for (std::size_t s = 0; s < num_sbs_; ++s) {
      const std::size_t load = st.load[num_mbs_ + s];
      if (bh_noise_mw[s] <= 0.0 || load == 0) continue;
      double rate = st.backhaul_bw[s] * std::log2(1.0 + bh_sinr[s]);
      if (options_.split_backhaul) rate /= static_cast<double>(load);
      backhaul_ok[s] = rate >= eta_bps ? 1 : 0;
    }
  };
  if (!detailed && !per_draw_backhaul) refresh_backhaul_ok();

  std::size_t covered = 0;
  for (int d = 0; d < draws_; ++d) {
    if (per_draw_backhaul) {
      for (std::size_t m = 0; m < num_mbs_; ++m) {
        mbs_boresight[m] = pick_boresight(children[m], bh_rng,
                                          [&](std::size_t s) { return backhaul_.bearing_from_mbs(s, m); });
      }
      for (std::size_t s = 0; s < num_sbs_; ++s) {
        if (bh_signal_mw[s] <= 0.0) continue;
        const double sig = options_.backhaul_fading ? bh_signal_mw[s] * fading_draw(bh_rng) : bh_signal_mw[s];
        const double intf = options_.backhaul_interference
                                ? interference_backhaul(s, *st.sbs_donor[s], backhaul_, mbs_boresight,
                                                        mbs_power, params_, bh_rng)
                                : 0.0;
        bh_sinr[s] = sig / (intf + bh_noise_mw[s]);
      }
      if (!detailed) refresh_backhaul_ok();
    }
    const double* sig = signal_mw_.data() + static_cast<std::size_t>(d) * num_ue_;
    const double* intf = interference_mw_.data() + static_cast<std::size_t>(d) * num_ue_;
    if (!detailed) {
      for (std::size_t u = 0; u < num_ue_; ++u) {
        const std::size_t bs = st.ue_bs[u];
        if (st.access_bw_per_ue[bs] <= 0.0) continue;
        if (!st.is_mbs(bs) && st.sbs_donor[st.sbs_of(bs)] && !backhaul_ok[st.sbs_of(bs)]) continue;
        if (sig[u] / (intf[u] + noise_mw[bs]) >= access_need[bs]) ++covered;
      }
      continue;
    }
    for (std::size_t u = 0; u < num_ue_; ++u) {
      const std::size_t bs = st.ue_bs[u];
      double rate = 0.0;
      double access_sinr = 0.0;
      if (st.access_bw_per_ue[bs] > 0.0) {
        access_sinr = sig[u] / (intf[u] + noise_mw[bs]);
        const double backhaul = st.is_mbs(bs) ? 0.0 : bh_sinr[st.sbs_of(bs)];
        rate = ue_rate(u, st, access_sinr, backhaul, options_.split_backhaul);
      }
      if (rate >= eta_bps) ++covered;
      rates.push_back(rate);
      rep.per_ue_rate[u] += rate;
      rep.access_sinr_db[u] += access_sinr;
    }
  }
  rep.rho = static_cast<double>(covered) / static_cast<double>(rep.samples);
  if (detailed) {
    double sum = 0.0;
    for (double r : rates) sum += r;
    rep.mean_rate_bps = sum / static_cast<double>(rates.size());
    std::sort(rates.begin(), rates.end());
    rep.p5_rate_bps = percentile(rates, 0.05);
    rep.p95_rate_bps = percentile(rates, 0.95);
    for (std::size_t u = 0; u < num_ue_; ++u) {
      rep.per_ue_rate[u] /= draws_;
      rep.access_sinr_db[u] = mw_to_dbm(rep.access_sinr_db[u] / draws_);
    }
    rep.backhaul_sinr_db.assign(num_sbs_, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t s = 0; s < num_sbs_; ++s) {
      if (bh_noise_mw[s] > 0.0) rep.backhaul_sinr_db[s] = mw_to_dbm(bh_signal_mw[s] / bh_noise_mw[s]);
    }
  }
  return rep;
}

CoverageReport coverage(const NetworkInstance& instance, const Deployment& deployment,
                        const ChannelParams& params, double eta_bps, const EvalOptions& options,
                        std::uint64_t seed, bool detailed) {
  deployment.validate();
  const CoverageEvaluator ev(instance, deployment.sbs_positions, deployment.powers, params, options, seed);
  return ev.evaluate(deployment, eta_bps, detailed);
}

}  // namespace iab
