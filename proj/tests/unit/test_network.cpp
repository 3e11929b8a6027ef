#include <gtest/gtest.h>

#include <cmath>

#include "iab/errors.hpp"
#include "iab/network.hpp"

using namespace iab;

namespace {

AssociationState two_donor_state() {
  // MBS 0, 1; SBS 0..2 (BS 2..4). SBS0, SBS1 -> donor 0; SBS2 non-IAB.
  AssociationState s;
  s.num_mbs = 2;
  s.num_sbs = 3;
  s.sbs_donor = {0, 0, std::nullopt};
  s.ue_bs = {2, 2, 2, 3, 4, 4, 4, 4, 0, 0};
  return s;
}

NetworkInstance small_instance(std::uint64_t seed, double area = 0.2) {
  Rng rng(seed);
  PointProcessParams d;
  d.mbs = 10;
  return sample_instance(Region::from_area_km2(area), d, 5.0, {}, rng);
}

}  // namespace

TEST(Bandwidth, ProportionalBackhaulAndEqualAccess) {
  auto s = two_donor_state();
  Deployment dep;
  dep.backhaul_fraction = 0.5;
  dep.bandwidth_hz = 1e9;
  allocate_bandwidth(s, dep);
  EXPECT_DOUBLE_EQ(s.backhaul_bw[0], 375e6);  // 3 of 4 donor UEs
  EXPECT_DOUBLE_EQ(s.backhaul_bw[1], 125e6);
  EXPECT_DOUBLE_EQ(s.backhaul_bw[2], 0.0);
  EXPECT_DOUBLE_EQ(s.access_bw_per_ue[4], 250e6);  // non-IAB SBS: B / 4
  EXPECT_DOUBLE_EQ(s.access_bw_per_ue[2], 500e6 / 3);
  EXPECT_DOUBLE_EQ(s.access_bw_per_ue[0], 250e6);  // MBS: (1 - psi) B / 2
  EXPECT_EQ(s.access_bw_per_ue[1], 0.0);           // idle
  EXPECT_EQ(serving_kind(s, 0), ServingKind::kMbs);
  EXPECT_EQ(serving_kind(s, 2), ServingKind::kIabSbs);
  EXPECT_EQ(serving_kind(s, 4), ServingKind::kNonIabSbs);
}

TEST(Rate, MinOfAccessAndBackhaul) {
  auto s = two_donor_state();
  Deployment dep;
  allocate_bandwidth(s, dep);
  // SBS0 UE: access (500/3 MHz) log2(1+3) vs backhaul 375 MHz log2(1+1).
  EXPECT_NEAR(ue_rate(0, s, 3.0, 1.0, false), 500e6 / 3 * 2, 1e-3);
  EXPECT_NEAR(ue_rate(0, s, 3.0, 1.0, true), 375e6 / 3, 1e-3);
  // Non-IAB UE ignores the backhaul SINR.
  EXPECT_NEAR(ue_rate(4, s, 1.0, 0.0, false), 250e6, 1e-3);
}

TEST(Deployment, ValidateRejectsBadSubsets) {
  Deployment d;
  d.sbs_positions = {{0, 0}, {1, 1}};
  d.non_iab = {1, 0};
  EXPECT_THROW(d.validate(), ParameterError);
  d.non_iab = {0, 5};
  EXPECT_ANY_THROW(d.validate());
  d.non_iab = {1};
  EXPECT_NO_THROW(d.validate());
  EXPECT_TRUE(d.is_non_iab(1));
  EXPECT_FALSE(d.is_non_iab(0));
}

TEST(Association, MaxPowerWithLowestIndexTies) {
  const auto inst = small_instance(3);
  Deployment dep;
  dep.sbs_positions = inst.sbs;
  const ChannelParams p;
  const auto s = associate_ues(inst, dep, p);
  const ObstacleField field(inst);
  const auto tx = make_transmitters(inst.mbs, inst.sbs, dep.powers, p);
  const AccessLinkTable t(tx, inst.ues, field, p);
  for (std::size_t u = 0; u < inst.ues.size(); ++u) {
    std::size_t best = 0;
    for (std::size_t b = 1; b < t.num_bs(); ++b) {
      if (t.avg_rx_power_dbm(b, u) > t.avg_rx_power_dbm(best, u)) best = b;
    }
    EXPECT_EQ(s.ue_bs[u], best);
  }

  // Two identical BSs at the same spot: the lower index wins.
  NetworkInstance tie;
  tie.region = Region::from_area_km2(1);
  tie.mbs = {{0, 0}, {0, 0}};
  tie.ues = {{30, 40}};
  Deployment none;
  EXPECT_EQ(associate_ues(tie, none, p).ue_bs[0], 0u);
}

TEST(Association, BackhaulDonorIsMinLossMbs) {
  const auto inst = small_instance(4);
  Deployment dep;
  dep.sbs_positions = inst.sbs;
  dep.non_iab = {0};
  const ChannelParams p;
  auto s = associate_ues(inst, dep, p);
  associate_backhaul(s, inst, dep, p);
  const BackhaulLinkTable bt(inst.mbs, inst.sbs, ObstacleField(inst), p);
  EXPECT_FALSE(s.sbs_donor[0]);
  for (std::size_t k = 1; k < inst.sbs.size(); ++k) {
    std::size_t best = 0;
    for (std::size_t m = 1; m < inst.mbs.size(); ++m) {
      if (bt.total_loss_db(k, m) < bt.total_loss_db(k, best)) best = m;
    }
    ASSERT_TRUE(s.sbs_donor[k]);
    EXPECT_EQ(*s.sbs_donor[k], best);
  }
}

TEST(Association, NoMbsForIabSbsIsAConfigError) {
  NetworkInstance inst;
  inst.region = Region::from_area_km2(1);
  inst.ues = {{10, 0}};
  Deployment dep;
  dep.sbs_positions = {{0, 0}};
  const ChannelParams p;
  auto s = associate_ues(inst, dep, p);
  EXPECT_THROW(associate_backhaul(s, inst, dep, p), ConfigError);
  NetworkInstance empty;
  empty.region = inst.region;
  empty.ues = inst.ues;
  EXPECT_THROW(associate_ues(empty, Deployment{}, p), ConfigError);
}

// One interference-free Rayleigh link: P(h * S / N >= theta) = exp(-theta N / S).
TEST(Coverage, SingleLinkMatchesClosedForm) {
  NetworkInstance inst;
  inst.region = Region::from_area_km2(1);
  inst.mbs = {{0, 0}};
  inst.ues = {{150, 0}};
  const ChannelParams p;
  Deployment dep;
  EvalOptions o;
  o.fading_draws = 20000;
  const double eta = 2e9;
  const double bw = (1 - dep.backhaul_fraction) * dep.bandwidth_hz;
  const double theta = std::pow(2.0, eta / bw) - 1.0;
  const double s_mw = std::pow(10.0, (40.0 + 18.0 + 0.0 - path_loss_db(150, true, p)) / 10.0);
  const double n_mw = std::pow(10.0, noise_power_dbm(bw, p) / 10.0);
  const double expect = std::exp(-theta * n_mw / s_mw);
  ASSERT_GT(expect, 0.05);
  ASSERT_LT(expect, 0.95);
  const auto rep = coverage(inst, dep, p, eta, o, 5);
  EXPECT_NEAR(rep.rho, expect, 4 * std::sqrt(expect * (1 - expect) / o.fading_draws));
  EXPECT_EQ(rep.samples, 20000u);
}

TEST(Coverage, NoUeIsUndefined) {
  NetworkInstance inst;
  inst.region = Region::from_area_km2(1);
  inst.mbs = {{0, 0}};
  EXPECT_THROW(coverage(inst, Deployment{}, ChannelParams{}, 1e8, EvalOptions{}, 1), UndefinedCoverageError);
  EvalOptions bad;
  bad.fading_draws = 0;
  inst.ues = {{1, 1}};
  EXPECT_THROW(coverage(inst, Deployment{}, ChannelParams{}, 1e8, bad, 1), ParameterError);
}

TEST(Coverage, FastPathMatchesDetailed) {
  const auto inst = small_instance(8);
  Deployment dep;
  dep.sbs_positions = inst.sbs;
  dep.non_iab = {1};
  EvalOptions o;
  o.fading_draws = 10;
  const CoverageEvaluator ev(inst, inst.sbs, dep.powers, ChannelParams{}, o, 77);
  for (double eta : {10e6, 100e6, 300e6}) {
    EXPECT_DOUBLE_EQ(ev.evaluate(dep, eta, false).rho, ev.evaluate(dep, eta, true).rho);
  }
}

// Property checks over 100 random instances.
TEST(Invariants, BandwidthConservationAndMonotoneCoverage) {
  const ChannelParams p;
  EvalOptions o;
  o.fading_draws = 4;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = small_instance(1000 + seed);
    if (inst.mbs.empty() || inst.ues.empty()) continue;
    Rng rng(seed);
    Deployment dep;
    dep.sbs_positions = inst.sbs;
    dep.backhaul_fraction = 0.1 + 0.8 * uniform01(rng);
    for (std::size_t s = 0; s < inst.sbs.size(); ++s) {
      if (uniform01(rng) < 0.2) dep.non_iab.push_back(s);
    }
    const CoverageEvaluator ev(inst, inst.sbs, dep.powers, p, o, seed);
    const auto st = ev.associate(dep);

    std::size_t total_load = 0;
    std::vector<double> donor_bh(st.num_mbs, 0.0);
    std::vector<std::size_t> donor_load(st.num_mbs, 0);
    for (std::size_t b = 0; b < st.num_bs(); ++b) {
      total_load += st.load[b];
      if (st.load[b] == 0) continue;
      const bool dedicated = serving_kind(st, b) == ServingKind::kNonIabSbs;
      const double node = dedicated ? dep.bandwidth_hz : (1 - dep.backhaul_fraction) * dep.bandwidth_hz;
      EXPECT_NEAR(st.access_bw_per_ue[b] * st.load[b], node, 1e-3);
    }
    EXPECT_EQ(total_load, inst.ues.size());
    for (std::size_t s = 0; s < st.num_sbs; ++s) {
      if (!st.sbs_donor[s]) continue;
      donor_bh[*st.sbs_donor[s]] += st.backhaul_bw[s];
      donor_load[*st.sbs_donor[s]] += st.load[st.num_mbs + s];
    }
    for (std::size_t m = 0; m < st.num_mbs; ++m) {
      const double cap = dep.backhaul_fraction * dep.bandwidth_hz;
      if (donor_load[m] > 0) {
        EXPECT_NEAR(donor_bh[m], cap, 1e-3);
      } else {
        EXPECT_EQ(donor_bh[m], 0.0);
      }
    }

    double prev = 1.0;
    for (double eta = 0.0; eta <= 500e6; eta += 50e6) {
      const double rho = ev.evaluate(dep, eta).rho;
      EXPECT_LE(rho, prev);
      prev = rho;
    }
    EXPECT_EQ(ev.evaluate(dep, 0.0).rho, 1.0);
  }
}

TEST(Coverage, SameSeedIsReproducible) {
  const auto inst = small_instance(12);
  Deployment dep;
  dep.sbs_positions = inst.sbs;
  EvalOptions o;
  o.fading_draws = 8;
  o.backhaul_interference = true;
  o.backhaul_fading = true;
  const auto a = coverage(inst, dep, ChannelParams{}, 1e8, o, 9);
  const auto b = coverage(inst, dep, ChannelParams{}, 1e8, o, 9);
  EXPECT_EQ(a.rho, b.rho);
  EXPECT_EQ(a.per_ue_rate, b.per_ue_rate);
  EXPECT_LE(a.p5_rate_bps, a.p95_rate_bps);
}
