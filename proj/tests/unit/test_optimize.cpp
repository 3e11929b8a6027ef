#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>

#include "iab/errors.hpp"
#include "iab/optimize.hpp"

using namespace iab;

namespace {

struct Fixture {
  NetworkInstance inst;
  Objective ob;
};

Fixture make_fixture(std::uint64_t seed, double sbs_density = 50.0, double area = 0.2) {
  Fixture f;
  Rng rng(seed);
  PointProcessParams d;
  d.mbs = 10;
  d.sbs = sbs_density;
  do {
    f.inst = sample_instance(Region::from_area_km2(area), d, 5.0, {}, rng);
  } while (f.inst.mbs.empty() || f.inst.ues.empty());
  f.ob.instance = &f.inst;
  f.ob.options.fading_draws = 4;
  f.ob.seed = seed;
  return f;
}

bool nondecreasing(const std::vector<double>& v) {
  return std::is_sorted(v.begin(), v.end());
}

}  // namespace

TEST(Counting, BinomialAndBudgets) {
  EXPECT_EQ(binomial(50, 5), 2118760u);
  EXPECT_EQ(binomial(10, 2), 45u);
  EXPECT_EQ(binomial(5, 0), 1u);
  EXPECT_EQ(binomial(3, 5), 0u);
  EXPECT_EQ(binomial(1000, 500), UINT64_MAX);
  EXPECT_EQ(GaParams{}.budget(), 120u);
  EXPECT_EQ(greedy_evaluations(50, 5), 50u * 5 - 10);
}

TEST(Ga, ParameterValidation) {
  GaParams g;
  EXPECT_NO_THROW(g.validate());
  g.neighbors = 5;  // J must be < K - 1
  EXPECT_THROW(g.validate(), ParameterError);
  g = {};
  g.population = 2;
  EXPECT_THROW(g.validate(), ParameterError);
  g = {};
  g.iterations = 0;
  EXPECT_THROW(g.validate(), ParameterError);
}

TEST(RandomSubset, SortedDistinctFromPool) {
  Rng rng(1);
  const std::vector<std::size_t> pool{3, 7, 9, 12, 20};
  for (int i = 0; i < 200; ++i) {
    const auto s = random_subset(pool, 3, rng);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 3u);
    for (auto x : s) EXPECT_NE(std::find(pool.begin(), pool.end(), x), pool.end());
  }
}

TEST(GaNonIab, TraceIsMonotoneAndEvaluationCountExact) {
  auto f = make_fixture(21);
  SubsetFitness fit(f.ob, f.inst.sbs);
  GaParams g;
  Rng rng(4);
  const auto r = ga_non_iab(fit, 2, g, rng);
  EXPECT_EQ(r.trace.queen_rho.size(), g.iterations);
  EXPECT_TRUE(nondecreasing(r.trace.queen_rho));
  const std::size_t expect = g.population + (g.iterations - 1) * (g.population - 1);
  EXPECT_EQ(r.trace.evaluations(), expect);
  EXPECT_LE(r.trace.evaluations(), g.budget());
  EXPECT_EQ(fit.evaluations(), expect);
  EXPECT_EQ(r.best.rho, r.trace.queen_rho.back());
  EXPECT_EQ(r.best.non_iab.size(), 2u);

  std::ostringstream csv;
  r.trace.write_csv(csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "iteration,queen_rho,evals_so_far");
}

TEST(GaNonIab, RespectsEligibilityAndSingleIteration) {
  auto f = make_fixture(22, 50.0, 1.0);
  SubsetFitness fit(f.ob, f.inst.sbs);
  GaParams g;
  g.iterations = 1;
  Rng rng(5);
  const std::vector<std::size_t> eligible{0, 2, 4, 6};
  const auto r = ga_non_iab(fit, 2, g, rng, eligible);
  EXPECT_EQ(r.trace.evaluations(), g.population);
  for (auto s : r.best.non_iab) EXPECT_NE(std::find(eligible.begin(), eligible.end(), s), eligible.end());
  EXPECT_THROW(ga_non_iab(fit, 5, g, rng, eligible), ParameterError);
}

TEST(GaNonIab, WarmStartIsNeverLost) {
  auto f = make_fixture(23);
  SubsetFitness fit(f.ob, f.inst.sbs);
  const std::vector<std::size_t> warm{0, 1};
  const double warm_rho = fit(warm);
  Rng rng(2);
  const auto r = ga_non_iab(fit, 2, GaParams{}, rng, {}, &warm);
  EXPECT_GE(r.best.rho, warm_rho);
}

TEST(GaLocations, MonotoneAndInsideFeasibleRegion) {
  auto f = make_fixture(31, 20.0);
  Rng zr(3);
  const auto zones = ForbiddenZones::random(f.inst.region, 0.3, 40, zr);
  GaParams g;
  g.iterations = 5;
  Rng rng(6);
  const auto r = ga_locations(f.ob, 6, {0}, g, rng, zones);
  EXPECT_TRUE(nondecreasing(r.trace.queen_rho));
  EXPECT_EQ(r.best.positions.size(), 6u);
  for (auto p : r.best.positions) {
    EXPECT_TRUE(f.inst.region.contains(p));
    EXPECT_FALSE(zones.forbidden(p));
  }
  EXPECT_NEAR(layout_fitness(f.ob, r.best.positions, r.best.non_iab), r.best.rho, 1e-12);
}

TEST(GaJoint, MonotoneAndKeepsSubsetSize) {
  auto f = make_fixture(32, 20.0);
  GaParams g;
  g.iterations = 5;
  Rng rng(7);
  const auto r = ga_joint(f.ob, 6, 2, g, rng);
  EXPECT_TRUE(nondecreasing(r.trace.queen_rho));
  EXPECT_EQ(r.best.non_iab.size(), 2u);
  EXPECT_EQ(r.best.positions.size(), 6u);
}

TEST(Exhaustive, MatchesIndependentEnumeration) {
  for (std::uint64_t seed = 40; seed < 43; ++seed) {
    auto f = make_fixture(seed, 40.0);
    const std::size_t ns = f.inst.sbs.size();
    if (ns < 4 || ns > 12) continue;
    SubsetFitness lib(f.ob, f.inst.sbs), oracle(f.ob, f.inst.sbs);
    const auto r = exhaustive_non_iab(lib, 2);
    EXPECT_EQ(r.search_size, binomial(ns, 2));
    EXPECT_EQ(lib.evaluations(), r.search_size);

    double best = -1;
    std::vector<std::size_t> arg;
    for (std::uint32_t mask = 0; mask < (1u << ns); ++mask) {
      if (std::popcount(mask) != 2) continue;
      std::vector<std::size_t> s;
      for (std::size_t i = 0; i < ns; ++i) {
        if (mask >> i & 1u) s.push_back(i);
      }
      const double v = oracle(s);
      if (v > best || (v == best && s < arg)) {
        best = v;
        arg = s;
      }
    }
    EXPECT_EQ(r.best.rho, best);
    EXPECT_EQ(r.best.non_iab, arg);

    SubsetFitness g1(f.ob, f.inst.sbs), t1(f.ob, f.inst.sbs);
    EXPECT_LE(greedy_non_iab(g1, 2).rho, best);
    EXPECT_EQ(g1.evaluations(), greedy_evaluations(ns, 2));
    Rng rng(seed);
    EXPECT_LE(tabu_non_iab(t1, 2, TabuParams{}, rng).best.rho, best);
  }
}

TEST(Exhaustive, RefusesAboveCap) {
  auto f = make_fixture(50);
  SubsetFitness fit(f.ob, f.inst.sbs);
  EXPECT_THROW(exhaustive_non_iab(fit, 3, 10), RefusedError);
  EXPECT_EQ(fit.evaluations(), 0u);
}

TEST(Tabu, SwapsAndTenure) {
  auto f = make_fixture(51);
  SubsetFitness fit(f.ob, f.inst.sbs);
  TabuParams tp;
  tp.tenure = 3;
  tp.iterations = 8;
  Rng rng(8);
  const auto r = tabu_non_iab(fit, 2, tp, rng);
  EXPECT_TRUE(nondecreasing(r.trace.queen_rho));
  // An index touched by a move is not touched again within the tenure.
  for (std::size_t i = 0; i < r.moves.size(); ++i) {
    for (std::size_t j = i + 1; j < r.moves.size() && j <= i + tp.tenure; ++j) {
      for (auto a : {r.moves[i].out, r.moves[i].in}) {
        EXPECT_NE(a, r.moves[j].out);
        EXPECT_NE(a, r.moves[j].in);
      }
    }
  }
}

TEST(Tabu, BudgetCapIsRespected) {
  auto f = make_fixture(52, 50.0, 1.0);
  SubsetFitness fit(f.ob, f.inst.sbs);
  TabuParams tp;
  tp.iterations = 1000;
  tp.max_evaluations = 120;
  Rng rng(1);
  const auto r = tabu_non_iab(fit, 2, tp, rng);
  EXPECT_LE(r.trace.evaluations(), 120u);
  EXPECT_EQ(fit.evaluations(), 120u);
}

TEST(Fitness, CacheHitsStillCount) {
  auto f = make_fixture(53);
  SubsetFitness fit(f.ob, f.inst.sbs);
  const double a = fit({0, 1});
  const double b = fit({0, 1});
  EXPECT_EQ(a, b);
  EXPECT_EQ(fit.evaluations(), 2u);
}
