#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <vector>

#include "iab/geometry.hpp"
#include "iab/network.hpp"
#include "iab/random.hpp"

namespace iab {

/// Queen-elitist GA knobs. One iteration = one generation; iteration 1 is
/// the initial random population.
struct GaParams {
  std::size_t population = 6;         ///< K
  std::size_t neighbors = 3;          ///< J, mutants of the Queen per generation
  std::size_t iterations = 20;        ///< N_it
  std::size_t mutation_strength = 1;  ///< elements replaced / SBSs moved per mutant
  double location_step = 0.0;         ///< max SBS move in m; 0 means region radius / 10

  void validate() const;
  std::size_t budget() const { return population * iterations; }
};

/// A deployment candidate. Subset-only optimizers leave `positions` at the
/// instance layout.
struct Candidate {
  std::vector<Point> positions;
  std::vector<std::size_t> non_iab;  ///< sorted
  double rho = -1.0;                 ///< < 0 while unevaluated
};

struct GaTrace {
  std::vector<double> queen_rho;           ///< one entry per iteration
  std::vector<std::size_t> evals_so_far;   ///< cumulative fitness evaluations

  std::size_t evaluations() const { return evals_so_far.empty() ? 0 : evals_so_far.back(); }
  /// CSV with header `iteration,queen_rho,evals_so_far`, iterations from 1.
  void write_csv(std::ostream& out) const;
};

struct OptimizeResult {
  Candidate best;
  GaTrace trace;
};

/// Everything a candidate is scored against. `seed` is shared by every
/// candidate of a run (common random numbers).
struct Objective {
  const NetworkInstance* instance = nullptr;
  Deployment base;  ///< psi, B, powers; positions and non_iab are overwritten per candidate
  ChannelParams channel;
  EvalOptions options;
  double eta_bps = 100e6;
  std::uint64_t seed = 0;
};

/// Coverage of non-IAB subsets over one fixed SBS layout. Construction pays
/// for the link tables and fading draws once; repeated subsets hit a cache
/// but still count as evaluations.
class SubsetFitness {
 public:
  SubsetFitness(const Objective& objective, std::vector<Point> positions);

  double operator()(const std::vector<std::size_t>& sorted_subset);
  std::size_t num_sbs() const { return positions_.size(); }
  std::size_t evaluations() const { return evaluations_; }
  const std::vector<Point>& positions() const { return positions_; }

 private:
  Objective objective_;
  std::vector<Point> positions_;
  std::unique_ptr<CoverageEvaluator> evaluator_;
  std::map<std::vector<std::size_t>, double> cache_;
  std::size_t evaluations_ = 0;
};

/// Coverage of a full candidate (layout and subset); builds a fresh evaluator
/// per call.
double layout_fitness(const Objective& objective, const std::vector<Point>& positions,
                      const std::vector<std::size_t>& sorted_subset);

/// Number of k-subsets of n, saturating at UINT64_MAX.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Sorted uniform k-subset of `pool`.
std::vector<std::size_t> random_subset(const std::vector<std::size_t>& pool, std::size_t k, Rng& rng);

/// Algorithm for non-IAB selection: K random N_f-subsets, then per generation
/// the Queen, J single-swap mutants and K-J-1 fresh subsets. `eligible`
/// restricts which SBSs may get a dedicated link (empty: all).
/// Throws ParameterError if N_f exceeds the eligible count.
OptimizeResult ga_non_iab(SubsetFitness& fitness, std::size_t num_fixed, const GaParams& ga, Rng& rng,
                          const std::vector<std::size_t>& eligible = {},
                          const std::vector<std::size_t>* warm_start = nullptr);

/// Algorithm for SBS placement with a fixed non-IAB index set. Mutants move
/// `mutation_strength` SBSs within `location_step`; every position stays in
/// the region and outside `forbidden`. Throws ConfigError when no feasible
/// area is left.
OptimizeResult ga_locations(const Objective& objective, std::size_t num_sbs,
                            const std::vector<std::size_t>& non_iab, const GaParams& ga, Rng& rng,
                            const ForbiddenZones& forbidden = {},
                            const std::vector<Point>* warm_start = nullptr);

/// Placement and non-IAB selection together. A mutant perturbs either the
/// layout or the subset (fair coin); with no subset freedom (N_f = 0 or
/// N_f = N_s) only the layout moves and the run matches ga_locations.
OptimizeResult ga_joint(const Objective& objective, std::size_t num_sbs, std::size_t num_fixed,
                        const GaParams& ga, Rng& rng, const ForbiddenZones& forbidden = {});

struct ExhaustiveResult {
  Candidate best;
  std::uint64_t search_size = 0;  ///< C(N_s, N_f)
};

/// Global optimum by enumeration in lexicographic order (ties keep the first).
/// Throws RefusedError when C(N_s, N_f) exceeds `cap`.
ExhaustiveResult exhaustive_non_iab(SubsetFitness& fitness, std::size_t num_fixed,
                                    std::uint64_t cap = 1'000'000);

/// Adds the best SBS one at a time; N_f*N_s - N_f(N_f-1)/2 evaluations.
Candidate greedy_non_iab(SubsetFitness& fitness, std::size_t num_fixed);

std::uint64_t greedy_evaluations(std::uint64_t num_sbs, std::uint64_t num_fixed);

struct TabuParams {
  std::size_t tenure = 7;
  std::size_t iterations = 20;
  /// Stop once this many evaluations are spent (0: no limit).
  std::size_t max_evaluations = 0;
};

struct TabuMove {
  std::size_t out = 0;
  std::size_t in = 0;
};

struct TabuResult {
  Candidate best;
  GaTrace trace;                ///< best-so-far per iteration
  std::vector<TabuMove> moves;  ///< move taken at each iteration
};

/// Single-swap tabu search from a random start. Both indices of a swap stay
/// tabu for `tenure` iterations. With tenure 0 it is hill climbing and stops
/// at the first local optimum.
TabuResult tabu_non_iab(SubsetFitness& fitness, std::size_t num_fixed, const TabuParams& params,
                        Rng& rng);

}  // namespace iab
