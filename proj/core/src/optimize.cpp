#include "iab/optimize.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

#include "iab/errors.hpp"

namespace iab {

void GaParams::validate() const {
  if (population < 3) throw ParameterError("GA population K must be >= 3");
  if (neighbors == 0 || neighbors + 1 >= population) {
    throw ParameterError("GA neighborhood J must satisfy 0 < J < K - 1");
  }
  if (iterations < 1) throw ParameterError("GA iteration count must be >= 1");
  if (mutation_strength < 1) throw ParameterError("mutation_strength must be >= 1");
  if (!(location_step >= 0.0)) throw ParameterError("location_step must be >= 0");
}

void GaTrace::write_csv(std::ostream& out) const {
  out << "iteration,queen_rho,evals_so_far\n";
  for (std::size_t i = 0; i < queen_rho.size(); ++i) {
    out << i + 1 << ',' << queen_rho[i] << ',' << evals_so_far[i] << '\n';
  }
}

SubsetFitness::SubsetFitness(const Objective& objective, std::vector<Point> positions)
    : objective_(objective), positions_(std::move(positions)) {
  if (!objective_.instance) throw ConsistencyError("objective has no instance");
  evaluator_ = std::make_unique<CoverageEvaluator>(*objective_.instance, positions_, objective_.base.powers,
                                                   objective_.channel, objective_.options, objective_.seed);
  objective_.base.sbs_positions = positions_;
}

double SubsetFitness::operator()(const std::vector<std::size_t>& sorted_subset) {
  ++evaluations_;
  if (auto it = cache_.find(sorted_subset); it != cache_.end()) return it->second;
  Deployment d = objective_.base;
  d.non_iab = sorted_subset;
  d.validate();
  const double rho = evaluator_->evaluate(d, objective_.eta_bps).rho;
  cache_.emplace(sorted_subset, rho);
  return rho;
}

double layout_fitness(const Objective& objective, const std::vector<Point>& positions,
                      const std::vector<std::size_t>& sorted_subset) {
  if (!objective.instance) throw ConsistencyError("objective has no instance");
  Deployment d = objective.base;
  d.sbs_positions = positions;
  d.non_iab = sorted_subset;
  d.validate();
  const CoverageEvaluator ev(*objective.instance, positions, d.powers, objective.channel, objective.options,
                             objective.seed);
  return ev.evaluate(d, objective.eta_bps).rho;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // c * (n - k + i) / i stays integral at every step.
    const std::uint64_t m = n - k + i;
    const std::uint64_t g = std::gcd(c, i);
    const std::uint64_t cg = c / g;
    const std::uint64_t mi = m / (i / g);
    if (cg > kMax / mi) return kMax;
    c = cg * mi;
  }
  return c;
}

std::vector<std::size_t> random_subset(const std::vector<std::size_t>& pool, std::size_t k, Rng& rng) {
  if (k > pool.size()) throw ParameterError("subset larger than its pool");
  std::vector<std::size_t> v = pool;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, v.size() - 1);
    std::swap(v[i], v[pick(rng)]);
  }
  v.resize(k);
  std::sort(v.begin(), v.end());
  return v;
}

namespace {

// Queen loop shared by all GA variants. `fresh` draws a random genome,
// `mutate` derives a neighbor of the Queen, `score` evaluates one.
template <class Fresh, class Mutate, class Score>
OptimizeResult queen_loop(const GaParams& ga, Rng& rng, const Candidate* warm_start, Fresh&& fresh,
                          Mutate&& mutate, Score&& score) {
  ga.validate();
  OptimizeResult out;
  std::size_t evals = 0;
  auto evaluate = [&](Candidate c) {
    c.rho = score(c);
    ++evals;
    return c;
  };

  Candidate queen;
  for (std::size_t k = 0; k < ga.population; ++k) {
    Candidate c = (k == 0 && warm_start) ? *warm_start : fresh(rng);
    c = evaluate(std::move(c));
    if (k == 0 || c.rho > queen.rho) queen = std::move(c);
  }
  out.trace.queen_rho.push_back(queen.rho);
  out.trace.evals_so_far.push_back(evals);

  for (std::size_t it = 1; it < ga.iterations; ++it) {
    Candidate next = queen;
    for (std::size_t j = 0; j < ga.neighbors; ++j) {
      Candidate c = evaluate(mutate(queen, rng));
      if (c.rho > next.rho) next = std::move(c);
    }
    for (std::size_t r = ga.neighbors + 1; r < ga.population; ++r) {
      Candidate c = evaluate(fresh(rng));
      if (c.rho > next.rho) next = std::move(c);
    }
    queen = std::move(next);
    out.trace.queen_rho.push_back(queen.rho);
    out.trace.evals_so_far.push_back(evals);
  }
  out.best = std::move(queen);
  return out;
}

// Replaces `strength` members of `subset` with non-members drawn from `pool`.
std::vector<std::size_t> swap_mutation(const std::vector<std::size_t>& subset,
                                       const std::vector<std::size_t>& pool, std::size_t strength,
                                       Rng& rng) {
  std::vector<std::size_t> outside;
  for (auto s : pool) {
    if (!std::binary_search(subset.begin(), subset.end(), s)) outside.push_back(s);
  }
  std::vector<std::size_t> v = subset;
  const std::size_t n = std::min({strength, v.size(), outside.size()});
  for (std::size_t k = 0; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> pick_out(0, v.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_in(0, outside.size() - 1);
    const std::size_t a = pick_out(rng);
    const std::size_t b = pick_in(rng);
    std::swap(v[a], outside[b]);
  }
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::vector<Point> random_layout(const Region& region, const ForbiddenZones& forbidden, std::size_t n,
                                 Rng& rng) {
  std::vector<Point> p(n);
  for (auto& x : p) x = forbidden.sample_feasible(region, rng);
  return p;
}

// Moves `strength` SBSs, each uniformly within `step` of where it was,
// rejecting spots outside the disk or in a forbidden cell.
std::vector<Point> move_mutation(const std::vector<Point>& layout, const Region& region,
                                 const ForbiddenZones& forbidden, std::size_t strength, double step,
                                 Rng& rng) {
  std::vector<Point> p = layout;
  if (p.empty()) return p;
  std::uniform_int_distribution<std::size_t> pick(0, p.size() - 1);
  for (std::size_t k = 0; k < strength; ++k) {
    Point& x = p[pick(rng)];
    bool moved = false;
    for (int attempt = 0; attempt < 64 && !moved; ++attempt) {
      const double r = step * std::sqrt(uniform01(rng));
      const double th = 2.0 * M_PI * uniform01(rng);
      const Point q{x.x + r * std::cos(th), x.y + r * std::sin(th)};
      if (region.contains(q) && !forbidden.forbidden(q)) {
        x = q;
        moved = true;
      }
    }
    if (!moved) x = forbidden.sample_feasible(region, rng);
  }
  return p;
}

double resolve_step(const GaParams& ga, const Region& region) {
  return ga.location_step > 0.0 ? ga.location_step : region.radius / 10.0;
}

void check_layout_problem(const Objective& objective, const ForbiddenZones& forbidden) {
  if (!objective.instance) throw ConsistencyError("objective has no instance");
  if (!forbidden.has_feasible_area()) throw ConfigError("forbidden zones leave no feasible area");
}

}  // namespace

OptimizeResult ga_non_iab(SubsetFitness& fitness, std::size_t num_fixed, const GaParams& ga, Rng& rng,
                          const std::vector<std::size_t>& eligible,
                          const std::vector<std::size_t>* warm_start) {
  std::vector<std::size_t> pool = eligible.empty() ? all_indices(fitness.num_sbs()) : eligible;
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  if (!pool.empty() && pool.back() >= fitness.num_sbs()) throw ParameterError("eligible SBS index out of range");
  if (num_fixed > pool.size()) {
    throw ParameterError("N_f = " + std::to_string(num_fixed) + " exceeds the " + std::to_string(pool.size()) +
                         " eligible SBSs");
  }
  Candidate warm;
  if (warm_start) {
    warm.positions = fitness.positions();
    warm.non_iab = *warm_start;
    std::sort(warm.non_iab.begin(), warm.non_iab.end());
    if (warm.non_iab.size() != num_fixed) throw ParameterError("warm start has the wrong subset size");
  }
  auto fresh = [&](Rng& r) {
    return Candidate{fitness.positions(), random_subset(pool, num_fixed, r), -1.0};
  };
  auto mutate = [&](const Candidate& q, Rng& r) {
    return Candidate{q.positions, swap_mutation(q.non_iab, pool, ga.mutation_strength, r), -1.0};
  };
  auto score = [&](const Candidate& c) { return fitness(c.non_iab); };
  return queen_loop(ga, rng, warm_start ? &warm : nullptr, fresh, mutate, score);
}

OptimizeResult ga_locations(const Objective& objective, std::size_t num_sbs,
                            const std::vector<std::size_t>& non_iab, const GaParams& ga, Rng& rng,
                            const ForbiddenZones& forbidden, const std::vector<Point>* warm_start) {
  check_layout_problem(objective, forbidden);
  const Region& region = objective.instance->region;
  const double step = resolve_step(ga, region);
  Candidate warm;
  if (warm_start) {
    if (warm_start->size() != num_sbs) throw ParameterError("warm start has the wrong SBS count");
    warm.positions = *warm_start;
    warm.non_iab = non_iab;
  }
  auto fresh = [&](Rng& r) { return Candidate{random_layout(region, forbidden, num_sbs, r), non_iab, -1.0}; };
  auto mutate = [&](const Candidate& q, Rng& r) {
    return Candidate{move_mutation(q.positions, region, forbidden, ga.mutation_strength, step, r), q.non_iab,
                     -1.0};
  };
  auto score = [&](const Candidate& c) { return layout_fitness(objective, c.positions, c.non_iab); };
  return queen_loop(ga, rng, warm_start ? &warm : nullptr, fresh, mutate, score);
}

OptimizeResult ga_joint(const Objective& objective, std::size_t num_sbs, std::size_t num_fixed,
                        const GaParams& ga, Rng& rng, const ForbiddenZones& forbidden) {
  check_layout_problem(objective, forbidden);
  if (num_fixed > num_sbs) throw ParameterError("N_f exceeds N_s");
  const Region& region = objective.instance->region;
  const double step = resolve_step(ga, region);
  const auto pool = all_indices(num_sbs);
  const bool subset_moves = num_fixed > 0 && num_fixed < num_sbs;
  auto fresh = [&](Rng& r) {
    Candidate c{random_layout(region, forbidden, num_sbs, r), {}, -1.0};
    c.non_iab = subset_moves ? random_subset(pool, num_fixed, r) : (num_fixed ? pool : std::vector<std::size_t>{});
    return c;
  };
  auto mutate = [&](const Candidate& q, Rng& r) {
    Candidate c = q;
    c.rho = -1.0;
    if (subset_moves && uniform01(r) < 0.5) {
      c.non_iab = swap_mutation(q.non_iab, pool, ga.mutation_strength, r);
    } else {
      c.positions = move_mutation(q.positions, region, forbidden, ga.mutation_strength, step, r);
    }
    return c;
  };
  auto score = [&](const Candidate& c) { return layout_fitness(objective, c.positions, c.non_iab); };
  return queen_loop(ga, rng, nullptr, fresh, mutate, score);
}

ExhaustiveResult exhaustive_non_iab(SubsetFitness& fitness, std::size_t num_fixed, std::uint64_t cap) {
  const std::size_t n = fitness.num_sbs();
  if (num_fixed > n) throw ParameterError("N_f exceeds N_s");
  ExhaustiveResult out;
  out.search_size = binomial(n, num_fixed);
  if (out.search_size > cap) {
    throw RefusedError("exhaustive search over C(" + std::to_string(n) + ", " + std::to_string(num_fixed) +
                       ") = " + std::to_string(out.search_size) + " subsets exceeds the cap of " +
                       std::to_string(cap));
  }
  std::vector<std::size_t> c(num_fixed);
  std::iota(c.begin(), c.end(), 0);
  out.best.positions = fitness.positions();
  while (true) {
    const double rho = fitness(c);
    if (rho > out.best.rho) {
      out.best.rho = rho;
      out.best.non_iab = c;
    }
    // Next combination in lexicographic order.
    std::size_t i = num_fixed;
    while (i > 0 && c[i - 1] == n - num_fixed + i - 1) --i;
    if (i == 0) break;
    ++c[i - 1];
    for (std::size_t j = i; j < num_fixed; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

std::uint64_t greedy_evaluations(std::uint64_t num_sbs, std::uint64_t num_fixed) {
  return num_fixed * num_sbs - num_fixed * (num_fixed - 1) / 2;
}

Candidate greedy_non_iab(SubsetFitness& fitness, std::size_t num_fixed) {
  const std::size_t n = fitness.num_sbs();
  if (num_fixed > n) throw ParameterError("N_f exceeds N_s");
  Candidate c{fitness.positions(), {}, -1.0};
  if (num_fixed == 0) {
    c.rho = fitness(c.non_iab);
    return c;
  }
  for (std::size_t step = 0; step < num_fixed; ++step) {
    double best = -1.0;
    std::vector<std::size_t> best_set;
    for (std::size_t s = 0; s < n; ++s) {
      if (std::binary_search(c.non_iab.begin(), c.non_iab.end(), s)) continue;
      auto t = c.non_iab;
      t.insert(std::upper_bound(t.begin(), t.end(), s), s);
      const double rho = fitness(t);
      if (rho > best) {
        best = rho;
        best_set = std::move(t);
      }
    }
    c.non_iab = std::move(best_set);
    c.rho = best;
  }
  return c;
}

TabuResult tabu_non_iab(SubsetFitness& fitness, std::size_t num_fixed, const TabuParams& params, Rng& rng) {
  const std::size_t n = fitness.num_sbs();
  if (num_fixed > n) throw ParameterError("N_f exceeds N_s");
  if (params.iterations < 1) throw ParameterError("tabu iteration budget must be >= 1");
  const std::size_t start_evals = fitness.evaluations();
  auto spent = [&] { return fitness.evaluations() - start_evals; };
  auto exhausted = [&] { return params.max_evaluations > 0 && spent() >= params.max_evaluations; };

  TabuResult out;
  Candidate cur{fitness.positions(), random_subset(all_indices(n), num_fixed, rng), -1.0};
  cur.rho = fitness(cur.non_iab);
  out.best = cur;
  // Iteration at which each SBS index stops being tabu.
  std::vector<std::size_t> tabu_until(n, 0);

  for (std::size_t it = 1; it <= params.iterations && !exhausted(); ++it) {
    double best_rho = -1.0;
    TabuMove best_move{};
    std::vector<std::size_t> best_set;
    for (std::size_t a = 0; a < cur.non_iab.size() && !exhausted(); ++a) {
      const std::size_t out_idx = cur.non_iab[a];
      if (tabu_until[out_idx] > it) continue;
      for (std::size_t in_idx = 0; in_idx < n && !exhausted(); ++in_idx) {
        if (tabu_until[in_idx] > it || std::binary_search(cur.non_iab.begin(), cur.non_iab.end(), in_idx)) {
          continue;
        }
        auto t = cur.non_iab;
        t[a] = in_idx;
        std::sort(t.begin(), t.end());
        const double rho = fitness(t);
        if (rho > best_rho) {
          best_rho = rho;
          best_move = {out_idx, in_idx};
          best_set = std::move(t);
        }
      }
    }
    if (best_set.empty()) break;  // no admissible swap
    if (params.tenure == 0 && best_rho <= cur.rho) break;  // local optimum
    cur.non_iab = std::move(best_set);
    cur.rho = best_rho;
    tabu_until[best_move.out] = tabu_until[best_move.in] = it + 1 + params.tenure;
    out.moves.push_back(best_move);
    if (cur.rho > out.best.rho) out.best = cur;
    out.trace.queen_rho.push_back(out.best.rho);
    out.trace.evals_so_far.push_back(spent());
  }
  if (out.trace.queen_rho.empty()) {
    out.trace.queen_rho.push_back(out.best.rho);
    out.trace.evals_so_far.push_back(spent());
  }
  return out;
}

}  // namespace iab
