// SPDX-License-Identifier: Apache-2.0

#include "creepfit/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "creepfit/doe.hpp"
#include "creepfit/parallel.hpp"

namespace creepfit {

void GaConfig::validate() const {
  if (population < 2 * tournament_size)
    throw std::invalid_argument("population must be at least twice the tournament size");
  if (tournament_size < 1) throw std::invalid_argument("tournament size must be positive");
  if (crossover_fraction < 0.0 || crossover_fraction > 1.0)
    throw std::invalid_argument("crossover fraction must lie in [0, 1]");
  if (migration_fraction < 0.0 || migration_fraction > 1.0)
    throw std::invalid_argument("migration fraction must lie in [0, 1]");
  if (migration_interval < 1) throw std::invalid_argument("migration interval must be positive");
  if (subpopulations < 1) throw std::invalid_argument("at least one subpopulation required");
  if (!(fitness_tolerance > 0.0)) throw std::invalid_argument("fitness tolerance must be positive");
  if (stall_generations < 1) throw std::invalid_argument("stall window must be positive");
}

void CalibrationProblem::validate() const {
  if (bounds.empty()) throw std::invalid_argument("no calibration parameters");
  for (const auto& [lo, hi] : bounds)
    if (!(lo < hi)) throw std::invalid_argument("calibration bounds must satisfy lo < hi");
  if (conditions.empty()) throw std::invalid_argument("at least one condition required");
  for (const auto& c : conditions) {
    if (c.model.dimension() != dimension())
      throw std::invalid_argument("surrogate dimension mismatch for condition '" + c.name + "'");
    if (c.experiment.depth.size() != c.model.output_size())
      throw std::invalid_argument("experimental curve of '" + c.name +
                                  "' is not on the surrogate grid");
    for (Eigen::Index i = 0; i < dimension(); ++i) {
      const auto d = static_cast<std::size_t>(i);
      if (bounds[d][0] < c.model.bounds[d][0] - 1e-12 ||
          bounds[d][1] > c.model.bounds[d][1] + 1e-12)
        throw std::invalid_argument("search bounds exceed the training bounds of '" + c.name +
                                    "'");
    }
  }
}

Eigen::VectorXd intermediate_crossover(const Eigen::VectorXd& parent1,
                                       const Eigen::VectorXd& parent2, double ratio, Rng& rng) {
  if (parent1.size() != parent2.size())
    throw std::invalid_argument("parents must have equal dimension");
  Eigen::VectorXd child(parent1.size());
  for (Eigen::Index g = 0; g < child.size(); ++g)
    child[g] = parent1[g] + rng.uniform() * ratio * (parent2[g] - parent1[g]);
  return child;
}

Eigen::VectorXd gaussian_mutation(const Eigen::VectorXd& individual, int generation,
                                  int generation_limit, const GaConfig& config,
                                  const ParamBounds& bounds, Rng& rng) {
  if (generation > generation_limit)
    throw std::invalid_argument("generation beyond the configured limit");
  const double progress = generation_limit > 0
                              ? static_cast<double>(generation) / generation_limit
                              : 0.0;
  const double level = config.mutation_scale * (1.0 - config.mutation_shrink * progress);
  Eigen::VectorXd mutated = individual;
  for (Eigen::Index g = 0; g < mutated.size(); ++g) {
    const auto d = static_cast<std::size_t>(g);
    const double width = bounds[d][1] - bounds[d][0];
    mutated[g] += level * width * rng.normal();
    mutated[g] = std::clamp(mutated[g], bounds[d][0], bounds[d][1]);
  }
  return mutated;
}

std::size_t tournament_select(const Eigen::VectorXd& fitness, int size, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(fitness.size());
  if (size < 1 || static_cast<std::size_t>(size) > n)
    throw std::invalid_argument("tournament size must lie in [1, population]");
  // Partial Fisher-Yates draw of `size` distinct candidates.
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::size_t best = n;
  for (int k = 0; k < size; ++k) {
    const std::size_t pick = k + rng.index(n - static_cast<std::size_t>(k));
    std::swap(pool[static_cast<std::size_t>(k)], pool[pick]);
    const std::size_t candidate = pool[static_cast<std::size_t>(k)];
    if (best == n || fitness[static_cast<Eigen::Index>(candidate)] <
                         fitness[static_cast<Eigen::Index>(best)] ||
        (fitness[static_cast<Eigen::Index>(candidate)] ==
             fitness[static_cast<Eigen::Index>(best)] &&
         candidate < best))
      best = candidate;
  }
  return best;
}

void migrate(std::vector<Eigen::MatrixXd>& subpopulations,
             std::vector<Eigen::VectorXd>& fitnesses, const GaConfig& config, int generation) {
  if (subpopulations.size() < 2) throw std::invalid_argument("migration needs two subpopulations");
  if (subpopulations.size() != fitnesses.size())
    throw std::invalid_argument("fitness vectors must match the subpopulations");
  if (generation <= 0 || generation % config.migration_interval != 0) return;
  if (config.migration_fraction <= 0.0) return;

  const auto sorted_indices = [](const Eigen::VectorXd& fitness, bool ascending) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(fitness.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return ascending ? fitness[a] < fitness[b] : fitness[a] > fitness[b];
    });
    return order;
  };

  // Migrants come from the pre-migration state so the forward chain applies
  // simultaneously across all subpopulations.
  const std::vector<Eigen::MatrixXd> sources = subpopulations;
  const std::vector<Eigen::VectorXd> source_fitness = fitnesses;
  const std::size_t n_sub = subpopulations.size();
  for (std::size_t s = 0; s < n_sub; ++s) {
    const std::size_t target = (s + 1) % n_sub;
    const Eigen::Index size = subpopulations[target].cols();
    const auto count = static_cast<Eigen::Index>(
        std::llround(config.migration_fraction * static_cast<double>(size)));
    if (count < 1) continue;
    const auto best = sorted_indices(source_fitness[s], true);
    const auto worst = sorted_indices(fitnesses[target], false);
    for (Eigen::Index k = 0; k < count; ++k) {
      const Eigen::Index from = best[static_cast<std::size_t>(k)];
      const Eigen::Index to = worst[static_cast<std::size_t>(k)];
      subpopulations[target].col(to) = sources[s].col(from);
      fitnesses[target][to] = source_fitness[s][from];
    }
  }
}

double aggregate_objective(const CalibrationProblem& problem, const Eigen::VectorXd& parameters,
                           bool* extrapolated) {
  double sum = 0.0;
  bool outside = false;
  for (const auto& c : problem.conditions) {
    const Prediction p = predict(c.model, parameters);
    outside = outside || p.extrapolated;
    sum += error_mse(p.values, c.experiment.depth);
  }
  if (extrapolated) *extrapolated = outside;
  return sum / static_cast<double>(problem.conditions.size());
}

namespace {

std::uint64_t stream_salt(int generation, std::size_t subpop, std::size_t member) {
  return (static_cast<std::uint64_t>(generation + 1) << 40) ^
         (static_cast<std::uint64_t>(subpop) << 24) ^ static_cast<std::uint64_t>(member);
}

}  // namespace

GaResult ga_minimize(const ObjectiveFn& objective, const ParamBounds& bounds,
                     const GaConfig& config, int threads) {
  config.validate();
  if (bounds.empty()) throw std::invalid_argument("no parameters to optimize");
  for (const auto& [lo, hi] : bounds)
    if (!(lo < hi)) throw std::invalid_argument("bounds must satisfy lo < hi");
  const auto dim = static_cast<Eigen::Index>(bounds.size());
  const int limit = config.generation_limit(static_cast<int>(dim));
  const Rng base(config.rng_seed);

  // Split the population evenly; leading subpopulations absorb the remainder.
  const std::size_t n_sub = static_cast<std::size_t>(config.subpopulations);
  std::vector<Eigen::MatrixXd> pops(n_sub);
  std::vector<Eigen::VectorXd> fits(n_sub);
  for (std::size_t s = 0; s < n_sub; ++s) {
    const int size = config.population / static_cast<int>(n_sub) +
                     (s < static_cast<std::size_t>(config.population %
                                                   static_cast<int>(n_sub))
                          ? 1
                          : 0);
    if (size < 1) throw std::invalid_argument("population too small for the subpopulation count");
    pops[s].resize(dim, size);
    fits[s].resize(size);
  }

  for (std::size_t s = 0; s < n_sub; ++s)
    for (Eigen::Index i = 0; i < pops[s].cols(); ++i) {
      Rng rng = base.fork(stream_salt(0, s, static_cast<std::size_t>(i)));
      for (Eigen::Index g = 0; g < dim; ++g) {
        const auto d = static_cast<std::size_t>(g);
        pops[s](g, i) = rng.uniform(bounds[d][0], bounds[d][1]);
      }
    }

  const auto evaluate = [&](std::size_t s) {
    const Eigen::Index count = pops[s].cols();
    parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t i) {
      const double value = objective(pops[s].col(static_cast<Eigen::Index>(i)));
      fits[s][static_cast<Eigen::Index>(i)] = std::isfinite(value)
                                                  ? value
                                                  : std::numeric_limits<double>::infinity();
    });
  };

  for (std::size_t s = 0; s < n_sub; ++s) evaluate(s);

  GaResult result;
  result.objective = std::numeric_limits<double>::infinity();
  const auto update_incumbent = [&] {
    for (std::size_t s = 0; s < n_sub; ++s)
      for (Eigen::Index i = 0; i < fits[s].size(); ++i)
        if (fits[s][i] < result.objective) {
          result.objective = fits[s][i];
          result.best = pops[s].col(i);
        }
  };
  update_incumbent();
  if (!std::isfinite(result.objective))
    throw numerical_error("initial population is entirely infeasible");
  result.history.push_back(result.objective);

  for (int gen = 1; gen <= limit; ++gen) {
    for (std::size_t s = 0; s < n_sub; ++s) {
      const Eigen::Index size = pops[s].cols();
      Eigen::MatrixXd next(dim, size);

      Eigen::Index elite = 0;
      for (Eigen::Index i = 1; i < size; ++i)
        if (fits[s][i] < fits[s][elite]) elite = i;
      next.col(0) = pops[s].col(elite);

      const Eigen::Index children = size - 1;
      const auto crossover_children = static_cast<Eigen::Index>(
          std::llround(config.crossover_fraction * static_cast<double>(children)));
      for (Eigen::Index c = 0; c < children; ++c) {
        Rng rng = base.fork(stream_salt(gen, s, static_cast<std::size_t>(c)));
        Eigen::VectorXd child;
        if (c < crossover_children) {
          const auto p1 = tournament_select(fits[s], config.tournament_size, rng);
          const auto p2 = tournament_select(fits[s], config.tournament_size, rng);
          child = intermediate_crossover(pops[s].col(static_cast<Eigen::Index>(p1)),
                                         pops[s].col(static_cast<Eigen::Index>(p2)),
                                         config.crossover_ratio, rng);
          for (Eigen::Index g = 0; g < dim; ++g) {
            const auto d = static_cast<std::size_t>(g);
            child[g] = std::clamp(child[g], bounds[d][0], bounds[d][1]);
          }
        } else {
          const auto parent = tournament_select(fits[s], config.tournament_size, rng);
          child = gaussian_mutation(pops[s].col(static_cast<Eigen::Index>(parent)), gen, limit,
                                    config, bounds, rng);
        }
        next.col(c + 1) = child;
      }
      pops[s] = std::move(next);
    }

    for (std::size_t s = 0; s < n_sub; ++s) evaluate(s);
    if (n_sub >= 2) migrate(pops, fits, config, gen);

    update_incumbent();
    result.history.push_back(result.objective);
    result.generations = gen;

    const int window = config.stall_generations;
    if (gen >= window) {
      const double improvement =
          result.history[static_cast<std::size_t>(gen - window)] - result.objective;
      if (improvement < config.fitness_tolerance) break;
    }
  }

  return result;
}

GaResult ga_run(const CalibrationProblem& problem, const GaConfig& config, int threads) {
  problem.validate();
  std::atomic<std::int64_t> extrapolations{0};
  const ObjectiveFn objective = [&](const Eigen::VectorXd& p) {
    bool outside = false;
    const double value = aggregate_objective(problem, p, &outside);
    if (outside) extrapolations.fetch_add(1, std::memory_order_relaxed);
    return value;
  };
  GaResult result = ga_minimize(objective, problem.bounds, config, threads);
  result.extrapolated_evaluations = extrapolations.load();
  return result;
}

FitMetrics fit_metrics(const LDCurve& reference, const LDCurve& candidate) {
  if (reference.size() != candidate.size())
    throw std::invalid_argument("curves must share the load grid");
  return fit_metrics(reference.depth, candidate.depth);
}

FitMetrics fit_metrics(const Eigen::VectorXd& reference_depth,
                       const Eigen::VectorXd& candidate_depth) {
  if (reference_depth.size() != candidate_depth.size())
    throw std::invalid_argument("depth vectors must share the load grid");
  const Eigen::ArrayXd diff = candidate_depth.array() - reference_depth.array();
  FitMetrics m;
  m.rmse = std::sqrt(diff.square().mean());
  m.avg_err = diff.abs().mean();
  const double ss_res = diff.square().sum();
  const double ss_tot = (reference_depth.array() - reference_depth.mean()).square().sum();
  m.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  double pct_sum = 0.0;
  Eigen::Index pct_count = 0;
  for (Eigen::Index i = 0; i < reference_depth.size(); ++i)
    if (reference_depth[i] != 0.0) {
      pct_sum += std::abs(diff[i] / reference_depth[i]);
      ++pct_count;
    }
  m.pct_err = pct_count > 0 ? 100.0 * pct_sum / static_cast<double>(pct_count) : 0.0;
  return m;
}

}  // namespace creepfit
