// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "creepfit/contact.hpp"
#include "creepfit/rng.hpp"
#include "creepfit/surrogate.hpp"

namespace creepfit {

/// Real-coded GA settings. max_generations of zero selects 100 times the
/// parameter count. The seed has no default: randomized stages must be
/// seeded explicitly.
struct GaConfig {
  int population = 200;
  int tournament_size = 2;
  double crossover_fraction = 0.8;
  double crossover_ratio = 1.0;
  double mutation_scale = 1.0;
  double mutation_shrink = 1.0;
  double migration_fraction = 0.2;
  int migration_interval = 20;
  int subpopulations = 4;
  int max_generations = 0;
  int stall_generations = 50;
  double fitness_tolerance = 1e-4;
  std::uint64_t rng_seed = 0;

  void validate() const;
  int generation_limit(int dimensions) const {
    return max_generations > 0 ? max_generations : 100 * dimensions;
  }
};

/// One experimental condition: a measured curve already resampled onto the
/// surrogate's output grid, and the surrogate trained for that condition.
struct Condition {
  std::string name;
  LDCurve experiment;
  SurrogateModel model;
};

struct CalibrationProblem {
  ParamBounds bounds;
  std::vector<Condition> conditions;

  void validate() const;
  Eigen::Index dimension() const { return static_cast<Eigen::Index>(bounds.size()); }
};

/// child = parent1 + rand * ratio * (parent2 - parent1), rand fresh per gene.
Eigen::VectorXd intermediate_crossover(const Eigen::VectorXd& parent1,
                                       const Eigen::VectorXd& parent2, double ratio, Rng& rng);

/// Additive zero-mean Gaussian per gene with standard deviation
/// scale * (1 - shrink * generation / limit) * bound width, clamped to bounds.
Eigen::VectorXd gaussian_mutation(const Eigen::VectorXd& individual, int generation,
                                  int generation_limit, const GaConfig& config,
                                  const ParamBounds& bounds, Rng& rng);

/// Index of the best (lowest) fitness among `size` distinct uniformly drawn
/// candidates; ties break toward the lower index.
std::size_t tournament_select(const Eigen::VectorXd& fitness, int size, Rng& rng);

/// Forward migration: the best fraction of subpopulation n replaces the
/// worst fraction of subpopulation n+1 (the last wraps to the first).
/// Applies only when generation is a positive multiple of the interval;
/// fitness columns move along with the individuals.
void migrate(std::vector<Eigen::MatrixXd>& subpopulations,
             std::vector<Eigen::VectorXd>& fitnesses, const GaConfig& config, int generation);

/// Mean over conditions of the squared depth mismatch (nm^2) between the
/// surrogate prediction and the experimental curve. Out-of-bounds queries
/// are still evaluated; `extrapolated` reports that the flag was raised.
double aggregate_objective(const CalibrationProblem& problem, const Eigen::VectorXd& parameters,
                           bool* extrapolated = nullptr);

struct GaResult {
  Eigen::VectorXd best;
  double objective = 0.0;
  std::vector<double> history;  // incumbent best per generation, nonincreasing
  int generations = 0;
  std::int64_t extrapolated_evaluations = 0;
};

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

/// Generic bounded minimization with the configured GA. Deterministic for a
/// fixed seed independent of the thread count: reproduction draws from
/// per-individual substreams and fitness evaluation uses no randomness.
GaResult ga_minimize(const ObjectiveFn& objective, const ParamBounds& bounds,
                     const GaConfig& config, int threads = 1);

GaResult ga_run(const CalibrationProblem& problem, const GaConfig& config, int threads = 1);

struct FitMetrics {
  double rmse = 0.0;     // nm
  double r2 = 0.0;
  double avg_err = 0.0;  // nm
  double pct_err = 0.0;  // %
};

/// Quality of curve b against reference curve a on a shared grid.
FitMetrics fit_metrics(const LDCurve& reference, const LDCurve& candidate);
FitMetrics fit_metrics(const Eigen::VectorXd& reference_depth,
                       const Eigen::VectorXd& candidate_depth);

}  // namespace creepfit
