// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "creepfit/calibration.hpp"
#include "creepfit/doe.hpp"
#include "support/benchmark.hpp"

using namespace creepfit;

namespace {

GaConfig small_ga(std::uint64_t seed) {
  GaConfig cfg;
  cfg.population = 60;
  cfg.subpopulations = 3;
  cfg.max_generations = 120;
  cfg.rng_seed = seed;
  return cfg;
}

/// One-condition problem whose targets come from the benchmark surrogate at
/// a known interior point. The full basis keeps all three parameters
/// identifiable from a single condition.
CalibrationProblem benchmark_problem(const Eigen::VectorXd& truth, bool forward_targets) {
  const auto& b = benchmark::bench_instance();
  CalibrationProblem problem;
  problem.bounds = b.snapshots.bounds;
  Condition c;
  c.name = "bench";
  c.model = train(b.snapshots, RbfKernel::multiquadric, 0.5, 1.0);
  c.experiment.time = Eigen::VectorXd::LinSpaced(c.model.output_size(), 0.0, 30.0);
  c.experiment.load = Eigen::VectorXd::Zero(c.model.output_size());
  c.experiment.depth = forward_targets ? benchmark::forward_depths(truth)
                                       : predict(c.model, truth).values;
  problem.conditions.push_back(std::move(c));
  return problem;
}

}  // namespace

TEST_CASE("intermediate crossover") {
  Rng rng(11);
  Eigen::VectorXd p1(3), p2(3);
  p1 << 1.0, -2.0, 0.5;
  p2 << 3.0, 4.0, 0.5;
  SUBCASE("zero ratio returns the first parent") {
    const Eigen::VectorXd child = intermediate_crossover(p1, p2, 0.0, rng);
    CHECK((child - p1).norm() == 0.0);
  }
  SUBCASE("unit ratio keeps every gene between the parents") {
    for (int trial = 0; trial < 200; ++trial) {
      const Eigen::VectorXd child = intermediate_crossover(p1, p2, 1.0, rng);
      for (int g = 0; g < 3; ++g) {
        CHECK(child[g] >= std::min(p1[g], p2[g]) - 1e-15);
        CHECK(child[g] <= std::max(p1[g], p2[g]) + 1e-15);
      }
    }
  }
  SUBCASE("dimension mismatch rejected") {
    CHECK_THROWS_AS(intermediate_crossover(p1, Eigen::VectorXd::Zero(2), 1.0, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("gaussian mutation") {
  const ParamBounds bounds = {{0.0, 10.0}};
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 4.0);
  GaConfig cfg;
  cfg.rng_seed = 3;
  SUBCASE("zero scale leaves the individual unchanged") {
    cfg.mutation_scale = 0.0;
    Rng rng(5);
    CHECK((gaussian_mutation(x, 10, 100, cfg, bounds, rng) - x).norm() == 0.0);
  }
  SUBCASE("full shrink silences the final generation") {
    cfg.mutation_shrink = 1.0;
    Rng rng(5);
    CHECK((gaussian_mutation(x, 100, 100, cfg, bounds, rng) - x).norm() == 0.0);
  }
  SUBCASE("sample mean stays on the original value") {
    cfg.mutation_scale = 0.3;
    cfg.mutation_shrink = 0.5;
    Rng rng(97);
    const int n = 100000;
    const int generation = 40, limit = 100;
    const double sd = 0.3 * (1.0 - 0.5 * 0.4) * 10.0;  // scale * (1 - shrink g/G) * width
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += gaussian_mutation(x, generation, limit, cfg, bounds, rng)[0];
    const double mean = sum / n;
    // Clamping at [0, 10] trims both tails almost symmetrically about 4.
    const double stderr_bound = 3.0 * sd / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mean - 4.0) <= stderr_bound + 0.05);
  }
  SUBCASE("results are clamped to the bounds") {
    cfg.mutation_scale = 5.0;
    Rng rng(13);
    for (int i = 0; i < 500; ++i) {
      const double v = gaussian_mutation(x, 0, 100, cfg, bounds, rng)[0];
      CHECK(v >= 0.0);
      CHECK(v <= 10.0);
    }
  }
  SUBCASE("generation beyond the limit is rejected") {
    Rng rng(5);
    CHECK_THROWS_AS(gaussian_mutation(x, 101, 100, cfg, bounds, rng), std::invalid_argument);
  }
}

TEST_CASE("tournament selection") {
  Eigen::VectorXd fitness(5);
  fitness << 3.0, 1.0, 4.0, 0.5, 2.0;
  SUBCASE("full-size tournament always finds the global best") {
    Rng rng(17);
    for (int i = 0; i < 50; ++i) CHECK(tournament_select(fitness, 5, rng) == 3);
  }
  SUBCASE("two members, tournament of two") {
    Eigen::VectorXd two(2);
    two << 5.0, 1.0;
    Rng rng(18);
    for (int i = 0; i < 50; ++i) CHECK(tournament_select(two, 2, rng) == 1);
  }
  SUBCASE("ties break toward the lower index") {
    const Eigen::VectorXd equal = Eigen::VectorXd::Constant(6, 2.0);
    Rng rng(19);
    CHECK(tournament_select(equal, 6, rng) == 0);
  }
  SUBCASE("selection pressure lowers the expected fitness") {
    Rng rng(20);
    Eigen::VectorXd random_fitness(40);
    for (Eigen::Index i = 0; i < 40; ++i) random_fitness[i] = rng.uniform(0.0, 1.0);
    double sum = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
      sum += random_fitness[static_cast<Eigen::Index>(tournament_select(random_fitness, 2, rng))];
    CHECK(sum / draws < random_fitness.mean());
  }
  SUBCASE("oversized tournaments rejected") {
    Rng rng(21);
    CHECK_THROWS_AS(tournament_select(fitness, 6, rng), std::invalid_argument);
  }
}

TEST_CASE("migration") {
  GaConfig cfg;
  cfg.migration_fraction = 0.2;
  cfg.migration_interval = 20;
  cfg.rng_seed = 1;
  const auto subpop = [](double value, int size) {
    return Eigen::MatrixXd::Constant(2, size, value);
  };
  std::vector<Eigen::MatrixXd> pops = {subpop(1.0, 10), subpop(2.0, 10), subpop(3.0, 10)};
  std::vector<Eigen::VectorXd> fits = {Eigen::VectorXd::LinSpaced(10, 0.1, 1.0),
                                       Eigen::VectorXd::LinSpaced(10, 1.1, 2.0),
                                       Eigen::VectorXd::LinSpaced(10, 2.1, 3.0)};

  SUBCASE("zero fraction is a no-op") {
    auto pops2 = pops;
    auto fits2 = fits;
    cfg.migration_fraction = 0.0;
    migrate(pops2, fits2, cfg, 20);
    CHECK((pops2[1] - pops[1]).norm() == 0.0);
  }
  SUBCASE("off-interval generations are a no-op") {
    auto pops2 = pops;
    auto fits2 = fits;
    migrate(pops2, fits2, cfg, 19);
    CHECK((pops2[1] - pops[1]).norm() == 0.0);
  }
  SUBCASE("forward migration replaces the worst with the upstream best") {
    auto pops2 = pops;
    auto fits2 = fits;
    migrate(pops2, fits2, cfg, 40);
    // Exactly two migrants per target; sizes preserved.
    for (std::size_t s = 0; s < 3; ++s) CHECK(pops2[s].cols() == 10);
    int from0_in_1 = 0;
    for (int i = 0; i < 10; ++i)
      if (pops2[1](0, i) == 1.0) ++from0_in_1;
    CHECK(from0_in_1 == 2);
    int from2_in_0 = 0;  // wrap-around: last feeds the first
    for (int i = 0; i < 10; ++i)
      if (pops2[0](0, i) == 3.0) ++from2_in_0;
    CHECK(from2_in_0 == 2);
    // Migrant fitness travels along.
    CHECK(fits2[1].minCoeff() == doctest::Approx(0.1));
  }
  SUBCASE("needs at least two subpopulations") {
    std::vector<Eigen::MatrixXd> one = {subpop(1.0, 10)};
    std::vector<Eigen::VectorXd> one_fit = {fits[0]};
    CHECK_THROWS_AS(migrate(one, one_fit, cfg, 20), std::invalid_argument);
  }
}

TEST_CASE("objective aggregation") {
  Eigen::VectorXd truth(3);
  truth << 3.28, 0.063, 0.22;
  SUBCASE("self-consistent targets give a near-zero objective") {
    const CalibrationProblem problem = benchmark_problem(truth, false);
    CHECK(aggregate_objective(problem, truth) <= 1e-18);
  }
  SUBCASE("single condition equals that condition's mean squared error") {
    const CalibrationProblem problem = benchmark_problem(truth, true);
    Eigen::VectorXd probe(3);
    probe << 3.1, 0.05, 0.28;
    const Eigen::VectorXd predicted = predict(problem.conditions[0].model, probe).values;
    const double direct = error_mse(predicted, problem.conditions[0].experiment.depth);
    CHECK(aggregate_objective(problem, probe) == doctest::Approx(direct));
  }
  SUBCASE("truth beats a thousand random probes on forward-model targets") {
    const CalibrationProblem problem = benchmark_problem(truth, true);
    const double at_truth = aggregate_objective(problem, truth);
    Rng rng(404);
    double best_probe = std::numeric_limits<double>::max();
    for (int i = 0; i < 1000; ++i) {
      Eigen::VectorXd p(3);
      for (int g = 0; g < 3; ++g)
        p[g] = rng.uniform(problem.bounds[g][0], problem.bounds[g][1]);
      best_probe = std::min(best_probe, aggregate_objective(problem, p));
    }
    CHECK(at_truth <= best_probe);
  }
  SUBCASE("extrapolation is flagged but still evaluated") {
    const CalibrationProblem problem = benchmark_problem(truth, false);
    Eigen::VectorXd outside(3);
    outside << 3.6, 0.063, 0.22;
    bool flagged = false;
    const double value = aggregate_objective(problem, outside, &flagged);
    CHECK(flagged);
    CHECK(std::isfinite(value));
  }
}

TEST_CASE("genetic algorithm") {
  SUBCASE("one-dimensional quadratic sanity problem") {
    const ObjectiveFn objective = [](const Eigen::VectorXd& x) {
      return (x[0] - 0.3123) * (x[0] - 0.3123);
    };
    const GaResult result = ga_minimize(objective, {{0.0, 1.0}}, small_ga(5));
    CHECK(result.best[0] == doctest::Approx(0.3123).epsilon(1e-3));
  }

  SUBCASE("same seed reproduces the identical history") {
    const ObjectiveFn objective = [](const Eigen::VectorXd& x) {
      return std::pow(x[0] - 0.5, 2) + std::pow(x[1] + 0.25, 2);
    };
    const ParamBounds bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
    const GaResult a = ga_minimize(objective, bounds, small_ga(77));
    const GaResult b = ga_minimize(objective, bounds, small_ga(77));
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t g = 0; g < a.history.size(); ++g) CHECK(a.history[g] == b.history[g]);
    CHECK((a.best - b.best).norm() == 0.0);
    const GaResult c = ga_minimize(objective, bounds, small_ga(78));
    CHECK(c.best != a.best);
  }

  SUBCASE("thread count never changes the outcome") {
    const ObjectiveFn objective = [](const Eigen::VectorXd& x) {
      return std::abs(std::sin(5.0 * x[0]) + 0.5 * x[1] * x[1]);
    };
    const ParamBounds bounds = {{-2.0, 2.0}, {-2.0, 2.0}};
    const GaResult serial = ga_minimize(objective, bounds, small_ga(200), 1);
    const GaResult threaded = ga_minimize(objective, bounds, small_ga(200), 4);
    CHECK((serial.best - threaded.best).norm() == 0.0);
    CHECK(serial.objective == threaded.objective);
  }

  SUBCASE("history is nonincreasing and bounds are respected") {
    bool violated = false;
    const ParamBounds bounds = {{0.5, 1.5}, {-3.0, -1.0}};
    const ObjectiveFn objective = [&](const Eigen::VectorXd& x) {
      if (x[0] < 0.5 || x[0] > 1.5 || x[1] < -3.0 || x[1] > -1.0) violated = true;
      return x.squaredNorm();
    };
    const GaResult result = ga_minimize(objective, bounds, small_ga(31));
    CHECK_FALSE(violated);
    for (std::size_t g = 1; g < result.history.size(); ++g)
      CHECK(result.history[g] <= result.history[g - 1]);
  }

  SUBCASE("an entirely infeasible start is an error") {
    const ObjectiveFn objective = [](const Eigen::VectorXd&) {
      return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(ga_minimize(objective, {{0.0, 1.0}}, small_ga(9)), numerical_error);
  }

  SUBCASE("benchmark round trip on surrogate targets") {
    Eigen::VectorXd truth(3);
    truth << 3.28, 0.063, 0.22;
    const CalibrationProblem problem = benchmark_problem(truth, false);
    GaConfig cfg;
    cfg.rng_seed = 2026;
    const GaResult result = ga_run(problem, cfg);
    CHECK(std::abs(result.best[0] - truth[0]) / truth[0] <= 0.02);   // E
    CHECK(std::abs(result.best[1] - truth[1]) / truth[1] <= 0.05);   // C_s
    CHECK(std::abs(result.best[2] - truth[2]) / truth[2] <= 0.05);   // m_s
  }

  SUBCASE("config validation") {
    GaConfig bad = small_ga(1);
    bad.population = 3;
    bad.tournament_size = 2;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = small_ga(1);
    bad.crossover_fraction = 1.2;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = small_ga(1);
    bad.fitness_tolerance = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}

TEST_CASE("fit metrics") {
  LDCurve a;
  a.time = Eigen::VectorXd::LinSpaced(5, 0.0, 4.0);
  a.load = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
  a.depth = (Eigen::VectorXd(5) << 0.0, 10.0, 20.0, 30.0, 25.0).finished();
  SUBCASE("identical curves") {
    const FitMetrics m = fit_metrics(a, a);
    CHECK(m.rmse == 0.0);
    CHECK(m.r2 == doctest::Approx(1.0));
    CHECK(m.avg_err == 0.0);
    CHECK(m.pct_err == 0.0);
  }
  SUBCASE("constant offset") {
    LDCurve b = a;
    b.depth.array() += 5.0;
    const FitMetrics m = fit_metrics(a, b);
    CHECK(m.rmse == doctest::Approx(5.0));
    CHECK(m.avg_err == doctest::Approx(5.0));
    CHECK(m.r2 < 1.0);
  }
  SUBCASE("proportional error") {
    LDCurve b = a;
    b.depth *= 1.02;
    CHECK(fit_metrics(a, b).pct_err == doctest::Approx(2.0));
  }
}
