// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <numeric>

#include "creepfit/io.hpp"
#include "creepfit/surrogate.hpp"
#include "support/benchmark.hpp"

using namespace creepfit;

namespace {

// The eigenvalue spectrum of the 64-snapshot elastoplastic case study.
Eigen::VectorXd case_study_spectrum() {
  Eigen::VectorXd lambdas(6);
  lambdas << 5.31e8, 4.35e5, 1.21e4, 5.66e3, 3.22e3, 2.12e3;
  return lambdas;
}

const benchmark::Benchmark& bench() { return benchmark::bench_instance(); }

double worst_training_error(const SurrogateModel& model, const SnapshotSet& set) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < set.count(); ++j) {
    const Eigen::VectorXd pred = predict(model, set.inputs.col(j)).values;
    worst = std::max(worst, (pred - set.outputs.col(j)).norm() / set.outputs.col(j).norm());
  }
  return worst;
}

}  // namespace

TEST_CASE("energy truncation") {
  SUBCASE("published spectrum keeps one mode at 99.9%") {
    const auto choice = truncate_by_energy(case_study_spectrum(), 0.999);
    CHECK(choice.rank == 1);
    CHECK(choice.energy == doctest::Approx(0.9991).epsilon(1e-4));
  }
  SUBCASE("threshold one keeps the whole spectrum") {
    CHECK(truncate_by_energy(case_study_spectrum(), 1.0).rank == 6);
  }
  CHECK_THROWS_AS(truncate_by_energy(case_study_spectrum(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(truncate_by_energy(case_study_spectrum(), 1.5), std::invalid_argument);
}

TEST_CASE("snapshot building") {
  const ParamBounds bounds = {{0.0, 1.0}};
  const auto forward = [](const Eigen::VectorXd& p) {
    Eigen::VectorXd u(3);
    u << p[0], 2.0 * p[0], p[0] * p[0];
    return u;
  };
  SUBCASE("a single snapshot is rejected") {
    CHECK_THROWS_AS(build_snapshots({Eigen::VectorXd::Constant(1, 0.5)}, forward, bounds),
                    std::invalid_argument);
  }
  SUBCASE("identical inputs give identical columns") {
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(1, 0.25);
    const SnapshotSet set = build_snapshots({p, p}, forward, bounds);
    CHECK((set.outputs.col(0) - set.outputs.col(1)).norm() == 0.0);
  }
  SUBCASE("failures are aggregated with column indices") {
    const auto flaky = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
      if (p[0] > 0.6) throw numerical_error("diverged");
      return forward(p);
    };
    std::vector<Eigen::VectorXd> points;
    for (double x : {0.1, 0.7, 0.3, 0.9})
      points.push_back(Eigen::VectorXd::Constant(1, x));
    try {
      build_snapshots(points, flaky, bounds);
      FAIL("expected an aggregated failure");
    } catch (const numerical_error& e) {
      const std::string what = e.what();
      CHECK(what.find("1") != std::string::npos);
      CHECK(what.find("3") != std::string::npos);
      CHECK(what.find("diverged") != std::string::npos);
    }
  }
  SUBCASE("out-of-bounds parameter sets are rejected") {
    CHECK_THROWS_AS(build_snapshots({Eigen::VectorXd::Constant(1, 0.5),
                                     Eigen::VectorXd::Constant(1, 1.5)},
                                    forward, bounds),
                    std::invalid_argument);
  }
  SUBCASE("thread count does not change the result") {
    std::vector<Eigen::VectorXd> points;
    for (int i = 0; i < 17; ++i) points.push_back(Eigen::VectorXd::Constant(1, i / 17.0));
    const SnapshotSet serial = build_snapshots(points, forward, bounds, 1);
    const SnapshotSet parallel = build_snapshots(points, forward, bounds, 4);
    CHECK((serial.outputs - parallel.outputs).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("benchmark factorial has thirty-six columns") {
  CHECK(bench().snapshots.count() == 36);
  CHECK(bench().snapshots.dimension() == 3);
}

TEST_CASE("POD reduction") {
  const Eigen::MatrixXd& outputs = bench().snapshots.outputs;
  SUBCASE("orthonormal modes") {
    const PodBasis basis = pod_reduce(outputs, 1.0);
    const Eigen::MatrixXd gram = basis.modes.transpose() * basis.modes;
    CHECK((gram - Eigen::MatrixXd::Identity(basis.rank(), basis.rank())).cwiseAbs().maxCoeff() <=
          1e-10);
  }
  SUBCASE("eigenvalues descend and account for the total energy") {
    const PodBasis basis = pod_reduce(outputs, 1.0);
    for (Eigen::Index k = 1; k < basis.eigenvalues.size(); ++k)
      CHECK(basis.eigenvalues[k] <= basis.eigenvalues[k - 1]);
    CHECK(basis.eigenvalues.minCoeff() >= 0.0);
    CHECK(basis.eigenvalues.sum() ==
          doctest::Approx(outputs.squaredNorm()).epsilon(1e-8));
  }
  SUBCASE("repeated column collapses to one mode") {
    Eigen::MatrixXd repeated(4, 3);
    Eigen::VectorXd u(4);
    u << 1.0, 2.0, -1.0, 0.5;
    repeated << u, u, u;
    const PodBasis basis = pod_reduce(repeated, 0.9);
    CHECK(basis.rank() == 1);
    CHECK(basis.energy_retained == doctest::Approx(1.0));
  }
  SUBCASE("threshold one returns the numerical rank") {
    const PodBasis basis = pod_reduce(outputs, 1.0);
    Eigen::Index rank = 0;
    while (rank < basis.eigenvalues.size() &&
           basis.eigenvalues[rank] > 1e-12 * basis.eigenvalues[0])
      ++rank;
    CHECK(basis.rank() == rank);
  }
  SUBCASE("reconstruction error never grows with more modes") {
    const PodBasis full = pod_reduce(outputs, 1.0);
    double prev = std::numeric_limits<double>::max();
    for (Eigen::Index k = 1; k <= full.rank(); ++k) {
      const Eigen::MatrixXd modes = full.modes.leftCols(k);
      const double err = (outputs - modes * (modes.transpose() * outputs)).norm();
      CHECK(err <= prev + 1e-12);
      prev = err;
    }
  }
  CHECK_THROWS_AS(pod_reduce(Eigen::MatrixXd::Zero(4, 3), 0.9), std::invalid_argument);
}

TEST_CASE("amplitudes") {
  const Eigen::MatrixXd& outputs = bench().snapshots.outputs;
  SUBCASE("full basis reconstructs the snapshots") {
    const PodBasis basis = pod_reduce(outputs, 1.0);
    const Eigen::MatrixXd amp = amplitudes(basis, outputs);
    CHECK((outputs - basis.modes * amp).norm() / outputs.norm() <= 1e-10);
  }
  SUBCASE("duplicated snapshots share amplitudes") {
    Eigen::MatrixXd two(outputs.rows(), 2);
    two << outputs.col(0), outputs.col(0);
    const PodBasis basis = pod_reduce(two, 1.0);
    const Eigen::MatrixXd amp = amplitudes(basis, two);
    CHECK((amp.col(0) - amp.col(1)).norm() <= 1e-12 * amp.norm());
  }
  SUBCASE("truncated reconstruction obeys the energy bound") {
    const PodBasis basis = pod_reduce(outputs, 0.99);
    const Eigen::MatrixXd amp = amplitudes(basis, outputs);
    const double rel = (outputs - basis.modes * amp).norm() / outputs.norm();
    CHECK(rel <= std::sqrt(1.0 - basis.energy_retained) + 1e-10);
  }
}

TEST_CASE("kernel evaluation") {
  CHECK(rbf_eval(RbfKernel::linear_spline, 0.0, 0.5) == 0.0);
  CHECK(rbf_eval(RbfKernel::gaussian, 0.0, 0.5) == 1.0);
  CHECK(rbf_eval(RbfKernel::multiquadric, 0.0, 0.5) == 1.0);
  CHECK(rbf_eval(RbfKernel::inverse_multiquadric, 0.0, 0.5) == doctest::Approx(2.0));
  CHECK(rbf_eval(RbfKernel::cubic_spline, 2.0, 0.5) == doctest::Approx(8.0));
  CHECK(rbf_eval(RbfKernel::gaussian, 1.0, 0.5) == doctest::Approx(std::exp(-4.0)));
  CHECK(rbf_eval(RbfKernel::gaussian_squared, 1.0, 0.5) == doctest::Approx(std::exp(-4.0)));
  CHECK(rbf_eval(RbfKernel::gaussian_squared, 0.5, 0.5) == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(rbf_eval(RbfKernel::linear_spline, -1.0, 0.5), std::invalid_argument);
  CHECK(kernel_from_name("mq") == RbfKernel::multiquadric);
  CHECK(kernel_name(RbfKernel::inverse_multiquadric) == "imq");
  CHECK_THROWS_AS(kernel_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("training") {
  SUBCASE("two-point linear data with the linear-spline kernel is exact") {
    SnapshotSet set;
    set.inputs.resize(1, 2);
    set.inputs << 0.0, 1.0;
    set.outputs.resize(2, 2);
    set.outputs << 1.0, 3.0, -2.0, 4.0;
    set.bounds = {{0.0, 1.0}};
    const SurrogateModel model = train(set, RbfKernel::linear_spline, 0.5, 1.0);
    for (double x : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const Eigen::VectorXd u = predict(model, Eigen::VectorXd::Constant(1, x)).values;
      CHECK(u[0] == doctest::Approx(1.0 + 2.0 * x).epsilon(1e-10));
      CHECK(u[1] == doctest::Approx(-2.0 + 6.0 * x).epsilon(1e-10));
    }
  }
  SUBCASE("training points reproduce within the truncation error") {
    const SurrogateModel model = train(bench().snapshots, RbfKernel::multiquadric, 0.5, 0.999);
    CHECK(worst_training_error(model, bench().snapshots) <= 0.01);
  }
  SUBCASE("ill-conditioned interpolation is reported with advice") {
    SnapshotSet set;
    set.inputs.resize(1, 3);
    set.inputs << 0.0, 0.5, 1.0;
    set.outputs.resize(2, 3);
    set.outputs << 1.0, 2.0, 3.0, 0.0, 1.0, 0.0;
    set.bounds = {{0.0, 1.0}};
    try {
      train(set, RbfKernel::gaussian_squared, 1e8, 1.0);
      FAIL("expected a conditioning failure");
    } catch (const numerical_error& e) {
      CHECK(std::string(e.what()).find("c_j") != std::string::npos);
    }
  }
  SUBCASE("shape parameter must be positive for smooth kernels") {
    CHECK_THROWS_AS(train(bench().snapshots, RbfKernel::multiquadric, 0.0, 1.0),
                    std::invalid_argument);
  }
}

TEST_CASE("prediction") {
  SUBCASE("interpolation property with the full basis") {
    const SurrogateModel model = train(bench().snapshots, RbfKernel::multiquadric, 0.5, 1.0);
    CHECK(worst_training_error(model, bench().snapshots) <= 1e-8);
  }
  SUBCASE("constant outputs predict the constant") {
    SnapshotSet set;
    set.inputs.resize(1, 3);
    set.inputs << 0.0, 0.5, 1.0;
    set.outputs = Eigen::MatrixXd::Constant(4, 3, 7.25);
    set.bounds = {{0.0, 1.0}};
    // The linear-spline interpolant of a constant is constant across the
    // hull; the smooth kernels reproduce it exactly at the nodes.
    const SurrogateModel ls = train(set, RbfKernel::linear_spline, 0.5, 1.0);
    for (double x : {0.0, 0.1, 0.4, 0.9, 1.0}) {
      const Eigen::VectorXd u = predict(ls, Eigen::VectorXd::Constant(1, x)).values;
      CHECK((u.array() - 7.25).abs().maxCoeff() <= 1e-8);
    }
    const SurrogateModel mq = train(set, RbfKernel::multiquadric, 0.5, 1.0);
    for (double x : {0.0, 0.5, 1.0}) {
      const Eigen::VectorXd u = predict(mq, Eigen::VectorXd::Constant(1, x)).values;
      CHECK((u.array() - 7.25).abs().maxCoeff() <= 1e-8);
    }
  }
  SUBCASE("midpoint error stays below five percent for the multiquadric") {
    const SurrogateModel model = train(bench().snapshots, RbfKernel::multiquadric, 0.5, 0.999);
    const ValidationReport report =
        validation_report(model, bench().holdout_inputs, bench().holdout_outputs);
    CHECK(report.mean_error <= 0.05);
  }
  SUBCASE("extrapolation is flagged, not rejected") {
    const SurrogateModel model = train(bench().snapshots, RbfKernel::multiquadric, 0.5, 0.999);
    Eigen::VectorXd inside(3), outside(3);
    inside << 3.2, 0.06, 0.25;
    outside << 3.6, 0.06, 0.25;
    CHECK_FALSE(predict(model, inside).extrapolated);
    const Prediction p = predict(model, outside);
    CHECK(p.extrapolated);
    CHECK(p.values.allFinite());
  }
  SUBCASE("column permutation leaves predictions unchanged") {
    const SnapshotSet& set = bench().snapshots;
    SnapshotSet permuted = set;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(set.count()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::reverse(order.begin(), order.end());
    std::swap(order[3], order[11]);
    for (Eigen::Index j = 0; j < set.count(); ++j) {
      permuted.inputs.col(j) = set.inputs.col(order[static_cast<std::size_t>(j)]);
      permuted.outputs.col(j) = set.outputs.col(order[static_cast<std::size_t>(j)]);
    }
    const SurrogateModel a = train(set, RbfKernel::multiquadric, 0.5, 1.0);
    const SurrogateModel b = train(permuted, RbfKernel::multiquadric, 0.5, 1.0);
    Eigen::VectorXd q(3);
    q << 3.1, 0.055, 0.27;
    const Eigen::VectorXd ua = predict(a, q).values;
    const Eigen::VectorXd ub = predict(b, q).values;
    CHECK((ua - ub).norm() <= 1e-12 * ua.norm());
  }
}

TEST_CASE("noise injection") {
  const SnapshotSet& set = bench().snapshots;
  SUBCASE("zero level is the identity") {
    const SnapshotSet noisy = add_noise(set, 0.0, 99);
    CHECK((noisy.outputs - set.outputs).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("seeding is deterministic") {
    const SnapshotSet a = add_noise(set, 0.05, 1234);
    const SnapshotSet b = add_noise(set, 0.05, 1234);
    CHECK((a.outputs - b.outputs).cwiseAbs().maxCoeff() == 0.0);
    const SnapshotSet c = add_noise(set, 0.05, 1235);
    CHECK((a.outputs - c.outputs).cwiseAbs().maxCoeff() > 0.0);
  }
  SUBCASE("per-entry deviation is bounded by the level") {
    const SnapshotSet noisy = add_noise(set, 0.05, 7);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < set.outputs.cols(); ++j)
      for (Eigen::Index i = 0; i < set.outputs.rows(); ++i)
        if (set.outputs(i, j) != 0.0)
          worst = std::max(worst, std::abs(noisy.outputs(i, j) / set.outputs(i, j) - 1.0));
    CHECK(worst <= 0.05 + 1e-12);
    CHECK(worst > 0.04);  // the bound is actually approached
  }
}

TEST_CASE("validation reporting") {
  const SnapshotSet& set = bench().snapshots;
  SUBCASE("training set as holdout is exact with the full basis") {
    const SurrogateModel model = train(set, RbfKernel::multiquadric, 0.5, 1.0);
    const ValidationReport report = validation_report(model, set.inputs, set.outputs);
    CHECK(report.worst_error <= 1e-8);
  }
  SUBCASE("five percent noise less than doubles the validation error") {
    const SurrogateModel clean = train(set, RbfKernel::multiquadric, 0.5, 0.999);
    const SurrogateModel noisy =
        train(add_noise(set, 0.05, 2024), RbfKernel::multiquadric, 0.5, 0.999);
    const double clean_err =
        validation_report(clean, bench().holdout_inputs, bench().holdout_outputs).mean_error;
    const double noisy_err =
        validation_report(noisy, bench().holdout_inputs, bench().holdout_outputs).mean_error;
    CHECK(noisy_err < 2.0 * clean_err);
  }
  SUBCASE("one percent noise costs less than one percentage point") {
    const SurrogateModel clean = train(set, RbfKernel::multiquadric, 0.5, 0.999);
    const SurrogateModel noisy =
        train(add_noise(set, 0.01, 2024), RbfKernel::multiquadric, 0.5, 0.999);
    const double clean_err =
        validation_report(clean, bench().holdout_inputs, bench().holdout_outputs).mean_error;
    const double noisy_err =
        validation_report(noisy, bench().holdout_inputs, bench().holdout_outputs).mean_error;
    CHECK(noisy_err - clean_err < 0.01);
  }
  SUBCASE("widening the gaussian shape helps dramatically") {
    const SurrogateModel narrow = train(set, RbfKernel::gaussian, 0.5, 0.999);
    const SurrogateModel wide = train(set, RbfKernel::gaussian, 1.5, 0.999);
    const double narrow_err =
        validation_report(narrow, bench().holdout_inputs, bench().holdout_outputs).mean_error;
    const double wide_err =
        validation_report(wide, bench().holdout_inputs, bench().holdout_outputs).mean_error;
    CHECK(wide_err <= 0.5 * narrow_err);
  }
}

TEST_CASE("artifact round trip") {
  const SurrogateModel model = train(bench().snapshots, RbfKernel::multiquadric, 0.5, 0.999);
  const std::string path =
      (std::filesystem::temp_directory_path() / "creepfit_surrogate_test.podrbf").string();
  save_surrogate(model, path, {"config=deadbeef"});
  const SurrogateModel loaded = load_surrogate(path);
  CHECK(loaded.kernel == model.kernel);
  CHECK(loaded.shape == model.shape);
  CHECK(loaded.train_hash == model.train_hash);
  Eigen::VectorXd q(3);
  q << 3.3, 0.07, 0.22;
  const Eigen::VectorXd before = predict(model, q).values;
  const Eigen::VectorXd after = predict(loaded, q).values;
  CHECK((before - after).cwiseAbs().maxCoeff() == 0.0);  // text format round-trips exactly
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_surrogate(path), missing_artifact_error);
}

TEST_CASE("snapshot hashing") {
  const SnapshotSet& set = bench().snapshots;
  const std::uint64_t base = snapshot_hash(set);
  CHECK(base == snapshot_hash(set));
  SnapshotSet tweaked = set;
  tweaked.outputs(0, 0) += 1e-9;
  CHECK(snapshot_hash(tweaked) != base);
}
