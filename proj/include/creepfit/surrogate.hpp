// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "creepfit/common.hpp"

namespace creepfit {

/// Interpolation kernels. `gaussian` uses an unsquared distance in the
/// exponent, exp(-r / c^2); `gaussian_squared` is the conventional
/// exp(-r^2 / c^2) form, selectable through the study config.
enum class RbfKernel {
  linear_spline,         // r
  cubic_spline,          // r^3
  multiquadric,          // sqrt(1 + r^2/c^2)
  gaussian,              // exp(-r / c^2)
  inverse_multiquadric,  // 1 / sqrt(r^2 + c^2)
  gaussian_squared,      // exp(-r^2 / c^2)
};

std::string kernel_name(RbfKernel kernel);
RbfKernel kernel_from_name(const std::string& name);
bool kernel_uses_shape(RbfKernel kernel);

using ParamBounds = std::vector<std::array<double, 2>>;

/// Paired training data: parameter vectors (columns of `inputs`, d x M) and
/// the matching model outputs (columns of `outputs`, N x M).
struct SnapshotSet {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd outputs;
  ParamBounds bounds;  // per-dimension (lo, hi), used for normalization

  Eigen::Index dimension() const { return inputs.rows(); }
  Eigen::Index count() const { return inputs.cols(); }
  void validate() const;
};

/// Energy-truncated orthonormal basis of a snapshot matrix.
struct PodBasis {
  Eigen::MatrixXd modes;        // N x K, orthonormal columns
  Eigen::VectorXd eigenvalues;  // all M Gram eigenvalues, descending
  double energy_retained = 0.0;

  Eigen::Index rank() const { return modes.cols(); }
};

struct TruncationChoice {
  Eigen::Index rank;
  double energy;
};

/// Smallest K whose retained-energy ratio meets the threshold.
TruncationChoice truncate_by_energy(const Eigen::VectorXd& eigenvalues_descending,
                                    double threshold);

/// Evaluate `forward` at every parameter set (optionally in parallel) and
/// collect the columns. All outputs must share one length; failures are
/// aggregated into a single error naming the offending columns.
SnapshotSet build_snapshots(const std::vector<Eigen::VectorXd>& parameter_sets,
                            const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& forward,
                            ParamBounds bounds, int threads = 1);

/// POD via the M x M Gram matrix of the snapshots (no mean centering).
/// Eigenvalues below 1e-12 of the largest are treated as numerical zeros.
PodBasis pod_reduce(const Eigen::MatrixXd& outputs, double energy_threshold);

/// Amplitude matrix A = modes^T * outputs (K x M).
Eigen::MatrixXd amplitudes(const PodBasis& basis, const Eigen::MatrixXd& outputs);

double rbf_eval(RbfKernel kernel, double distance, double shape);

/// Trained POD-RBF surrogate. Immutable after training; cheap to evaluate.
struct SurrogateModel {
  PodBasis basis;
  Eigen::MatrixXd coeffs;        // K x M
  RbfKernel kernel = RbfKernel::multiquadric;
  double shape = 0.5;
  Eigen::MatrixXd train_inputs;  // d x M, normalized to [0,1]
  ParamBounds bounds;
  double condition = 0.0;        // estimated condition of the interpolation matrix
  std::uint64_t train_hash = 0;  // content hash of the training set

  Eigen::Index dimension() const { return train_inputs.rows(); }
  Eigen::Index output_size() const { return basis.modes.rows(); }
};

/// Solve B F = A on inputs normalized per dimension. Throws numerical_error
/// when the interpolation matrix condition exceeds 1e14.
SurrogateModel train(const SnapshotSet& snapshots, RbfKernel kernel, double shape,
                     double energy_threshold);

struct Prediction {
  Eigen::VectorXd values;
  bool extrapolated = false;  // query left the training bounds
};

Prediction predict(const SurrogateModel& model, const Eigen::VectorXd& parameters);

/// Multiplicative uniform noise: U' = U .* (1 + level * xi), xi ~ U[-1, 1]
/// drawn column-major from the seeded stream.
SnapshotSet add_noise(const SnapshotSet& snapshots, double level, std::uint64_t seed);

struct ValidationReport {
  Eigen::VectorXd per_point;  // relative L2 error per holdout column
  double mean_error = 0.0;
  double worst_error = 0.0;
};

ValidationReport validation_report(const SurrogateModel& model,
                                   const Eigen::MatrixXd& holdout_inputs,
                                   const Eigen::MatrixXd& holdout_outputs);

/// Content hash (FNV-1a over the raw entries) used to fingerprint artifacts.
std::uint64_t snapshot_hash(const SnapshotSet& snapshots);

/// Versioned text artifact with full round-trip precision. Comment lines
/// (`# ...`) precede the header and are ignored on load.
void save_surrogate(const SurrogateModel& model, const std::string& path,
                    const std::vector<std::string>& comments = {});
SurrogateModel load_surrogate(const std::string& path);

}  // namespace creepfit
