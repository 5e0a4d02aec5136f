// SPDX-License-Identifier: Apache-2.0

#include "creepfit/surrogate.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "creepfit/io.hpp"
#include "creepfit/parallel.hpp"
#include "creepfit/rng.hpp"

namespace creepfit {

std::string kernel_name(RbfKernel kernel) {
  switch (kernel) {
    case RbfKernel::linear_spline: return "ls";
    case RbfKernel::cubic_spline: return "cs";
    case RbfKernel::multiquadric: return "mq";
    case RbfKernel::gaussian: return "gs";
    case RbfKernel::inverse_multiquadric: return "imq";
    case RbfKernel::gaussian_squared: return "gs2";
  }
  throw std::invalid_argument("unknown kernel");
}

RbfKernel kernel_from_name(const std::string& name) {
  if (name == "ls") return RbfKernel::linear_spline;
  if (name == "cs") return RbfKernel::cubic_spline;
  if (name == "mq") return RbfKernel::multiquadric;
  if (name == "gs") return RbfKernel::gaussian;
  if (name == "imq") return RbfKernel::inverse_multiquadric;
  if (name == "gs2") return RbfKernel::gaussian_squared;
  throw std::invalid_argument("unknown kernel '" + name + "'; expected ls, cs, mq, gs, imq or gs2");
}

bool kernel_uses_shape(RbfKernel kernel) {
  return kernel != RbfKernel::linear_spline && kernel != RbfKernel::cubic_spline;
}

void SnapshotSet::validate() const {
  if (inputs.cols() != outputs.cols())
    throw std::invalid_argument("input and output column counts differ");
  if (count() < 2) throw std::invalid_argument("at least two snapshots required");
  if (static_cast<Eigen::Index>(bounds.size()) != dimension())
    throw std::invalid_argument("one (lo, hi) bound pair required per parameter dimension");
  for (const auto& [lo, hi] : bounds)
    if (!(lo < hi)) throw std::invalid_argument("parameter bounds must satisfy lo < hi");
}

TruncationChoice truncate_by_energy(const Eigen::VectorXd& eigenvalues_descending,
                                    double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw std::invalid_argument("energy threshold must lie in (0, 1]");
  const double total = eigenvalues_descending.sum();
  if (!(total > 0.0)) throw std::invalid_argument("eigenvalue spectrum has no energy");
  double cumulative = 0.0;
  for (Eigen::Index k = 0; k < eigenvalues_descending.size(); ++k) {
    cumulative += eigenvalues_descending[k];
    if (cumulative / total >= threshold) return {k + 1, cumulative / total};
  }
  return {eigenvalues_descending.size(), 1.0};
}

SnapshotSet build_snapshots(const std::vector<Eigen::VectorXd>& parameter_sets,
                            const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& forward,
                            ParamBounds bounds, int threads) {
  const std::size_t m = parameter_sets.size();
  if (m < 2) throw std::invalid_argument("at least two snapshots required");
  const Eigen::Index dim = parameter_sets.front().size();
  if (static_cast<Eigen::Index>(bounds.size()) != dim)
    throw std::invalid_argument("bounds dimension does not match parameter sets");
  for (std::size_t j = 0; j < m; ++j) {
    if (parameter_sets[j].size() != dim)
      throw std::invalid_argument("parameter sets have mixed dimensions");
    for (Eigen::Index i = 0; i < dim; ++i)
      if (parameter_sets[j][i] < bounds[i][0] - 1e-12 ||
          parameter_sets[j][i] > bounds[i][1] + 1e-12)
        throw std::invalid_argument("parameter set " + std::to_string(j) + " leaves the bounds");
  }

  std::vector<Eigen::VectorXd> columns(m);
  std::vector<std::string> failures(m);
  parallel_for(m, threads, [&](std::size_t j) {
    try {
      columns[j] = forward(parameter_sets[j]);
    } catch (const std::exception& e) {
      failures[j] = e.what();
    }
  });

  std::string failed;
  for (std::size_t j = 0; j < m; ++j)
    if (!failures[j].empty())
      failed += (failed.empty() ? "" : ", ") + std::to_string(j) + " (" + failures[j] + ")";
  if (!failed.empty()) throw numerical_error("forward model failed for columns: " + failed);

  const Eigen::Index n = columns.front().size();
  for (std::size_t j = 0; j < m; ++j)
    if (columns[j].size() != n)
      throw numerical_error("forward output length mismatch at column " + std::to_string(j));

  SnapshotSet set;
  set.inputs.resize(dim, static_cast<Eigen::Index>(m));
  set.outputs.resize(n, static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    set.inputs.col(static_cast<Eigen::Index>(j)) = parameter_sets[j];
    set.outputs.col(static_cast<Eigen::Index>(j)) = columns[j];
  }
  set.bounds = std::move(bounds);
  set.validate();
  return set;
}

PodBasis pod_reduce(const Eigen::MatrixXd& outputs, double energy_threshold) {
  const Eigen::Index m = outputs.cols();
  if (m < 2) throw std::invalid_argument("at least two snapshots required");

  const Eigen::MatrixXd gram = outputs.transpose() * outputs;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw numerical_error("Gram eigendecomposition failed");

  // Eigen returns ascending order; flip and clamp numerical negatives.
  Eigen::VectorXd lambdas(m);
  Eigen::MatrixXd vectors(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    lambdas[k] = std::max(0.0, solver.eigenvalues()[m - 1 - k]);
    vectors.col(k) = solver.eigenvectors().col(m - 1 - k);
  }
  if (!(lambdas[0] > 0.0)) throw std::invalid_argument("snapshot matrix is identically zero");

  Eigen::Index numerical_rank = 0;
  while (numerical_rank < m && lambdas[numerical_rank] > 1e-12 * lambdas[0]) ++numerical_rank;

  const TruncationChoice choice = truncate_by_energy(lambdas, energy_threshold);
  const Eigen::Index kept = std::min(choice.rank, numerical_rank);

  PodBasis basis;
  basis.eigenvalues = lambdas;
  basis.modes.resize(outputs.rows(), kept);
  for (Eigen::Index k = 0; k < kept; ++k)
    basis.modes.col(k) = outputs * vectors.col(k) / std::sqrt(lambdas[k]);

  // Two-pass modified Gram-Schmidt keeps the columns orthonormal even when
  // trailing eigenvalues sit near the numerical-rank cutoff.
  for (int pass = 0; pass < 2; ++pass)
    for (Eigen::Index k = 0; k < kept; ++k) {
      for (Eigen::Index j = 0; j < k; ++j)
        basis.modes.col(k) -= basis.modes.col(j).dot(basis.modes.col(k)) * basis.modes.col(j);
      const double norm = basis.modes.col(k).norm();
      if (!(norm > 0.0)) throw numerical_error("POD mode collapsed during orthonormalization");
      basis.modes.col(k) /= norm;
    }

  basis.energy_retained = lambdas.head(kept).sum() / lambdas.sum();
  return basis;
}

Eigen::MatrixXd amplitudes(const PodBasis& basis, const Eigen::MatrixXd& outputs) {
  if (outputs.rows() != basis.modes.rows())
    throw std::invalid_argument("output length does not match the basis");
  return basis.modes.transpose() * outputs;
}

double rbf_eval(RbfKernel kernel, double distance, double shape) {
  if (distance < 0.0) throw std::invalid_argument("distance must be nonnegative");
  switch (kernel) {
    case RbfKernel::linear_spline: return distance;
    case RbfKernel::cubic_spline: return distance * distance * distance;
    case RbfKernel::multiquadric:
      return std::sqrt(1.0 + distance * distance / (shape * shape));
    case RbfKernel::gaussian: return std::exp(-distance / (shape * shape));
    case RbfKernel::inverse_multiquadric:
      return 1.0 / std::sqrt(distance * distance + shape * shape);
    case RbfKernel::gaussian_squared:
      return std::exp(-distance * distance / (shape * shape));
  }
  throw std::invalid_argument("unknown kernel");
}

namespace {

Eigen::MatrixXd normalize_inputs(const Eigen::MatrixXd& inputs, const ParamBounds& bounds) {
  Eigen::MatrixXd normalized(inputs.rows(), inputs.cols());
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    const double lo = bounds[static_cast<std::size_t>(i)][0];
    const double hi = bounds[static_cast<std::size_t>(i)][1];
    normalized.row(i) = (inputs.row(i).array() - lo) / (hi - lo);
  }
  return normalized;
}

Eigen::VectorXd kernel_vector(const SurrogateModel& model, const Eigen::VectorXd& normalized) {
  const Eigen::Index m = model.train_inputs.cols();
  Eigen::VectorXd values(m);
  for (Eigen::Index j = 0; j < m; ++j)
    values[j] =
        rbf_eval(model.kernel, (normalized - model.train_inputs.col(j)).norm(), model.shape);
  return values;
}

}  // namespace

std::uint64_t snapshot_hash(const SnapshotSet& snapshots) {
  std::uint64_t hash = fnv1a(snapshots.inputs.data(),
                             sizeof(double) * static_cast<std::size_t>(snapshots.inputs.size()));
  hash = fnv1a(snapshots.outputs.data(),
               sizeof(double) * static_cast<std::size_t>(snapshots.outputs.size()), hash);
  for (const auto& b : snapshots.bounds) hash = fnv1a(b.data(), sizeof(double) * 2, hash);
  return hash;
}

SurrogateModel train(const SnapshotSet& snapshots, RbfKernel kernel, double shape,
                     double energy_threshold) {
  snapshots.validate();
  if (kernel_uses_shape(kernel) && !(shape > 0.0))
    throw std::invalid_argument("shape parameter must be positive for this kernel");

  SurrogateModel model;
  model.kernel = kernel;
  model.shape = shape;
  model.bounds = snapshots.bounds;
  model.train_inputs = normalize_inputs(snapshots.inputs, snapshots.bounds);
  model.basis = pod_reduce(snapshots.outputs, energy_threshold);
  model.train_hash = snapshot_hash(snapshots);

  const Eigen::Index m = snapshots.count();
  Eigen::MatrixXd interp(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      interp(i, j) = rbf_eval(
          kernel, (model.train_inputs.col(i) - model.train_inputs.col(j)).norm(), shape);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(interp);
  const double rcond = lu.rcond();
  model.condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(model.condition < 1e14))
    throw numerical_error("interpolation matrix condition ~" + format_double(model.condition) +
                          "; adjust the shape parameter c_j");

  const Eigen::MatrixXd amp = amplitudes(model.basis, snapshots.outputs);
  // B F = A with symmetric F; two refinement sweeps sharpen the solve so the
  // training points reproduce at machine precision.
  Eigen::MatrixXd bt = lu.solve(amp.transpose());
  for (int sweep = 0; sweep < 2; ++sweep)
    bt += lu.solve(amp.transpose() - interp * bt);
  model.coeffs = bt.transpose();
  return model;
}

Prediction predict(const SurrogateModel& model, const Eigen::VectorXd& parameters) {
  if (parameters.size() != model.dimension())
    throw std::invalid_argument("parameter dimension does not match the model");
  Eigen::VectorXd normalized(parameters.size());
  bool outside = false;
  for (Eigen::Index i = 0; i < parameters.size(); ++i) {
    const double lo = model.bounds[static_cast<std::size_t>(i)][0];
    const double hi = model.bounds[static_cast<std::size_t>(i)][1];
    normalized[i] = (parameters[i] - lo) / (hi - lo);
    if (normalized[i] < -1e-12 || normalized[i] > 1.0 + 1e-12) outside = true;
  }
  Prediction out;
  out.extrapolated = outside;
  out.values = model.basis.modes * (model.coeffs * kernel_vector(model, normalized));
  return out;
}

SnapshotSet add_noise(const SnapshotSet& snapshots, double level, std::uint64_t seed) {
  if (level < 0.0) throw std::invalid_argument("noise level must be nonnegative");
  SnapshotSet noisy = snapshots;
  Rng rng(seed);
  for (Eigen::Index j = 0; j < noisy.outputs.cols(); ++j)
    for (Eigen::Index i = 0; i < noisy.outputs.rows(); ++i)
      noisy.outputs(i, j) *= 1.0 + level * (2.0 * rng.uniform() - 1.0);
  return noisy;
}

ValidationReport validation_report(const SurrogateModel& model,
                                   const Eigen::MatrixXd& holdout_inputs,
                                   const Eigen::MatrixXd& holdout_outputs) {
  if (holdout_inputs.cols() != holdout_outputs.cols())
    throw std::invalid_argument("holdout input/output column counts differ");
  if (holdout_inputs.rows() != model.dimension() ||
      holdout_outputs.rows() != model.output_size())
    throw std::invalid_argument("holdout dimensions do not match the model");
  ValidationReport report;
  report.per_point.resize(holdout_inputs.cols());
  for (Eigen::Index j = 0; j < holdout_inputs.cols(); ++j) {
    const Eigen::VectorXd predicted = predict(model, holdout_inputs.col(j)).values;
    const double denom = std::max(holdout_outputs.col(j).norm(), 1e-300);
    report.per_point[j] = (predicted - holdout_outputs.col(j)).norm() / denom;
  }
  report.mean_error = report.per_point.mean();
  report.worst_error = report.per_point.maxCoeff();
  return report;
}

namespace {

void write_matrix(std::string& text, const char* tag, const Eigen::MatrixXd& matrix) {
  text += tag;
  text += " " + std::to_string(matrix.rows()) + " " + std::to_string(matrix.cols()) + "\n";
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j) text += " ";
      text += format_double(matrix(i, j));
    }
    text += "\n";
  }
}

Eigen::MatrixXd read_matrix(std::istream& in, const std::string& tag) {
  std::string word;
  in >> word;
  if (word != tag) throw io_error("surrogate file: expected '" + tag + "', got '" + word + "'");
  Eigen::Index rows = 0, cols = 0;
  in >> rows >> cols;
  Eigen::MatrixXd matrix(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (!(in >> matrix(i, j))) throw io_error("surrogate file: truncated matrix " + tag);
  return matrix;
}

}  // namespace

void save_surrogate(const SurrogateModel& model, const std::string& path,
                    const std::vector<std::string>& comments) {
  std::string text;
  for (const auto& c : comments) text += "# " + c + "\n";
  text += "creepfit-surrogate 1\n";
  text += "kernel " + kernel_name(model.kernel) + "\n";
  text += "shape " + format_double(model.shape) + "\n";
  text += "energy " + format_double(model.basis.energy_retained) + "\n";
  text += "condition " + format_double(model.condition) + "\n";
  text += "train_hash " + hash_hex(model.train_hash) + "\n";
  text += "bounds " + std::to_string(model.bounds.size()) + "\n";
  for (const auto& [lo, hi] : model.bounds)
    text += format_double(lo) + " " + format_double(hi) + "\n";
  Eigen::MatrixXd lambdas = model.basis.eigenvalues;
  write_matrix(text, "eigenvalues", lambdas);
  write_matrix(text, "modes", model.basis.modes);
  write_matrix(text, "coeffs", model.coeffs);
  write_matrix(text, "train_inputs", model.train_inputs);
  atomic_write_text(path, text);
}

SurrogateModel load_surrogate(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw missing_artifact_error("surrogate file does not exist: " + path);
  std::string text = read_text_file(path);
  while (!text.empty() && text[0] == '#') {
    const auto eol = text.find('\n');
    text = eol == std::string::npos ? "" : text.substr(eol + 1);
  }
  std::istringstream in(text);
  std::string word;
  int version = 0;
  in >> word >> version;
  if (word != "creepfit-surrogate" || version != 1)
    throw io_error(path + ": not a version-1 surrogate artifact");
  SurrogateModel model;
  std::string kernel;
  in >> word >> kernel;
  if (word != "kernel") throw io_error(path + ": malformed kernel field");
  model.kernel = kernel_from_name(kernel);
  in >> word >> model.shape;
  if (word != "shape") throw io_error(path + ": malformed shape field");
  in >> word >> model.basis.energy_retained;
  if (word != "energy") throw io_error(path + ": malformed energy field");
  in >> word >> model.condition;
  if (word != "condition") throw io_error(path + ": malformed condition field");
  std::string hash;
  in >> word >> hash;
  if (word != "train_hash") throw io_error(path + ": malformed train_hash field");
  model.train_hash = std::stoull(hash, nullptr, 16);
  std::size_t dims = 0;
  in >> word >> dims;
  if (word != "bounds") throw io_error(path + ": malformed bounds field");
  model.bounds.resize(dims);
  for (auto& [lo, hi] : model.bounds)
    if (!(in >> lo >> hi)) throw io_error(path + ": truncated bounds");
  model.basis.eigenvalues = read_matrix(in, "eigenvalues");
  model.basis.modes = read_matrix(in, "modes");
  model.coeffs = read_matrix(in, "coeffs");
  model.train_inputs = read_matrix(in, "train_inputs");
  if (model.coeffs.rows() != model.basis.modes.cols() ||
      model.coeffs.cols() != model.train_inputs.cols() ||
      static_cast<Eigen::Index>(model.bounds.size()) != model.train_inputs.rows())
    throw io_error(path + ": inconsistent artifact dimensions");
  return model;
}

}  // namespace creepfit
