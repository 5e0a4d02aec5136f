// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "creepfit/calibration.hpp"
#include "creepfit/contact.hpp"
#include "creepfit/doe.hpp"
#include "creepfit/surrogate.hpp"

namespace creepfit {

/// Canonical material-constant names used in config files and reports.
const std::vector<std::string>& parameter_names();

double get_material_parameter(const MaterialParams& params, const std::string& name);
void set_material_parameter(MaterialParams& params, const std::string& name, double value);
MaterialParams apply_parameters(MaterialParams base, const std::vector<std::string>& names,
                                const Eigen::VectorXd& values);

struct ConditionSpec {
  std::string name;
  LoadSchedule schedule;
};

/// Everything a study pipeline needs: material baseline, parameter spaces,
/// surrogate and GA settings, and the experimental conditions.
struct StudyConfig {
  std::uint64_t seed = 0;
  int threads = 1;

  MaterialParams material;  // baseline / simulate parameters

  double half_angle_deg = 70.3;
  double max_step = 0.0;  // forward integrator step cap; 0 = auto

  std::vector<std::string> bound_names;
  ParamBounds bounds;

  std::string sensitivity_array = "L27";
  std::string sensitivity_error = "mse";  // or rms_relative
  FactorLevels sensitivity_levels;

  FactorLevels train_levels;  // single-level factors are held fixed

  RbfKernel kernel = RbfKernel::multiquadric;
  double shape = 0.5;
  double energy_threshold = 0.999;

  GaConfig ga;

  std::vector<ConditionSpec> conditions;

  void validate() const;
};

StudyConfig default_study_config();
StudyConfig parse_study_config(const std::string& text);
StudyConfig load_study_config(const std::string& path);
std::string dump_study_config(const StudyConfig& config);
std::uint64_t study_config_hash(const StudyConfig& config);

/// Train-grid factors with more than one level; these are the surrogate and
/// calibration dimensions, in train-grid order.
std::vector<std::string> varying_train_names(const StudyConfig& config);
ParamBounds bounds_for(const StudyConfig& config, const std::vector<std::string>& names);

/// Representative-point scales frozen from the baseline material, per
/// condition peak load.
ForwardConfig condition_forward_config(const StudyConfig& config, const LoadSchedule& schedule);
LDCurve condition_curve(const StudyConfig& config, const MaterialParams& params,
                        const ConditionSpec& condition);

SnapshotSet condition_snapshots(const StudyConfig& config, const ConditionSpec& condition,
                                int threads);
SurrogateModel train_condition(const StudyConfig& config, const SnapshotSet& snapshots);

// Command pipelines. All writers stamp outputs with the config hash.
void run_simulate(const StudyConfig& config, const std::string& out_dir);

void run_sensitivity(const StudyConfig& config, const std::string& out_dir);

struct SweepSpec {
  double lo = 0.5;
  double hi = 1.5;
  int count = 5;
};
void run_train(const StudyConfig& config, const std::string& out_dir,
               const std::optional<SweepSpec>& shape_sweep = std::nullopt);

struct CalibrateOutcome {
  std::vector<std::string> names;  // calibrated parameter names
  GaResult ga;
  std::vector<std::string> condition_names;
  std::vector<FitMetrics> surrogate_metrics;  // surrogate(best) vs experiment
  std::vector<FitMetrics> forward_metrics;    // forward(best) vs experiment
};
CalibrateOutcome run_calibrate(const StudyConfig& config,
                               const std::vector<std::string>& experiment_files,
                               const std::string& surrogate_dir, const std::string& out_dir);

struct AnalyzeOutcome {
  OliverPharrResult result;
  std::optional<double> corrected_stiffness;  // with --ngan
  std::optional<double> depth_rate;           // dh/dt at end of hold
  std::optional<double> unload_rate;          // |dP/dt| at start of unload
};
AnalyzeOutcome run_analyze(const std::string& curve_file, const AreaFunction& area,
                           const AnalysisOptions& options, bool ngan);

}  // namespace creepfit
