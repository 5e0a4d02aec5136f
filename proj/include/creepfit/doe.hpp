// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "creepfit/contact.hpp"

namespace creepfit {

enum class ArrayKind { l16_modified, l27 };

/// Orthogonal-array design: rows are runs, columns are factors, entries are
/// 1-based level indices.
struct OrthogonalArray {
  std::string name;
  Eigen::MatrixXi assignments;

  Eigen::Index runs() const { return assignments.rows(); }
  Eigen::Index factors() const { return assignments.cols(); }
};

/// The published assignment tables, stored verbatim.
OrthogonalArray orthogonal_array(ArrayKind kind);

/// Every level appears equally often in each column.
bool is_balanced(const OrthogonalArray& array);

/// Every ordered level pair appears equally often in each column pair.
bool is_orthogonal(const OrthogonalArray& array);

struct Factor {
  std::string name;
  std::vector<double> levels;  // strictly increasing, at least two
};

using FactorLevels = std::vector<Factor>;

void validate_levels(const FactorLevels& levels);

/// Experiment degrees of freedom: sum of (levels - 1) plus interaction terms
/// (k_i - 1)(k_j - 1) for each listed factor pair.
int degrees_of_freedom(const std::vector<int>& levels_per_factor,
                       const std::vector<std::pair<int, int>>& interactions = {});

/// Substitute level values into a design; one parameter vector per run.
std::vector<Eigen::VectorXd> design_points(const OrthogonalArray& array,
                                           const FactorLevels& levels);

/// Cartesian product with the last factor varying fastest.
std::vector<Eigen::VectorXd> full_factorial(const FactorLevels& levels);

/// delta = sqrt( (1/n) sum ((h_sim - h_exp)/h_exp)^2 ). Curves must share a
/// load grid; a zero experimental depth sample is rejected.
double error_rms_relative(const LDCurve& sim, const LDCurve& exp);

/// delta = (1/n) sum (h_exp - h_sim)^2, in nm^2.
double error_mse(const LDCurve& sim, const LDCurve& exp);
double error_mse(const Eigen::VectorXd& sim_depth, const Eigen::VectorXd& exp_depth);

struct AnovaRow {
  std::string source;
  int df = 0;
  double adj_ss = 0.0;
  double adj_ms = 0.0;
  std::optional<double> f_value;
  std::optional<double> p_value;
  double pct_contribution = 0.0;
};

struct AnovaTable {
  std::vector<AnovaRow> factors;
  int error_df = 0;
  double error_ss = 0.0;
  double error_ms = 0.0;
  int total_df = 0;
  double total_ss = 0.0;

  std::string render() const;  // aligned text table
};

/// Main-effects ANOVA of an orthogonal-array experiment. With zero error
/// degrees of freedom (saturated design) F and P are left unset while the
/// percentage contributions are still reported.
AnovaTable anova(const OrthogonalArray& design, const FactorLevels& levels,
                 const Eigen::VectorXd& responses);

/// Derived columns (MS, F, P, % contribution) from given sums of squares
/// and degrees of freedom; also the arithmetic core of anova().
AnovaTable anova_from_components(const std::vector<std::string>& names,
                                 const std::vector<int>& dfs, const std::vector<double>& ss,
                                 int error_df, double error_ss);

struct SensitivityDelta {
  std::string parameter;
  double max_depth_delta = 0.0;       // nm
  double residual_depth_delta = 0.0;  // nm
};

/// One-at-a-time extremes: run the forward model at each parameter's bounds
/// while holding the others at the baseline, and report the change in the
/// curve's peak and residual depths.
std::vector<SensitivityDelta> extreme_sensitivity(
    const std::vector<std::string>& names, const std::vector<std::array<double, 2>>& bounds,
    const Eigen::VectorXd& baseline,
    const std::function<LDCurve(const Eigen::VectorXd&)>& forward);

}  // namespace creepfit
