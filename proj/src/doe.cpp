// SPDX-License-Identifier: Apache-2.0

#include "creepfit/doe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "creepfit/stats.hpp"

namespace creepfit {

OrthogonalArray orthogonal_array(ArrayKind kind) {
  OrthogonalArray array;
  if (kind == ArrayKind::l16_modified) {
    // Three four-level factors in sixteen runs (a Graeco-Latin square).
    array.name = "L16_modified";
    array.assignments.resize(16, 3);
    constexpr int table[16][3] = {
        {1, 1, 1}, {1, 2, 2}, {1, 3, 3}, {1, 4, 4}, {2, 1, 2}, {2, 2, 1}, {2, 3, 4}, {2, 4, 3},
        {3, 1, 3}, {3, 2, 4}, {3, 3, 1}, {3, 4, 2}, {4, 1, 4}, {4, 2, 3}, {4, 3, 2}, {4, 4, 1}};
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 3; ++j) array.assignments(i, j) = table[i][j];
    return array;
  }
  if (kind == ArrayKind::l27) {
    // Six three-level factors in twenty-seven runs.
    array.name = "L27";
    array.assignments.resize(27, 6);
    constexpr int table[27][6] = {
        {1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 2, 2}, {1, 1, 1, 1, 3, 3}, {1, 2, 2, 2, 1, 1},
        {1, 2, 2, 2, 2, 2}, {1, 2, 2, 2, 3, 3}, {1, 3, 3, 3, 1, 1}, {1, 3, 3, 3, 2, 2},
        {1, 3, 3, 3, 3, 3}, {2, 1, 2, 3, 1, 2}, {2, 1, 2, 3, 2, 3}, {2, 1, 2, 3, 3, 1},
        {2, 2, 3, 1, 1, 2}, {2, 2, 3, 1, 2, 3}, {2, 2, 3, 1, 3, 1}, {2, 3, 1, 2, 1, 2},
        {2, 3, 1, 2, 2, 3}, {2, 3, 1, 2, 3, 1}, {3, 1, 3, 2, 1, 3}, {3, 1, 3, 2, 2, 1},
        {3, 1, 3, 2, 3, 2}, {3, 2, 1, 3, 1, 3}, {3, 2, 1, 3, 2, 1}, {3, 2, 1, 3, 3, 2},
        {3, 3, 2, 1, 1, 3}, {3, 3, 2, 1, 2, 1}, {3, 3, 2, 1, 3, 2}};
    for (int i = 0; i < 27; ++i)
      for (int j = 0; j < 6; ++j) array.assignments(i, j) = table[i][j];
    return array;
  }
  throw std::invalid_argument("unsupported orthogonal array; supported: L16_modified, L27");
}

bool is_balanced(const OrthogonalArray& array) {
  for (Eigen::Index j = 0; j < array.factors(); ++j) {
    std::map<int, int> counts;
    for (Eigen::Index i = 0; i < array.runs(); ++i) ++counts[array.assignments(i, j)];
    for (const auto& [level, count] : counts)
      if (count != static_cast<int>(array.runs()) / static_cast<int>(counts.size())) return false;
    if (array.runs() % static_cast<Eigen::Index>(counts.size()) != 0) return false;
  }
  return true;
}

bool is_orthogonal(const OrthogonalArray& array) {
  for (Eigen::Index a = 0; a < array.factors(); ++a)
    for (Eigen::Index b = a + 1; b < array.factors(); ++b) {
      std::map<std::pair<int, int>, int> counts;
      std::set<int> levels_a, levels_b;
      for (Eigen::Index i = 0; i < array.runs(); ++i) {
        counts[{array.assignments(i, a), array.assignments(i, b)}]++;
        levels_a.insert(array.assignments(i, a));
        levels_b.insert(array.assignments(i, b));
      }
      const std::size_t pairs = levels_a.size() * levels_b.size();
      if (counts.size() != pairs) return false;
      const int expected = static_cast<int>(array.runs() / static_cast<Eigen::Index>(pairs));
      for (const auto& [pair, count] : counts)
        if (count != expected) return false;
    }
  return true;
}

void validate_levels(const FactorLevels& levels) {
  if (levels.empty()) throw std::invalid_argument("no factors given");
  for (const auto& f : levels) {
    if (f.levels.size() < 2)
      throw std::invalid_argument("factor '" + f.name + "' needs at least two levels");
    for (std::size_t i = 1; i < f.levels.size(); ++i)
      if (!(f.levels[i] > f.levels[i - 1]))
        throw std::invalid_argument("levels of '" + f.name + "' must be strictly increasing");
  }
}

int degrees_of_freedom(const std::vector<int>& levels_per_factor,
                       const std::vector<std::pair<int, int>>& interactions) {
  int dof = 0;
  for (int k : levels_per_factor) {
    if (k < 2) throw std::invalid_argument("a factor needs at least two levels");
    dof += k - 1;
  }
  for (const auto& [a, b] : interactions) {
    const auto na = static_cast<std::size_t>(a);
    const auto nb = static_cast<std::size_t>(b);
    if (na >= levels_per_factor.size() || nb >= levels_per_factor.size())
      throw std::invalid_argument("interaction references an unknown factor");
    dof += (levels_per_factor[na] - 1) * (levels_per_factor[nb] - 1);
  }
  return dof;
}

std::vector<Eigen::VectorXd> design_points(const OrthogonalArray& array,
                                           const FactorLevels& levels) {
  validate_levels(levels);
  if (static_cast<Eigen::Index>(levels.size()) != array.factors())
    throw std::invalid_argument("factor count does not match the array");
  std::vector<Eigen::VectorXd> points;
  points.reserve(static_cast<std::size_t>(array.runs()));
  for (Eigen::Index i = 0; i < array.runs(); ++i) {
    Eigen::VectorXd p(array.factors());
    for (Eigen::Index j = 0; j < array.factors(); ++j) {
      const int level = array.assignments(i, j);
      const auto& values = levels[static_cast<std::size_t>(j)].levels;
      if (level < 1 || static_cast<std::size_t>(level) > values.size())
        throw std::invalid_argument("array level outside the provided factor levels");
      p[j] = values[static_cast<std::size_t>(level - 1)];
    }
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<Eigen::VectorXd> full_factorial(const FactorLevels& levels) {
  if (levels.empty()) throw std::invalid_argument("no factors given");
  std::size_t total = 1;
  for (const auto& f : levels) {
    if (f.levels.empty()) throw std::invalid_argument("factor '" + f.name + "' has no levels");
    total *= f.levels.size();
  }
  std::vector<Eigen::VectorXd> points;
  points.reserve(total);
  const std::size_t dims = levels.size();
  std::vector<std::size_t> index(dims, 0);
  for (std::size_t run = 0; run < total; ++run) {
    Eigen::VectorXd p(static_cast<Eigen::Index>(dims));
    for (std::size_t j = 0; j < dims; ++j) p[static_cast<Eigen::Index>(j)] = levels[j].levels[index[j]];
    points.push_back(std::move(p));
    for (std::size_t j = dims; j-- > 0;) {  // last factor varies fastest
      if (++index[j] < levels[j].levels.size()) break;
      index[j] = 0;
    }
  }
  return points;
}

namespace {

void check_paired(const LDCurve& sim, const LDCurve& exp) {
  if (sim.size() != exp.size())
    throw std::invalid_argument("curves must share the load grid (sample counts differ)");
}

}  // namespace

double error_rms_relative(const LDCurve& sim, const LDCurve& exp) {
  check_paired(sim, exp);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < sim.size(); ++i) {
    if (exp.depth[i] == 0.0)
      throw std::invalid_argument("experimental depth is zero at sample " + std::to_string(i) +
                                  "; relative error undefined");
    const double rel = (sim.depth[i] - exp.depth[i]) / exp.depth[i];
    sum += rel * rel;
  }
  return std::sqrt(sum / static_cast<double>(sim.size()));
}

double error_mse(const LDCurve& sim, const LDCurve& exp) {
  check_paired(sim, exp);
  return error_mse(sim.depth, exp.depth);
}

double error_mse(const Eigen::VectorXd& sim_depth, const Eigen::VectorXd& exp_depth) {
  if (sim_depth.size() != exp_depth.size())
    throw std::invalid_argument("depth vectors must share the load grid");
  return (exp_depth - sim_depth).squaredNorm() / static_cast<double>(sim_depth.size());
}

AnovaTable anova_from_components(const std::vector<std::string>& names,
                                 const std::vector<int>& dfs, const std::vector<double>& ss,
                                 int error_df, double error_ss) {
  if (names.size() != dfs.size() || names.size() != ss.size())
    throw std::invalid_argument("mismatched ANOVA component lists");
  AnovaTable table;
  table.error_df = error_df;
  table.error_ss = error_ss;
  table.error_ms = error_df > 0 ? error_ss / error_df : 0.0;
  table.total_ss = error_ss;
  table.total_df = error_df;
  for (std::size_t i = 0; i < names.size(); ++i) {
    table.total_ss += ss[i];
    table.total_df += dfs[i];
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    AnovaRow row;
    row.source = names[i];
    row.df = dfs[i];
    row.adj_ss = ss[i];
    row.adj_ms = dfs[i] > 0 ? ss[i] / dfs[i] : 0.0;
    if (error_df > 0 && table.error_ms > 0.0) {
      row.f_value = row.adj_ms / table.error_ms;
      row.p_value = f_survival(*row.f_value, dfs[i], error_df);
    }
    row.pct_contribution = table.total_ss > 0.0 ? 100.0 * ss[i] / table.total_ss : 0.0;
    table.factors.push_back(std::move(row));
  }
  return table;
}

AnovaTable anova(const OrthogonalArray& design, const FactorLevels& levels,
                 const Eigen::VectorXd& responses) {
  validate_levels(levels);
  if (static_cast<Eigen::Index>(levels.size()) != design.factors())
    throw std::invalid_argument("factor count does not match the design");
  if (responses.size() != design.runs())
    throw std::invalid_argument("one response per run required");

  const double grand_mean = responses.mean();
  const double total_ss = (responses.array() - grand_mean).square().sum();

  std::vector<std::string> names;
  std::vector<int> dfs;
  std::vector<double> ss;
  double factor_ss_sum = 0.0;
  int factor_df_sum = 0;
  for (Eigen::Index j = 0; j < design.factors(); ++j) {
    const auto& factor = levels[static_cast<std::size_t>(j)];
    const int k = static_cast<int>(factor.levels.size());
    std::vector<double> level_sum(static_cast<std::size_t>(k), 0.0);
    std::vector<int> level_count(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < design.runs(); ++i) {
      const int level = design.assignments(i, j) - 1;
      level_sum[static_cast<std::size_t>(level)] += responses[i];
      level_count[static_cast<std::size_t>(level)]++;
    }
    double factor_ss = 0.0;
    for (int l = 0; l < k; ++l) {
      const auto idx = static_cast<std::size_t>(l);
      if (level_count[idx] == 0) throw std::invalid_argument("a design level is never exercised");
      const double mean = level_sum[idx] / level_count[idx];
      factor_ss += level_count[idx] * (mean - grand_mean) * (mean - grand_mean);
    }
    names.push_back(factor.name);
    dfs.push_back(k - 1);
    ss.push_back(factor_ss);
    factor_ss_sum += factor_ss;
    factor_df_sum += k - 1;
  }

  const int error_df = static_cast<int>(design.runs()) - 1 - factor_df_sum;
  const double error_ss = std::max(0.0, total_ss - factor_ss_sum);
  return anova_from_components(names, dfs, ss, error_df, error_ss);
}

std::string AnovaTable::render() const {
  char line[160];
  std::string text;
  std::snprintf(line, sizeof(line), "%-12s %4s %14s %14s %9s %8s %8s\n", "Source", "DF", "Adj SS",
                "Adj MS", "F-Value", "P-Value", "% Contr.");
  text += line;
  const auto row_text = [&](const std::string& source, int df, double ss_value, double ms,
                            const std::optional<double>& f, const std::optional<double>& p,
                            const std::optional<double>& pct) {
    std::string f_txt = f ? [&] { char b[32]; std::snprintf(b, sizeof(b), "%9.2f", *f); return std::string(b); }()
                          : std::string(9, ' ');
    std::string p_txt = p ? [&] { char b[32]; std::snprintf(b, sizeof(b), "%8.3f", *p); return std::string(b); }()
                          : std::string(8, ' ');
    std::string pct_txt = pct ? [&] { char b[32]; std::snprintf(b, sizeof(b), "%8.2f", *pct); return std::string(b); }()
                              : std::string(8, ' ');
    char buffer[160];
    std::snprintf(buffer, sizeof(buffer), "%-12s %4d %14.6g %14.6g %s %s %s\n", source.c_str(), df,
                  ss_value, ms, f_txt.c_str(), p_txt.c_str(), pct_txt.c_str());
    text += buffer;
  };
  for (const auto& r : factors)
    row_text(r.source, r.df, r.adj_ss, r.adj_ms, r.f_value, r.p_value, r.pct_contribution);
  row_text("Error", error_df, error_ss, error_ms, std::nullopt, std::nullopt, std::nullopt);
  char total_line[160];
  std::snprintf(total_line, sizeof(total_line), "%-12s %4d %14.6g\n", "Total", total_df, total_ss);
  text += total_line;
  return text;
}

std::vector<SensitivityDelta> extreme_sensitivity(
    const std::vector<std::string>& names, const std::vector<std::array<double, 2>>& bounds,
    const Eigen::VectorXd& baseline,
    const std::function<LDCurve(const Eigen::VectorXd&)>& forward) {
  if (names.size() != bounds.size() ||
      static_cast<Eigen::Index>(names.size()) != baseline.size())
    throw std::invalid_argument("names, bounds and baseline must have one entry per parameter");
  for (std::size_t i = 0; i < bounds.size(); ++i)
    if (baseline[static_cast<Eigen::Index>(i)] < bounds[i][0] ||
        baseline[static_cast<Eigen::Index>(i)] > bounds[i][1])
      throw std::invalid_argument("baseline leaves the bounds for '" + names[i] + "'");

  std::vector<SensitivityDelta> deltas;
  for (std::size_t i = 0; i < names.size(); ++i) {
    Eigen::VectorXd low = baseline;
    Eigen::VectorXd high = baseline;
    low[static_cast<Eigen::Index>(i)] = bounds[i][0];
    high[static_cast<Eigen::Index>(i)] = bounds[i][1];
    const LDCurve curve_low = forward(low);
    const LDCurve curve_high = forward(high);
    SensitivityDelta d;
    d.parameter = names[i];
    d.max_depth_delta = peak_depth(curve_high) - peak_depth(curve_low);
    d.residual_depth_delta = residual_depth(curve_high) - residual_depth(curve_low);
    deltas.push_back(std::move(d));
  }
  return deltas;
}

}  // namespace creepfit
