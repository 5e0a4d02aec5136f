// SPDX-License-Identifier: Apache-2.0

#include "creepfit/study.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "creepfit/config.hpp"
#include "creepfit/io.hpp"
#include "creepfit/parallel.hpp"

namespace creepfit {

const std::vector<std::string>& parameter_names() {
  static const std::vector<std::string> names = {"E", "nu", "C_s", "m_s", "C_t", "m_t", "t_eps"};
  return names;
}

double get_material_parameter(const MaterialParams& params, const std::string& name) {
  if (name == "E") return params.modulus;
  if (name == "nu") return params.poisson;
  if (name == "C_s") return params.steady_coeff;
  if (name == "m_s") return params.steady_exp;
  if (name == "C_t") return params.branches.front().coeff;
  if (name == "m_t") return params.branches.front().exponent;
  if (name == "t_eps") return params.branches.front().retard_time;
  throw std::invalid_argument("unknown material parameter '" + name + "'");
}

void set_material_parameter(MaterialParams& params, const std::string& name, double value) {
  if (params.branches.empty()) params.branches.resize(1);
  if (name == "E")
    params.modulus = value;
  else if (name == "nu")
    params.poisson = value;
  else if (name == "C_s")
    params.steady_coeff = value;
  else if (name == "m_s")
    params.steady_exp = value;
  else if (name == "C_t")
    params.branches.front().coeff = value;
  else if (name == "m_t")
    params.branches.front().exponent = value;
  else if (name == "t_eps")
    params.branches.front().retard_time = value;
  else
    throw std::invalid_argument("unknown material parameter '" + name + "'");
}

MaterialParams apply_parameters(MaterialParams base, const std::vector<std::string>& names,
                                const Eigen::VectorXd& values) {
  if (static_cast<Eigen::Index>(names.size()) != values.size())
    throw std::invalid_argument("parameter name/value count mismatch");
  for (std::size_t i = 0; i < names.size(); ++i)
    set_material_parameter(base, names[i], values[static_cast<Eigen::Index>(i)]);
  return base;
}

void StudyConfig::validate() const {
  material.validate();
  if (conditions.empty()) throw std::invalid_argument("config defines no conditions");
  for (const auto& c : conditions) c.schedule.validate();
  if (bound_names.size() != bounds.size())
    throw std::invalid_argument("bounds and bound names differ in length");
  for (const auto& [lo, hi] : bounds)
    if (!(lo < hi)) throw std::invalid_argument("bounds must satisfy lo < hi");
  if (!(shape > 0.0) && kernel_uses_shape(kernel))
    throw std::invalid_argument("shape parameter must be positive");
  if (!(energy_threshold > 0.0 && energy_threshold <= 1.0))
    throw std::invalid_argument("energy threshold must lie in (0, 1]");
  ga.validate();
}

StudyConfig default_study_config() {
  StudyConfig cfg;
  cfg.seed = 1;
  cfg.threads = 1;
  cfg.material = MaterialParams::burgers(3.28, 0.34, 0.09, 0.20, 0.24, 0.47, 0.25);
  cfg.half_angle_deg = 70.3;

  cfg.bound_names = {"E", "C_s", "m_s", "C_t", "m_t", "t_eps"};
  cfg.bounds = {{3.0, 3.5}, {0.02, 0.1}, {0.15, 0.35}, {0.15, 0.35}, {0.2, 0.8}, {0.1, 0.4}};

  cfg.sensitivity_levels = {
      {"E", {3.0, 3.25, 3.5}},      {"C_s", {0.02, 0.06, 0.1}},  {"m_s", {0.15, 0.25, 0.35}},
      {"C_t", {0.15, 0.25, 0.35}},  {"m_t", {0.2, 0.5, 0.8}},    {"t_eps", {0.1, 0.25, 0.4}}};

  cfg.train_levels = {{"E", {3.0, 3.25, 3.5}},
                      {"C_s", {0.02, 0.045, 0.07, 0.1}},
                      {"m_s", {0.15, 0.15 + 0.2 / 3.0, 0.15 + 0.4 / 3.0, 0.35}},
                      {"C_t", {0.15, 0.25, 0.35}},
                      {"m_t", {0.2, 0.8}},
                      {"t_eps", {0.25}}};

  cfg.kernel = RbfKernel::multiquadric;
  cfg.shape = 0.5;
  // Keep enough modes that the steady-creep pair (C_s, m_s) stays
  // identifiable; at 99.9% the 288-point spectra collapse to one or two
  // modes and the pair degenerates.
  cfg.energy_threshold = 0.99999;

  cfg.ga.rng_seed = 1;

  const auto condition = [](std::string name, double ramp) {
    ConditionSpec spec;
    spec.name = std::move(name);
    spec.schedule.profile = LoadProfile::triangular;
    spec.schedule.peak_load = 1.0;
    spec.schedule.load_time = ramp;
    spec.schedule.hold_time = 0.0;
    spec.schedule.unload_time = ramp;
    spec.schedule.sample_count = 100;
    return spec;
  };
  cfg.conditions = {condition("t30", 30.0), condition("t45", 45.0), condition("t60", 60.0),
                    condition("t240", 240.0)};
  return cfg;
}

namespace {

FactorLevels parse_factor_section(const IniFile& ini, const std::string& section) {
  FactorLevels levels;
  for (const auto& key : ini.keys(section)) {
    Factor f;
    f.name = key;
    f.levels = ini.get_doubles(section, key);
    levels.push_back(std::move(f));
  }
  return levels;
}

LoadSchedule parse_schedule(const std::string& name, const std::string& value) {
  std::istringstream in(value);
  std::string profile;
  LoadSchedule s;
  int samples = 0;
  if (!(in >> profile >> s.peak_load >> s.load_time >> s.hold_time >> s.unload_time >> samples))
    throw io_error("condition '" + name +
                   "': expected 'profile P_max t_load t_hold t_unload n_samples'");
  s.sample_count = samples;
  if (profile == "triangular")
    s.profile = LoadProfile::triangular;
  else if (profile == "trapezoidal")
    s.profile = LoadProfile::trapezoidal;
  else
    throw io_error("condition '" + name + "': unknown profile '" + profile + "'");
  return s;
}

std::string schedule_text(const LoadSchedule& s) {
  std::string text = s.profile == LoadProfile::triangular ? "triangular" : "trapezoidal";
  text += " " + format_double(s.peak_load) + " " + format_double(s.load_time) + " " +
          format_double(s.hold_time) + " " + format_double(s.unload_time) + " " +
          std::to_string(s.sample_count);
  return text;
}

}  // namespace

StudyConfig parse_study_config(const std::string& text) {
  const IniFile ini = IniFile::parse(text);
  StudyConfig cfg = default_study_config();

  if (!ini.get("study", "seed"))
    throw io_error("config: [study] seed is required; randomized stages never default it");
  cfg.seed = ini.get_uint("study", "seed");
  cfg.threads = ini.get_or("study", "threads", cfg.threads);

  for (const auto& name : parameter_names())
    if (ini.get("material", name))
      set_material_parameter(cfg.material, name, ini.get_double("material", name));

  cfg.half_angle_deg = ini.get_or("forward", "half_angle_deg", cfg.half_angle_deg);
  cfg.max_step = ini.get_or("forward", "max_step", cfg.max_step);

  if (ini.has_section("bounds")) {
    cfg.bound_names.clear();
    cfg.bounds.clear();
    for (const auto& key : ini.keys("bounds")) {
      const auto values = ini.get_doubles("bounds", key);
      if (values.size() != 2 || !(values[0] < values[1]))
        throw io_error("config: [bounds] " + key + " must be 'lo hi' with lo < hi");
      cfg.bound_names.push_back(key);
      cfg.bounds.push_back({values[0], values[1]});
    }
  }

  if (ini.has_section("sensitivity")) {
    cfg.sensitivity_array = ini.get_or("sensitivity", "array", cfg.sensitivity_array);
    cfg.sensitivity_error = ini.get_or("sensitivity", "error", cfg.sensitivity_error);
    FactorLevels levels;
    for (const auto& key : ini.keys("sensitivity")) {
      if (key == "array" || key == "error") continue;
      levels.push_back({key, ini.get_doubles("sensitivity", key)});
    }
    if (!levels.empty()) cfg.sensitivity_levels = std::move(levels);
  }
  if (cfg.sensitivity_error != "mse" && cfg.sensitivity_error != "rms_relative")
    throw io_error("config: [sensitivity] error must be mse or rms_relative");

  if (ini.has_section("train")) cfg.train_levels = parse_factor_section(ini, "train");

  cfg.kernel = kernel_from_name(ini.get_or("surrogate", "kernel", kernel_name(cfg.kernel)));
  if (cfg.kernel == RbfKernel::gaussian && ini.get_or("surrogate", "gs_squared", false))
    cfg.kernel = RbfKernel::gaussian_squared;
  cfg.shape = ini.get_or("surrogate", "cj", cfg.shape);
  cfg.energy_threshold = ini.get_or("surrogate", "energy", cfg.energy_threshold);

  cfg.ga.population = ini.get_or("ga", "population", cfg.ga.population);
  cfg.ga.tournament_size = ini.get_or("ga", "tournament", cfg.ga.tournament_size);
  cfg.ga.crossover_fraction = ini.get_or("ga", "crossover_fraction", cfg.ga.crossover_fraction);
  cfg.ga.crossover_ratio = ini.get_or("ga", "crossover_ratio", cfg.ga.crossover_ratio);
  cfg.ga.mutation_scale = ini.get_or("ga", "mutation_scale", cfg.ga.mutation_scale);
  cfg.ga.mutation_shrink = ini.get_or("ga", "mutation_shrink", cfg.ga.mutation_shrink);
  cfg.ga.migration_fraction = ini.get_or("ga", "migration_fraction", cfg.ga.migration_fraction);
  cfg.ga.migration_interval = ini.get_or("ga", "migration_interval", cfg.ga.migration_interval);
  cfg.ga.subpopulations = ini.get_or("ga", "subpopulations", cfg.ga.subpopulations);
  cfg.ga.max_generations = ini.get_or("ga", "max_generations", cfg.ga.max_generations);
  cfg.ga.stall_generations = ini.get_or("ga", "stall_generations", cfg.ga.stall_generations);
  cfg.ga.fitness_tolerance = ini.get_or("ga", "fitness_tolerance", cfg.ga.fitness_tolerance);
  cfg.ga.rng_seed = cfg.seed;

  if (ini.has_section("conditions")) {
    cfg.conditions.clear();
    for (const auto& key : ini.keys("conditions"))
      cfg.conditions.push_back({key, parse_schedule(key, *ini.get("conditions", key))});
  }

  cfg.validate();
  return cfg;
}

StudyConfig load_study_config(const std::string& path) {
  if (!std::filesystem::exists(path)) throw io_error("config file does not exist: " + path);
  return parse_study_config(read_text_file(path));
}

std::string dump_study_config(const StudyConfig& cfg) {
  std::string text;
  text += "[study]\n";
  text += "seed = " + std::to_string(cfg.seed) + "\n";
  text += "threads = " + std::to_string(cfg.threads) + "\n\n";

  text += "[material]\n";
  for (const auto& name : parameter_names())
    text += name + " = " + format_double(get_material_parameter(cfg.material, name)) + "\n";
  text += "\n[forward]\n";
  text += "half_angle_deg = " + format_double(cfg.half_angle_deg) + "\n";
  text += "max_step = " + format_double(cfg.max_step) + "\n";

  text += "\n[bounds]\n";
  for (std::size_t i = 0; i < cfg.bound_names.size(); ++i)
    text += cfg.bound_names[i] + " = " + format_double(cfg.bounds[i][0]) + " " +
            format_double(cfg.bounds[i][1]) + "\n";

  text += "\n[sensitivity]\n";
  text += "array = " + cfg.sensitivity_array + "\n";
  text += "error = " + cfg.sensitivity_error + "\n";
  for (const auto& f : cfg.sensitivity_levels) {
    text += f.name + " =";
    for (double v : f.levels) text += " " + format_double(v);
    text += "\n";
  }

  text += "\n[train]\n";
  for (const auto& f : cfg.train_levels) {
    text += f.name + " =";
    for (double v : f.levels) text += " " + format_double(v);
    text += "\n";
  }

  text += "\n[surrogate]\n";
  const bool squared = cfg.kernel == RbfKernel::gaussian_squared;
  text += "kernel = " + (squared ? std::string("gs") : kernel_name(cfg.kernel)) + "\n";
  text += "gs_squared = " + std::string(squared ? "true" : "false") + "\n";
  text += "cj = " + format_double(cfg.shape) + "\n";
  text += "energy = " + format_double(cfg.energy_threshold) + "\n";

  text += "\n[ga]\n";
  text += "population = " + std::to_string(cfg.ga.population) + "\n";
  text += "tournament = " + std::to_string(cfg.ga.tournament_size) + "\n";
  text += "crossover_fraction = " + format_double(cfg.ga.crossover_fraction) + "\n";
  text += "crossover_ratio = " + format_double(cfg.ga.crossover_ratio) + "\n";
  text += "mutation_scale = " + format_double(cfg.ga.mutation_scale) + "\n";
  text += "mutation_shrink = " + format_double(cfg.ga.mutation_shrink) + "\n";
  text += "migration_fraction = " + format_double(cfg.ga.migration_fraction) + "\n";
  text += "migration_interval = " + std::to_string(cfg.ga.migration_interval) + "\n";
  text += "subpopulations = " + std::to_string(cfg.ga.subpopulations) + "\n";
  text += "max_generations = " + std::to_string(cfg.ga.max_generations) + "\n";
  text += "stall_generations = " + std::to_string(cfg.ga.stall_generations) + "\n";
  text += "fitness_tolerance = " + format_double(cfg.ga.fitness_tolerance) + "\n";

  text += "\n[conditions]\n";
  for (const auto& c : cfg.conditions) text += c.name + " = " + schedule_text(c.schedule) + "\n";
  return text;
}

std::uint64_t study_config_hash(const StudyConfig& cfg) {
  const std::string canonical = dump_study_config(cfg);
  return fnv1a(canonical.data(), canonical.size());
}

std::vector<std::string> varying_train_names(const StudyConfig& cfg) {
  std::vector<std::string> names;
  for (const auto& f : cfg.train_levels)
    if (f.levels.size() > 1) names.push_back(f.name);
  return names;
}

ParamBounds bounds_for(const StudyConfig& cfg, const std::vector<std::string>& names) {
  ParamBounds bounds;
  for (const auto& name : names) {
    const auto it = std::find(cfg.bound_names.begin(), cfg.bound_names.end(), name);
    if (it == cfg.bound_names.end())
      throw std::invalid_argument("no [bounds] entry for parameter '" + name + "'");
    bounds.push_back(cfg.bounds[static_cast<std::size_t>(it - cfg.bound_names.begin())]);
  }
  return bounds;
}

ForwardConfig condition_forward_config(const StudyConfig& cfg, const LoadSchedule& schedule) {
  ForwardConfig fwd = ForwardConfig::calibrated(cfg.material.modulus, cfg.material.poisson,
                                                schedule.peak_load, cfg.half_angle_deg);
  fwd.max_step = cfg.max_step;
  return fwd;
}

LDCurve condition_curve(const StudyConfig& cfg, const MaterialParams& params,
                        const ConditionSpec& condition) {
  return forward_indentation(params, condition.schedule,
                             condition_forward_config(cfg, condition.schedule));
}

SnapshotSet condition_snapshots(const StudyConfig& cfg, const ConditionSpec& condition,
                                int threads) {
  const auto names = varying_train_names(cfg);
  if (names.empty()) throw std::invalid_argument("train grid has no varying factors");

  // Full factorial over the varying factors; fixed factors come from their
  // single level (falling back to the baseline material).
  MaterialParams fixed = cfg.material;
  FactorLevels varying;
  for (const auto& f : cfg.train_levels) {
    if (f.levels.size() == 1)
      set_material_parameter(fixed, f.name, f.levels.front());
    else
      varying.push_back(f);
  }

  const auto points = full_factorial(varying);
  const ForwardConfig fwd = condition_forward_config(cfg, condition.schedule);
  const auto forward = [&](const Eigen::VectorXd& p) -> Eigen::VectorXd {
    const MaterialParams params = apply_parameters(fixed, names, p);
    return forward_indentation(params, condition.schedule, fwd).depth;
  };
  return build_snapshots(points, forward, bounds_for(cfg, names), threads);
}

SurrogateModel train_condition(const StudyConfig& cfg, const SnapshotSet& snapshots) {
  return train(snapshots, cfg.kernel, cfg.shape, cfg.energy_threshold);
}

namespace {

std::vector<std::string> output_comments(const StudyConfig& cfg) {
  return {"config=" + hash_hex(study_config_hash(cfg))};
}

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void require_out_dir(const std::string& out_dir) {
  if (!std::filesystem::is_directory(out_dir))
    throw io_error("output directory does not exist: " + out_dir);
}

}  // namespace

void run_simulate(const StudyConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  require_out_dir(out_dir);
  for (const auto& condition : cfg.conditions) {
    const LDCurve curve = condition_curve(cfg, cfg.material, condition);
    write_ld_curve(join_path(out_dir, "curve_" + condition.name + ".csv"), curve,
                   output_comments(cfg));
  }
}

void run_sensitivity(const StudyConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  require_out_dir(out_dir);
  if (cfg.sensitivity_array != "L27")
    throw std::invalid_argument("sensitivity supports the L27 array; got " +
                                cfg.sensitivity_array);
  const OrthogonalArray array = orthogonal_array(ArrayKind::l27);
  validate_levels(cfg.sensitivity_levels);
  if (static_cast<Eigen::Index>(cfg.sensitivity_levels.size()) != array.factors())
    throw std::invalid_argument("sensitivity needs exactly six factors for L27");

  const ConditionSpec& condition = cfg.conditions.front();
  const LDCurve reference = condition_curve(cfg, cfg.material, condition);
  const auto points = design_points(array, cfg.sensitivity_levels);

  std::vector<std::string> factor_names;
  for (const auto& f : cfg.sensitivity_levels) factor_names.push_back(f.name);

  std::vector<LDCurve> curves(points.size());
  parallel_for(points.size(), cfg.threads, [&](std::size_t i) {
    const MaterialParams params = apply_parameters(cfg.material, factor_names, points[i]);
    curves[i] = condition_curve(cfg, params, condition);
  });

  Eigen::VectorXd responses(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (cfg.sensitivity_error == "mse") {
      responses[static_cast<Eigen::Index>(i)] = error_mse(curves[i], reference);
    } else {
      // Relative error needs nonzero reference depths; drop the initial
      // zero-load sample.
      LDCurve sim, exp;
      const Eigen::Index n = reference.size() - 1;
      sim.time = curves[i].time.tail(n);
      sim.load = curves[i].load.tail(n);
      sim.depth = curves[i].depth.tail(n);
      exp.time = reference.time.tail(n);
      exp.load = reference.load.tail(n);
      exp.depth = reference.depth.tail(n);
      responses[static_cast<Eigen::Index>(i)] = error_rms_relative(sim, exp);
    }
  }

  const AnovaTable table = anova(array, cfg.sensitivity_levels, responses);

  const auto comments = output_comments(cfg);
  std::vector<std::vector<std::string>> design_rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<std::string> row{std::to_string(i + 1)};
    for (Eigen::Index j = 0; j < points[i].size(); ++j)
      row.push_back(format_double(points[i][j]));
    row.push_back(format_double(responses[static_cast<Eigen::Index>(i)]));
    design_rows.push_back(std::move(row));
  }
  std::string design_header = "run";
  for (const auto& name : factor_names) design_header += "," + name;
  design_header += ",delta";
  write_csv(join_path(out_dir, "design_responses.csv"), comments, design_header, design_rows);

  std::vector<std::vector<std::string>> anova_rows;
  for (const auto& r : table.factors)
    anova_rows.push_back({r.source, std::to_string(r.df), format_double(r.adj_ss),
                          format_double(r.adj_ms), r.f_value ? format_double(*r.f_value) : "",
                          r.p_value ? format_double(*r.p_value) : "",
                          format_double(r.pct_contribution)});
  anova_rows.push_back({"Error", std::to_string(table.error_df), format_double(table.error_ss),
                        format_double(table.error_ms), "", "", ""});
  anova_rows.push_back(
      {"Total", std::to_string(table.total_df), format_double(table.total_ss), "", "", "", ""});
  write_csv(join_path(out_dir, "anova.csv"), comments,
            "source,df,adj_ss,adj_ms,f_value,p_value,pct_contribution", anova_rows);
  atomic_write_text(join_path(out_dir, "anova.txt"),
                    "# config=" + hash_hex(study_config_hash(cfg)) + "\n" + table.render());

  // Parametric extremes, one parameter at a time about the baseline.
  std::vector<std::string> extreme_names;
  std::vector<std::array<double, 2>> extreme_bounds;
  Eigen::VectorXd baseline(static_cast<Eigen::Index>(cfg.sensitivity_levels.size()));
  for (std::size_t i = 0; i < cfg.sensitivity_levels.size(); ++i) {
    const auto& f = cfg.sensitivity_levels[i];
    extreme_names.push_back(f.name);
    extreme_bounds.push_back({f.levels.front(), f.levels.back()});
    baseline[static_cast<Eigen::Index>(i)] = get_material_parameter(cfg.material, f.name);
    baseline[static_cast<Eigen::Index>(i)] =
        std::clamp(baseline[static_cast<Eigen::Index>(i)], f.levels.front(), f.levels.back());
  }
  const auto forward = [&](const Eigen::VectorXd& p) {
    return condition_curve(cfg, apply_parameters(cfg.material, extreme_names, p), condition);
  };
  const auto extremes = extreme_sensitivity(extreme_names, extreme_bounds, baseline, forward);
  std::vector<std::vector<std::string>> extreme_rows;
  for (const auto& d : extremes)
    extreme_rows.push_back({d.parameter, format_double(d.max_depth_delta),
                            format_double(d.residual_depth_delta)});
  write_csv(join_path(out_dir, "extremes.csv"), comments,
            "parameter,max_depth_delta_nm,residual_depth_delta_nm", extreme_rows);
}

void run_train(const StudyConfig& cfg, const std::string& out_dir,
               const std::optional<SweepSpec>& shape_sweep) {
  cfg.validate();
  require_out_dir(out_dir);
  const auto comments = output_comments(cfg);

  for (const auto& condition : cfg.conditions) {
    const SnapshotSet snapshots = condition_snapshots(cfg, condition, cfg.threads);
    const SurrogateModel model = train_condition(cfg, snapshots);
    save_surrogate(model, join_path(out_dir, "surrogate_" + condition.name + ".podrbf"),
                   comments);

    std::vector<std::vector<std::string>> spectrum_rows;
    for (Eigen::Index k = 0; k < model.basis.eigenvalues.size(); ++k)
      spectrum_rows.push_back(
          {std::to_string(k + 1), format_double(model.basis.eigenvalues[k])});
    write_csv(join_path(out_dir, "spectrum_" + condition.name + ".csv"), comments,
              "mode,eigenvalue", spectrum_rows);
  }

  if (shape_sweep) {
    // Shape-parameter study on the first condition: midpoint holdout points
    // evaluated against the forward model.
    const ConditionSpec& condition = cfg.conditions.front();
    const SnapshotSet snapshots = condition_snapshots(cfg, condition, cfg.threads);
    const auto names = varying_train_names(cfg);

    MaterialParams fixed = cfg.material;
    FactorLevels midpoints;
    for (const auto& f : cfg.train_levels) {
      if (f.levels.size() == 1) {
        set_material_parameter(fixed, f.name, f.levels.front());
        continue;
      }
      Factor mids;
      mids.name = f.name;
      for (std::size_t l = 1; l < f.levels.size(); ++l)
        mids.levels.push_back((f.levels[l - 1] + f.levels[l]) / 2.0);
      midpoints.push_back(std::move(mids));
    }
    const auto holdout_points = full_factorial(midpoints);
    const ForwardConfig fwd = condition_forward_config(cfg, condition.schedule);
    Eigen::MatrixXd holdout_in(static_cast<Eigen::Index>(names.size()),
                               static_cast<Eigen::Index>(holdout_points.size()));
    Eigen::MatrixXd holdout_out(snapshots.outputs.rows(),
                                static_cast<Eigen::Index>(holdout_points.size()));
    parallel_for(holdout_points.size(), cfg.threads, [&](std::size_t j) {
      const MaterialParams params = apply_parameters(fixed, names, holdout_points[j]);
      holdout_in.col(static_cast<Eigen::Index>(j)) = holdout_points[j];
      holdout_out.col(static_cast<Eigen::Index>(j)) =
          forward_indentation(params, condition.schedule, fwd).depth;
    });

    std::vector<std::vector<std::string>> sweep_rows;
    for (int i = 0; i < shape_sweep->count; ++i) {
      const double cj = shape_sweep->count == 1
                            ? shape_sweep->lo
                            : shape_sweep->lo + (shape_sweep->hi - shape_sweep->lo) * i /
                                                    (shape_sweep->count - 1);
      const SurrogateModel model = train(snapshots, cfg.kernel, cj, cfg.energy_threshold);
      const ValidationReport report = validation_report(model, holdout_in, holdout_out);
      sweep_rows.push_back({format_double(cj), format_double(report.mean_error),
                            format_double(report.worst_error)});
    }
    write_csv(join_path(out_dir, "cj_sweep_" + condition.name + ".csv"), comments,
              "cj,mean_validation_error,worst_validation_error", sweep_rows);
  }
}

CalibrateOutcome run_calibrate(const StudyConfig& cfg,
                               const std::vector<std::string>& experiment_files,
                               const std::string& surrogate_dir, const std::string& out_dir) {
  cfg.validate();
  require_out_dir(out_dir);
  if (experiment_files.size() != cfg.conditions.size())
    throw std::invalid_argument("expected one experiment file per condition (" +
                                std::to_string(cfg.conditions.size()) + ")");

  CalibrateOutcome outcome;
  outcome.names = varying_train_names(cfg);

  CalibrationProblem problem;
  problem.bounds = bounds_for(cfg, outcome.names);
  for (std::size_t i = 0; i < cfg.conditions.size(); ++i) {
    const auto& condition = cfg.conditions[i];
    Condition c;
    c.name = condition.name;
    c.model = load_surrogate(
        join_path(surrogate_dir, "surrogate_" + condition.name + ".podrbf"));
    const LDCurve experiment = read_ld_curve(experiment_files[i]);
    LDCurve reference;
    reference.time = condition.schedule.sample_times();
    reference.load.resize(reference.time.size());
    for (Eigen::Index k = 0; k < reference.time.size(); ++k)
      reference.load[k] = condition.schedule.load_at(reference.time[k]);
    reference.depth = Eigen::VectorXd::Zero(reference.time.size());
    c.experiment = resample_to_load_grid(experiment, reference);
    problem.conditions.push_back(std::move(c));
  }

  GaConfig ga = cfg.ga;
  ga.rng_seed = cfg.seed;
  outcome.ga = ga_run(problem, ga, cfg.threads);

  const MaterialParams best_params =
      apply_parameters(cfg.material, outcome.names, outcome.ga.best);
  for (std::size_t i = 0; i < cfg.conditions.size(); ++i) {
    const auto& c = problem.conditions[i];
    outcome.condition_names.push_back(c.name);
    const Eigen::VectorXd predicted = predict(c.model, outcome.ga.best).values;
    outcome.surrogate_metrics.push_back(fit_metrics(c.experiment.depth, predicted));
    const LDCurve forward = condition_curve(cfg, best_params, cfg.conditions[i]);
    outcome.forward_metrics.push_back(fit_metrics(c.experiment.depth, forward.depth));
  }

  const auto comments = output_comments(cfg);
  std::vector<std::vector<std::string>> history_rows;
  for (std::size_t g = 0; g < outcome.ga.history.size(); ++g)
    history_rows.push_back({std::to_string(g), format_double(outcome.ga.history[g])});
  write_csv(join_path(out_dir, "history.csv"), comments, "generation,best_objective",
            history_rows);

  std::string report = "# config=" + hash_hex(study_config_hash(cfg)) + "\n";
  report += "objective_mse_nm2 = " + format_double(outcome.ga.objective) + "\n";
  report += "generations = " + std::to_string(outcome.ga.generations) + "\n";
  report += "extrapolated_evaluations = " +
            std::to_string(outcome.ga.extrapolated_evaluations) + "\n";
  for (std::size_t i = 0; i < outcome.names.size(); ++i)
    report += outcome.names[i] + " = " +
              format_double(outcome.ga.best[static_cast<Eigen::Index>(i)]) + "\n";
  for (std::size_t i = 0; i < outcome.condition_names.size(); ++i) {
    char line[256];
    const auto& s = outcome.surrogate_metrics[i];
    const auto& f = outcome.forward_metrics[i];
    std::snprintf(line, sizeof(line),
                  "%s: surrogate rmse=%.4g nm r2=%.6g avg=%.4g nm pct=%.4g%% | forward "
                  "rmse=%.4g nm r2=%.6g avg=%.4g nm pct=%.4g%%\n",
                  outcome.condition_names[i].c_str(), s.rmse, s.r2, s.avg_err, s.pct_err, f.rmse,
                  f.r2, f.avg_err, f.pct_err);
    report += line;
  }
  atomic_write_text(join_path(out_dir, "calibration_report.txt"), report);
  return outcome;
}

AnalyzeOutcome run_analyze(const std::string& curve_file, const AreaFunction& area,
                           const AnalysisOptions& options, bool ngan) {
  const LDCurve curve = read_ld_curve(curve_file);
  AnalyzeOutcome outcome;
  outcome.result = oliver_pharr(curve, area, options);
  if (ngan) {
    outcome.depth_rate = hold_end_depth_rate(curve);
    outcome.unload_rate = initial_unload_rate(curve);
    outcome.corrected_stiffness =
        ngan_corrected_stiffness(outcome.result.stiffness, *outcome.depth_rate,
                                 *outcome.unload_rate);
  }
  return outcome;
}

}  // namespace creepfit
