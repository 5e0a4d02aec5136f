// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "creepfit/config.hpp"
#include "creepfit/io.hpp"
#include "creepfit/study.hpp"

namespace {

using namespace creepfit;

AreaFunction load_area_function(const std::string& path) {
  if (path.empty()) return {};
  if (!std::filesystem::exists(path))
    throw missing_artifact_error("area-function file does not exist: " + path);
  const IniFile ini = IniFile::parse(read_text_file(path));
  AreaFunction af;
  af.c0 = ini.get_or("", "c0", af.c0);
  af.c1 = ini.get_or("", "c1", af.c1);
  af.c2 = ini.get_or("", "c2", af.c2);
  af.c3 = ini.get_or("", "c3", af.c3);
  return af;
}

StudyConfig load_config_with_overrides(const std::string& config_path, int threads,
                                       std::uint64_t seed, bool seed_set,
                                       const std::string& kernel, double cj, bool cj_set) {
  StudyConfig cfg =
      config_path.empty() ? default_study_config() : load_study_config(config_path);
  if (threads > 0) cfg.threads = threads;
  if (seed_set) {
    cfg.seed = seed;
    cfg.ga.rng_seed = seed;
  }
  if (!kernel.empty()) cfg.kernel = kernel_from_name(kernel);
  if (cj_set) cfg.shape = cj;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear-viscoelastic indentation toolkit: reduced forward model, POD-RBF "
               "surrogates, Taguchi/ANOVA sensitivity, GA calibration, Oliver-Pharr analysis"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string kernel;
  double cj = 0.0;
  bool cj_set = false;
  app.add_option("--config", config_path, "Study config file (INI)");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--threads", threads, "Worker threads for parallel stages");
  app.add_option("--seed", seed, "Seed override")->each([&](const std::string&) { seed_set = true; });
  app.add_option("--kernel", kernel, "RBF kernel override: ls, cs, mq, gs, imq");
  app.add_option("--cj", cj, "Shape parameter override")->each([&](const std::string&) { cj_set = true; });

  auto* cmd_simulate = app.add_subcommand("simulate", "Run the forward model for each condition");
  auto* cmd_sensitivity =
      app.add_subcommand("sensitivity", "L27 Taguchi design, ANOVA table and parametric extremes");
  auto* cmd_train = app.add_subcommand("train", "Build snapshots and train one surrogate per condition");
  std::string sweep_arg;
  cmd_train->add_option("--cj-sweep", sweep_arg,
                        "Shape-parameter sweep 'lo:hi:count'; writes error-vs-cj CSV");
  auto* cmd_calibrate =
      app.add_subcommand("calibrate", "GA calibration against experimental curves");
  std::vector<std::string> experiment_files;
  std::string surrogate_dir;
  cmd_calibrate->add_option("experiments", experiment_files,
                            "Experimental LDCurve CSVs, one per condition in config order");
  cmd_calibrate->add_option("--surrogates", surrogate_dir,
                            "Directory with surrogate_<condition>.podrbf (default: --out)");
  auto* cmd_analyze = app.add_subcommand("analyze", "Oliver-Pharr / Ngan analysis of one curve");
  std::string curve_file, area_file;
  bool ngan = false;
  AnalysisOptions options;
  cmd_analyze->add_option("curve", curve_file, "LDCurve CSV")->required();
  cmd_analyze->add_option("--area", area_file, "Area-function file (c0..c3 key/values)");
  cmd_analyze->add_flag("--ngan", ngan, "Also report the creep-corrected stiffness");
  cmd_analyze->add_option("--nu-s", options.sample_poisson, "Sample Poisson ratio");
  cmd_analyze->add_option("--eps-geom", options.eps_geom, "Contact-depth geometry constant");
  cmd_analyze->add_option("--beta", options.beta, "Indenter shape correction");
  cmd_analyze->add_option("--fit-fraction", options.fit_fraction,
                          "Top fraction of the unloading branch used in the stiffness fit");
  cmd_analyze->add_option("--ei", options.indenter_modulus, "Indenter modulus (GPa; 0 = rigid)");
  cmd_analyze->add_option("--nu-i", options.indenter_poisson, "Indenter Poisson ratio");
  auto* cmd_defaults =
      app.add_subcommand("print-defaults", "Write the built-in study config to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (cmd_defaults->parsed()) {
      std::cout << dump_study_config(default_study_config());
      return 0;
    }
    const StudyConfig cfg =
        load_config_with_overrides(config_path, threads, seed, seed_set, kernel, cj, cj_set);
    if (cmd_simulate->parsed()) {
      run_simulate(cfg, out_dir);
      std::cout << "wrote " << cfg.conditions.size() << " curve file(s) to " << out_dir << "\n";
    } else if (cmd_sensitivity->parsed()) {
      run_sensitivity(cfg, out_dir);
      std::cout << read_text_file((std::filesystem::path(out_dir) / "anova.txt").string());
    } else if (cmd_train->parsed()) {
      std::optional<SweepSpec> sweep;
      if (!sweep_arg.empty()) {
        SweepSpec s;
        if (std::sscanf(sweep_arg.c_str(), "%lf:%lf:%d", &s.lo, &s.hi, &s.count) != 3 ||
            s.count < 1 || !(s.lo > 0.0) || !(s.hi >= s.lo))
          throw std::invalid_argument("--cj-sweep expects 'lo:hi:count' with 0 < lo <= hi");
        sweep = s;
      }
      run_train(cfg, out_dir, sweep);
      std::cout << "trained " << cfg.conditions.size() << " surrogate(s) in " << out_dir << "\n";
    } else if (cmd_calibrate->parsed()) {
      const std::string artifacts = surrogate_dir.empty() ? out_dir : surrogate_dir;
      const CalibrateOutcome outcome = run_calibrate(cfg, experiment_files, artifacts, out_dir);
      std::cout << read_text_file(
          (std::filesystem::path(out_dir) / "calibration_report.txt").string());
    } else if (cmd_analyze->parsed()) {
      const AnalyzeOutcome outcome = run_analyze(curve_file, load_area_function(area_file),
                                                 options, ngan);
      const auto& r = outcome.result;
      std::cout << "stiffness_mN_nm = " << format_double(r.stiffness) << "\n";
      if (outcome.corrected_stiffness) {
        std::cout << "depth_rate_nm_s = " << format_double(*outcome.depth_rate) << "\n";
        std::cout << "unload_rate_mN_s = " << format_double(*outcome.unload_rate) << "\n";
        std::cout << "corrected_stiffness_mN_nm = "
                  << format_double(*outcome.corrected_stiffness) << "\n";
      }
      std::cout << "contact_depth_nm = " << format_double(r.contact_depth) << "\n";
      std::cout << "contact_area_nm2 = " << format_double(r.area) << "\n";
      std::cout << "hardness_GPa = " << format_double(r.hardness) << "\n";
      std::cout << "reduced_modulus_GPa = " << format_double(r.reduced_modulus) << "\n";
      std::cout << "sample_modulus_GPa = " << format_double(r.sample_modulus) << "\n";
    }
    return 0;
  } catch (const missing_artifact_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
