#include "eitnsim/config.hpp"
#include "eitnsim/error.hpp"
#include "eitnsim/output.hpp"
#include "eitnsim/validation.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

using namespace eitnsim;

namespace {

enum Exit { kOk = 0, kConfig = 1, kSolver = 2, kValidation = 3 };

struct ConfigFlags {
  std::string scenario;
  std::string config;
  std::vector<std::string> overrides;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--scenario", flags.scenario, "Preset: fig2a fig2b fig2c fig2d fig2e longitudinalB");
  cmd->add_option("--config", flags.config, "JSON config file merged over the preset");
  cmd->add_option("--override", flags.overrides, "Dotted key=value, e.g. modulation.ratio=0.1")
      ->take_all();
}

int thread_count(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("EITNSIM_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 0)
      throw ConfigError("EITNSIM_THREADS must be a non-negative integer, got '" +
                        std::string(env) + "'");
    return static_cast<int>(n);
  }
  return 0;
}

std::string sweep_tag(SweepParameter p) {
  return p == SweepParameter::ModulationFrequency ? "f" : "B";
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string sibling(const std::string& csv, const std::string& suffix) {
  std::filesystem::path p(csv);
  const std::string ext = p.has_extension() ? p.extension().string() : ".csv";
  return (p.parent_path() / (p.stem().string() + suffix + ext)).string();
}

SpectrumResult run_one(const RunConfig& rc, int threads, const std::string& csv) {
  const LevelScheme scheme = build_level_scheme(rc.scenario.scheme);
  const auto t0 = std::chrono::steady_clock::now();
  SpectrumResult r = scan(rc.scenario.scan, scheme, rc.scenario.doppler, {threads, true});
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const std::string hash = config_hash(rc);
  write_csv(csv, r, hash);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  std::printf("%s: %zu points in %.1f s, config %s -> %s\n", rc.scenario.name.c_str(),
              r.size(), secs, hash.c_str(), csv.c_str());
  return r;
}

int cmd_scan(const ConfigFlags& flags, const std::string& out_flag, int threads_flag) {
  const Json tree = load_config_tree(flags.scenario, flags.config, flags.overrides);
  RunConfig rc = run_config_from_json(tree);
  if (!out_flag.empty()) rc.output_csv = out_flag;
  const int threads = thread_count(threads_flag > 0 ? threads_flag : rc.threads);

  const Sweep sweep = rc.scenario.sweep;
  if (sweep.parameter == SweepParameter::None) {
    const SpectrumResult r = run_one(rc, threads, rc.output_csv);
    std::cout << feature_table(dip_metrics(r));
    return kOk;
  }

  const std::string summary_path = sibling(rc.output_csv, "_sweep");
  std::ofstream summary(summary_path, std::ios::binary);
  if (!summary) throw ConfigError("cannot write '" + summary_path + "'");
  summary << "# eit-nsim v1 config=" << config_hash(rc) << "\n"
          << to_string(sweep.parameter) << ",kind,position_MHz,fwhm_MHz,contrast\n";
  for (double value : sweep.values) {
    RunConfig one = rc;
    one.scenario.sweep = {};
    one.scenario.scan = apply_sweep(rc.scenario.scan, sweep.parameter, value);
    const std::string csv =
        sibling(rc.output_csv, "_" + sweep_tag(sweep.parameter) + format_value(value));
    std::printf("%s = %s\n", to_string(sweep.parameter).c_str(), format_value(value).c_str());
    const auto features = dip_metrics(run_one(one, threads, csv));
    std::cout << feature_table(features);
    for (const Feature& f : features) {
      char line[160];
      std::snprintf(line, sizeof line, "%.8e,%s,%.8e,%.8e,%.8e\n", value,
                    to_string(f.kind).c_str(), f.position, f.fwhm, f.contrast);
      summary << line;
    }
  }
  std::printf("sweep summary -> %s\n", summary_path.c_str());
  return kOk;
}

int cmd_validate(const std::string& level, std::uint64_t seed, const std::string& fault) {
  ValidationOptions opt;
  opt.level = level == "full" ? ValidationLevel::Full : ValidationLevel::Quick;
  opt.seed = seed;
  opt.fault = fault;
  const auto results = run_validation(opt);
  std::vector<std::string> failed;
  std::printf("%-32s %-6s %12s %12s %8s\n", "check", "result", "value", "bound", "time_s");
  for (const auto& r : results) {
    std::printf("%-32s %-6s %12.3e %12.3e %8.2f %s\n", r.name.c_str(),
                r.passed ? "PASS" : "FAIL", r.value, r.threshold, r.seconds,
                r.detail.c_str());
    if (!r.passed) failed.push_back(r.name);
  }
  if (failed.empty()) return kOk;
  std::cerr << "validation failed:";
  for (const auto& n : failed) std::cerr << " " << n;
  std::cerr << "\n";
  return kValidation;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Doppler-averaged EIT spectra of the 87Rb D2 line"};
  app.require_subcommand(1);

  ConfigFlags scan_flags;
  std::string out;
  int threads = 0;
  auto* scan_cmd = app.add_subcommand("scan", "Run a scan (or sweep) and write CSV");
  add_config_flags(scan_cmd, scan_flags);
  scan_cmd->add_option("--out", out, "Output CSV (default from config)");
  scan_cmd->add_option("--threads", threads, "OpenMP threads (default EITNSIM_THREADS)")
      ->check(CLI::NonNegativeNumber);

  std::string level = "quick";
  std::uint64_t seed = 20000131;
  std::string fault;
  auto* validate_cmd = app.add_subcommand("validate", "Run the oracle suite");
  validate_cmd->add_option("level", level, "quick or full")
      ->check(CLI::IsMember({"quick", "full"}));
  validate_cmd->add_option("--seed", seed, "Seed for randomized checks");
  validate_cmd->add_option("--inject-fault", fault)->group("");

  std::string csv, script;
  double linewidth = 6.0;
  auto* plot_cmd = app.add_subcommand("plot", "Write a gnuplot script for a result CSV");
  plot_cmd->add_option("csv", csv, "Result CSV")->required();
  plot_cmd->add_option("--out", script, "Script path (default: CSV name with .gp)");
  plot_cmd->add_option("--linewidth", linewidth, "Feature smoothing scale, MHz");

  ConfigFlags show_flags;
  auto* show_cmd = app.add_subcommand("show-config", "Print the resolved config as JSON");
  add_config_flags(show_cmd, show_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*scan_cmd) return cmd_scan(scan_flags, out, threads);
    if (*validate_cmd) return cmd_validate(level, seed, fault);
    if (*plot_cmd) {
      std::printf("%s\n", emit_plot_script(csv, script, linewidth).c_str());
      return kOk;
    }
    if (*show_cmd) {
      const Json tree = load_config_tree(show_flags.scenario, show_flags.config,
                                         show_flags.overrides);
      std::cout << to_json(run_config_from_json(tree)).dump(2) << "\n";
      return kOk;
    }
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolver;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const UnsupportedModeError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
