#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "retrainbench/config.hpp"
#include "retrainbench/pipeline.hpp"
#include "retrainbench/synth.hpp"

namespace rb = retrainbench;

namespace {

int run_command(const std::string& config_path, const std::string& out_dir, bool verbose) {
  rb::RunConfig config;
  try {
    config = rb::load_run_config(config_path);
  } catch (const rb::ConfigError& e) {
    nlohmann::ordered_json err{{"error", "config"}, {"field", e.field()}, {"message", e.what()}};
    std::cerr << err.dump() << '\n';
    return 2;
  }
  if (!out_dir.empty()) config.output_dir = out_dir;
  try {
    auto outcome = rb::run_pipeline(config, [&](const std::string& msg) {
      if (verbose) std::cerr << "[retrainbench] " << msg << '\n';
    });
    const auto& s = outcome.summary;
    std::cout << "status: " << s["status"].get<std::string>() << ", scenarios succeeded: "
              << s["scenarios"]["succeeded"] << "/" << s["scenarios"]["total"] << ", output: "
              << config.output_dir.string() << '\n';
    for (const auto& f : s["failures"])
      std::cerr << "failed: " << f["method"].get<std::string>() << " r=" << f["retrain"] << ": "
                << f["error"].get<std::string>() << '\n';
    return outcome.exit_code;
  } catch (const rb::ConfigError& e) {
    nlohmann::ordered_json err{{"error", "config"}, {"field", e.field()}, {"message", e.what()}};
    std::cerr << err.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retraining-frequency benchmark for global forecasting models"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  bool verbose = false;
  auto* run = app.add_subcommand("run", "Run the full benchmark described by a JSON config");
  run->add_option("config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides output_dir in the config)");
  run->add_flag("-v,--verbose", verbose, "Log progress to stderr");

  rb::SynthOptions synth;
  std::string synth_out, statics_out;
  auto* gen = app.add_subcommand("synth", "Write a synthetic long-format panel");
  gen->add_option("output", synth_out, "Output CSV")->required();
  gen->add_option("--statics", statics_out, "Also write a statics CSV");
  gen->add_option("--series", synth.series, "Number of series")->capture_default_str();
  gen->add_option("--length", synth.length, "Observations in the longest series")->capture_default_str();
  gen->add_option("--min-length", synth.min_length, "Shortest series length (0 = all equal)")->capture_default_str();
  gen->add_option("--frequency", synth.frequency, "7 (daily) or 52 (weekly)")->capture_default_str();
  gen->add_option("--noise", synth.noise, "Relative noise scale")->capture_default_str();
  gen->add_option("--zeros", synth.zero_share, "Share of zero observations")->capture_default_str();
  gen->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  gen->add_option("--start", synth.start, "First date (YYYY-MM-DD)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (*run) return run_command(config_path, out_dir, verbose);

  try {
    synth.statics = !statics_out.empty();
    const auto panel = rb::make_synthetic_panel(synth);
    std::ofstream out(synth_out);
    if (!out) throw rb::Error("cannot write " + synth_out);
    rb::write_panel(out, panel);
    if (!statics_out.empty()) {
      std::ofstream st(statics_out);
      if (!st) throw rb::Error("cannot write " + statics_out);
      rb::write_statics(st, panel);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
