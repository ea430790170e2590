// opo_scan: config-driven detuning scans, sigma sweeps, witness points and
// comb spectra. Exit codes: 0 success, 2 configuration error, 3 numerical or
// physicality failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "opo/errors.hpp"
#include "opo/scan_runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::string mode;
};

void add_common(CLI::App* sub, Options& opt, bool with_config_required) {
  auto* config = sub->add_option("--config", opt.config_path, "Config file (key=value)");
  if (with_config_required) config->required();
  sub->add_option("--out", opt.out_path, "Output path; overrides output.path, '-' for stdout");
  sub->add_option("--seed", opt.seed, "RNG seed; overrides OPO_SEED and detection.seed");
  sub->add_option("--mode", opt.mode, "analytic or montecarlo")->check(CLI::IsMember({"analytic", "montecarlo"}));
}

opo::ScanConfig prepare(const Options& opt, opo::SweepKind expected) {
  opo::ScanConfig cfg = opo::load_config(opt.config_path);
  if (cfg.kind != expected) {
    throw opo::ConfigError(fmt::format("{} sets sweep.kind={}, this subcommand needs sweep.kind={}",
                                       opt.config_path, opo::to_string(cfg.kind), opo::to_string(expected)));
  }
  if (!opt.mode.empty()) cfg.mode = opo::parse_run_mode(opt.mode);
  if (!opt.out_path.empty()) cfg.output_path = opt.out_path;
  cfg.detection.seed = opo::resolve_seed(cfg, opt.seed);
  return cfg;
}

void emit(const opo::ScanConfig& cfg, const std::string& text) {
  if (cfg.output_path.empty() || cfg.output_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.output_path, std::ios::binary);
  if (!out) throw opo::ConfigError(fmt::format("cannot write {}", cfg.output_path));
  out << text;
  std::cerr << fmt::format("wrote {}\n", cfg.output_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Above-threshold OPO noise, measurement chain and entanglement witnesses"};
  app.require_subcommand(1);
  Options opt;

  auto* detuning = app.add_subcommand("detuning-scan", "Sum/difference/corrected noise versus cavity detuning");
  auto* sigma = app.add_subcommand("sigma-sweep", "Tracked noise terms and witnesses versus pump power");
  auto* witness = app.add_subcommand("witness", "Tripartite witnesses at one operating point");
  auto* comb = app.add_subcommand("comb-spectrum", "Phenomenological pump excess phase noise versus frequency");
  auto* validate = app.add_subcommand("validate-config", "Parse and check a config, print its canonical form");
  for (auto* sub : {detuning, sigma, witness, comb}) add_common(sub, opt, true);
  validate->add_option("--config", opt.config_path, "Config file (key=value)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      const auto cfg = opo::load_config(opt.config_path);
      std::cout << opo::to_config_text(cfg) << "# config_hash=" << opo::config_hash(cfg) << '\n';
      return 0;
    }
    if (witness->parsed()) {
      const auto cfg = prepare(opt, opo::SweepKind::WitnessPoint);
      const auto report = opo::run_witness_point(cfg);
      std::string text = fmt::format("# config_hash={}\n# seed={}\n# tool_version={}\n", opo::config_hash(cfg),
                                     cfg.detection.seed, opo::kToolVersion);
      text += fmt::format("sigma={}\n", cfg.opo.sigma) + opo::to_key_value(report);
      emit(cfg, text);
      return 0;
    }
    opo::SweepKind kind = opo::SweepKind::DetuningScan;
    if (sigma->parsed()) kind = opo::SweepKind::SigmaSweep;
    if (comb->parsed()) kind = opo::SweepKind::CombSpectrum;
    const auto cfg = prepare(opt, kind);
    emit(cfg, opo::run_table(cfg).to_csv());
    return 0;
  } catch (const opo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const opo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
