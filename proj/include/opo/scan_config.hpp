#pragma once

// Run configuration: flat key=value text with dotted section prefixes.
//
//   # comment
//   opo.sigma = 1.14
//   cavity.signal.bandwidth_hz = 14.5e6
//   sweep.kind = detuning
//
// Unknown keys, duplicate keys and unparsable values raise ConfigError.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "opo/analysis_cavity.hpp"
#include "opo/detection_chain.hpp"
#include "opo/opo_model.hpp"
#include "opo/witness.hpp"

namespace opo {

enum class SweepKind { DetuningScan, SigmaSweep, WitnessPoint, CombSpectrum };
enum class RunMode { Analytic, MonteCarlo };
// Where the covariance comes from: the OPO model, vacuum (every beam at the
// SQL), or directly measured witness terms (witness points only).
enum class Source { Opo, Vacuum, Measured };

struct SweepRange {
  double start = 0.0;
  double stop = 0.0;
  std::size_t points = 0;

  // Evenly spaced, endpoints included. Requires points >= 2 and start < stop.
  double at(std::size_t i) const;
};

struct ScanConfig {
  OpoParams opo;
  bool comb_enabled = false;
  ExcessNoiseSpectrum comb;
  std::array<AnalysisCavity, kModeCount> cavities = default_cavities();
  DetectionParams detection;
  std::size_t blocks_per_point = 100;
  SweepKind kind = SweepKind::DetuningScan;
  SweepRange range{-8.0, 8.0, 321};
  RunMode mode = RunMode::Analytic;
  Source source = Source::Opo;
  std::optional<MeasuredWitnessTerms> measured;
  std::string output_path;

  // Range and parameter checks that do not depend on the sweep values.
  void validate() const;
};

// Parses the text form; keys not present keep their defaults. The sweep range
// defaults depend on sweep.kind when not given explicitly.
ScanConfig parse_config(const std::string& text);
ScanConfig load_config(const std::string& path);

// Canonical text form: every key, fixed order, round-trippable values.
std::string to_config_text(const ScanConfig& cfg);

// FNV-1a 64-bit hash of the canonical text, as 16 hex digits.
std::string config_hash(const ScanConfig& cfg);

// Seed precedence: explicit override, then OPO_SEED, then the config value.
std::uint64_t resolve_seed(const ScanConfig& cfg, std::optional<std::uint64_t> cli_seed);

std::string to_string(SweepKind kind);
std::string to_string(RunMode mode);
std::string to_string(Source source);
SweepKind parse_sweep_kind(const std::string& text);
RunMode parse_run_mode(const std::string& text);
Source parse_source(const std::string& text);

}  // namespace opo
