#include "opo/scan_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "opo/errors.hpp"

namespace opo {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
  return value;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, text));
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(fmt::format("{}: '{}' is not a boolean", key, text));
}

constexpr std::array<const char*, kModeCount> kBeamNames{"pump", "signal", "idler"};

using Setter = std::function<void(ScanConfig&, const std::string& key, const std::string& value)>;

template <typename F>
Setter number(F field) {
  return [field](ScanConfig& cfg, const std::string& key, const std::string& v) { field(cfg) = parse_double(key, v); };
}

template <typename F>
Setter measured_term(F field) {
  return [field](ScanConfig& cfg, const std::string& key, const std::string& v) {
    if (!cfg.measured) cfg.measured.emplace();
    field(*cfg.measured) = parse_double(key, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["opo.pump_coupler_reflectivity"] = number([](ScanConfig& c) -> double& { return c.opo.pump_coupler_reflectivity; });
    t["opo.twin_coupler_transmission"] = number([](ScanConfig& c) -> double& { return c.opo.twin_coupler_transmission; });
    t["opo.pump_spurious_loss"] = number([](ScanConfig& c) -> double& { return c.opo.pump_spurious_loss; });
    t["opo.twin_spurious_loss"] = number([](ScanConfig& c) -> double& { return c.opo.twin_spurious_loss; });
    t["opo.cavity_bandwidth_twins_hz"] = number([](ScanConfig& c) -> double& { return c.opo.cavity_bandwidth_twins_hz; });
    t["opo.threshold_power_w"] = number([](ScanConfig& c) -> double& { return c.opo.threshold_power_w; });
    t["opo.sigma"] = number([](ScanConfig& c) -> double& { return c.opo.sigma; });
    t["opo.pump_excess_phase_in"] = number([](ScanConfig& c) -> double& { return c.opo.pump_excess_phase_in; });

    t["comb.enabled"] = [](ScanConfig& c, const std::string& k, const std::string& v) {
      c.comb_enabled = parse_bool(k, v);
    };
    t["comb.plateau_db"] = number([](ScanConfig& c) -> double& { return c.comb.plateau_db; });
    t["comb.peak_spacing_hz"] = number([](ScanConfig& c) -> double& { return c.comb.peak_spacing_hz; });
    t["comb.peak_height_db"] = number([](ScanConfig& c) -> double& { return c.comb.peak_height_db; });
    t["comb.peak_width_hz"] = number([](ScanConfig& c) -> double& { return c.comb.peak_width_hz; });

    for (int m = 0; m < kModeCount; ++m) {
      const std::string prefix = std::string("cavity.") + kBeamNames[m];
      t[prefix + ".bandwidth_hz"] = number([m](ScanConfig& c) -> double& { return c.cavities[m].bandwidth_hz; });
      t[prefix + ".coupling_ratio"] = number([m](ScanConfig& c) -> double& { return c.cavities[m].coupling_ratio; });
    }

    t["detection.efficiency_twins"] = number([](ScanConfig& c) -> double& { return c.detection.efficiency_twins; });
    t["detection.efficiency_pump"] = number([](ScanConfig& c) -> double& { return c.detection.efficiency_pump; });
    t["detection.analysis_frequency_hz"] =
        number([](ScanConfig& c) -> double& { return c.detection.analysis_frequency_hz; });
    t["detection.demod_bandwidth_hz"] = number([](ScanConfig& c) -> double& { return c.detection.demod_bandwidth_hz; });
    t["detection.sample_rate_hz"] = number([](ScanConfig& c) -> double& { return c.detection.sample_rate_hz; });
    t["detection.electronic_gain"] = number([](ScanConfig& c) -> double& { return c.detection.electronic_gain; });
    t["detection.block_size"] = [](ScanConfig& c, const std::string& k, const std::string& v) {
      c.detection.block_size = parse_unsigned(k, v);
    };
    t["detection.blocks_per_point"] = [](ScanConfig& c, const std::string& k, const std::string& v) {
      c.blocks_per_point = parse_unsigned(k, v);
    };
    t["detection.seed"] = [](ScanConfig& c, const std::string& k, const std::string& v) {
      c.detection.seed = parse_unsigned(k, v);
    };

    t["sweep.kind"] = [](ScanConfig& c, const std::string&, const std::string& v) { c.kind = parse_sweep_kind(v); };
    t["sweep.start"] = number([](ScanConfig& c) -> double& { return c.range.start; });
    t["sweep.stop"] = number([](ScanConfig& c) -> double& { return c.range.stop; });
    t["sweep.points"] = [](ScanConfig& c, const std::string& k, const std::string& v) {
      c.range.points = parse_unsigned(k, v);
    };
    t["run.mode"] = [](ScanConfig& c, const std::string&, const std::string& v) { c.mode = parse_run_mode(v); };
    t["run.source"] = [](ScanConfig& c, const std::string&, const std::string& v) { c.source = parse_source(v); };
    t["output.path"] = [](ScanConfig& c, const std::string&, const std::string& v) { c.output_path = v; };

    using M = MeasuredWitnessTerms;
    t["witness.measured.p_minus"] = measured_term([](M& m) -> double& { return m.p_minus; });
    t["witness.measured.q_plus_corr"] = measured_term([](M& m) -> double& { return m.q_plus_corr; });
    t["witness.measured.p01"] = measured_term([](M& m) -> double& { return m.p01; });
    t["witness.measured.q01_corr"] = measured_term([](M& m) -> double& { return m.q01_corr; });
    t["witness.measured.p02"] = measured_term([](M& m) -> double& { return m.p02; });
    t["witness.measured.q02_corr"] = measured_term([](M& m) -> double& { return m.q02_corr; });
    t["witness.measured.q_plus"] = [](ScanConfig& c, const std::string& k, const std::string& v) {
      if (!c.measured) c.measured.emplace();
      c.measured->q_plus = parse_double(k, v);
    };
    t["witness.measured.q01"] = [](ScanConfig& c, const std::string& k, const std::string& v) {
      if (!c.measured) c.measured.emplace();
      c.measured->q01 = parse_double(k, v);
    };
    t["witness.measured.q02"] = [](ScanConfig& c, const std::string& k, const std::string& v) {
      if (!c.measured) c.measured.emplace();
      c.measured->q02 = parse_double(k, v);
    };
    return t;
  }();
  return table;
}

SweepRange default_range(SweepKind kind) {
  switch (kind) {
    case SweepKind::DetuningScan: return {-8.0, 8.0, 321};
    case SweepKind::SigmaSweep: return {1.05, 2.5, 30};
    case SweepKind::CombSpectrum: return {10e3, 1e6, 991};
    case SweepKind::WitnessPoint: return {0.0, 1.0, 2};
  }
  return {};
}

const std::set<std::string> kMeasuredRequired{"witness.measured.p_minus", "witness.measured.q_plus_corr",
                                              "witness.measured.p01",     "witness.measured.q01_corr",
                                              "witness.measured.p02",     "witness.measured.q02_corr"};

std::string format_double(double v) { return fmt::format("{}", v); }  // shortest round-trip form

}  // namespace

double SweepRange::at(std::size_t i) const {
  if (points < 2) throw InvalidArgument("a sweep needs at least two points");
  if (i >= points) throw InvalidArgument(fmt::format("sweep index {} out of range", i));
  if (i + 1 == points) return stop;
  return start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
}

void ScanConfig::validate() const {
  try {
    opo.validate();
    comb.validate();
    for (const auto& c : cavities) c.validate();
    detection.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (source == Source::Opo && kind != SweepKind::SigmaSweep && !(opo.sigma > 1.0)) {
    throw ConfigError(fmt::format("opo.sigma must exceed 1 (above threshold), got {}", opo.sigma));
  }
  if (blocks_per_point == 0) throw ConfigError("detection.blocks_per_point must be positive");
  if (kind != SweepKind::WitnessPoint) {
    if (range.points < 2) throw ConfigError(fmt::format("sweep.points must be >= 2, got {}", range.points));
    if (!(range.start < range.stop) || !std::isfinite(range.start) || !std::isfinite(range.stop)) {
      throw ConfigError(fmt::format("sweep range must be ordered, got [{}, {}]", range.start, range.stop));
    }
  }
  if (source == Source::Measured) {
    if (kind != SweepKind::WitnessPoint) throw ConfigError("run.source=measured is only valid for witness points");
    if (!measured) throw ConfigError("run.source=measured needs witness.measured.* terms");
  }
}

ScanConfig parse_config(const std::string& text) {
  ScanConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int line_no = 0;
  std::optional<double> pump_power;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected key=value", line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) throw ConfigError(fmt::format("line {}: empty value for {}", line_no, key));
    if (!seen.insert(key).second) throw ConfigError(fmt::format("line {}: duplicate key {}", line_no, key));

    if (key == "opo.pump_power_w") {  // resolved below, once the threshold is known
      pump_power = parse_double(key, value);
      continue;
    }
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(fmt::format("line {}: unknown key {}", line_no, key));
    it->second(cfg, key, value);
  }

  if (pump_power) {
    if (seen.count("opo.sigma")) throw ConfigError("give either opo.sigma or opo.pump_power_w, not both");
    if (!(cfg.opo.threshold_power_w > 0.0)) throw ConfigError("opo.threshold_power_w must be positive");
    cfg.opo.sigma = sigma_from_pump_power(cfg.opo, *pump_power);
  }

  const bool any_range = seen.count("sweep.start") || seen.count("sweep.stop") || seen.count("sweep.points");
  if (!any_range) {
    cfg.range = default_range(cfg.kind);
  } else {
    const SweepRange d = default_range(cfg.kind);
    if (!seen.count("sweep.start")) cfg.range.start = d.start;
    if (!seen.count("sweep.stop")) cfg.range.stop = d.stop;
    if (!seen.count("sweep.points")) cfg.range.points = d.points;
  }

  if (cfg.measured) {
    for (const auto& key : kMeasuredRequired) {
      if (!seen.count(key)) throw ConfigError(fmt::format("measured witness terms need {}", key));
    }
  }
  cfg.validate();
  return cfg;
}

ScanConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string to_config_text(const ScanConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kv;
  auto add = [&kv](std::string key, std::string value) { kv.emplace_back(std::move(key), std::move(value)); };
  add("opo.pump_coupler_reflectivity", format_double(cfg.opo.pump_coupler_reflectivity));
  add("opo.twin_coupler_transmission", format_double(cfg.opo.twin_coupler_transmission));
  add("opo.pump_spurious_loss", format_double(cfg.opo.pump_spurious_loss));
  add("opo.twin_spurious_loss", format_double(cfg.opo.twin_spurious_loss));
  add("opo.cavity_bandwidth_twins_hz", format_double(cfg.opo.cavity_bandwidth_twins_hz));
  add("opo.threshold_power_w", format_double(cfg.opo.threshold_power_w));
  add("opo.sigma", format_double(cfg.opo.sigma));
  add("opo.pump_excess_phase_in", format_double(cfg.opo.pump_excess_phase_in));
  add("comb.enabled", cfg.comb_enabled ? "true" : "false");
  add("comb.plateau_db", format_double(cfg.comb.plateau_db));
  add("comb.peak_spacing_hz", format_double(cfg.comb.peak_spacing_hz));
  add("comb.peak_height_db", format_double(cfg.comb.peak_height_db));
  add("comb.peak_width_hz", format_double(cfg.comb.peak_width_hz));
  for (int m = 0; m < kModeCount; ++m) {
    const std::string prefix = std::string("cavity.") + kBeamNames[m];
    add(prefix + ".bandwidth_hz", format_double(cfg.cavities[m].bandwidth_hz));
    add(prefix + ".coupling_ratio", format_double(cfg.cavities[m].coupling_ratio));
  }
  add("detection.efficiency_twins", format_double(cfg.detection.efficiency_twins));
  add("detection.efficiency_pump", format_double(cfg.detection.efficiency_pump));
  add("detection.analysis_frequency_hz", format_double(cfg.detection.analysis_frequency_hz));
  add("detection.demod_bandwidth_hz", format_double(cfg.detection.demod_bandwidth_hz));
  add("detection.sample_rate_hz", format_double(cfg.detection.sample_rate_hz));
  add("detection.electronic_gain", format_double(cfg.detection.electronic_gain));
  add("detection.block_size", std::to_string(cfg.detection.block_size));
  add("detection.blocks_per_point", std::to_string(cfg.blocks_per_point));
  add("detection.seed", std::to_string(cfg.detection.seed));
  add("sweep.kind", to_string(cfg.kind));
  add("sweep.start", format_double(cfg.range.start));
  add("sweep.stop", format_double(cfg.range.stop));
  add("sweep.points", std::to_string(cfg.range.points));
  add("run.mode", to_string(cfg.mode));
  add("run.source", to_string(cfg.source));
  if (!cfg.output_path.empty()) add("output.path", cfg.output_path);
  if (cfg.measured) {
    const auto& m = *cfg.measured;
    add("witness.measured.p_minus", format_double(m.p_minus));
    add("witness.measured.q_plus_corr", format_double(m.q_plus_corr));
    add("witness.measured.p01", format_double(m.p01));
    add("witness.measured.q01_corr", format_double(m.q01_corr));
    add("witness.measured.p02", format_double(m.p02));
    add("witness.measured.q02_corr", format_double(m.q02_corr));
    if (m.q_plus) add("witness.measured.q_plus", format_double(*m.q_plus));
    if (m.q01) add("witness.measured.q01", format_double(*m.q01));
    if (m.q02) add("witness.measured.q02", format_double(*m.q02));
  }
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string config_hash(const ScanConfig& cfg) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : to_config_text(cfg)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

std::uint64_t resolve_seed(const ScanConfig& cfg, std::optional<std::uint64_t> cli_seed) {
  if (cli_seed) return *cli_seed;
  if (const char* env = std::getenv("OPO_SEED"); env != nullptr && *env != '\0') {
    return parse_unsigned("OPO_SEED", trim(env));
  }
  return cfg.detection.seed;
}

std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::DetuningScan: return "detuning";
    case SweepKind::SigmaSweep: return "sigma";
    case SweepKind::WitnessPoint: return "witness";
    case SweepKind::CombSpectrum: return "comb";
  }
  return "?";
}

std::string to_string(RunMode mode) { return mode == RunMode::Analytic ? "analytic" : "montecarlo"; }

std::string to_string(Source source) {
  switch (source) {
    case Source::Opo: return "opo";
    case Source::Vacuum: return "vacuum";
    case Source::Measured: return "measured";
  }
  return "?";
}

SweepKind parse_sweep_kind(const std::string& text) {
  if (text == "detuning") return SweepKind::DetuningScan;
  if (text == "sigma") return SweepKind::SigmaSweep;
  if (text == "witness") return SweepKind::WitnessPoint;
  if (text == "comb") return SweepKind::CombSpectrum;
  throw ConfigError(fmt::format("sweep.kind: unknown kind '{}' (detuning, sigma, witness, comb)", text));
}

RunMode parse_run_mode(const std::string& text) {
  if (text == "analytic") return RunMode::Analytic;
  if (text == "montecarlo") return RunMode::MonteCarlo;
  throw ConfigError(fmt::format("run.mode: unknown mode '{}' (analytic, montecarlo)", text));
}

Source parse_source(const std::string& text) {
  if (text == "opo") return Source::Opo;
  if (text == "vacuum") return Source::Vacuum;
  if (text == "measured") return Source::Measured;
  throw ConfigError(fmt::format("run.source: unknown source '{}' (opo, vacuum, measured)", text));
}

}  // namespace opo
