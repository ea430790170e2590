#include "opo/scan_runner.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include <fmt/format.h>

#include "opo/analysis_cavity.hpp"
#include "opo/detection_chain.hpp"
#include "opo/errors.hpp"

namespace opo {

namespace {

constexpr std::uint64_t kCalibrationSalt = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kPhaseRecordSalt = 0xc2b2ae3d27d4eb4fULL;
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

struct Projection {
  std::string name;
  Quadrature axis;
  Eigen::Vector3d weights;
  std::optional<Mode> correction;
};

Eigen::Vector3d vec(double a, double b, double c) { return {a, b, c}; }

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

// Evaluates projections of the detected beams either exactly or from records.
class PointEstimator {
 public:
  // Analytic.
  explicit PointEstimator(const SpectralCovariance& detected) : covariance_(detected) {}

  // Monte Carlo: one record per requested quadrature mapping.
  PointEstimator(const SpectralCovariance& detected, const ScanConfig& cfg, std::uint64_t seed,
                 const PhotocurrentRecord* calibration, bool need_phase)
      : covariance_(detected), calibration_(calibration) {
    DetectionParams det = cfg.detection;
    det.seed = seed;
    amplitude_ = synthesize_record(detected, det, cfg.blocks_per_point, DetectorMapping::amplitude());
    if (need_phase) {
      det.seed = seed ^ kPhaseRecordSalt;
      phase_ = synthesize_record(detected, det, cfg.blocks_per_point, DetectorMapping::phase());
    }
  }

  Estimate operator()(const Projection& p) const {
    if (calibration_ == nullptr) return analytic(p);
    const PhotocurrentRecord& record = p.axis == Quadrature::P ? *amplitude_ : *phase_;
    const VarianceEstimate raw = p.correction ? corrected_block_variance(record, p.weights, *p.correction).estimate
                                              : block_variances(record, p.weights);
    // The SQL unit is that of the unit-norm combination; the correction is
    // classical post-processing and does not change it.
    const auto normalized = sql_normalize(raw, block_variances(*calibration_, p.weights));
    return {normalized.value, normalized.standard_error};
  }

  // Partial covariance estimate (P and Q blocks) from the records.
  SpectralCovariance estimated_covariance() const {
    if (calibration_ == nullptr) return covariance_;
    const double unit = pooled_covariance(*calibration_).diagonal().mean();
    auto s = SpectralCovariance::unknown(covariance_.analysis_frequency_hz());
    const Eigen::Matrix3d cp = pooled_covariance(*amplitude_) / unit;
    const Eigen::Matrix3d cq = pooled_covariance(*phase_) / unit;
    for (int a = 0; a < kModeCount; ++a) {
      for (int b = a; b < kModeCount; ++b) {
        s.set(basis_index(static_cast<Mode>(a), Quadrature::P), basis_index(static_cast<Mode>(b), Quadrature::P),
              cp(a, b));
        s.set(basis_index(static_cast<Mode>(a), Quadrature::Q), basis_index(static_cast<Mode>(b), Quadrature::Q),
              cq(a, b));
      }
    }
    return s;
  }

 private:
  Estimate analytic(const Projection& p) const {
    const DetectorMapping mapping = p.axis == Quadrature::P ? DetectorMapping::amplitude() : DetectorMapping::phase();
    const Eigen::Matrix3d c = detector_covariance(covariance_, mapping);
    Eigen::Vector3d w = p.weights;
    if (p.correction) {
      const int k = static_cast<int>(*p.correction);
      if (!(c(k, k) > 0.0)) throw DegenerateMinimization("correction beam carries no noise");
      w(k) -= w.dot(c.col(k)) / c(k, k);
    }
    return {w.dot(c * w), 0.0};
  }

  SpectralCovariance covariance_;
  const PhotocurrentRecord* calibration_ = nullptr;
  std::optional<PhotocurrentRecord> amplitude_;
  std::optional<PhotocurrentRecord> phase_;
};

std::optional<PhotocurrentRecord> calibration_record(const ScanConfig& cfg) {
  if (cfg.mode != RunMode::MonteCarlo) return std::nullopt;
  DetectionParams det = cfg.detection;
  det.seed = cfg.detection.seed ^ kCalibrationSalt;
  return synthesize_record(SpectralCovariance::vacuum(det.analysis_frequency_hz), det, cfg.blocks_per_point,
                           DetectorMapping::amplitude());
}

PointEstimator make_estimator(const SpectralCovariance& detected, const ScanConfig& cfg, std::size_t point,
                              const std::optional<PhotocurrentRecord>& calibration, bool need_phase) {
  if (!calibration) return PointEstimator(detected);
  return PointEstimator(detected, cfg, cfg.detection.seed ^ static_cast<std::uint64_t>(point), &*calibration,
                        need_phase);
}

const std::vector<Projection>& detuning_projections() {
  static const std::vector<Projection> p{
      {"si_sum", Quadrature::P, vec(0, kInvSqrt2, kInvSqrt2), std::nullopt},
      {"si_diff", Quadrature::P, vec(0, kInvSqrt2, -kInvSqrt2), std::nullopt},
      {"si_sum_corr", Quadrature::P, vec(0, kInvSqrt2, kInvSqrt2), Mode::Pump},
      {"ps_sum", Quadrature::P, vec(kInvSqrt2, kInvSqrt2, 0), std::nullopt},
      {"ps_diff", Quadrature::P, vec(-kInvSqrt2, kInvSqrt2, 0), std::nullopt},
      {"ps_diff_corr", Quadrature::P, vec(-kInvSqrt2, kInvSqrt2, 0), Mode::Idler},
      {"pi_sum", Quadrature::P, vec(kInvSqrt2, 0, kInvSqrt2), std::nullopt},
      {"pi_diff", Quadrature::P, vec(-kInvSqrt2, 0, kInvSqrt2), std::nullopt},
      {"pi_diff_corr", Quadrature::P, vec(-kInvSqrt2, 0, kInvSqrt2), Mode::Signal},
  };
  return p;
}

const std::vector<Projection>& sigma_projections() {
  static const std::vector<Projection> p{
      {"p_minus", Quadrature::P, vec(0, kInvSqrt2, -kInvSqrt2), std::nullopt},
      {"q_plus", Quadrature::Q, vec(0, kInvSqrt2, kInvSqrt2), std::nullopt},
      {"p0", Quadrature::P, vec(1, 0, 0), std::nullopt},
      {"q0", Quadrature::Q, vec(1, 0, 0), std::nullopt},
      {"q_plus_corr", Quadrature::Q, vec(0, kInvSqrt2, kInvSqrt2), Mode::Pump},
      {"p01", Quadrature::P, vec(kInvSqrt2, kInvSqrt2, 0), std::nullopt},
      {"q01_corr", Quadrature::Q, vec(-kInvSqrt2, kInvSqrt2, 0), Mode::Idler},
  };
  return p;
}

std::vector<std::string> with_se_columns(std::string first, const std::vector<Projection>& projections,
                                         const std::vector<std::string>& extra) {
  std::vector<std::string> cols{std::move(first)};
  for (const auto& p : projections) cols.push_back(p.name);
  cols.insert(cols.end(), extra.begin(), extra.end());
  for (const auto& p : projections) cols.push_back(p.name + "_se");
  return cols;
}

void require_kind(const ScanConfig& cfg, SweepKind kind) {
  if (cfg.kind != kind) {
    throw ConfigError(fmt::format("config is for a {} run, not {}", to_string(cfg.kind), to_string(kind)));
  }
}

void stamp(ScanTable& table, const ScanConfig& cfg) {
  table.set_metadata("config_hash", config_hash(cfg));
  table.set_metadata("seed", std::to_string(cfg.detection.seed));
  table.set_metadata("tool_version", kToolVersion);
  table.set_metadata("kind", to_string(cfg.kind));
  table.set_metadata("mode", to_string(cfg.mode));
}

}  // namespace

CrossSpectralMatrix source_cross_spectrum(const ScanConfig& cfg, double sigma) {
  const double f = cfg.detection.analysis_frequency_hz;
  switch (cfg.source) {
    case Source::Vacuum: return CrossSpectralMatrix(SpectralCovariance::vacuum(f));
    case Source::Measured: throw ConfigError("measured witness terms do not define a covariance");
    case Source::Opo: break;
  }
  OpoParams params = cfg.opo;
  params.sigma = sigma;
  if (cfg.comb_enabled) return output_cross_spectrum_with_excess(params, cfg.comb, f);
  return output_cross_spectrum(params, f);
}

SpectralCovariance detected_covariance(const ScanConfig& cfg, double sigma) {
  return apply_efficiency(source_cross_spectrum(cfg, sigma).covariance(), cfg.detection);
}

std::vector<std::string> detuning_scan_columns() { return with_se_columns("delta", detuning_projections(), {}); }

ScanTable run_detuning_scan(const ScanConfig& cfg) {
  require_kind(cfg, SweepKind::DetuningScan);
  cfg.validate();
  if (cfg.range.start > -3.0 || cfg.range.stop < 3.0) {
    throw ConfigError(
        fmt::format("detuning range [{}, {}] must cover at least [-3, 3]", cfg.range.start, cfg.range.stop));
  }
  const double f = cfg.detection.analysis_frequency_hz;
  const CrossSpectralMatrix source = source_cross_spectrum(cfg, cfg.opo.sigma);
  const auto calibration = calibration_record(cfg);

  ScanTable table(detuning_scan_columns());
  const auto& projections = detuning_projections();
  for (std::size_t i = 0; i < cfg.range.points; ++i) {
    const double delta = cfg.range.at(i);
    const auto reflected = reflect_covariance(source, with_detuning(cfg.cavities, delta), f).covariance();
    const auto detected = apply_efficiency(reflected, cfg.detection);
    const auto estimator = make_estimator(detected, cfg, i, calibration, false);

    std::vector<double> row{delta};
    std::vector<double> errors;
    for (const auto& p : projections) {
      const auto e = estimator(p);
      row.push_back(e.value);
      errors.push_back(e.standard_error);
    }
    row.insert(row.end(), errors.begin(), errors.end());
    table.add_row(std::move(row));
  }
  stamp(table, cfg);
  return table;
}

std::vector<std::string> sigma_sweep_columns() { return with_se_columns("sigma", sigma_projections(), {"V0", "V1", "V2"}); }

ScanTable run_sigma_sweep(const ScanConfig& cfg) {
  require_kind(cfg, SweepKind::SigmaSweep);
  cfg.validate();
  if (!(cfg.range.start > 1.0)) {
    throw ConfigError(fmt::format("sigma sweep must stay above threshold, range starts at {}", cfg.range.start));
  }
  const auto calibration = calibration_record(cfg);

  ScanTable table(sigma_sweep_columns());
  for (std::size_t i = 0; i < cfg.range.points; ++i) {
    const double sigma = cfg.range.at(i);
    const auto estimator = make_estimator(detected_covariance(cfg, sigma), cfg, i, calibration, true);

    std::vector<double> row{sigma};
    std::vector<double> errors;
    for (const auto& p : sigma_projections()) {
      const auto e = estimator(p);
      row.push_back(e.value);
      errors.push_back(e.standard_error);
    }
    const auto report = tripartite_witnesses(estimator.estimated_covariance());
    row.insert(row.end(), report.v.begin(), report.v.end());
    row.insert(row.end(), errors.begin(), errors.end());
    table.add_row(std::move(row));
  }
  stamp(table, cfg);
  return table;
}

WitnessReport run_witness_point(const ScanConfig& cfg) {
  require_kind(cfg, SweepKind::WitnessPoint);
  cfg.validate();
  if (cfg.source == Source::Measured) return witnesses_from_terms(*cfg.measured);
  const auto calibration = calibration_record(cfg);
  const auto estimator = make_estimator(detected_covariance(cfg, cfg.opo.sigma), cfg, 0, calibration, true);
  return tripartite_witnesses(estimator.estimated_covariance());
}

std::vector<std::string> comb_spectrum_columns() { return {"frequency_hz", "comb_factor", "pump_phase_in", "q0", "q_plus"}; }

ScanTable run_comb_spectrum(const ScanConfig& cfg) {
  require_kind(cfg, SweepKind::CombSpectrum);
  cfg.validate();
  if (!(cfg.range.start > 0.0)) throw ConfigError("comb spectrum frequencies must be positive");
  if (cfg.source == Source::Measured) throw ConfigError("comb spectrum needs a model source");

  ScanTable table(comb_spectrum_columns());
  for (std::size_t i = 0; i < cfg.range.points; ++i) {
    const double f = cfg.range.at(i);
    const double factor = comb_spectrum(cfg.comb, f);
    double q0 = 1.0;
    double q_plus = 1.0;
    if (cfg.source == Source::Opo) {
      const auto detected =
          apply_efficiency(output_spectra_with_excess(cfg.opo, cfg.comb, f), cfg.detection);
      q0 = detected.at(Mode::Pump, Quadrature::Q, Mode::Pump, Quadrature::Q);
      q_plus = combination_variance(detected, combos::twin_phase_sum());
    }
    table.add_row({f, factor, cfg.opo.pump_excess_phase_in * factor, q0, q_plus});
  }
  stamp(table, cfg);
  return table;
}

ScanTable run_table(const ScanConfig& cfg) {
  switch (cfg.kind) {
    case SweepKind::DetuningScan: return run_detuning_scan(cfg);
    case SweepKind::SigmaSweep: return run_sigma_sweep(cfg);
    case SweepKind::CombSpectrum: return run_comb_spectrum(cfg);
    case SweepKind::WitnessPoint: break;
  }
  throw ConfigError("witness points produce a report, not a table");
}

}  // namespace opo
