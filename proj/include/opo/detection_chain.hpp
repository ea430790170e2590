#pragma once

// Photodetection, demodulation and block-variance estimation.
//
// The demodulated baseband is white within the demodulation band (which equals
// the A/D rate), so a record is a sequence of independent Gaussian 3-vectors,
// one sample per beam, whose covariance is the detected spectral covariance of
// the quadratures currently routed to the detectors.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "opo/gaussian_core.hpp"

namespace opo {

struct DetectionParams {
  double efficiency_twins = 0.87;
  double efficiency_pump = 0.74;
  double analysis_frequency_hz = 21e6;
  double demod_bandwidth_hz = 600e3;
  double sample_rate_hz = 600e3;
  std::size_t block_size = 1000;
  std::uint64_t seed = 20070101;
  // Photocurrent scale in arbitrary units; sql_normalize removes it.
  double electronic_gain = 1.0;

  void validate() const;
  double efficiency(Mode mode) const { return mode == Mode::Pump ? efficiency_pump : efficiency_twins; }
};

// Beam-splitter loss in front of each detector: eta S + (1 - eta) I per beam,
// sqrt(eta_a eta_b) on cross blocks. Throws NonPhysical on non-physical input.
SpectralCovariance apply_efficiency(const SpectralCovariance& s, const DetectionParams& det);

// Which quadrature of each beam reaches its detector.
struct DetectorMapping {
  std::array<Quadrature, kModeCount> axes{Quadrature::P, Quadrature::P, Quadrature::P};

  static DetectorMapping amplitude() { return {}; }
  static DetectorMapping phase() { return {{Quadrature::Q, Quadrature::Q, Quadrature::Q}}; }
};

// 3x3 covariance of the detector outputs selected by the mapping.
Eigen::Matrix3d detector_covariance(const SpectralCovariance& s, const DetectorMapping& mapping);

struct PhotocurrentRecord {
  std::vector<Eigen::Vector3d> samples;
  DetectionParams params;
  DetectorMapping mapping;
  Eigen::Matrix3d generating_covariance;

  std::size_t block_count() const { return samples.size() / params.block_size; }
};

// Deterministic for a given seed. S is used as given (no physicality check),
// which lets tests feed degenerate matrices.
PhotocurrentRecord synthesize_record(const SpectralCovariance& s, const DetectionParams& det,
                                     std::size_t n_blocks, const DetectorMapping& mapping = {});

struct VarianceEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t blocks_used = 0;
};

// Per-block unbiased sample variance of the projection weights . sample,
// averaged over blocks; the standard error is the spread of the block
// variances over sqrt(blocks).
VarianceEstimate block_variances(const PhotocurrentRecord& record, const Eigen::Vector3d& weights);
// Block variances of every projection; used for serial-correlation checks.
std::vector<double> per_block_variances(const PhotocurrentRecord& record, const Eigen::Vector3d& weights);

// Sample covariance of the whole record.
Eigen::Matrix3d pooled_covariance(const PhotocurrentRecord& record);

// Variance of weights . x - alpha x_k, with alpha estimated from the pooled
// covariance as the minimiser.
struct CorrectedEstimate {
  VarianceEstimate estimate;
  double alpha = 0.0;
};
CorrectedEstimate corrected_block_variance(const PhotocurrentRecord& record, const Eigen::Vector3d& weights,
                                           Mode correction);

// raw / reference with relative errors added in quadrature.
VarianceEstimate sql_normalize(const VarianceEstimate& raw, const VarianceEstimate& reference);

// CSV: header "sample_index,i0,i1,i2".
void write_record_csv(std::ostream& out, const PhotocurrentRecord& record);

}  // namespace opo
