#include "opo/detection_chain.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "opo/errors.hpp"

namespace opo {

void DetectionParams::validate() const {
  for (const auto& [value, name] : {std::pair{efficiency_twins, "efficiency_twins"},
                                   std::pair{efficiency_pump, "efficiency_pump"}}) {
    if (!(value > 0.0 && value <= 1.0)) throw InvalidArgument(fmt::format("{} must lie in (0, 1], got {}", name, value));
  }
  for (const auto& [value, name] : {std::pair{analysis_frequency_hz, "analysis_frequency_hz"},
                                   std::pair{demod_bandwidth_hz, "demod_bandwidth_hz"},
                                   std::pair{sample_rate_hz, "sample_rate_hz"},
                                   std::pair{electronic_gain, "electronic_gain"}}) {
    if (!(value > 0.0) || !std::isfinite(value)) throw InvalidArgument(fmt::format("{} must be positive, got {}", name, value));
  }
  if (block_size < 2) throw InvalidArgument(fmt::format("block_size must be >= 2, got {}", block_size));
}

SpectralCovariance apply_efficiency(const SpectralCovariance& s, const DetectionParams& det) {
  det.validate();
  require_physical(s, "apply_efficiency");
  const Matrix6 in = s.matrix();
  Vector6 root_eta;
  for (int i = 0; i < kDim; ++i) root_eta(i) = std::sqrt(det.efficiency(static_cast<Mode>(i / 2)));
  Matrix6 out = root_eta.asDiagonal() * in * root_eta.asDiagonal();
  for (int i = 0; i < kDim; ++i) out(i, i) += 1.0 - root_eta(i) * root_eta(i);
  out = 0.5 * (out + out.transpose()).eval();
  return SpectralCovariance::from_matrix(out, s.analysis_frequency_hz());
}

Eigen::Matrix3d detector_covariance(const SpectralCovariance& s, const DetectorMapping& mapping) {
  Eigen::Matrix3d c;
  for (int a = 0; a < kModeCount; ++a) {
    for (int b = 0; b < kModeCount; ++b) {
      c(a, b) = s.at(basis_index(static_cast<Mode>(a), mapping.axes[a]),
                     basis_index(static_cast<Mode>(b), mapping.axes[b]));
    }
  }
  return c;
}

PhotocurrentRecord synthesize_record(const SpectralCovariance& s, const DetectionParams& det, std::size_t n_blocks,
                                     const DetectorMapping& mapping) {
  det.validate();
  if (n_blocks == 0) throw InvalidArgument("synthesize_record needs at least one block");

  PhotocurrentRecord record;
  record.params = det;
  record.mapping = mapping;
  record.generating_covariance = det.electronic_gain * detector_covariance(s, mapping);

  // Symmetric square root tolerates rank-deficient (and rounding-negative) input.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(record.generating_covariance);
  const Eigen::Matrix3d factor =
      eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();

  std::mt19937_64 rng(det.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = n_blocks * det.block_size;
  record.samples.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Eigen::Vector3d z;
    z << normal(rng), normal(rng), normal(rng);
    record.samples.emplace_back(factor * z);
  }
  return record;
}

std::vector<double> per_block_variances(const PhotocurrentRecord& record, const Eigen::Vector3d& weights) {
  const std::size_t blocks = record.block_count();
  if (blocks == 0) throw InvalidArgument("record holds no complete block");
  const std::size_t m = record.params.block_size;
  std::vector<double> out;
  out.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) {
    double mean = 0.0;
    for (std::size_t k = 0; k < m; ++k) mean += weights.dot(record.samples[b * m + k]);
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double d = weights.dot(record.samples[b * m + k]) - mean;
      ss += d * d;
    }
    out.push_back(ss / static_cast<double>(m - 1));
  }
  return out;
}

VarianceEstimate block_variances(const PhotocurrentRecord& record, const Eigen::Vector3d& weights) {
  const auto v = per_block_variances(record, weights);
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  VarianceEstimate est;
  est.value = mean;
  est.blocks_used = v.size();
  if (v.size() >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    est.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return est;
}

Eigen::Matrix3d pooled_covariance(const PhotocurrentRecord& record) {
  if (record.samples.size() < 2) throw InvalidArgument("record too short for a covariance");
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& x : record.samples) mean += x;
  mean /= static_cast<double>(record.samples.size());
  Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
  for (const auto& x : record.samples) c += (x - mean) * (x - mean).transpose();
  return c / static_cast<double>(record.samples.size() - 1);
}

CorrectedEstimate corrected_block_variance(const PhotocurrentRecord& record, const Eigen::Vector3d& weights,
                                           Mode correction) {
  const Eigen::Matrix3d c = pooled_covariance(record);
  const int k = static_cast<int>(correction);
  if (!(c(k, k) > 0.0)) throw DegenerateMinimization("correction channel carries no noise");
  CorrectedEstimate out;
  out.alpha = weights.dot(c.col(k)) / c(k, k);
  Eigen::Vector3d w = weights;
  w(k) -= out.alpha;
  out.estimate = block_variances(record, w);
  return out;
}

VarianceEstimate sql_normalize(const VarianceEstimate& raw, const VarianceEstimate& reference) {
  if (!(reference.value > 0.0)) {
    throw InvalidArgument(fmt::format("SQL reference must be positive, got {}", reference.value));
  }
  VarianceEstimate out;
  out.value = raw.value / reference.value;
  const double a = raw.standard_error / reference.value;
  const double b = raw.value * reference.standard_error / (reference.value * reference.value);
  out.standard_error = std::sqrt(a * a + b * b);
  out.blocks_used = std::min(raw.blocks_used, reference.blocks_used);
  return out;
}

void write_record_csv(std::ostream& out, const PhotocurrentRecord& record) {
  out << "sample_index,i0,i1,i2\n";
  for (std::size_t k = 0; k < record.samples.size(); ++k) {
    const auto& x = record.samples[k];
    out << fmt::format("{},{:.10g},{:.10g},{:.10g}\n", k, x(0), x(1), x(2));
  }
}

}  // namespace opo
