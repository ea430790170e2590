#include "opo/analysis_cavity.hpp"

#include <cmath>

#include <fmt/format.h>

#include "opo/errors.hpp"

namespace opo {

void AnalysisCavity::validate() const {
  if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) {
    throw InvalidArgument(fmt::format("analysis cavity bandwidth must be positive, got {}", bandwidth_hz));
  }
  if (!(coupling_ratio > 0.0 && coupling_ratio <= 1.0)) {
    throw InvalidArgument(fmt::format("coupling ratio must lie in (0, 1], got {}", coupling_ratio));
  }
  if (!std::isfinite(detuning)) throw InvalidArgument("analysis cavity detuning must be finite");
}

std::array<AnalysisCavity, kModeCount> default_cavities(double coupling_ratio) {
  return {AnalysisCavity{11.5e6, coupling_ratio, 0.0}, AnalysisCavity{14.5e6, coupling_ratio, 0.0},
          AnalysisCavity{13.6e6, coupling_ratio, 0.0}};
}

std::array<AnalysisCavity, kModeCount> with_detuning(std::array<AnalysisCavity, kModeCount> cavities,
                                                     double detuning) {
  for (auto& c : cavities) c.detuning = detuning;
  return cavities;
}

std::complex<double> reflection_coefficient(const AnalysisCavity& cavity, double offset_hz) {
  cavity.validate();
  const double x = cavity.detuning + offset_hz / cavity.bandwidth_hz;
  const std::complex<double> two_ix(0.0, 2.0 * x);
  return (1.0 - 2.0 * cavity.coupling_ratio + two_ix) / (1.0 + two_ix);
}

Eigen::Matrix2cd RotationCoefficients::matrix() const {
  Eigen::Matrix2cd m;
  m << a_pp, a_pq, a_qp, a_qq;
  return m;
}

RotationCoefficients rotation_coefficients(const AnalysisCavity& cavity, double analysis_frequency_hz) {
  if (!(analysis_frequency_hz > 0.0)) {
    throw InvalidArgument(fmt::format("analysis frequency must be positive, got {}", analysis_frequency_hz));
  }
  const auto carrier = reflection_coefficient(cavity, 0.0);
  const auto upper = reflection_coefficient(cavity, analysis_frequency_hz);
  const auto lower = reflection_coefficient(cavity, -analysis_frequency_hz);

  // An impedance-matched cavity on resonance reflects no carrier; keep the
  // incident phase reference in that case.
  const double theta = std::abs(carrier) > 1e-12 ? std::arg(carrier) : 0.0;
  const auto reference = std::polar(1.0, -theta);
  const auto u = reference * upper;
  const auto v = std::conj(reference) * std::conj(lower);
  const std::complex<double> i(0.0, 1.0);

  RotationCoefficients rc;
  rc.a_pp = 0.5 * (u + v);
  rc.a_pq = 0.5 * i * (u - v);
  rc.a_qp = -0.5 * i * (u - v);
  rc.a_qq = 0.5 * (u + v);
  return rc;
}

CrossSpectralMatrix reflect_covariance(const CrossSpectralMatrix& s,
                                       const std::array<AnalysisCavity, kModeCount>& cavities,
                                       double analysis_frequency_hz) {
  require_physical(s.covariance(), "reflect_covariance");
  Matrix6c transfer = Matrix6c::Zero();
  Matrix6c loss_noise = Matrix6c::Zero();
  for (int m = 0; m < kModeCount; ++m) {
    const Eigen::Matrix2cd r = rotation_coefficients(cavities[m], analysis_frequency_hz).matrix();
    transfer.block<2, 2>(2 * m, 2 * m) = r;
    loss_noise.block<2, 2>(2 * m, 2 * m) = Eigen::Matrix2cd::Identity() - r * r.adjoint();
  }
  const Matrix6c out = transfer * s.entries() * transfer.adjoint() + loss_noise;
  return CrossSpectralMatrix(out, s.analysis_frequency_hz());
}

SpectralCovariance reflect_covariance(const SpectralCovariance& s,
                                      const std::array<AnalysisCavity, kModeCount>& cavities,
                                      double analysis_frequency_hz) {
  return reflect_covariance(CrossSpectralMatrix(s), cavities, analysis_frequency_hz).covariance();
}

}  // namespace opo
