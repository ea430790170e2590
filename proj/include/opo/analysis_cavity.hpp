#pragma once

// Self-homodyne quadrature rotation by reflection off a detuned analysis cavity.
//
// A single-pole cavity reflects a frequency component at normalised detuning x
// (in units of the cavity FWHM) with
//
//   r(x) = (1 - 2g + 2ix) / (1 + 2ix)
//
// where g is the coupler's share of the total cavity loss rate. The carrier
// sits at x = Delta, the noise sidebands at x = Delta +/- Omega/dnu. Detecting
// the reflected intensity measures the reflected amplitude quadrature, whose
// phase reference is the reflected carrier.

#include <array>
#include <complex>

#include "opo/gaussian_core.hpp"

namespace opo {

struct AnalysisCavity {
  double bandwidth_hz = 14e6;  // FWHM
  double coupling_ratio = 0.95;
  double detuning = 0.0;  // carrier - resonance, in FWHM units

  void validate() const;
};

// Cavities for (pump, signal, idler) with the bandwidths of the reference setup.
std::array<AnalysisCavity, kModeCount> default_cavities(double coupling_ratio = 0.95);
// Synchronous scan: same detuning, own bandwidths.
std::array<AnalysisCavity, kModeCount> with_detuning(std::array<AnalysisCavity, kModeCount> cavities,
                                                     double detuning);

std::complex<double> reflection_coefficient(const AnalysisCavity& cavity, double offset_hz);

// Sideband transfer from the incident (p, q) to the reflected (p, q) of one beam.
struct RotationCoefficients {
  std::complex<double> a_pp;
  std::complex<double> a_pq;
  std::complex<double> a_qp;
  std::complex<double> a_qq;

  // |a_pp|^2 + |a_pq|^2; 1 for a lossless cavity.
  double amplitude_gain() const { return std::norm(a_pp) + std::norm(a_pq); }
  Eigen::Matrix2cd matrix() const;
};

RotationCoefficients rotation_coefficients(const AnalysisCavity& cavity, double analysis_frequency_hz);

// Covariance of the reflected beams. Each beam's 2x2 block goes through its own
// rotation; vacuum enters through each cavity's loss port so that the output
// stays physical. Throws NonPhysical for a non-physical input.
CrossSpectralMatrix reflect_covariance(const CrossSpectralMatrix& s,
                                       const std::array<AnalysisCavity, kModeCount>& cavities,
                                       double analysis_frequency_hz);
SpectralCovariance reflect_covariance(const SpectralCovariance& s,
                                      const std::array<AnalysisCavity, kModeCount>& cavities,
                                      double analysis_frequency_hz);

}  // namespace opo
