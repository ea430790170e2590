#pragma once

// Linearised quantum Langevin model of the triply resonant, above-threshold
// OPO, solved in the frequency domain.
//
// Intracavity quadrature fluctuations x = (p0, q0, p1, q1, p2, q2) obey
//
//   dx/dt = M x + diag(sqrt(2 gamma_j)) u + diag(sqrt(2 mu_j)) v
//
// where u are the fluctuations incident on each coupling mirror, v the vacuum
// entering through spurious losses, gamma_j the coupler and mu_j the loss
// amplitude-decay rates. On exact resonance, with gain clamping and real mean
// fields, M couples only p to p and q to q:
//
//   twins:  -g' on the diagonal, +g' (p) / -g' (q) between signal and idler,
//           +k from the pump quadrature of the same type
//   pump:   -g0' on the diagonal, -k from each twin
//
// with g' = gamma + mu, g0' = gamma0 + mu0 and k^2 = g0' g' (sqrt(sigma) - 1).
// Outputs follow input-output relations: out = sqrt(2 gamma_j) x - u.

#include "opo/gaussian_core.hpp"

namespace opo {

struct OpoParams {
  double pump_coupler_reflectivity = 0.694;
  double twin_coupler_transmission = 0.04;
  // Round-trip spurious loss fractions.
  double pump_spurious_loss = 0.03;
  double twin_spurious_loss = 0.01;
  // FWHM of the twin-beam cavity resonance.
  double cavity_bandwidth_twins_hz = 45e6;
  double threshold_power_w = 75e-3;
  // Pump power relative to threshold.
  double sigma = 1.14;
  // Incident pump phase-quadrature noise, SQL units (1 = shot-noise limited).
  double pump_excess_phase_in = 1.0;

  // Range checks on every field except the sigma >= 1 requirement, which the
  // operations enforce themselves.
  void validate() const;
};

double sigma_from_pump_power(const OpoParams& params, double pump_power_w);

// Amplitude decay rates in 1/s. A round-trip fraction F decays at F / (2 tau);
// tau follows from the twin bandwidth, FWHM = 2 (gamma + mu) / (2 pi).
struct CavityRates {
  double round_trip_time_s = 0.0;
  double twin_coupler = 0.0;
  double twin_loss = 0.0;
  double pump_coupler = 0.0;
  double pump_loss = 0.0;

  double twin_total() const { return twin_coupler + twin_loss; }
  double pump_total() const { return pump_coupler + pump_loss; }
};

CavityRates cavity_rates(const OpoParams& params);

// Intracavity mean fields in units of the clamped pump amplitude.
struct SteadyState {
  double pump_amplitude = 0.0;  // always 1 at or above threshold
  double twin_amplitude = 0.0;  // twin_amplitude^2 = (g0'/g') (sqrt(sigma) - 1)
  double effective_gain = 0.0;  // clamped parametric gain, equals g'
  double pump_twin_coupling = 0.0;  // k in the drift matrix
};

// Throws BelowThreshold for sigma < 1.
SteadyState steady_state(const OpoParams& params);

struct LangevinSystem {
  Matrix6 drift;
  Vector6 coupler_gain;    // sqrt(2 gamma_j) per quadrature
  Vector6 loss_gain;       // sqrt(2 mu_j) per quadrature
  Vector6 incident_noise;  // spectral variance of u per quadrature
};

LangevinSystem langevin_system(const OpoParams& params, double incident_pump_phase_noise);

// Evenly spaced Lorentzian peaks on top of a flat plateau, in SQL units.
struct ExcessNoiseSpectrum {
  double plateau_db = 4.0;
  double peak_spacing_hz = 150e3;
  double peak_height_db = 15.0;
  double peak_width_hz = 10e3;  // FWHM of each peak

  // 0 dB everywhere.
  static ExcessNoiseSpectrum flat();
  void validate() const;
};

// Linear factor: plateau exactly midway between peaks, peak height exactly at
// each multiple of the spacing, periodic in the spacing.
double comb_spectrum(const ExcessNoiseSpectrum& comb, double frequency_hz);

// Output spectra with the incident pump phase noise set to
// params.pump_excess_phase_in. Throws BelowThreshold for sigma <= 1 and
// InvalidArgument for a non-positive frequency.
SpectralCovariance output_spectra(const OpoParams& params, double analysis_frequency_hz);
CrossSpectralMatrix output_cross_spectrum(const OpoParams& params, double analysis_frequency_hz);

// As output_spectra, with the incident pump phase noise multiplied by the
// comb factor at the analysis frequency.
SpectralCovariance output_spectra_with_excess(const OpoParams& params, const ExcessNoiseSpectrum& comb,
                                              double analysis_frequency_hz);
CrossSpectralMatrix output_cross_spectrum_with_excess(const OpoParams& params, const ExcessNoiseSpectrum& comb,
                                                      double analysis_frequency_hz);

}  // namespace opo
