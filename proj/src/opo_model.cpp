#include "opo/opo_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "opo/errors.hpp"

namespace opo {

namespace {

void require_fraction(double value, const char* name) {
  if (!(value > 0.0 && value < 1.0)) {
    throw InvalidArgument(fmt::format("{} must lie in (0, 1), got {}", name, value));
  }
}

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidArgument(fmt::format("{} must be positive, got {}", name, value));
  }
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

CrossSpectralMatrix solve_output(const OpoParams& params, double analysis_frequency_hz, double pump_phase_noise) {
  params.validate();
  if (!(params.sigma > 1.0)) {
    throw BelowThreshold(fmt::format("output spectra need sigma > 1, got {}", params.sigma));
  }
  require_positive(analysis_frequency_hz, "analysis frequency");

  const auto sys = langevin_system(params, pump_phase_noise);
  const double omega = 2.0 * std::numbers::pi * analysis_frequency_hz;
  using C = std::complex<double>;

  // Fourier convention x(t) = int x(w) exp(-i w t): d/dt -> -i w.
  const Matrix6c resolvent =
      (C(0.0, -omega) * Matrix6c::Identity() - sys.drift.cast<C>()).partialPivLu().inverse();
  const Matrix6c coupler = sys.coupler_gain.cast<C>().asDiagonal();
  const Matrix6c loss = sys.loss_gain.cast<C>().asDiagonal();
  const Matrix6c from_incident = coupler * resolvent * coupler - Matrix6c::Identity();
  const Matrix6c from_loss = coupler * resolvent * loss;
  const Matrix6c noise = sys.incident_noise.cast<C>().asDiagonal();

  const Matrix6c spectrum =
      from_incident * noise * from_incident.adjoint() + from_loss * from_loss.adjoint();
  return CrossSpectralMatrix(spectrum, analysis_frequency_hz);
}

}  // namespace

void OpoParams::validate() const {
  require_fraction(pump_coupler_reflectivity, "pump_coupler_reflectivity");
  require_fraction(twin_coupler_transmission, "twin_coupler_transmission");
  require_fraction(pump_spurious_loss, "pump_spurious_loss");
  require_fraction(twin_spurious_loss, "twin_spurious_loss");
  require_positive(cavity_bandwidth_twins_hz, "cavity_bandwidth_twins_hz");
  require_positive(threshold_power_w, "threshold_power_w");
  require_positive(sigma, "sigma");
  if (!(pump_excess_phase_in >= 1.0) || !std::isfinite(pump_excess_phase_in)) {
    throw InvalidArgument(
        fmt::format("pump_excess_phase_in must be >= 1 (SQL units), got {}", pump_excess_phase_in));
  }
}

double sigma_from_pump_power(const OpoParams& params, double pump_power_w) {
  require_positive(params.threshold_power_w, "threshold_power_w");
  return pump_power_w / params.threshold_power_w;
}

CavityRates cavity_rates(const OpoParams& params) {
  params.validate();
  const double twin_fraction = params.twin_coupler_transmission + params.twin_spurious_loss;
  const double twin_total_rate = std::numbers::pi * params.cavity_bandwidth_twins_hz;
  CavityRates rates;
  rates.round_trip_time_s = twin_fraction / (2.0 * twin_total_rate);
  const double per_fraction = 1.0 / (2.0 * rates.round_trip_time_s);
  rates.twin_coupler = params.twin_coupler_transmission * per_fraction;
  rates.twin_loss = params.twin_spurious_loss * per_fraction;
  rates.pump_coupler = (1.0 - params.pump_coupler_reflectivity) * per_fraction;
  rates.pump_loss = params.pump_spurious_loss * per_fraction;
  return rates;
}

SteadyState steady_state(const OpoParams& params) {
  params.validate();
  if (params.sigma < 1.0) {
    throw BelowThreshold(fmt::format("sigma = {} is below the oscillation threshold", params.sigma));
  }
  const auto rates = cavity_rates(params);
  const double excess = std::sqrt(params.sigma) - 1.0;
  SteadyState state;
  state.pump_amplitude = 1.0;
  state.twin_amplitude = std::sqrt(rates.pump_total() / rates.twin_total() * excess);
  state.effective_gain = rates.twin_total();
  state.pump_twin_coupling = std::sqrt(rates.pump_total() * rates.twin_total() * excess);
  return state;
}

LangevinSystem langevin_system(const OpoParams& params, double incident_pump_phase_noise) {
  const auto rates = cavity_rates(params);
  const auto state = steady_state(params);
  const double g = rates.twin_total();
  const double g0 = rates.pump_total();
  const double k = state.pump_twin_coupling;

  const int p0 = basis_index(Mode::Pump, Quadrature::P);
  const int q0 = basis_index(Mode::Pump, Quadrature::Q);

  LangevinSystem sys;
  sys.drift = Matrix6::Zero();
  sys.drift(p0, p0) = -g0;
  sys.drift(q0, q0) = -g0;
  for (Mode twin : {Mode::Signal, Mode::Idler}) {
    const Mode other = twin == Mode::Signal ? Mode::Idler : Mode::Signal;
    for (Quadrature axis : {Quadrature::P, Quadrature::Q}) {
      const int i = basis_index(twin, axis);
      const int pump = basis_index(Mode::Pump, axis);
      sys.drift(i, i) = -g;
      sys.drift(i, basis_index(other, axis)) = axis == Quadrature::P ? g : -g;
      sys.drift(i, pump) = k;
      sys.drift(pump, i) = -k;
    }
  }

  for (Mode m : kAllModes) {
    const bool pump = m == Mode::Pump;
    for (Quadrature axis : {Quadrature::P, Quadrature::Q}) {
      const int i = basis_index(m, axis);
      sys.coupler_gain(i) = std::sqrt(2.0 * (pump ? rates.pump_coupler : rates.twin_coupler));
      sys.loss_gain(i) = std::sqrt(2.0 * (pump ? rates.pump_loss : rates.twin_loss));
      sys.incident_noise(i) = 1.0;
    }
  }
  sys.incident_noise(q0) = incident_pump_phase_noise;
  return sys;
}

ExcessNoiseSpectrum ExcessNoiseSpectrum::flat() {
  ExcessNoiseSpectrum comb;
  comb.plateau_db = 0.0;
  comb.peak_height_db = 0.0;
  return comb;
}

void ExcessNoiseSpectrum::validate() const {
  if (!(plateau_db >= 0.0)) throw InvalidArgument(fmt::format("plateau_db must be >= 0, got {}", plateau_db));
  if (!(peak_height_db >= plateau_db)) {
    throw InvalidArgument(
        fmt::format("peak_height_db ({}) must not be below plateau_db ({})", peak_height_db, plateau_db));
  }
  require_positive(peak_spacing_hz, "peak_spacing_hz");
  require_positive(peak_width_hz, "peak_width_hz");
}

double comb_spectrum(const ExcessNoiseSpectrum& comb, double frequency_hz) {
  comb.validate();
  const double plateau = db_to_linear(comb.plateau_db);
  const double peak = db_to_linear(comb.peak_height_db);
  if (peak == plateau) return plateau;

  // Sum of Lorentzians of half width w repeated every d:
  //   sum_k w^2 / ((f - k d)^2 + w^2)  ∝  1 / (cosh(2 pi w / d) - cos(2 pi f / d))
  // rescaled so the minimum (midway) is 0 and the maximum (on a peak) is 1.
  const double a = std::numbers::pi * comb.peak_width_hz / comb.peak_spacing_hz;
  const double theta = 2.0 * std::numbers::pi * std::fmod(frequency_hz, comb.peak_spacing_hz) / comb.peak_spacing_hz;
  const double ch = std::cosh(a);
  const double shape = 1.0 / (ch - std::cos(theta));
  const double lo = 1.0 / (ch + 1.0);
  const double hi = 1.0 / (ch - 1.0);
  const double unit = std::clamp((shape - lo) / (hi - lo), 0.0, 1.0);
  return plateau + (peak - plateau) * unit;
}

CrossSpectralMatrix output_cross_spectrum(const OpoParams& params, double analysis_frequency_hz) {
  return solve_output(params, analysis_frequency_hz, params.pump_excess_phase_in);
}

SpectralCovariance output_spectra(const OpoParams& params, double analysis_frequency_hz) {
  return output_cross_spectrum(params, analysis_frequency_hz).covariance();
}

CrossSpectralMatrix output_cross_spectrum_with_excess(const OpoParams& params, const ExcessNoiseSpectrum& comb,
                                                      double analysis_frequency_hz) {
  require_positive(analysis_frequency_hz, "analysis frequency");
  const double factor = comb_spectrum(comb, analysis_frequency_hz);
  return solve_output(params, analysis_frequency_hz, params.pump_excess_phase_in * factor);
}

SpectralCovariance output_spectra_with_excess(const OpoParams& params, const ExcessNoiseSpectrum& comb,
                                              double analysis_frequency_hz) {
  return output_cross_spectrum_with_excess(params, comb, analysis_frequency_hz).covariance();
}

}  // namespace opo
