#include "langevin_oracle.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace opo::fixtures {

OracleResult integrate_output_spectrum(const OracleParams& p, const OracleSettings& s) {
  using Mat6 = Eigen::Matrix<double, 6, 6>;
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  using CVec6 = Eigen::Matrix<std::complex<double>, 6, 1>;

  // Time unit: 1 / (twin amplitude decay rate). A round-trip fraction F
  // decays at F / (2 t_rt) and the twin total rate is pi * FWHM.
  const double twin_total = p.twin_coupler + p.twin_loss;
  const double gc = p.twin_coupler / twin_total;
  const double gl = p.twin_loss / twin_total;
  const double pc = (1.0 - p.pump_reflectivity) / twin_total;
  const double pl = p.pump_loss / twin_total;
  const double pump_total = pc + pl;
  const double k = std::sqrt(pump_total * (std::sqrt(p.sigma) - 1.0));
  const double omega = 2.0 * std::numbers::pi * p.frequency_hz / (std::numbers::pi * p.bandwidth_hz);

  Mat6 drift = Mat6::Zero();
  // Order (p0, q0, p1, q1, p2, q2).
  drift(0, 0) = drift(1, 1) = -pump_total;
  for (int t : {2, 4}) {
    const int other = t == 2 ? 4 : 2;
    drift(t, t) = drift(t + 1, t + 1) = -1.0;
    drift(t, other) = 1.0;
    drift(t + 1, other + 1) = -1.0;
    drift(t, 0) = k;
    drift(t + 1, 1) = k;
    drift(0, t) = -k;
    drift(1, t + 1) = -k;
  }
  Vec6 coupler, loss, incident;
  coupler << std::sqrt(2 * pc), std::sqrt(2 * pc), std::sqrt(2 * gc), std::sqrt(2 * gc), std::sqrt(2 * gc),
      std::sqrt(2 * gc);
  loss << std::sqrt(2 * pl), std::sqrt(2 * pl), std::sqrt(2 * gl), std::sqrt(2 * gl), std::sqrt(2 * gl),
      std::sqrt(2 * gl);
  incident << 1.0, std::sqrt(p.pump_phase_noise), 1.0, 1.0, 1.0, 1.0;

  // Window of an integer number of analysis periods, sampled exactly.
  const double fastest = std::max(1.0 + k, pump_total + k);
  const double period = 2.0 * std::numbers::pi / omega;
  const double periods = std::max(2.0, std::round(s.window_time / period));
  const double window = periods * period;
  const int n_window = 2 * static_cast<int>(std::ceil(window * fastest * s.steps_per_fastest_decay / 2.0));
  const double dt = window / n_window;
  const int hop = n_window / 2;
  std::vector<double> hann(n_window);
  double hann_energy = 0.0;
  for (int n = 0; n < n_window; ++n) {
    const double v = std::sin(std::numbers::pi * n / n_window);
    hann[n] = v * v;
    hann_energy += hann[n] * hann[n] * dt;
  }
  const std::complex<double> step_phase = std::polar(1.0, omega * dt);

  const Mat6 step_matrix = Mat6::Identity() + drift * dt;
  const double root_dt = std::sqrt(dt);
  const int burn_in = static_cast<int>(std::ceil(s.burn_in_time / dt));
  const int recorded = hop * (2 * s.windows_per_realization - 1) + hop;

  OracleResult result;
  Eigen::Matrix<std::complex<double>, 6, 6> accum = Eigen::Matrix<std::complex<double>, 6, 6>::Zero();
  std::normal_distribution<double> normal(0.0, 1.0);

  for (int r = 0; r < s.realizations; ++r) {
    std::mt19937_64 rng(s.seed * 1000003ULL + static_cast<std::uint64_t>(r));
    Vec6 x = Vec6::Zero();
    Vec6 u, v;
    // Two windows are open at any time, offset by half a window.
    CVec6 open[2] = {CVec6::Zero(), CVec6::Zero()};
    std::complex<double> rot(1.0, 0.0);
    for (int n = -burn_in; n < recorded; ++n) {
      for (int i = 0; i < 6; ++i) u(i) = incident(i) * normal(rng) / root_dt;
      for (int i = 0; i < 6; ++i) v(i) = normal(rng) / root_dt;
      if (n >= 0) {
        const Vec6 out = coupler.cwiseProduct(x) - u;
        const int pos = n % hop;
        const int slot = (n / hop) % 2;
        // Window in slot opened at its own start; the other opened hop earlier.
        const double w_new = hann[pos];
        const double w_old = hann[pos + hop];
        const std::complex<double> f = rot * dt;
        open[slot] += (w_new * f) * out.cast<std::complex<double>>();
        if (n >= hop) open[1 - slot] += (w_old * f) * out.cast<std::complex<double>>();
        if (pos == hop - 1 && n >= n_window - 1) {
          // The window in the other slot is now complete.
          accum += open[1 - slot] * open[1 - slot].adjoint();
          open[1 - slot].setZero();
          ++result.windows;
        }
        rot *= step_phase;
        if (pos == 0) rot /= std::abs(rot);
      }
      x = step_matrix * x + (coupler.cwiseProduct(u) + loss.cwiseProduct(v)) * dt;
      ++result.steps;
    }
  }
  result.spectrum = accum.real() / (hann_energy * result.windows);
  result.spectrum = 0.5 * (result.spectrum + result.spectrum.transpose()).eval();
  return result;
}

}  // namespace opo::fixtures
