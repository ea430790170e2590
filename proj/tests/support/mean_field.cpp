#include "mean_field.hpp"

#include <array>
#include <cmath>

namespace opo::fixtures {

MeanField settle_mean_field(double g0, double sigma, double seed, double t_max) {
  using State = std::array<double, 3>;
  const double drive = g0 * std::sqrt(sigma);
  auto rhs = [&](const State& a) {
    return State{-g0 * a[0] - a[1] * a[2] + drive, -a[1] + a[0] * a[2], -a[2] + a[0] * a[1]};
  };
  State a{0.0, seed, seed};
  const double dt = 0.05 / std::max(1.0, g0);
  double t = 0.0;
  while (t < t_max) {
    const State k1 = rhs(a);
    State tmp;
    for (int i = 0; i < 3; ++i) tmp[i] = a[i] + 0.5 * dt * k1[i];
    const State k2 = rhs(tmp);
    for (int i = 0; i < 3; ++i) tmp[i] = a[i] + 0.5 * dt * k2[i];
    const State k3 = rhs(tmp);
    for (int i = 0; i < 3; ++i) tmp[i] = a[i] + dt * k3[i];
    const State k4 = rhs(tmp);
    double change = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double d = dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      a[i] += d;
      change = std::max(change, std::abs(d) / dt);
    }
    t += dt;
    if (t > 50.0 && change < 1e-13) break;
  }
  return {a[0], a[1], a[2], t};
}

}  // namespace opo::fixtures
