#pragma once

// Quadrature noise covariances of the three-mode (pump, signal, idler) system.
//
// Basis ordering is fixed everywhere as (p0, q0, p1, q1, p2, q2), with p the
// amplitude and q the phase quadrature of each beam relative to its own mean
// field. Entries are normalised to the standard quantum limit: the vacuum
// covariance is the identity.

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace opo {

enum class Mode : int { Pump = 0, Signal = 1, Idler = 2 };
enum class Quadrature : int { P = 0, Q = 1 };

inline constexpr int kModeCount = 3;
inline constexpr int kDim = 6;

using Matrix6 = Eigen::Matrix<double, kDim, kDim>;
using Vector6 = Eigen::Matrix<double, kDim, 1>;
using Matrix6c = Eigen::Matrix<std::complex<double>, kDim, kDim>;

inline constexpr std::array<Mode, kModeCount> kAllModes{Mode::Pump, Mode::Signal, Mode::Idler};

constexpr int basis_index(Mode mode, Quadrature axis) {
  return 2 * static_cast<int>(mode) + static_cast<int>(axis);
}

// "p0", "q0", ..., "q2".
std::string basis_label(int index);
// Inverse of basis_label; nullopt for unknown labels.
std::optional<int> parse_basis_label(const std::string& label);
// "p1p2" style label of a matrix entry.
std::string entry_label(int i, int j);

// Physicality threshold on the eigenvalues of S + (i/2)Λ.
inline constexpr double kPhysicalityTolerance = 1e-9;

// Real symmetric spectral covariance at one analysis frequency. Entries may be
// undetermined (partial covariance); accessors that need a missing entry throw
// MissingEntry naming it.
class SpectralCovariance {
 public:
  static SpectralCovariance vacuum(double analysis_frequency_hz = 0.0);
  // Every entry undetermined.
  static SpectralCovariance unknown(double analysis_frequency_hz = 0.0);
  // Rejects non-6x6, non-symmetric or non-positive-diagonal input.
  static SpectralCovariance from_matrix(const Eigen::MatrixXd& entries, double analysis_frequency_hz);
  // Test-only bypass of the value invariants (symmetry is still enforced).
  static SpectralCovariance from_matrix_unchecked(const Matrix6& entries, double analysis_frequency_hz);

  double analysis_frequency_hz() const noexcept { return frequency_hz_; }

  bool known(int i, int j) const;
  double at(int i, int j) const;
  double at(Mode a, Quadrature x, Mode b, Quadrature y) const {
    return at(basis_index(a, x), basis_index(b, y));
  }
  void set(int i, int j, double value);

  bool complete() const;
  std::vector<std::pair<int, int>> missing_entries() const;

  // Full matrix; throws MissingEntry when partial.
  Matrix6 matrix() const;
  // Raw storage, NaN marks undetermined entries.
  const Matrix6& raw() const noexcept { return values_; }

 private:
  SpectralCovariance(const Matrix6& values, double frequency_hz) : values_(values), frequency_hz_(frequency_hz) {}

  Matrix6 values_;
  double frequency_hz_ = 0.0;
};

// Complex Hermitian cross-spectral matrix. Its real part is what in-phase
// demodulation measures; the imaginary part records sideband phase lags and
// matters once a detuned cavity mixes quadratures of different beams.
class CrossSpectralMatrix {
 public:
  CrossSpectralMatrix(const Matrix6c& entries, double analysis_frequency_hz);
  explicit CrossSpectralMatrix(const SpectralCovariance& covariance);

  const Matrix6c& entries() const noexcept { return entries_; }
  double analysis_frequency_hz() const noexcept { return frequency_hz_; }
  SpectralCovariance covariance() const;

 private:
  Matrix6c entries_;
  double frequency_hz_;
};

// Non-zero weight vector over the quadrature basis. Stored as weights times
// sqrt(gain); quadratic forms use the gain itself, so (x +- y)/sqrt2 is held as
// weights +-1 with gain 1/2 and vacuum variances come out exactly 1.
class QuadratureCombination {
 public:
  explicit QuadratureCombination(const Vector6& coefficients);
  static QuadratureCombination with_gain(const Vector6& weights, double gain);
  static QuadratureCombination single(Mode mode, Quadrature axis, double weight = 1.0);

  const Vector6& coefficients() const noexcept { return coefficients_; }
  const Vector6& weights() const noexcept { return weights_; }
  double gain() const noexcept { return gain_; }
  QuadratureCombination scaled(double factor) const;
  // Adds weight to the coefficient of (mode, axis).
  QuadratureCombination plus(Mode mode, Quadrature axis, double weight) const;

 private:
  QuadratureCombination(const Vector6& weights, double gain, bool);

  Vector6 weights_;
  double gain_ = 1.0;
  Vector6 coefficients_;
};

namespace combos {
// (p1 - p2)/sqrt2
QuadratureCombination twin_amplitude_difference();
// (p1 + p2)/sqrt2
QuadratureCombination twin_amplitude_sum();
// (q1 + q2)/sqrt2
QuadratureCombination twin_phase_sum();
// (q1 - q2)/sqrt2
QuadratureCombination twin_phase_difference();
// (p0 + pj)/sqrt2, j a twin
QuadratureCombination pump_twin_amplitude_sum(Mode twin);
// (qj - q0)/sqrt2, j a twin
QuadratureCombination pump_twin_phase_difference(Mode twin);
}  // namespace combos

// c^T S c. Works on partial covariances as long as every entry with a
// non-zero weight product is determined.
double combination_variance(const SpectralCovariance& s, const QuadratureCombination& c);
// a^T S b.
double combination_covariance(const SpectralCovariance& s, const QuadratureCombination& a,
                              const QuadratureCombination& b);

// Commutator matrix of the basis: [x_i, x_j] = i Λ_ij, with [p, q] = 2i in SQL units.
Matrix6 commutator_form();

struct PhysicalityReport {
  bool physical = false;
  double worst_eigenvalue = 0.0;
};

// Smallest eigenvalue of the Hermitian matrix S + (i/2)Λ. Requires a complete
// covariance.
PhysicalityReport validate_physicality(const SpectralCovariance& s);
// Throws NonPhysical when validate_physicality fails.
void require_physical(const SpectralCovariance& s, const std::string& context);

// Relabel signal <-> idler.
SpectralCovariance swap_twins(const SpectralCovariance& s);

}  // namespace opo
