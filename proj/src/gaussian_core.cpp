#include "opo/gaussian_core.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "opo/errors.hpp"

namespace opo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_index(int i) {
  if (i < 0 || i >= kDim) {
    throw InvalidArgument(fmt::format("quadrature index {} outside [0, 6)", i));
  }
}

void require_twin(Mode twin) {
  if (twin == Mode::Pump) {
    throw InvalidArgument("expected a twin beam (signal or idler), got the pump");
  }
}

}  // namespace

std::string basis_label(int index) {
  check_index(index);
  return fmt::format("{}{}", index % 2 == 0 ? 'p' : 'q', index / 2);
}

std::optional<int> parse_basis_label(const std::string& label) {
  if (label.size() != 2) return std::nullopt;
  int axis = 0;
  if (label[0] == 'p') {
    axis = 0;
  } else if (label[0] == 'q') {
    axis = 1;
  } else {
    return std::nullopt;
  }
  if (label[1] < '0' || label[1] > '2') return std::nullopt;
  return 2 * (label[1] - '0') + axis;
}

std::string entry_label(int i, int j) { return basis_label(i) + basis_label(j); }

// ---------------------------------------------------------------------------
// SpectralCovariance

SpectralCovariance SpectralCovariance::vacuum(double analysis_frequency_hz) {
  return SpectralCovariance(Matrix6::Identity(), analysis_frequency_hz);
}

SpectralCovariance SpectralCovariance::unknown(double analysis_frequency_hz) {
  return SpectralCovariance(Matrix6::Constant(kNaN), analysis_frequency_hz);
}

SpectralCovariance SpectralCovariance::from_matrix(const Eigen::MatrixXd& entries,
                                                   double analysis_frequency_hz) {
  if (entries.rows() != kDim || entries.cols() != kDim) {
    throw InvalidArgument(
        fmt::format("covariance must be 6x6, got {}x{}", entries.rows(), entries.cols()));
  }
  Matrix6 m = entries;
  for (int i = 0; i < kDim; ++i) {
    if (!(m(i, i) > 0.0)) {
      throw InvalidArgument(fmt::format("diagonal entry {} must be positive, got {}",
                                        entry_label(i, i), m(i, i)));
    }
  }
  return from_matrix_unchecked(m, analysis_frequency_hz);
}

SpectralCovariance SpectralCovariance::from_matrix_unchecked(const Matrix6& entries,
                                                             double analysis_frequency_hz) {
  for (int i = 0; i < kDim; ++i) {
    for (int j = i + 1; j < kDim; ++j) {
      if (entries(i, j) != entries(j, i)) {
        throw InvalidArgument(fmt::format("covariance is not symmetric at {} ({} vs {})",
                                          entry_label(i, j), entries(i, j), entries(j, i)));
      }
    }
  }
  return SpectralCovariance(entries, analysis_frequency_hz);
}

bool SpectralCovariance::known(int i, int j) const {
  check_index(i);
  check_index(j);
  return !std::isnan(values_(i, j));
}

double SpectralCovariance::at(int i, int j) const {
  if (!known(i, j)) throw MissingEntry(entry_label(std::min(i, j), std::max(i, j)));
  return values_(i, j);
}

void SpectralCovariance::set(int i, int j, double value) {
  check_index(i);
  check_index(j);
  values_(i, j) = value;
  values_(j, i) = value;
}

bool SpectralCovariance::complete() const { return !values_.array().isNaN().any(); }

std::vector<std::pair<int, int>> SpectralCovariance::missing_entries() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < kDim; ++i) {
    for (int j = i; j < kDim; ++j) {
      if (std::isnan(values_(i, j))) out.emplace_back(i, j);
    }
  }
  return out;
}

Matrix6 SpectralCovariance::matrix() const {
  const auto missing = missing_entries();
  if (!missing.empty()) throw MissingEntry(entry_label(missing.front().first, missing.front().second));
  return values_;
}

// ---------------------------------------------------------------------------
// CrossSpectralMatrix

CrossSpectralMatrix::CrossSpectralMatrix(const Matrix6c& entries, double analysis_frequency_hz)
    : entries_(entries), frequency_hz_(analysis_frequency_hz) {
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  if ((entries - entries.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("cross-spectral matrix is not Hermitian");
  }
  // Remove rounding asymmetry so the real part is exactly symmetric.
  entries_ = 0.5 * (entries + entries.adjoint());
}

CrossSpectralMatrix::CrossSpectralMatrix(const SpectralCovariance& covariance)
    : entries_(covariance.matrix().cast<std::complex<double>>()),
      frequency_hz_(covariance.analysis_frequency_hz()) {}

SpectralCovariance CrossSpectralMatrix::covariance() const {
  return SpectralCovariance::from_matrix(entries_.real(), frequency_hz_);
}

// ---------------------------------------------------------------------------
// Combinations

QuadratureCombination::QuadratureCombination(const Vector6& coefficients)
    : QuadratureCombination(coefficients, 1.0, true) {}

QuadratureCombination::QuadratureCombination(const Vector6& weights, double gain, bool)
    : weights_(weights), gain_(gain), coefficients_(weights * std::sqrt(gain)) {
  if (!weights.allFinite()) throw InvalidArgument("combination weights must be finite");
  if (!(gain > 0.0) || !std::isfinite(gain)) throw InvalidArgument("combination gain must be positive");
  if (weights.isZero(0.0)) throw InvalidArgument("combination weights are all zero");
}

QuadratureCombination QuadratureCombination::with_gain(const Vector6& weights, double gain) {
  return QuadratureCombination(weights, gain, true);
}

QuadratureCombination QuadratureCombination::single(Mode mode, Quadrature axis, double weight) {
  Vector6 c = Vector6::Zero();
  c(basis_index(mode, axis)) = weight;
  return QuadratureCombination(c);
}

QuadratureCombination QuadratureCombination::scaled(double factor) const {
  return QuadratureCombination(weights_ * factor, gain_, true);
}

QuadratureCombination QuadratureCombination::plus(Mode mode, Quadrature axis, double weight) const {
  Vector6 w = weights_;
  w(basis_index(mode, axis)) += weight / std::sqrt(gain_);
  return QuadratureCombination(w, gain_, true);
}

namespace {

QuadratureCombination half_pair(Mode a, Quadrature axis_a, double sign_a, Mode b, Quadrature axis_b, double sign_b) {
  Vector6 w = Vector6::Zero();
  w(basis_index(a, axis_a)) = sign_a;
  w(basis_index(b, axis_b)) = sign_b;
  return QuadratureCombination::with_gain(w, 0.5);
}

}  // namespace

namespace combos {

QuadratureCombination twin_amplitude_difference() {
  return half_pair(Mode::Signal, Quadrature::P, 1.0, Mode::Idler, Quadrature::P, -1.0);
}

QuadratureCombination twin_amplitude_sum() {
  return half_pair(Mode::Signal, Quadrature::P, 1.0, Mode::Idler, Quadrature::P, 1.0);
}

QuadratureCombination twin_phase_sum() {
  return half_pair(Mode::Signal, Quadrature::Q, 1.0, Mode::Idler, Quadrature::Q, 1.0);
}

QuadratureCombination twin_phase_difference() {
  return half_pair(Mode::Signal, Quadrature::Q, 1.0, Mode::Idler, Quadrature::Q, -1.0);
}

QuadratureCombination pump_twin_amplitude_sum(Mode twin) {
  require_twin(twin);
  return half_pair(Mode::Pump, Quadrature::P, 1.0, twin, Quadrature::P, 1.0);
}

QuadratureCombination pump_twin_phase_difference(Mode twin) {
  require_twin(twin);
  return half_pair(twin, Quadrature::Q, 1.0, Mode::Pump, Quadrature::Q, -1.0);
}

}  // namespace combos

double combination_covariance(const SpectralCovariance& s, const QuadratureCombination& a,
                              const QuadratureCombination& b) {
  const Vector6& ca = a.weights();
  const Vector6& cb = b.weights();
  const double gain = a.gain() == b.gain() ? a.gain() : std::sqrt(a.gain() * b.gain());
  double total = 0.0;
  for (int i = 0; i < kDim; ++i) {
    if (ca(i) == 0.0) continue;
    for (int j = 0; j < kDim; ++j) {
      if (cb(j) == 0.0) continue;
      total += ca(i) * cb(j) * s.at(i, j);
    }
  }
  return gain * total;
}

double combination_variance(const SpectralCovariance& s, const QuadratureCombination& c) {
  return combination_covariance(s, c, c);
}

// ---------------------------------------------------------------------------
// Physicality

Matrix6 commutator_form() {
  Matrix6 lambda = Matrix6::Zero();
  for (int m = 0; m < kModeCount; ++m) {
    lambda(2 * m, 2 * m + 1) = 2.0;
    lambda(2 * m + 1, 2 * m) = -2.0;
  }
  return lambda;
}

PhysicalityReport validate_physicality(const SpectralCovariance& s) {
  const Matrix6 m = s.matrix();
  Matrix6c test = m.cast<std::complex<double>>();
  test += std::complex<double>(0.0, 0.5) * commutator_form().cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Matrix6c> solver(test, Eigen::EigenvaluesOnly);
  const double worst = solver.eigenvalues().minCoeff();
  return {worst >= -kPhysicalityTolerance, worst};
}

void require_physical(const SpectralCovariance& s, const std::string& context) {
  const auto report = validate_physicality(s);
  if (!report.physical) {
    throw NonPhysical(fmt::format("{}: covariance violates the uncertainty principle "
                                  "(worst eigenvalue {:.3e})",
                                  context, report.worst_eigenvalue),
                      report.worst_eigenvalue);
  }
}

SpectralCovariance swap_twins(const SpectralCovariance& s) {
  static constexpr std::array<int, kDim> perm{0, 1, 4, 5, 2, 3};
  Matrix6 out;
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) out(i, j) = s.raw()(perm[i], perm[j]);
  }
  auto swapped = SpectralCovariance::unknown(s.analysis_frequency_hz());
  for (int i = 0; i < kDim; ++i) {
    for (int j = i; j < kDim; ++j) {
      if (!std::isnan(out(i, j))) swapped.set(i, j, out(i, j));
    }
  }
  return swapped;
}

}  // namespace opo
