#pragma once

// Named measured variances/correlations and their inversion into a (possibly
// partial) covariance. Every term is a bilinear functional left^T S right, so
// reconstruction is a linear solve over the 21 independent entries.

#include <string>
#include <utility>
#include <vector>

#include "opo/gaussian_core.hpp"

namespace opo {

struct MeasurementTerm {
  std::string name;
  QuadratureCombination left;
  QuadratureCombination right;
  double value;

  static MeasurementTerm variance(std::string name, const QuadratureCombination& c, double value);
  // C_xy = <dx dy>, named "C_<x><y>" (e.g. "C_q0q1").
  static MeasurementTerm correlation(int i, int j, double value);
  // Looks the name up in term_vocabulary(); throws InvalidArgument otherwise.
  static MeasurementTerm named(const std::string& name, double value);
};

// Names accepted by MeasurementTerm::named, besides any "C_<x><y>":
// p0..q2, p_minus, p_plus, q_plus, q_minus, p01, p02, q01, q02.
std::vector<std::string> term_vocabulary();

struct Reconstruction {
  SpectralCovariance covariance;
  std::vector<std::pair<int, int>> undetermined;
  bool complete() const { return undetermined.empty(); }
};

// Fills every entry the terms determine. Throws InconsistentMeasurements when
// over-determined terms disagree (the message names the terms and entries
// involved) and NonPhysical when a complete result violates the uncertainty
// principle.
Reconstruction reconstruct_from_measurements(const std::vector<MeasurementTerm>& terms,
                                             double analysis_frequency_hz);

// Evaluates named terms on S.
std::vector<MeasurementTerm> extract_terms(const SpectralCovariance& s, const std::vector<std::string>& names);

// The 6 single-quadrature variances plus the 15 correlations.
std::vector<MeasurementTerm> full_term_set(const SpectralCovariance& s);

}  // namespace opo
