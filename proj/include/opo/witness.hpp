#pragma once

// Bipartite (Duan-Simon) and tripartite (van Loock-Furusawa type) inseparability
// witnesses for the pump/signal/idler system:
//
//   V0 = D2[(p1 - p2)/sqrt2] + D2[(q1 + q2)/sqrt2 - alpha0 q0]
//   V1 = D2[(p0 + p1)/sqrt2] + D2[(q1 - q0)/sqrt2 + alpha2 q2]
//   V2 = D2[(p0 + p2)/sqrt2] + D2[(q2 - q0)/sqrt2 + alpha1 q1]
//
// Every separable state satisfies V_j >= 2. The alpha_j are chosen to minimise
// each V_j, which is a quadratic in alpha with a closed-form minimum.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opo/gaussian_core.hpp"

namespace opo {

inline constexpr double kWitnessBound = 2.0;

// alpha_j is indexed by the mode that provides the correction: alpha0 enters
// V0, alpha2 enters V1, alpha1 enters V2.
struct WitnessCoefficients {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
};

// Minimiser of D2(base - alpha * x) over alpha, x the correction quadrature.
// Throws DegenerateMinimization if D2(x) is not positive.
double optimal_alpha(const SpectralCovariance& s, const QuadratureCombination& base, Mode mode, Quadrature axis);

struct CorrectedVariance {
  double alpha = 0.0;        // minimiser, in the base - alpha * x convention
  double uncorrected = 0.0;  // D2(base)
  double corrected = 0.0;    // D2(base - alpha * x), evaluated directly
  double reduction() const { return uncorrected - corrected; }
};

CorrectedVariance corrected_variance(const SpectralCovariance& s, const QuadratureCombination& base, Mode mode,
                                     Quadrature axis);

// (beta0, beta1, beta2):
//   beta0  = (C_q0q1 + C_q0q2)^2 / (2 D2 q0)
//   beta_k = (C_q0qk - C_qjqk)^2 / (2 D2 qk), {j, k} = {1, 2}
std::array<double, 3> beta_terms(const SpectralCovariance& s);

// Term keys: p_minus, q_plus, q_plus_corr, p01, q01, q01_corr, p02, q02,
// q02_corr, beta0, beta1, beta2. Reports built from measured terms carry
// whichever of these were supplied or derivable.
struct WitnessReport {
  std::array<double, 3> v{};
  std::map<std::string, double> terms;
  std::optional<WitnessCoefficients> coefficients;
  std::array<bool, 3> violations{};
  bool genuine_tripartite = false;
  // Corrected twin phase sum below the SQL with a non-zero pump correction.
  bool triple_phase_correlation = false;
};

// Pre: every entry the three inequalities need is present; a complete S must
// be physical. Missing entries raise MissingEntry.
WitnessReport tripartite_witnesses(const SpectralCovariance& s);

// Directly measured witness terms (already SQL-normalised and corrected).
struct MeasuredWitnessTerms {
  double p_minus = 0.0;
  double q_plus_corr = 0.0;
  double p01 = 0.0;
  double q01_corr = 0.0;
  double p02 = 0.0;
  double q02_corr = 0.0;
  std::optional<double> q_plus;
  std::optional<double> q01;
  std::optional<double> q02;
};

WitnessReport witnesses_from_terms(const MeasuredWitnessTerms& measured);

struct DuanResult {
  double value = 0.0;
  bool entangled = false;
};

// Duan-Simon sum for a pair of beams. Signal-idler uses
// D2[(p1 - p2)/sqrt2] + D2[(q1 + q2)/sqrt2]; a pump-twin pair uses the
// alpha = 0 form of its tripartite inequality, D2[(p0 + pj)/sqrt2] + D2[(qj - q0)/sqrt2].
DuanResult bipartite_duan(const SpectralCovariance& s, Mode a, Mode b);

// Flat "key=value" lines, fixed key order.
std::string to_key_value(const WitnessReport& report);
std::vector<std::string> witness_csv_columns();
// Values in witness_csv_columns() order; absent quantities print as "nan".
std::string witness_csv_row(double sigma, const WitnessReport& report);

}  // namespace opo
