#include "opo/witness.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "opo/errors.hpp"

namespace opo {

namespace {

const std::vector<std::string>& term_keys() {
  static const std::vector<std::string> keys{"p_minus", "q_plus", "q_plus_corr", "p01",   "q01",   "q01_corr",
                                             "p02",     "q02",    "q02_corr",    "beta0", "beta1", "beta2"};
  return keys;
}

void set_verdicts(WitnessReport& report) {
  int count = 0;
  for (int j = 0; j < 3; ++j) {
    report.violations[j] = report.v[j] < kWitnessBound;
    count += report.violations[j] ? 1 : 0;
  }
  report.genuine_tripartite = count >= 2;
  const auto beta0 = report.terms.find("beta0");
  report.triple_phase_correlation =
      beta0 != report.terms.end() && beta0->second > 0.0 && report.terms.at("q_plus_corr") < 1.0;
}

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.10g}", v);
}

}  // namespace

CorrectedVariance corrected_variance(const SpectralCovariance& s, const QuadratureCombination& base, Mode mode,
                                     Quadrature axis) {
  const auto correction = QuadratureCombination::single(mode, axis);
  const double correction_variance = combination_variance(s, correction);
  if (!(correction_variance > 0.0)) {
    throw DegenerateMinimization(
        fmt::format("correction quadrature {} has non-positive variance {}",
                    basis_label(basis_index(mode, axis)), correction_variance));
  }
  CorrectedVariance out;
  out.alpha = combination_covariance(s, base, correction) / correction_variance;
  out.uncorrected = combination_variance(s, base);
  out.corrected = combination_variance(s, base.plus(mode, axis, -out.alpha));
  return out;
}

double optimal_alpha(const SpectralCovariance& s, const QuadratureCombination& base, Mode mode, Quadrature axis) {
  return corrected_variance(s, base, mode, axis).alpha;
}

std::array<double, 3> beta_terms(const SpectralCovariance& s) {
  const auto q = [&](Mode m) { return basis_index(m, Quadrature::Q); };
  const int q0 = q(Mode::Pump);
  const int q1 = q(Mode::Signal);
  const int q2 = q(Mode::Idler);
  for (int i : {q0, q1, q2}) {
    if (!(s.at(i, i) > 0.0)) {
      throw DegenerateMinimization(fmt::format("phase variance {} is not positive", basis_label(i)));
    }
  }
  const auto square = [](double x) { return x * x; };
  return {square(s.at(q0, q1) + s.at(q0, q2)) / (2.0 * s.at(q0, q0)),
          square(s.at(q0, q1) - s.at(q2, q1)) / (2.0 * s.at(q1, q1)),
          square(s.at(q0, q2) - s.at(q1, q2)) / (2.0 * s.at(q2, q2))};
}

WitnessReport tripartite_witnesses(const SpectralCovariance& s) {
  if (s.complete()) require_physical(s, "tripartite_witnesses");

  const auto v0_phase = corrected_variance(s, combos::twin_phase_sum(), Mode::Pump, Quadrature::Q);
  const auto v1_phase =
      corrected_variance(s, combos::pump_twin_phase_difference(Mode::Signal), Mode::Idler, Quadrature::Q);
  const auto v2_phase =
      corrected_variance(s, combos::pump_twin_phase_difference(Mode::Idler), Mode::Signal, Quadrature::Q);
  const auto beta = beta_terms(s);

  WitnessReport report;
  auto& t = report.terms;
  t["p_minus"] = combination_variance(s, combos::twin_amplitude_difference());
  t["q_plus"] = v0_phase.uncorrected;
  t["q_plus_corr"] = v0_phase.corrected;
  t["p01"] = combination_variance(s, combos::pump_twin_amplitude_sum(Mode::Signal));
  t["q01"] = v1_phase.uncorrected;
  t["q01_corr"] = v1_phase.corrected;
  t["p02"] = combination_variance(s, combos::pump_twin_amplitude_sum(Mode::Idler));
  t["q02"] = v2_phase.uncorrected;
  t["q02_corr"] = v2_phase.corrected;
  t["beta0"] = beta[0];
  t["beta1"] = beta[1];
  t["beta2"] = beta[2];

  // V1 and V2 add alpha * q, i.e. the negative of the minimiser of D2(base - alpha q).
  report.coefficients = WitnessCoefficients{v0_phase.alpha, -v2_phase.alpha, -v1_phase.alpha};
  report.v = {t["p_minus"] + t["q_plus_corr"], t["p01"] + t["q01_corr"], t["p02"] + t["q02_corr"]};
  set_verdicts(report);
  return report;
}

WitnessReport witnesses_from_terms(const MeasuredWitnessTerms& m) {
  for (const auto& [value, name] : {std::pair{m.p_minus, "p_minus"}, std::pair{m.q_plus_corr, "q_plus_corr"},
                                    std::pair{m.p01, "p01"}, std::pair{m.q01_corr, "q01_corr"},
                                    std::pair{m.p02, "p02"}, std::pair{m.q02_corr, "q02_corr"}}) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw InvalidArgument(fmt::format("measured variance {} must be positive, got {}", name, value));
    }
  }
  WitnessReport report;
  auto& t = report.terms;
  t["p_minus"] = m.p_minus;
  t["q_plus_corr"] = m.q_plus_corr;
  t["p01"] = m.p01;
  t["q01_corr"] = m.q01_corr;
  t["p02"] = m.p02;
  t["q02_corr"] = m.q02_corr;
  if (m.q_plus) {
    t["q_plus"] = *m.q_plus;
    t["beta0"] = *m.q_plus - m.q_plus_corr;
  }
  if (m.q01) {
    t["q01"] = *m.q01;
    t["beta2"] = *m.q01 - m.q01_corr;
  }
  if (m.q02) {
    t["q02"] = *m.q02;
    t["beta1"] = *m.q02 - m.q02_corr;
  }
  for (const char* key : {"beta0", "beta1", "beta2"}) {
    if (auto it = t.find(key); it != t.end() && it->second < 0.0) {
      throw InvalidArgument(fmt::format("measured terms imply negative {} = {}", key, it->second));
    }
  }
  report.v = {m.p_minus + m.q_plus_corr, m.p01 + m.q01_corr, m.p02 + m.q02_corr};
  set_verdicts(report);
  return report;
}

DuanResult bipartite_duan(const SpectralCovariance& s, Mode a, Mode b) {
  if (a == b) throw InvalidArgument("bipartite_duan needs two distinct beams");
  if (a > b) std::swap(a, b);
  double value = 0.0;
  if (a == Mode::Pump) {
    value = combination_variance(s, combos::pump_twin_amplitude_sum(b)) +
            combination_variance(s, combos::pump_twin_phase_difference(b));
  } else {
    value = combination_variance(s, combos::twin_amplitude_difference()) +
            combination_variance(s, combos::twin_phase_sum());
  }
  return {value, value < kWitnessBound};
}

std::string to_key_value(const WitnessReport& report) {
  std::string out;
  for (int j = 0; j < 3; ++j) out += fmt::format("V{}={}\n", j, format_value(report.v[j]));
  if (report.coefficients) {
    out += fmt::format("alpha0={}\nalpha1={}\nalpha2={}\n", format_value(report.coefficients->alpha0),
                       format_value(report.coefficients->alpha1), format_value(report.coefficients->alpha2));
  }
  for (const auto& key : term_keys()) {
    if (auto it = report.terms.find(key); it != report.terms.end()) {
      out += fmt::format("{}={}\n", key, format_value(it->second));
    }
  }
  for (int j = 0; j < 3; ++j) out += fmt::format("violation{}={}\n", j, report.violations[j] ? "true" : "false");
  out += fmt::format("genuine_tripartite={}\n", report.genuine_tripartite ? "true" : "false");
  out += fmt::format("triple_phase_correlation={}\n", report.triple_phase_correlation ? "true" : "false");
  return out;
}

std::vector<std::string> witness_csv_columns() {
  std::vector<std::string> cols{"sigma", "V0", "V1", "V2", "alpha0", "alpha1", "alpha2"};
  for (const auto& key : term_keys()) {
    // betas are listed once, right after the alphas
    if (key.rfind("beta", 0) == 0) continue;
    cols.push_back(key);
  }
  cols.insert(cols.begin() + 7, {"beta0", "beta1", "beta2"});
  return cols;
}

std::string witness_csv_row(double sigma, const WitnessReport& report) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> values;
  for (const auto& col : witness_csv_columns()) {
    double v = nan;
    if (col == "sigma") {
      v = sigma;
    } else if (col.size() == 2 && col[0] == 'V') {
      v = report.v[col[1] - '0'];
    } else if (col.rfind("alpha", 0) == 0) {
      if (report.coefficients) {
        const auto& c = *report.coefficients;
        v = col == "alpha0" ? c.alpha0 : (col == "alpha1" ? c.alpha1 : c.alpha2);
      }
    } else if (auto it = report.terms.find(col); it != report.terms.end()) {
      v = it->second;
    }
    values.push_back(format_value(v));
  }
  return fmt::format("{}", fmt::join(values, ","));
}

}  // namespace opo
