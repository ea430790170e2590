#pragma once

// End-to-end runs: OPO model -> analysis cavities -> detection -> estimates.
//
// Analytic mode evaluates every quantity from the detected covariance. Monte
// Carlo mode synthesizes photocurrent records per sweep point (seed XOR point
// index) and normalizes their block variances against one vacuum calibration
// record, so every value carries a standard error.

#include "opo/scan_config.hpp"
#include "opo/scan_table.hpp"
#include "opo/witness.hpp"

namespace opo {

// Output of the configured source at the detection analysis frequency, before
// the analysis cavities and detection losses. Sigma overrides cfg.opo.sigma.
CrossSpectralMatrix source_cross_spectrum(const ScanConfig& cfg, double sigma);

// Source covariance after detection losses, with every quadrature read out
// ideally (no cavity).
SpectralCovariance detected_covariance(const ScanConfig& cfg, double sigma);

// Columns: delta, then for each pair the sum, difference and corrected curve,
// then the matching *_se columns. The signal-idler sum is corrected with the
// pump; each pump-twin difference is corrected with the other twin.
ScanTable run_detuning_scan(const ScanConfig& cfg);
std::vector<std::string> detuning_scan_columns();

// Columns: sigma, p_minus, q_plus, p0, q0, q_plus_corr, p01, q01_corr, V0, V1,
// V2, then *_se columns for the seven measured quantities.
ScanTable run_sigma_sweep(const ScanConfig& cfg);
std::vector<std::string> sigma_sweep_columns();

WitnessReport run_witness_point(const ScanConfig& cfg);

// Columns: frequency_hz, comb_factor, pump_phase_in, q0, q_plus. The model
// columns use the comb regardless of comb.enabled.
ScanTable run_comb_spectrum(const ScanConfig& cfg);
std::vector<std::string> comb_spectrum_columns();

// Dispatch on cfg.kind for the table-producing kinds; metadata lines are set.
ScanTable run_table(const ScanConfig& cfg);

}  // namespace opo
