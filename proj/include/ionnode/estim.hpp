// Estimators, fits and tomography applied to tallied measurement outcomes.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ionnode/counts.hpp"
#include "ionnode/qcore.hpp"
#include "ionnode/rng.hpp"

namespace ionnode::est {

struct Estimate {
  double value = 0.0;
  double error = 0.0;  // one standard error
};

struct FitResult {
  std::map<std::string, double> params;
  std::map<std::string, double> errors;
  double residual = 0.0;  // weighted sum of squared residuals
  std::vector<std::string> warnings;

  double at(const std::string& name) const;
  double error_of(const std::string& name) const;
};

/// F = (1 + <ZZ> + <XX> - <YY>)/4 against (|00> + |11>)/sqrt(2).
double bell_fidelity_correlators(double czz, double cxx, double cyy);

/// F = (P00 + P11)/2 + |C|/2.
double bell_fidelity_pop_parity(double p00_plus_p11, double contrast);

/// Maps an outcome symbol to its eigenvalue: '0', 'H', '+' -> +1 and
/// '1', 'V', '-' -> -1.
int outcome_sign(char symbol);

/// Mean of the product of the per-qubit signs with binomial stderr.
Estimate correlator_from_counts(const CountsTable& counts);

/// Total frequency of the listed outcomes, binomial stderr.
Estimate population(const CountsTable& counts, const std::vector<std::string>& outcomes);

struct ParityScan {
  std::vector<double> phases;
  std::vector<double> parities;
  std::int64_t shots_per_point = 0;  // 0: errors from residual scatter
};

/// Least squares of P(phi) = a sin(phi) + b cos(phi); reports C = |(a, b)|
/// and phi0 with C sin(phi + phi0).
FitResult fit_parity(const ParityScan& scan);

/// (P00H + P11V)/2 + (1/6) sum_k (-1)^k <M_k^{x3}>.
double ghz_fidelity(double p00h, double p11v, const std::array<double, 3>& mk);
double ghz_fidelity(const CountsTable& populations, const std::array<double, 3>& mk);

/// Photon outcome after the Pauli frame implied by the ion outcome.
/// `bell` is the two ion bits, memory first; basis is 'Z', 'X' or 'Y'.
int reinterpret_teleport_outcome(const std::string& bell, char basis, int photon_outcome);

double mub_average_fidelity(const std::vector<double>& per_state);

// ---------------------------------------------------------------------------
// Tomography

struct TomographyResult {
  ComplexMatrix rho_or_chi;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  double tp_residual = 0.0;  // process tomography only
  std::vector<double> loglik_history;
};

struct MleOptions {
  double tol = 1e-10;
  int max_iterations = 10000;
  bool keep_history = false;
};

/// Single-qubit maximum likelihood state from Pauli-basis tables. Each
/// table's setting is "X", "Y" or "Z"; outcomes are signed symbols.
TomographyResult mle_state_tomography(const std::vector<CountsTable>& tables, const MleOptions& opt = {});

/// Log-likelihood of `rho` for the same tables.
double state_loglik(const ComplexMatrix& rho, const std::vector<CountsTable>& tables);

/// E(rho) = sum_mn chi_mn P_m rho P_n over {I, X, Y, Z}.
ComplexMatrix apply_chi(const ComplexMatrix& chi, const ComplexMatrix& rho);

struct ProcessOptions {
  double tol = 1e-12;
  int max_iterations = 20000;
  int projection_iterations = 2000;
};

/// Least-squares chi with completely positive and trace preserving
/// constraints, from input states and reconstructed outputs.
TomographyResult mle_process_tomography(const std::vector<ComplexMatrix>& inputs,
                                        const std::vector<ComplexMatrix>& outputs,
                                        const ProcessOptions& opt = {});

/// chi_00 against the identity process.
double process_fidelity(const ComplexMatrix& chi);

/// {"real": [[...]], "imag": [[...]], "loglik", "iterations", "converged"}.
std::string tomography_json(const TomographyResult& r);

// ---------------------------------------------------------------------------
// Fits

/// Weighted straight line y = intercept + slope x. Empty weights mean 1.
FitResult fit_line(const std::vector<double>& x, const std::vector<double>& y,
                   const std::vector<double>& weights = {});

/// contrast(t) = A exp(-t/T2) via log-linear least squares. Nonpositive
/// contrasts are dropped with a warning. With `fix_amplitude` A = 1.
FitResult fit_ramsey(const std::vector<double>& times, const std::vector<double>& contrasts,
                     const std::vector<double>& contrast_errors = {}, bool fix_amplitude = false);

/// F(N) = 1 - eps0 - N eps.
FitResult fit_conversion(const std::vector<double>& n_values, const std::vector<double>& avg_fidelities,
                         const std::vector<double>& errors = {});

struct HeatingSample {
  double n_attempts;
  double nbar;
  double error;  // 0 disables weighting for this point
};
FitResult fit_heating(const std::vector<HeatingSample>& samples);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
  std::size_t n = 0;
};

/// One-sample Kolmogorov-Smirnov test against Exp(rate).
KsResult ks_test_exponential(std::vector<double> samples, double rate);
/// Asymptotic Kolmogorov survival function with the small-sample correction.
double kolmogorov_pvalue(double statistic, std::size_t n);

/// Standard deviation of `estimator` over multinomial resamples of `tables`.
double bootstrap_stderr(const std::vector<CountsTable>& tables,
                        const std::function<double(const std::vector<CountsTable>&)>& estimator,
                        int repetitions, Rng& rng);

}  // namespace ionnode::est
