// Calibrated device parameters and the effective noise channels built from them.
#pragma once

#include <array>
#include <string>

#include "ionnode/qcore.hpp"

namespace ionnode::dev {

enum class SourceMode { werner, bell_diagonal };

/// How stored memory loses coherence. `isotropic` shrinks the whole Bloch
/// vector by exp(-t/T2); `dephasing` shrinks only its transverse part.
enum class MemoryModel { isotropic, dephasing };

SourceMode parse_source_mode(const std::string& s);
MemoryModel parse_memory_model(const std::string& s);
std::string to_string(SourceMode m);
std::string to_string(MemoryModel m);

/// All times in seconds, rates in 1/s, heating in phonons.
struct DeviceParams {
  double t_doppler = 40e-6;
  double t_eit = 200e-6;
  double t_pump = 5e-6;
  double t_mw_init = 10e-6;
  double t_window = 60e-9;
  int attempts_per_batch = 10;
  double ent_rate_r = 7.0;
  double storage_T = 0.05;
  double T2_star = 0.985;
  double eps_spam = 0.024;
  double eps_conv_roundtrip = 0.0126;
  double F_cp_target = 0.933;
  std::array<double, 3> correlators_cp{0.91, -0.90, 0.92};  // <XX>, <YY>, <ZZ>
  double F_bell_target = 0.963;
  double heat_per_attempt = 0.012;
  double heat_background = 20.0;
  double heat_rate_active = 760.0;
  double nbar_after_eit = 0.2;
  double detect_err_ion = 0.01;
  double gate_heating_coupling_kappa = 0.0;
  double sideband_pi_efficiency = 0.5;
  SourceMode source_mode = SourceMode::bell_diagonal;
  MemoryModel memory_model = MemoryModel::isotropic;

  /// Throws ContractError naming the first offending field.
  void validate() const;
};

KrausChannel dephasing_channel(double t, double T2);
KrausChannel depolarizing_channel(double lambda, int nqubits);

/// One S→F→S round trip as single-qubit depolarization with lambda = 2 eps.
KrausChannel conversion_channel(double eps);
/// One conversion leg; two legs compose to `conversion_channel(eps)`.
KrausChannel conversion_leg_channel(double eps);
double conversion_leg_lambda(double eps);

KrausChannel memory_channel(double t, double T2, MemoryModel model);

struct SpamFlips {
  double prep = 0.0;
  double readout = 0.0;
};

/// Splits the SPAM budget eps0 evenly between preparation and readout.
/// Both numbers are budgets for a whole experiment; the executor divides
/// them among the ions it prepares and measures.
SpamFlips spam_flip_channels(double eps_spam);

/// Ion-photon state over the register {communication, photon}.
DensityState photon_source_state(SourceMode mode, const DeviceParams& params);

/// Werner visibility p = (4F - 1)/3.
double werner_visibility(double fidelity);

struct BellPipeline {
  double population = 0.0;  // P00 + P11
  double contrast = 0.0;    // |C| of the parity fringe
  double fidelity = 0.0;    // population/2 + contrast/2
};

/// Exact (sampling-free) Bell preparation: ideal U_ent + depolarizing(lambda)
/// + SPAM flips, evaluated with population and parity estimators.
BellPipeline bell_pipeline_exact(double lambda, const SpamFlips& spam);

/// Bisection on lambda so that the Bell pipeline reaches `target`.
/// Throws std::domain_error if the target is unreachable even at lambda = 0.
double calibrate_gate_lambda(double target_bell_fidelity, const SpamFlips& spam);

/// Ideal |Phi>_cp = (|0H> + |1V>)/sqrt(2) over {communication, photon}.
DensityState ideal_epr_state();

struct NoiseBundle {
  MemoryModel memory_model = MemoryModel::isotropic;
  double T2 = 0.985;
  double conversion_eps = 0.0;
  double spam_prep = 0.0;     // per-experiment budget
  double spam_readout = 0.0;  // per-experiment budget
  double gate_lambda = 0.0;
  double gate_kappa = 0.0;
  DensityState source = ideal_epr_state();

  KrausChannel memory(double t) const { return memory_channel(t, T2, memory_model); }
  KrausChannel conversion_leg() const { return conversion_leg_channel(conversion_eps); }
  double gate_lambda_at(double nbar) const;

  /// Noise bundle with every channel calibrated from `params`.
  static NoiseBundle from_params(const DeviceParams& params);
  /// Same source, all errors off.
  static NoiseBundle noiseless(const DensityState& source);
  static NoiseBundle noiseless();
};

}  // namespace ionnode::dev
