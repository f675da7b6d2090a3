#include "ionnode/devmodel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionnode/gates.hpp"

namespace ionnode::dev {

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ContractError(field + ": " + what);
}

void require_probability(double p, const std::string& field) {
  require(std::isfinite(p) && p >= 0.0 && p <= 1.0, field, "must be a probability in [0, 1]");
}

void require_positive(double v, const std::string& field) {
  require(std::isfinite(v) && v > 0.0, field, "must be positive");
}

std::vector<ComplexMatrix> pauli_basis(int nqubits) {
  std::vector<ComplexMatrix> out{ComplexMatrix::Identity(1, 1)};
  for (int q = 0; q < nqubits; ++q) {
    std::vector<ComplexMatrix> next;
    for (const auto& m : out)
      for (char p : {'I', 'X', 'Y', 'Z'}) next.push_back(kron<double>(m, pauli_matrix(p)));
    out = std::move(next);
  }
  return out;
}

}  // namespace

SourceMode parse_source_mode(const std::string& s) {
  if (s == "werner") return SourceMode::werner;
  if (s == "bell_diagonal") return SourceMode::bell_diagonal;
  throw ContractError("source_mode: expected 'werner' or 'bell_diagonal', got '" + s + "'");
}

MemoryModel parse_memory_model(const std::string& s) {
  if (s == "isotropic") return MemoryModel::isotropic;
  if (s == "dephasing") return MemoryModel::dephasing;
  throw ContractError("memory_model: expected 'isotropic' or 'dephasing', got '" + s + "'");
}

std::string to_string(SourceMode m) { return m == SourceMode::werner ? "werner" : "bell_diagonal"; }
std::string to_string(MemoryModel m) { return m == MemoryModel::isotropic ? "isotropic" : "dephasing"; }

void DeviceParams::validate() const {
  require_positive(t_doppler, "t_doppler");
  require_positive(t_eit, "t_eit");
  require_positive(t_pump, "t_pump");
  require_positive(t_mw_init, "t_mw_init");
  require_positive(t_window, "t_window");
  require(attempts_per_batch >= 1, "attempts_per_batch", "must be at least 1");
  require(std::isfinite(ent_rate_r) && ent_rate_r >= 0.0, "ent_rate_r", "must be nonnegative");
  require_positive(storage_T, "storage_T");
  require_positive(T2_star, "T2_star");
  require_probability(eps_spam, "eps_spam");
  require_probability(eps_conv_roundtrip, "eps_conv_roundtrip");
  require_probability(F_cp_target, "F_cp_target");
  for (std::size_t i = 0; i < 3; ++i)
    require(std::isfinite(correlators_cp[i]) && std::abs(correlators_cp[i]) <= 1.0,
            "correlators_cp[" + std::to_string(i) + "]", "must lie in [-1, 1]");
  require_probability(F_bell_target, "F_bell_target");
  require(std::isfinite(heat_per_attempt) && heat_per_attempt >= 0.0, "heat_per_attempt",
          "must be nonnegative");
  require(std::isfinite(heat_background) && heat_background >= 0.0, "heat_background",
          "must be nonnegative");
  require(std::isfinite(heat_rate_active) && heat_rate_active >= 0.0, "heat_rate_active",
          "must be nonnegative");
  require(std::isfinite(nbar_after_eit) && nbar_after_eit >= 0.0, "nbar_after_eit",
          "must be nonnegative");
  require_probability(detect_err_ion, "detect_err_ion");
  require(std::isfinite(gate_heating_coupling_kappa) && gate_heating_coupling_kappa >= 0.0,
          "gate_heating_coupling_kappa", "must be nonnegative");
  require(std::isfinite(sideband_pi_efficiency) && sideband_pi_efficiency > 0.0 &&
              sideband_pi_efficiency <= 1.0,
          "sideband_pi_efficiency", "must lie in (0, 1]");
}

KrausChannel dephasing_channel(double t, double T2) {
  if (!(t >= 0.0)) throw ContractError("dephasing_channel: negative storage time");
  if (!(T2 > 0.0)) throw ContractError("dephasing_channel: T2 must be positive");
  const double p = (1.0 - std::exp(-t / T2)) / 2.0;
  return KrausChannel({std::sqrt(1.0 - p) * pauli_matrix('I'), std::sqrt(p) * pauli_matrix('Z')});
}

KrausChannel depolarizing_channel(double lambda, int nqubits) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ContractError("depolarizing_channel: lambda must lie in [0, 1]");
  if (nqubits != 1 && nqubits != 2)
    throw ContractError("depolarizing_channel: only 1 or 2 qubits supported");
  const auto paulis = pauli_basis(nqubits);
  const double n = static_cast<double>(paulis.size());
  std::vector<ComplexMatrix> ops;
  ops.push_back(std::sqrt(1.0 - lambda + lambda / n) * paulis.front());
  if (lambda > 0.0)
    for (std::size_t i = 1; i < paulis.size(); ++i) ops.push_back(std::sqrt(lambda / n) * paulis[i]);
  return KrausChannel(std::move(ops));
}

KrausChannel conversion_channel(double eps) {
  if (!(eps >= 0.0)) throw ContractError("conversion_channel: eps must be nonnegative");
  if (eps > 0.5) throw ContractError("conversion_channel: eps > 0.5 is unphysical for this model");
  return depolarizing_channel(2.0 * eps, 1);
}

double conversion_leg_lambda(double eps) {
  if (!(eps >= 0.0) || eps > 0.5) throw ContractError("conversion_leg_lambda: eps out of range");
  return 1.0 - std::sqrt(1.0 - 2.0 * eps);
}

KrausChannel conversion_leg_channel(double eps) {
  return depolarizing_channel(conversion_leg_lambda(eps), 1);
}

KrausChannel memory_channel(double t, double T2, MemoryModel model) {
  if (model == MemoryModel::dephasing) return dephasing_channel(t, T2);
  if (!(t >= 0.0)) throw ContractError("memory_channel: negative storage time");
  if (!(T2 > 0.0)) throw ContractError("memory_channel: T2 must be positive");
  return depolarizing_channel(1.0 - std::exp(-t / T2), 1);
}

SpamFlips spam_flip_channels(double eps_spam) {
  if (!(eps_spam >= 0.0 && eps_spam <= 1.0))
    throw ContractError("spam_flip_channels: eps_spam must lie in [0, 1]");
  return {eps_spam / 2.0, eps_spam / 2.0};
}

double werner_visibility(double fidelity) {
  if (!(fidelity >= 0.25 && fidelity <= 1.0))
    throw ContractError("werner_visibility: fidelity must lie in [1/4, 1]");
  return (4.0 * fidelity - 1.0) / 3.0;
}

DensityState ideal_epr_state() {
  ComplexVector phi = ComplexVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  return DensityState::from_pure(QubitRegister({"communication", "photon"}), phi);
}

DensityState photon_source_state(SourceMode mode, const DeviceParams& params) {
  const QubitRegister reg({"communication", "photon"});
  if (mode == SourceMode::werner) {
    const double p = werner_visibility(params.F_cp_target);
    ComplexMatrix rho = p * ideal_epr_state().rho() + (1.0 - p) / 4.0 * ComplexMatrix::Identity(4, 4);
    return DensityState(reg, std::move(rho));
  }
  const auto [cxx, cyy, czz] = params.correlators_cp;
  // Bell-basis weights; all four must be nonnegative for a physical state.
  const double w[4] = {(1 + cxx - cyy + czz) / 4, (1 - cxx + cyy + czz) / 4,
                       (1 + cxx + cyy - czz) / 4, (1 - cxx - cyy - czz) / 4};
  for (double wi : w)
    if (wi < -1e-12)
      throw ContractError("photon_source_state: correlator triple lies outside the physical tetrahedron");
  ComplexMatrix rho = ComplexMatrix::Identity(4, 4);
  rho += cxx * PauliString("XX").matrix() + cyy * PauliString("YY").matrix() +
         czz * PauliString("ZZ").matrix();
  return DensityState(reg, rho / 4.0);
}

BellPipeline bell_pipeline_exact(double lambda, const SpamFlips& spam) {
  const QubitRegister reg({"memory", "communication"});
  const std::vector<std::string> both{"memory", "communication"};
  const double prep = spam.prep / 2.0;     // budget shared by the two prepared ions
  const double readout = spam.readout / 2.0;
  const auto depol = depolarizing_channel(lambda, 2);
  const ComplexMatrix y90 = kron<double>(rot_y(M_PI / 2), rot_y(M_PI / 2));
  const ComplexMatrix z45 = kron<double>(rot_z(M_PI / 4), rot_z(M_PI / 4));

  // Mixture over preparation flips of the two ions.
  ComplexMatrix mixed = ComplexMatrix::Zero(4, 4);
  for (int flips = 0; flips < 4; ++flips) {
    const int fm = flips >> 1, fc = flips & 1;
    const double w = (fm ? prep : 1 - prep) * (fc ? prep : 1 - prep);
    if (w == 0.0) continue;
    ComplexVector psi = ComplexVector::Zero(4);
    psi(2 * fm + fc) = 1.0;
    auto st = DensityState::from_pure(reg, psi);
    st = apply_unitary(st, y90, std::span<const std::string>(both));
    st = apply_unitary(st, u_ent_matrix(), std::span<const std::string>(both));
    st = apply_channel(st, depol, std::span<const std::string>(both));
    st = apply_unitary(st, y90, std::span<const std::string>(both));
    st = apply_unitary(st, z45, std::span<const std::string>(both));
    mixed += w * st.rho();
  }
  const DensityState prepared(reg, mixed);

  // Readout flips act on each classical bit independently.
  auto even_probability = [&](const DensityState& s) {
    const double q = readout;
    const double keep = (1 - q) * (1 - q) + q * q;
    const double p_even = s.rho()(0, 0).real() + s.rho()(3, 3).real();
    return keep * p_even + (1 - keep) * (1 - p_even);
  };

  BellPipeline out;
  out.population = even_probability(prepared);
  // Parity fringe sampled over a full period and projected onto sin/cos.
  constexpr int kPoints = 16;
  double a = 0.0, b = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double phase = 2.0 * M_PI * i / kPoints;
    const ComplexMatrix r = rot_xy(M_PI / 2, phase / 2);
    const auto analysed = apply_unitary(prepared, kron<double>(r, r), std::span<const std::string>(both));
    const double parity = 2.0 * even_probability(analysed) - 1.0;
    a += 2.0 / kPoints * parity * std::sin(phase);
    b += 2.0 / kPoints * parity * std::cos(phase);
  }
  out.contrast = std::hypot(a, b);
  out.fidelity = out.population / 2.0 + out.contrast / 2.0;
  return out;
}

double calibrate_gate_lambda(double target, const SpamFlips& spam) {
  if (!(target > 0.25 && target <= 1.0))
    throw ContractError("calibrate_gate_lambda: target must lie in (1/4, 1]");
  const double best = bell_pipeline_exact(0.0, spam).fidelity;
  if (best < target - 1e-12)
    throw std::domain_error("calibrate_gate_lambda: target " + std::to_string(target) +
                            " unreachable; SPAM alone limits the Bell fidelity to " +
                            std::to_string(best));
  if (best <= target) return 0.0;
  double lo = 0.0, hi = 1.0;  // fidelity decreases monotonically in lambda
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bell_pipeline_exact(mid, spam).fidelity > target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double NoiseBundle::gate_lambda_at(double nbar) const {
  return std::clamp(gate_lambda + gate_kappa * nbar, 0.0, 1.0);
}

NoiseBundle NoiseBundle::from_params(const DeviceParams& params) {
  params.validate();
  NoiseBundle nb;
  const auto spam = spam_flip_channels(params.eps_spam);
  nb.memory_model = params.memory_model;
  nb.T2 = params.T2_star;
  nb.conversion_eps = params.eps_conv_roundtrip;
  nb.spam_prep = spam.prep;
  nb.spam_readout = spam.readout;
  nb.gate_lambda = calibrate_gate_lambda(params.F_bell_target, spam);
  nb.gate_kappa = params.gate_heating_coupling_kappa;
  nb.source = photon_source_state(params.source_mode, params);
  return nb;
}

NoiseBundle NoiseBundle::noiseless(const DensityState& source) {
  NoiseBundle nb;
  nb.T2 = 1e300;
  nb.source = source;
  return nb;
}

NoiseBundle NoiseBundle::noiseless() { return noiseless(ideal_epr_state()); }

}  // namespace ionnode::dev
