// Native gate set of the two-ion node, compiled experiments, photon optics
// and the circuit executor.
//
// Every circuit runs on the register {memory, communication, photon}.
// Ion-addressed microwave and light-shift operations physically act on all
// S-type ions; F-type ions are untouched. Each such op carries the intended
// target so the validator can reject circuits whose intent cannot be met.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ionnode/counts.hpp"
#include "ionnode/devmodel.hpp"
#include "ionnode/gates.hpp"
#include "ionnode/rng.hpp"

namespace ionnode::circ {

enum class QubitType { S, F };
enum class Ion { memory, communication };
enum class Address { both, memory, communication };

const char* to_string(QubitType t);
const char* to_string(Ion i);
const char* to_string(Address a);

struct IonStatus {
  QubitType type = QubitType::S;
  bool present = true;
  bool live = true;  // holds a state that later ops depend on
};

struct QubitTypeState {
  IonStatus memory;
  IonStatus communication;

  IonStatus& at(Ion i) { return i == Ion::memory ? memory : communication; }
  const IonStatus& at(Ion i) const { return i == Ion::memory ? memory : communication; }
};

struct UEnt {};
struct ZTheta {
  double theta;
  Address target;
};
struct YThetaGlobal {
  double theta;
  Address intent;
};
/// exp(-i theta/2 (cos phi X + sin phi Y)), same addressing rules as YThetaGlobal.
struct MicrowaveRot {
  double theta;
  double phi;
  Address intent;
};
struct MicrowavePi {
  Address intent = Address::both;
};
struct Convert {
  Ion ion;
  QubitType to;
};
struct PhotonMeasure {
  double hwp_deg;
  double qwp_deg;
};
struct IonMeasureZ {
  Address which;
};
struct PrepState {
  Ion ion;
  MubState state;
};
/// Resets (communication, photon) to the source state.
struct HeraldEpr {};
/// Memory idles for `seconds` in the F-type manifold.
struct Store {
  double seconds;
};

using GateOp = std::variant<UEnt, ZTheta, YThetaGlobal, MicrowaveRot, MicrowavePi, Convert,
                            PhotonMeasure, IonMeasureZ, PrepState, HeraldEpr, Store>;

struct Circuit {
  std::string name;
  QubitTypeState initial;
  std::vector<GateOp> ops;
};

struct Violation {
  std::size_t op_index;
  std::string message;
};

std::vector<Violation> validate_circuit(const Circuit& c);
/// Throws ContractError quoting the first violation.
void require_valid(const Circuit& c);

// ---------------------------------------------------------------------------
// Photon optics

/// Retarder with fast axis at `theta_deg` from horizontal:
/// R(theta) diag(1, e^{-i Gamma}) R(-theta).
ComplexMatrix jones_retarder(double theta_deg, double retardance);
ComplexMatrix jones_hwp(double theta_deg);
ComplexMatrix jones_qwp(double theta_deg);

/// Polarization frame of the detection path, diag(1, -i). It fixes the
/// relative phase between H and V accumulated before the waveplates.
ComplexMatrix detection_frame();

/// U = HWP(hwp) QWP(qwp) F; the photon meets the QWP first, then the HWP,
/// then the PBS. The H port reads +1.
ComplexMatrix waveplate_unitary(double hwp_deg, double qwp_deg);

/// {U^dag |H><H| U, U^dag |V><V| U}.
std::array<ComplexMatrix, 2> photon_measurement_operators(double hwp_deg, double qwp_deg);

enum class PhotonBasis { Z, X, Y };
const char* to_string(PhotonBasis b);
PhotonMeasure photon_basis_setting(PhotonBasis b);

/// Waveplate setting whose H port projects onto the +1 eigenstate of
/// cos(a) X + sin(a) Y: HWP at a/4, QWP at 45 degrees.
PhotonMeasure equatorial_setting(double alpha_deg);
/// equatorial_setting(60 k) for k = 1, 2, 3.
PhotonMeasure mk_waveplate_setting(int k);

/// M_k = cos(k pi/3) X + sin(k pi/3) Y.
ComplexMatrix mk_observable(int k);

// ---------------------------------------------------------------------------
// Compiled experiments

/// Both ions from |00> to (|00> + |11>)/sqrt(2). No measurement.
Circuit sdf_bell_prep_circuit();

/// Two-ion part of the Bell-state measurement, after the photon has been
/// heralded: communication-only Z/Y, memory back to S, U_ent, global Z/Y.
std::vector<GateOp> teleport_bell_block();
/// Unitary of `teleport_bell_block` on (memory, communication), conversions
/// taken as identity.
ComplexMatrix teleport_bell_block_unitary();

/// Full teleportation of `input` from the memory ion onto the photon.
/// With `deferred` the photon is measured after the ions.
Circuit compile_teleportation(MubState input, double storage_T, PhotonBasis basis,
                              bool deferred = false);

enum class GhzSetting { populations, m1, m2, m3 };
const char* to_string(GhzSetting s);

/// (|00H> + |11V>)/sqrt(2) on (memory, communication, photon), followed by
/// the analysis pulses and measurements of `setting`. With `measure` false
/// the circuit stops after state preparation.
Circuit compile_ghz(GhzSetting setting, double storage_T, bool measure = true);

/// Memory-only experiment: prepare `input`, `round_trips` S->F->S
/// conversions with `storage_time` spent in F during the first, analyse back
/// to |0> and measure. The communication ion is absent.
Circuit storage_circuit(MubState input, double storage_time, int round_trips = 1);

/// Herald, rotate the communication ion into `basis`, measure both qubits.
Circuit ion_photon_circuit(PhotonBasis basis);

ComplexVector ghz_state_vector();

// ---------------------------------------------------------------------------
// Execution

enum class ExecMode { exact, trajectory };

struct RunOptions {
  ExecMode mode = ExecMode::exact;
  double nbar_at_gate = 0.0;
};

/// Per-qubit noise rates derived from the bundle and the circuit: the
/// experiment-level SPAM budgets are split among the prepared and the
/// measured ions.
struct CircuitNoise {
  double prep_flip = 0.0;
  double readout_flip = 0.0;
};
CircuitNoise circuit_noise(const Circuit& c, const dev::NoiseBundle& noise);

/// State after every non-measurement op (measurement ops are skipped).
DensityState final_state(const Circuit& c, const dev::NoiseBundle& noise, const RunOptions& opt = {});

/// Exact outcome probabilities including readout flips, keyed by outcome
/// string (ion bits '0'/'1', photon 'H'/'V', in register order).
std::vector<std::pair<std::string, double>> outcome_distribution(const Circuit& c,
                                                                 const dev::NoiseBundle& noise,
                                                                 const RunOptions& opt = {});

/// Samples `shots` outcomes. The table's setting is the circuit name.
CountsTable run_circuit(const Circuit& c, const dev::NoiseBundle& noise, Rng& rng, std::int64_t shots,
                        const RunOptions& opt = {});

// ---------------------------------------------------------------------------
// Text format

/// One op per line, `kind arg...`; `#` starts a comment. Grammar:
///   name <text>
///   init <memory|communication> <S|F|idle|absent>
///   prep <ion> <0|1|+|-|R|L>
///   uent | mwpi [intent] | herald
///   z <theta> <both|memory|communication>
///   y <theta> <intent>
///   rot <theta> <phi> <intent>
///   convert <ion> <S|F>
///   store <seconds>
///   photon <hwp_deg> <qwp_deg>
///   measure <both|memory|communication>
/// Angles accept plain numbers and multiples of pi such as `-3pi/4` or `pi/2`.
Circuit parse_circuit(const std::string& text);
std::string format_circuit(const Circuit& c);
double parse_angle(const std::string& token);

}  // namespace ionnode::circ
