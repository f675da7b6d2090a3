#include "ionnode/circuits.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace ionnode::circ {

const char* to_string(QubitType t) { return t == QubitType::S ? "S" : "F"; }
const char* to_string(Ion i) { return i == Ion::memory ? "memory" : "communication"; }
const char* to_string(Address a) {
  switch (a) {
    case Address::both: return "both";
    case Address::memory: return "memory";
    case Address::communication: return "communication";
  }
  return "?";
}
const char* to_string(GhzSetting s) {
  switch (s) {
    case GhzSetting::populations: return "Z";
    case GhzSetting::m1: return "M1";
    case GhzSetting::m2: return "M2";
    case GhzSetting::m3: return "M3";
  }
  return "?";
}

namespace {

constexpr Ion kIons[] = {Ion::memory, Ion::communication};

bool addresses(Address a, Ion i) {
  return a == Address::both || (a == Address::memory) == (i == Ion::memory);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Tracker {
  QubitTypeState types;
  bool measured[2] = {false, false};
  bool photon_live = false;
  bool photon_measured = false;
  int heralds = 0;

  bool& ion_measured(Ion i) { return measured[i == Ion::memory ? 0 : 1]; }
};

class Validator {
 public:
  explicit Validator(const Circuit& c) { t_.types = c.initial; }

  std::vector<Violation> run(const Circuit& c) {
    for (std::size_t k = 0; k < c.ops.size(); ++k) {
      idx_ = k;
      std::visit([this](const auto& op) { check(op); }, c.ops[k]);
    }
    return std::move(out_);
  }

 private:
  void fail(const std::string& msg) { out_.push_back({idx_, msg}); }

  void finite(double v, const char* what) {
    if (!std::isfinite(v)) fail(std::string(what) + " is not finite");
  }

  void addressed(Address a, const char* kind) {
    for (Ion i : kIons) {
      const auto& st = t_.types.at(i);
      const bool acts = st.present && st.type == QubitType::S;
      if (addresses(a, i)) {
        if (!st.present) fail(std::string(kind) + " addresses absent " + to_string(i) + " ion");
        else if (st.type != QubitType::S)
          fail(std::string(kind) + " addresses " + to_string(i) + " ion while it is F-type");
        else if (t_.ion_measured(i)) fail(std::string(kind) + " acts on measured " + to_string(i) + " ion");
      } else if (acts && t_.ion_measured(i)) {
        fail(std::string(kind) + " would also act on measured " + to_string(i) + " ion");
      } else if (acts && st.live) {
        fail(std::string(kind) + " intended for " + to_string(a) + " would also act on S-type " +
             to_string(i) + " ion");
      }
    }
  }

  void usable(Ion i, const char* kind) {
    const auto& st = t_.types.at(i);
    if (!st.present) fail(std::string(kind) + " on absent " + to_string(i) + " ion");
    if (t_.ion_measured(i)) fail(std::string(kind) + " on measured " + to_string(i) + " ion");
  }

  void check(const UEnt&) {
    for (Ion i : kIons) {
      usable(i, "uent");
      if (t_.types.at(i).type != QubitType::S)
        fail(std::string("uent needs both ions S-type, ") + to_string(i) + " is F-type");
    }
  }
  void check(const ZTheta& op) {
    finite(op.theta, "z angle");
    addressed(op.target, "z");
  }
  void check(const YThetaGlobal& op) {
    finite(op.theta, "y angle");
    addressed(op.intent, "y");
  }
  void check(const MicrowaveRot& op) {
    finite(op.theta, "rot angle");
    finite(op.phi, "rot phase");
    addressed(op.intent, "rot");
  }
  void check(const MicrowavePi& op) { addressed(op.intent, "mwpi"); }
  void check(const Convert& op) {
    usable(op.ion, "convert");
    auto& st = t_.types.at(op.ion);
    if (st.type == op.to)
      fail(std::string("convert: ") + to_string(op.ion) + " ion is already " + to_string(op.to) + "-type");
    st.type = op.to;
  }
  void check(const PhotonMeasure& op) {
    finite(op.hwp_deg, "hwp angle");
    finite(op.qwp_deg, "qwp angle");
    if (!t_.photon_live) fail("photon measured before it was heralded");
    if (t_.photon_measured) fail("photon measured twice");
    t_.photon_measured = true;
  }
  void check(const IonMeasureZ& op) {
    for (Ion i : kIons) {
      if (!addresses(op.which, i)) continue;
      usable(i, "measure");
      if (t_.types.at(i).type != QubitType::S)
        fail(std::string("measure: ") + to_string(i) + " ion must be S-type");
      t_.ion_measured(i) = true;
      t_.types.at(i).live = false;
    }
  }
  void check(const PrepState& op) {
    usable(op.ion, "prep");
    auto& st = t_.types.at(op.ion);
    if (st.type != QubitType::S) fail(std::string("prep: ") + to_string(op.ion) + " ion must be S-type");
    if (op.state != MubState::zero) {
      const Ion other = op.ion == Ion::memory ? Ion::communication : Ion::memory;
      const auto& o = t_.types.at(other);
      if (o.present && o.type == QubitType::S && (o.live || t_.ion_measured(other)))
        fail(std::string("prep rotation would also act on S-type ") + to_string(other) + " ion");
    }
    st.live = true;
  }
  void check(const HeraldEpr&) {
    usable(Ion::communication, "herald");
    if (t_.types.communication.type != QubitType::S) fail("herald: communication ion must be S-type");
    const auto& m = t_.types.memory;
    if (m.present && m.live && m.type == QubitType::S)
      fail("herald: memory ion must be F-type during photon generation");
    if (++t_.heralds > 1) fail("herald: only one photon per circuit");
    t_.types.communication.live = true;
    t_.photon_live = true;
  }
  void check(const Store& op) {
    if (!(std::isfinite(op.seconds) && op.seconds >= 0.0)) fail("store: duration must be finite and >= 0");
    usable(Ion::memory, "store");
    if (t_.types.memory.type != QubitType::F) fail("store: memory ion must be F-type");
  }

  Tracker t_;
  std::size_t idx_ = 0;
  std::vector<Violation> out_;
};

const QubitRegister& node_register() {
  static const QubitRegister reg({"memory", "communication", "photon"});
  return reg;
}

const std::string& label(Ion i) {
  static const std::string m = "memory", c = "communication";
  return i == Ion::memory ? m : c;
}

const std::string kPhoton = "photon";

// Shared interpreter for exact evolution, trajectories and final_state.
class Executor {
 public:
  enum class Measure { skip, defer, collapse };

  Executor(const Circuit& c, const dev::NoiseBundle& noise, const RunOptions& opt, Measure how, Rng* rng)
      : c_(c), noise_(noise), how_(how), rng_(rng), state_(DensityState::ground(node_register())) {
    types_ = c.initial;
    cn_ = circuit_noise(c, noise);
    gate_lambda_ = noise.gate_lambda_at(opt.nbar_at_gate);
    const auto& src = noise.source.reg().labels();
    if (src != std::vector<std::string>{"communication", "photon"})
      throw ContractError("run_circuit: source state must be over (communication, photon)");
  }

  void run() {
    for (const auto& op : c_.ops) std::visit([this](const auto& o) { apply(o); }, op);
  }

  const DensityState& state() const { return state_; }
  bool measured(std::size_t q) const { return measured_[q]; }
  char outcome(std::size_t q) const { return outcome_[q]; }
  const CircuitNoise& cnoise() const { return cn_; }

 private:
  void unitary1(const ComplexMatrix& g, const std::string& who) {
    state_ = apply_unitary(state_, g, {who});
  }

  void on_s_type(const ComplexMatrix& g) {
    for (Ion i : kIons) {
      const auto& st = types_.at(i);
      if (st.present && st.type == QubitType::S) unitary1(g, label(i));
    }
  }

  void apply(const UEnt&) {
    state_ = apply_unitary(state_, u_ent_matrix(), {"memory", "communication"});
    if (gate_lambda_ > 0.0)
      state_ = apply_channel(state_, dev::depolarizing_channel(gate_lambda_, 2), {"memory", "communication"});
  }
  void apply(const ZTheta& op) { on_s_type(rot_z(op.theta)); }
  void apply(const YThetaGlobal& op) { on_s_type(rot_y(op.theta)); }
  void apply(const MicrowaveRot& op) { on_s_type(rot_xy(op.theta, op.phi)); }
  void apply(const MicrowavePi&) { on_s_type(rot_xy(M_PI, 0.0)); }
  void apply(const Convert& op) {
    if (noise_.conversion_eps > 0.0)
      state_ = apply_channel(state_, noise_.conversion_leg(), {label(op.ion)});
    types_.at(op.ion).type = op.to;
  }
  void apply(const PrepState& op) {
    ComplexMatrix rho0 = ComplexMatrix::Zero(2, 2);
    rho0(0, 0) = 1.0 - cn_.prep_flip;
    rho0(1, 1) = cn_.prep_flip;
    state_ = reset_qubit(state_, label(op.ion), rho0);
    const auto r = mub_to_zero_rotation(op.state);
    if (r.theta != 0.0) unitary1(rot_xy(-r.theta, r.phi), label(op.ion));
  }
  void apply(const HeraldEpr&) {
    const auto mem = partial_trace(state_, {"memory"});
    state_ = DensityState(node_register(), kron<double>(mem.rho(), noise_.source.rho()));
  }
  void apply(const Store& op) {
    if (op.seconds > 0.0) state_ = apply_channel(state_, noise_.memory(op.seconds), {"memory"});
  }
  void apply(const PhotonMeasure& op) {
    if (how_ == Measure::skip) return;
    measured_[2] = true;
    if (how_ == Measure::defer) {
      unitary1(waveplate_unitary(op.hwp_deg, op.qwp_deg), kPhoton);
      return;
    }
    const auto proj = photon_measurement_operators(op.hwp_deg, op.qwp_deg);
    const std::vector<std::string> who{kPhoton};
    auto [k, post] = sample_measurement<double>(state_, std::span<const ComplexMatrix>(proj.data(), 2),
                                                std::span<const std::string>(who), *rng_);
    state_ = std::move(post);
    outcome_[2] = k == 0 ? 'H' : 'V';
  }
  void apply(const IonMeasureZ& op) {
    if (how_ == Measure::skip) return;
    for (Ion i : kIons) {
      if (!addresses(op.which, i)) continue;
      const std::size_t q = i == Ion::memory ? 0 : 1;
      measured_[q] = true;
      if (how_ == Measure::defer) continue;
      ComplexMatrix p0 = ComplexMatrix::Zero(2, 2), p1 = ComplexMatrix::Zero(2, 2);
      p0(0, 0) = 1.0;
      p1(1, 1) = 1.0;
      const std::array<ComplexMatrix, 2> proj{p0, p1};
      const std::vector<std::string> who{label(i)};
      auto [k, post] = sample_measurement<double>(state_, std::span<const ComplexMatrix>(proj.data(), 2),
                                                  std::span<const std::string>(who), *rng_);
      state_ = std::move(post);
      std::bernoulli_distribution flip(cn_.readout_flip);
      const bool bit = (k == 1) != flip(*rng_);
      outcome_[q] = bit ? '1' : '0';
    }
  }

  const Circuit& c_;
  const dev::NoiseBundle& noise_;
  Measure how_;
  Rng* rng_;
  DensityState state_;
  QubitTypeState types_;
  CircuitNoise cn_;
  double gate_lambda_ = 0.0;
  bool measured_[3] = {false, false, false};
  char outcome_[3] = {0, 0, 0};
};

// Builds the 2-ion unitary of a block of ops under S/F addressing.
ComplexMatrix block_unitary(const std::vector<GateOp>& ops, QubitTypeState types) {
  ComplexMatrix u = ComplexMatrix::Identity(4, 4);
  auto on_s = [&](const ComplexMatrix& g) {
    const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
    const ComplexMatrix gm = types.memory.type == QubitType::S ? g : id;
    const ComplexMatrix gc = types.communication.type == QubitType::S ? g : id;
    u = kron<double>(gm, gc) * u;
  };
  for (const auto& op : ops)
    std::visit(Overloaded{
                   [&](const UEnt&) { u = u_ent_matrix() * u; },
                   [&](const ZTheta& o) { on_s(rot_z(o.theta)); },
                   [&](const YThetaGlobal& o) { on_s(rot_y(o.theta)); },
                   [&](const MicrowaveRot& o) { on_s(rot_xy(o.theta, o.phi)); },
                   [&](const MicrowavePi&) { on_s(rot_xy(M_PI, 0.0)); },
                   [&](const Convert& o) { types.at(o.ion).type = o.to; },
                   [&](const auto&) { throw ContractError("block_unitary: unsupported op in block"); },
               },
               op);
  return u;
}

}  // namespace

std::vector<Violation> validate_circuit(const Circuit& c) { return Validator(c).run(c); }

void require_valid(const Circuit& c) {
  const auto v = validate_circuit(c);
  if (!v.empty())
    throw ContractError("circuit '" + c.name + "' op " + std::to_string(v.front().op_index) + ": " +
                        v.front().message);
}

// ---------------------------------------------------------------------------
// Compiled experiments

Circuit sdf_bell_prep_circuit() {
  Circuit c;
  c.name = "bell";
  c.initial.memory.live = c.initial.communication.live = false;
  c.ops = {PrepState{Ion::memory, MubState::zero},
           PrepState{Ion::communication, MubState::zero},
           YThetaGlobal{M_PI / 2, Address::both},
           UEnt{},
           YThetaGlobal{M_PI / 2, Address::both},
           ZTheta{M_PI / 4, Address::both}};
  return c;
}

std::vector<GateOp> teleport_bell_block() {
  return {ZTheta{M_PI, Address::communication},
          YThetaGlobal{M_PI / 2, Address::communication},
          Convert{Ion::memory, QubitType::S},
          UEnt{},
          ZTheta{M_PI / 2, Address::both},
          YThetaGlobal{M_PI / 2, Address::both}};
}

ComplexMatrix teleport_bell_block_unitary() {
  QubitTypeState types;
  types.memory.type = QubitType::F;
  return block_unitary(teleport_bell_block(), types);
}

Circuit compile_teleportation(MubState input, double storage_T, PhotonBasis basis, bool deferred) {
  Circuit c;
  c.name = std::string("teleport_") + mub_name(input) + "_" + to_string(basis);
  c.initial.memory.live = c.initial.communication.live = false;
  const PhotonMeasure pm = photon_basis_setting(basis);
  c.ops = {PrepState{Ion::memory, input}, Convert{Ion::memory, QubitType::F}, Store{storage_T}, HeraldEpr{}};
  if (!deferred) c.ops.push_back(pm);
  for (auto& op : teleport_bell_block()) c.ops.push_back(op);
  c.ops.push_back(IonMeasureZ{Address::both});
  if (deferred) c.ops.push_back(pm);
  return c;
}

Circuit compile_ghz(GhzSetting setting, double storage_T, bool measure) {
  Circuit c;
  c.name = std::string("ghz_") + to_string(setting);
  c.initial.memory.live = c.initial.communication.live = false;
  c.ops = {PrepState{Ion::memory, MubState::zero},
           YThetaGlobal{M_PI / 2, Address::memory},
           Convert{Ion::memory, QubitType::F},
           Store{storage_T},
           HeraldEpr{}};
  int k = 0;
  switch (setting) {
    case GhzSetting::populations: k = 0; break;
    case GhzSetting::m1: k = 1; break;
    case GhzSetting::m2: k = 2; break;
    case GhzSetting::m3: k = 3; break;
  }
  if (measure) c.ops.push_back(k == 0 ? PhotonMeasure{0.0, 0.0} : mk_waveplate_setting(k));
  const std::vector<GateOp> rest = {Convert{Ion::memory, QubitType::S},
                                    UEnt{},
                                    ZTheta{-M_PI / 2, Address::both},
                                    YThetaGlobal{-M_PI / 2, Address::both},
                                    Convert{Ion::memory, QubitType::F},
                                    ZTheta{M_PI, Address::communication},
                                    YThetaGlobal{M_PI / 2, Address::communication},
                                    Convert{Ion::memory, QubitType::S}};
  c.ops.insert(c.ops.end(), rest.begin(), rest.end());
  if (measure) {
    if (k != 0) c.ops.push_back(MicrowaveRot{M_PI / 2, k * M_PI / 3 - M_PI / 2, Address::both});
    c.ops.push_back(IonMeasureZ{Address::both});
  }
  return c;
}

Circuit storage_circuit(MubState input, double storage_time, int round_trips) {
  if (round_trips < 1) throw ContractError("storage_circuit: at least one round trip");
  Circuit c;
  c.name = std::string("storage_") + mub_name(input);
  c.initial.memory.live = false;
  c.initial.communication.present = false;
  c.initial.communication.live = false;
  c.ops.push_back(PrepState{Ion::memory, input});
  for (int i = 0; i < round_trips; ++i) {
    c.ops.push_back(Convert{Ion::memory, QubitType::F});
    if (i == 0) c.ops.push_back(Store{storage_time});
    c.ops.push_back(Convert{Ion::memory, QubitType::S});
  }
  const auto r = mub_to_zero_rotation(input);
  if (r.theta != 0.0) c.ops.push_back(MicrowaveRot{r.theta, r.phi, Address::memory});
  c.ops.push_back(IonMeasureZ{Address::memory});
  return c;
}

Circuit ion_photon_circuit(PhotonBasis basis) {
  Circuit c;
  c.name = std::string("ion_photon_") + to_string(basis) + to_string(basis);
  c.initial.memory.present = false;
  c.initial.memory.live = false;
  c.initial.communication.live = false;
  c.ops = {HeraldEpr{}, photon_basis_setting(basis)};
  if (basis != PhotonBasis::Z) {
    const double alpha = basis == PhotonBasis::X ? 0.0 : M_PI / 2;
    c.ops.push_back(MicrowaveRot{M_PI / 2, alpha - M_PI / 2, Address::communication});
  }
  c.ops.push_back(IonMeasureZ{Address::communication});
  return c;
}

ComplexVector ghz_state_vector() {
  ComplexVector v = ComplexVector::Zero(8);
  v(0) = v(7) = 1.0 / std::sqrt(2.0);
  return v;
}

// ---------------------------------------------------------------------------
// Execution

CircuitNoise circuit_noise(const Circuit& c, const dev::NoiseBundle& noise) {
  int preps = 0;
  bool meas[2] = {false, false};
  for (const auto& op : c.ops) {
    if (std::holds_alternative<PrepState>(op)) ++preps;
    if (const auto* m = std::get_if<IonMeasureZ>(&op))
      for (Ion i : kIons)
        if (addresses(m->which, i)) meas[i == Ion::memory ? 0 : 1] = true;
  }
  const int n_meas = int(meas[0]) + int(meas[1]);
  CircuitNoise out;
  if (preps > 0) out.prep_flip = noise.spam_prep / preps;
  if (n_meas > 0) out.readout_flip = noise.spam_readout / n_meas;
  return out;
}

DensityState final_state(const Circuit& c, const dev::NoiseBundle& noise, const RunOptions& opt) {
  require_valid(c);
  Executor ex(c, noise, opt, Executor::Measure::skip, nullptr);
  ex.run();
  return ex.state();
}

std::vector<std::pair<std::string, double>> outcome_distribution(const Circuit& c,
                                                                 const dev::NoiseBundle& noise,
                                                                 const RunOptions& opt) {
  require_valid(c);
  Executor ex(c, noise, opt, Executor::Measure::defer, nullptr);
  ex.run();
  std::vector<std::size_t> qs;
  std::vector<std::string> labels;
  for (std::size_t q = 0; q < 3; ++q)
    if (ex.measured(q)) {
      qs.push_back(q);
      labels.push_back(node_register()[q]);
    }
  if (qs.empty()) throw ContractError("circuit '" + c.name + "' measures nothing");
  const auto marg = partial_trace(ex.state(), std::span<const std::string>(labels));
  const std::size_t n = qs.size(), dim = std::size_t{1} << n;
  std::vector<double> p(dim);
  for (std::size_t i = 0; i < dim; ++i) p[i] = std::max(0.0, marg.rho()(Eigen::Index(i), Eigen::Index(i)).real());
  // Classical readout flips on ion bits.
  const double f = ex.cnoise().readout_flip;
  for (std::size_t b = 0; b < n; ++b) {
    if (qs[b] == 2 || f == 0.0) continue;
    const std::size_t mask = std::size_t{1} << (n - 1 - b);
    std::vector<double> q(dim);
    for (std::size_t i = 0; i < dim; ++i) q[i] = (1 - f) * p[i] + f * p[i ^ mask];
    p = std::move(q);
  }
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < dim; ++i) {
    std::string s;
    for (std::size_t b = 0; b < n; ++b) {
      const bool bit = (i >> (n - 1 - b)) & 1U;
      s += qs[b] == 2 ? (bit ? 'V' : 'H') : (bit ? '1' : '0');
    }
    out.emplace_back(std::move(s), p[i]);
  }
  return out;
}

CountsTable run_circuit(const Circuit& c, const dev::NoiseBundle& noise, Rng& rng, std::int64_t shots,
                        const RunOptions& opt) {
  if (shots <= 0) throw ContractError("run_circuit: shots must be positive");
  CountsTable table(c.name);
  if (opt.mode == ExecMode::exact) {
    const auto dist = outcome_distribution(c, noise, opt);
    // Multinomial draw as a chain of conditional binomials.
    std::int64_t left = shots;
    double mass = 0.0;
    for (const auto& [_, p] : dist) mass += p;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      std::int64_t k = left;
      if (i + 1 < dist.size()) {
        const double q = mass > 0 ? std::clamp(dist[i].second / mass, 0.0, 1.0) : 0.0;
        k = std::binomial_distribution<std::int64_t>(left, q)(rng);
      }
      if (k > 0) table.add(dist[i].first, k);
      left -= k;
      mass -= dist[i].second;
      if (left == 0) break;
    }
    return table;
  }
  require_valid(c);
  for (std::int64_t s = 0; s < shots; ++s) {
    Executor ex(c, noise, opt, Executor::Measure::collapse, &rng);
    ex.run();
    std::string o;
    for (std::size_t q = 0; q < 3; ++q)
      if (ex.measured(q)) o += ex.outcome(q);
    if (o.empty()) throw ContractError("circuit '" + c.name + "' measures nothing");
    table.add(o);
  }
  return table;
}

}  // namespace ionnode::circ
