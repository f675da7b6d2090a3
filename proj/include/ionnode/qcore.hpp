// Dense density-matrix machinery for small qubit registers.
//
// Conventions: register order is tensor order, the leftmost label is the
// most significant bit of a computational index. All types are templated on
// the real scalar; the library itself instantiates them with double.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ionnode {

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

using ComplexMatrix = CMatrix<double>;
using ComplexVector = CVector<double>;

inline constexpr std::size_t kMaxQubits = 6;
inline constexpr double kStateTol = 1e-9;

/// Raised when an operation receives arguments that violate its contract.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Register

class QubitRegister {
 public:
  QubitRegister() = default;
  explicit QubitRegister(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw ContractError("QubitRegister: empty register");
    if (labels_.size() > kMaxQubits)
      throw ContractError("QubitRegister: at most 6 qubits supported");
    for (std::size_t i = 0; i < labels_.size(); ++i)
      for (std::size_t j = i + 1; j < labels_.size(); ++j)
        if (labels_[i] == labels_[j])
          throw ContractError("QubitRegister: duplicate label '" + labels_[i] + "'");
  }

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return std::size_t{1} << labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& operator[](std::size_t i) const { return labels_[i]; }

  bool contains(const std::string& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
  }

  std::size_t index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) throw ContractError("unknown qubit label '" + label + "'");
    return static_cast<std::size_t>(it - labels_.begin());
  }

  std::vector<std::size_t> indices_of(std::span<const std::string> labels) const {
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
      auto idx = index_of(l);
      if (std::find(out.begin(), out.end(), idx) != out.end())
        throw ContractError("repeated target label '" + l + "'");
      out.push_back(idx);
    }
    return out;
  }

  friend bool operator==(const QubitRegister&, const QubitRegister&) = default;

 private:
  std::vector<std::string> labels_;
};

// ---------------------------------------------------------------------------
// Matrix helpers

template <typename Real>
CMatrix<Real> kron(const CMatrix<Real>& a, const CMatrix<Real>& b) {
  CMatrix<Real> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename Real>
bool all_finite(const CMatrix<Real>& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i)
    if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag())) return false;
  return true;
}

template <typename Real>
Real max_abs(const CMatrix<Real>& m) {
  return m.size() == 0 ? Real(0) : m.cwiseAbs().maxCoeff();
}

template <typename Real>
bool is_unitary(const CMatrix<Real>& u, Real tol = Real(kStateTol)) {
  if (u.rows() != u.cols()) return false;
  CMatrix<Real> d = u.adjoint() * u - CMatrix<Real>::Identity(u.rows(), u.cols());
  return max_abs<Real>(d) <= tol;
}

template <typename Real>
Real min_eigenvalue(const CMatrix<Real>& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Clips negative eigenvalues and renormalizes to unit trace. Only tomography
/// calls this; every other path rejects non-PSD input instead.
template <typename Real>
CMatrix<Real> project_to_psd(const CMatrix<Real>& m) {
  CMatrix<Real> h = (m + m.adjoint()) / Real(2);
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(h);
  Eigen::Matrix<Real, Eigen::Dynamic, 1> ev = es.eigenvalues().cwiseMax(Real(0));
  Real s = ev.sum();
  if (s <= Real(0)) ev.setConstant(Real(1) / Real(ev.size()));
  else ev /= s;
  return es.eigenvectors() * ev.template cast<std::complex<Real>>().asDiagonal() *
         es.eigenvectors().adjoint();
}

/// Lifts an operator acting on `targets` (in the order given) to the full
/// register of `nqubits`.
template <typename Real>
CMatrix<Real> embed(const CMatrix<Real>& op, std::span<const std::size_t> targets,
                    std::size_t nqubits) {
  const std::size_t k = targets.size();
  if (op.rows() != Eigen::Index(1) << k || op.cols() != op.rows())
    throw ContractError("embed: operator dimension does not match target count");
  const std::size_t dim = std::size_t{1} << nqubits;
  std::size_t target_mask = 0;
  for (auto t : targets) {
    if (t >= nqubits) throw ContractError("embed: target out of range");
    target_mask |= std::size_t{1} << (nqubits - 1 - t);
  }
  auto sub_index = [&](std::size_t full) {
    std::size_t s = 0;
    for (auto t : targets) s = (s << 1) | ((full >> (nqubits - 1 - t)) & 1U);
    return s;
  };
  auto scatter = [&](std::size_t base, std::size_t sub) {
    std::size_t full = base;
    for (std::size_t q = 0; q < k; ++q) {
      std::size_t bit = (sub >> (k - 1 - q)) & 1U;
      full |= bit << (nqubits - 1 - targets[q]);
    }
    return full;
  };
  CMatrix<Real> out = CMatrix<Real>::Zero(dim, dim);
  const std::size_t sub_dim = std::size_t{1} << k;
  for (std::size_t col = 0; col < dim; ++col) {
    const std::size_t base = col & ~target_mask;
    const std::size_t sc = sub_index(col);
    for (std::size_t sr = 0; sr < sub_dim; ++sr) {
      auto v = op(Eigen::Index(sr), Eigen::Index(sc));
      if (v != std::complex<Real>(0)) out(Eigen::Index(scatter(base, sr)), Eigen::Index(col)) = v;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Standard single-qubit matrices

template <typename Real = double>
CMatrix<Real> pauli_matrix(char p) {
  using C = std::complex<Real>;
  CMatrix<Real> m(2, 2);
  switch (p) {
    case 'I': m << C(1), C(0), C(0), C(1); break;
    case 'X': m << C(0), C(1), C(1), C(0); break;
    case 'Y': m << C(0), C(0, -1), C(0, 1), C(0); break;
    case 'Z': m << C(1), C(0), C(0), C(-1); break;
    default: throw ContractError(std::string("unknown Pauli factor '") + p + "'");
  }
  return m;
}

/// exp(-i theta/2 (cos(phi) X + sin(phi) Y)).
template <typename Real = double>
CMatrix<Real> rot_xy(Real theta, Real phi) {
  using C = std::complex<Real>;
  const Real c = std::cos(theta / 2), s = std::sin(theta / 2);
  CMatrix<Real> m(2, 2);
  m << C(c), C(0, -s) * std::polar(Real(1), -phi), C(0, -s) * std::polar(Real(1), phi), C(c);
  return m;
}

template <typename Real = double>
CMatrix<Real> rot_y(Real theta) {
  return rot_xy<Real>(theta, Real(M_PI / 2));
}

template <typename Real = double>
CMatrix<Real> rot_z(Real theta) {
  CMatrix<Real> m = CMatrix<Real>::Zero(2, 2);
  m(0, 0) = std::polar(Real(1), -theta / 2);
  m(1, 1) = std::polar(Real(1), theta / 2);
  return m;
}

// ---------------------------------------------------------------------------
// Density states

template <typename Real>
class BasicDensityState {
 public:
  BasicDensityState(QubitRegister reg, CMatrix<Real> rho) : reg_(std::move(reg)), rho_(std::move(rho)) {
    validate();
  }

  static BasicDensityState from_pure(QubitRegister reg, const CVector<Real>& psi) {
    Real n = psi.norm();
    if (!(n > Real(0))) throw ContractError("from_pure: zero vector");
    CVector<Real> v = psi / n;
    return BasicDensityState(std::move(reg), v * v.adjoint());
  }

  /// |0...0><0...0| on the register.
  static BasicDensityState ground(QubitRegister reg) {
    CMatrix<Real> rho = CMatrix<Real>::Zero(reg.dim(), reg.dim());
    rho(0, 0) = Real(1);
    return BasicDensityState(std::move(reg), std::move(rho));
  }

  const QubitRegister& reg() const { return reg_; }
  const CMatrix<Real>& rho() const { return rho_; }
  std::size_t num_qubits() const { return reg_.size(); }

  Real trace_real() const { return rho_.trace().real(); }
  Real purity() const { return (rho_ * rho_).trace().real(); }

  /// <psi|rho|psi> for a normalized pure state.
  Real fidelity_with(const CVector<Real>& psi) const {
    if (psi.size() != rho_.rows()) throw ContractError("fidelity_with: dimension mismatch");
    CVector<Real> v = psi / psi.norm();
    return (v.adjoint() * rho_ * v)(0, 0).real();
  }

 private:
  void validate() const {
    const auto d = Eigen::Index(reg_.dim());
    if (rho_.rows() != d || rho_.cols() != d)
      throw ContractError("DensityState: matrix dimension does not match register");
    if (!all_finite<Real>(rho_)) throw ContractError("DensityState: non-finite entries");
    if (std::abs(rho_.trace().real() - Real(1)) > Real(kStateTol) ||
        std::abs(rho_.trace().imag()) > Real(kStateTol))
      throw ContractError("DensityState: trace differs from 1");
    if (max_abs<Real>(CMatrix<Real>(rho_ - rho_.adjoint())) > Real(kStateTol))
      throw ContractError("DensityState: matrix is not Hermitian");
    if (min_eigenvalue<Real>(rho_) < -Real(kStateTol))
      throw ContractError("DensityState: negative eigenvalue");
  }

  QubitRegister reg_;
  CMatrix<Real> rho_;
};

using DensityState = BasicDensityState<double>;

// ---------------------------------------------------------------------------
// Kraus channels

template <typename Real>
class BasicKrausChannel {
 public:
  explicit BasicKrausChannel(std::vector<CMatrix<Real>> ops) : ops_(std::move(ops)) {
    if (ops_.empty()) throw ContractError("KrausChannel: no operators");
    const auto d = ops_.front().rows();
    CMatrix<Real> sum = CMatrix<Real>::Zero(d, d);
    for (const auto& k : ops_) {
      if (k.rows() != d || k.cols() != d)
        throw ContractError("KrausChannel: operators must be square and of equal dimension");
      if (!all_finite<Real>(k)) throw ContractError("KrausChannel: non-finite entries");
      sum += k.adjoint() * k;
    }
    if (max_abs<Real>(CMatrix<Real>(sum - CMatrix<Real>::Identity(d, d))) > Real(kStateTol))
      throw ContractError("KrausChannel: completeness relation violated");
  }

  static BasicKrausChannel identity(std::size_t nqubits) {
    const auto d = Eigen::Index(1) << nqubits;
    return BasicKrausChannel({CMatrix<Real>::Identity(d, d)});
  }

  const std::vector<CMatrix<Real>>& operators() const { return ops_; }
  Eigen::Index dim() const { return ops_.front().rows(); }
  std::size_t num_qubits() const {
    std::size_t n = 0;
    while ((Eigen::Index(1) << n) < dim()) ++n;
    return n;
  }

  /// Sequential composition: `then` applied after *this.
  BasicKrausChannel compose(const BasicKrausChannel& then) const {
    std::vector<CMatrix<Real>> out;
    out.reserve(ops_.size() * then.ops_.size());
    for (const auto& b : then.ops_)
      for (const auto& a : ops_) out.push_back(b * a);
    return BasicKrausChannel(std::move(out));
  }

 private:
  std::vector<CMatrix<Real>> ops_;
};

using KrausChannel = BasicKrausChannel<double>;

// ---------------------------------------------------------------------------
// Pauli strings

class PauliString {
 public:
  explicit PauliString(std::string factors) : factors_(std::move(factors)) {
    for (char c : factors_)
      if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
        throw ContractError(std::string("PauliString: invalid factor '") + c + "'");
  }
  const std::string& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }

  template <typename Real = double>
  CMatrix<Real> matrix() const {
    CMatrix<Real> m = CMatrix<Real>::Identity(1, 1);
    for (char c : factors_) m = kron<Real>(m, pauli_matrix<Real>(c));
    return m;
  }

 private:
  std::string factors_;
};

// ---------------------------------------------------------------------------
// Operations

template <typename Real>
BasicDensityState<Real> apply_unitary(const BasicDensityState<Real>& state, const CMatrix<Real>& u,
                                      std::span<const std::string> targets) {
  if (!is_unitary<Real>(u)) throw ContractError("apply_unitary: operator is not unitary");
  const auto idx = state.reg().indices_of(targets);
  const CMatrix<Real> full = embed<Real>(u, idx, state.num_qubits());
  return BasicDensityState<Real>(state.reg(), full * state.rho() * full.adjoint());
}

template <typename Real>
BasicDensityState<Real> apply_unitary(const BasicDensityState<Real>& state, const CMatrix<Real>& u,
                                      std::initializer_list<std::string> targets) {
  std::vector<std::string> t(targets);
  return apply_unitary<Real>(state, u, std::span<const std::string>(t));
}

template <typename Real>
BasicDensityState<Real> apply_channel(const BasicDensityState<Real>& state,
                                      const BasicKrausChannel<Real>& ch,
                                      std::span<const std::string> targets) {
  const auto idx = state.reg().indices_of(targets);
  if (ch.dim() != Eigen::Index(1) << idx.size())
    throw ContractError("apply_channel: channel dimension does not match targets");
  const auto d = Eigen::Index(state.reg().dim());
  CMatrix<Real> out = CMatrix<Real>::Zero(d, d);
  for (const auto& k : ch.operators()) {
    const CMatrix<Real> full = embed<Real>(k, idx, state.num_qubits());
    out.noalias() += full * state.rho() * full.adjoint();
  }
  return BasicDensityState<Real>(state.reg(), std::move(out));
}

template <typename Real>
BasicDensityState<Real> apply_channel(const BasicDensityState<Real>& state,
                                      const BasicKrausChannel<Real>& ch,
                                      std::initializer_list<std::string> targets) {
  std::vector<std::string> t(targets);
  return apply_channel<Real>(state, ch, std::span<const std::string>(t));
}

/// Reduced state on `keep`, returned in register order of the kept labels.
template <typename Real>
BasicDensityState<Real> partial_trace(const BasicDensityState<Real>& state,
                                      std::span<const std::string> keep) {
  if (keep.empty()) throw ContractError("partial_trace: keep set is empty");
  auto kept = state.reg().indices_of(keep);
  std::sort(kept.begin(), kept.end());
  const std::size_t n = state.num_qubits();
  std::vector<std::size_t> traced;
  for (std::size_t q = 0; q < n; ++q)
    if (std::find(kept.begin(), kept.end(), q) == kept.end()) traced.push_back(q);

  auto compose = [n](std::span<const std::size_t> qs, std::size_t bits, std::size_t acc) {
    for (std::size_t i = 0; i < qs.size(); ++i) {
      std::size_t bit = (bits >> (qs.size() - 1 - i)) & 1U;
      acc |= bit << (n - 1 - qs[i]);
    }
    return acc;
  };
  const std::size_t kd = std::size_t{1} << kept.size();
  const std::size_t td = std::size_t{1} << traced.size();
  CMatrix<Real> out = CMatrix<Real>::Zero(kd, kd);
  for (std::size_t r = 0; r < kd; ++r)
    for (std::size_t c = 0; c < kd; ++c) {
      std::complex<Real> acc(0);
      for (std::size_t t = 0; t < td; ++t) {
        const std::size_t base = compose(traced, t, 0);
        acc += state.rho()(Eigen::Index(compose(kept, r, base)), Eigen::Index(compose(kept, c, base)));
      }
      out(Eigen::Index(r), Eigen::Index(c)) = acc;
    }
  std::vector<std::string> labels;
  for (auto q : kept) labels.push_back(state.reg()[q]);
  return BasicDensityState<Real>(QubitRegister(std::move(labels)), std::move(out));
}

template <typename Real>
BasicDensityState<Real> partial_trace(const BasicDensityState<Real>& state,
                                      std::initializer_list<std::string> keep) {
  std::vector<std::string> k(keep);
  return partial_trace<Real>(state, std::span<const std::string>(k));
}

/// Tr(rho O) for a Pauli string covering the whole register.
template <typename Real>
Real expectation(const BasicDensityState<Real>& state, const PauliString& obs) {
  if (obs.size() != state.num_qubits())
    throw ContractError("expectation: observable length does not match register");
  const std::complex<Real> v = (state.rho() * obs.matrix<Real>()).trace();
  if (std::abs(v.imag()) > Real(kStateTol))
    throw ContractError("expectation: non-negligible imaginary part");
  return v.real();
}

/// Tr(rho O) for an arbitrary Hermitian operator on the full register.
template <typename Real>
Real expectation(const BasicDensityState<Real>& state, const CMatrix<Real>& obs) {
  if (obs.rows() != state.rho().rows()) throw ContractError("expectation: dimension mismatch");
  const std::complex<Real> v = (state.rho() * obs).trace();
  if (std::abs(v.imag()) > Real(kStateTol))
    throw ContractError("expectation: non-negligible imaginary part");
  return v.real();
}

/// Checks that `projectors` is a complete set of orthogonal projectors.
template <typename Real>
void require_projective_measurement(std::span<const CMatrix<Real>> projectors) {
  if (projectors.empty()) throw ContractError("measurement: empty projector set");
  const auto d = projectors.front().rows();
  CMatrix<Real> sum = CMatrix<Real>::Zero(d, d);
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    const auto& p = projectors[i];
    if (p.rows() != d || p.cols() != d) throw ContractError("measurement: dimension mismatch");
    sum += p;
    for (std::size_t j = 0; j < projectors.size(); ++j) {
      CMatrix<Real> prod = p * projectors[j];
      CMatrix<Real> expect = i == j ? CMatrix<Real>(p) : CMatrix<Real>::Zero(d, d);
      if (max_abs<Real>(CMatrix<Real>(prod - expect)) > Real(kStateTol))
        throw ContractError("measurement: projectors are not orthogonal idempotents");
    }
  }
  if (max_abs<Real>(CMatrix<Real>(sum - CMatrix<Real>::Identity(d, d))) > Real(kStateTol))
    throw ContractError("measurement: projector set is incomplete");
}

template <typename Real, typename Rng>
std::pair<std::size_t, BasicDensityState<Real>> sample_measurement(
    const BasicDensityState<Real>& state, std::span<const CMatrix<Real>> projectors,
    std::span<const std::string> targets, Rng& rng) {
  require_projective_measurement<Real>(projectors);
  const auto idx = state.reg().indices_of(targets);
  if (projectors.front().rows() != Eigen::Index(1) << idx.size())
    throw ContractError("sample_measurement: projector dimension does not match targets");
  std::vector<CMatrix<Real>> full;
  std::vector<Real> probs;
  for (const auto& p : projectors) {
    full.push_back(embed<Real>(p, idx, state.num_qubits()));
    probs.push_back(std::max(Real(0), (full.back() * state.rho()).trace().real()));
  }
  std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
  const std::size_t k = pick(rng);
  const Real pk = probs[k];
  CMatrix<Real> post = full[k] * state.rho() * full[k] / pk;
  post = (post + post.adjoint()) / Real(2);
  post /= post.trace().real();
  return {k, BasicDensityState<Real>(state.reg(), std::move(post))};
}

/// Full-register overload.
template <typename Real, typename Rng>
std::pair<std::size_t, BasicDensityState<Real>> sample_measurement(
    const BasicDensityState<Real>& state, std::span<const CMatrix<Real>> projectors, Rng& rng) {
  return sample_measurement<Real>(state, projectors, std::span<const std::string>(state.reg().labels()),
                                  rng);
}

/// Replaces the reduced state of qubit `label` by `rho1`, leaving the other
/// qubits' reduced state and ordering intact.
template <typename Real>
BasicDensityState<Real> reset_qubit(const BasicDensityState<Real>& state, const std::string& label,
                                    const CMatrix<Real>& rho1) {
  const std::size_t target = state.reg().index_of(label);
  const std::size_t n = state.num_qubits();
  if (n == 1) return BasicDensityState<Real>(state.reg(), rho1);
  std::vector<std::string> rest;
  for (std::size_t q = 0; q < n; ++q)
    if (q != target) rest.push_back(state.reg()[q]);
  const auto reduced = partial_trace<Real>(state, std::span<const std::string>(rest));
  // Build reduced ⊗ rho1 with rho1 in the last slot, then permute it into place.
  const CMatrix<Real> joint = kron<Real>(reduced.rho(), rho1);
  const std::size_t dim = std::size_t{1} << n;
  CMatrix<Real> out(dim, dim);
  auto to_joint = [&](std::size_t full) {
    std::size_t rest_bits = 0;
    for (std::size_t q = 0; q < n; ++q)
      if (q != target) rest_bits = (rest_bits << 1) | ((full >> (n - 1 - q)) & 1U);
    const std::size_t t_bit = (full >> (n - 1 - target)) & 1U;
    return (rest_bits << 1) | t_bit;
  };
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c)
      out(Eigen::Index(r), Eigen::Index(c)) = joint(Eigen::Index(to_joint(r)), Eigen::Index(to_joint(c)));
  return BasicDensityState<Real>(state.reg(), std::move(out));
}

/// Trace distance 1/2 ||a - b||_1 between two Hermitian matrices.
template <typename Real>
Real trace_distance(const CMatrix<Real>& a, const CMatrix<Real>& b) {
  CMatrix<Real> d = a - b;
  d = (d + d.adjoint()) / Real(2);
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(d, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum() / Real(2);
}

}  // namespace ionnode
