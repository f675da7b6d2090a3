// Gate matrices of the node's native gate set.
#pragma once

#include "ionnode/qcore.hpp"

namespace ionnode {

/// U_ent = (Y ⊗ Y) exp(-i pi/4 Z ⊗ Z), the SDF gate taken at the unitary level.
inline ComplexMatrix u_ent_matrix() {
  using C = std::complex<double>;
  const ComplexMatrix yy = kron<double>(pauli_matrix('Y'), pauli_matrix('Y'));
  ComplexMatrix phase = ComplexMatrix::Zero(4, 4);
  const C m = std::polar(1.0, -M_PI / 4), p = std::polar(1.0, M_PI / 4);
  phase.diagonal() << m, p, p, m;
  return yy * phase;
}

inline ComplexMatrix hadamard_matrix() {
  ComplexMatrix h(2, 2);
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

/// CNOT with the first qubit as control.
inline ComplexMatrix cnot_matrix() {
  ComplexMatrix c = ComplexMatrix::Zero(4, 4);
  c(0, 0) = c(1, 1) = c(2, 3) = c(3, 2) = 1.0;
  return c;
}

/// Six single-qubit mutually unbiased basis states.
enum class MubState { zero, one, plus, minus, right, left };

inline constexpr MubState kAllMubStates[] = {MubState::zero, MubState::one,  MubState::plus,
                                             MubState::minus, MubState::right, MubState::left};

inline ComplexVector mub_vector(MubState s) {
  using C = std::complex<double>;
  const double r = 1.0 / std::sqrt(2.0);
  ComplexVector v(2);
  switch (s) {
    case MubState::zero: v << 1, 0; break;
    case MubState::one: v << 0, 1; break;
    case MubState::plus: v << r, r; break;
    case MubState::minus: v << r, -r; break;
    case MubState::right: v << r, C(0, r); break;
    case MubState::left: v << r, C(0, -r); break;
  }
  return v;
}

/// The orthogonal partner of a MUB state.
inline MubState mub_partner(MubState s) {
  switch (s) {
    case MubState::zero: return MubState::one;
    case MubState::one: return MubState::zero;
    case MubState::plus: return MubState::minus;
    case MubState::minus: return MubState::plus;
    case MubState::right: return MubState::left;
    case MubState::left: return MubState::right;
  }
  return s;
}

inline const char* mub_name(MubState s) {
  switch (s) {
    case MubState::zero: return "0";
    case MubState::one: return "1";
    case MubState::plus: return "+";
    case MubState::minus: return "-";
    case MubState::right: return "R";
    case MubState::left: return "L";
  }
  return "?";
}

/// Microwave rotation (theta, phi) that maps the MUB state onto |0>.
struct XYRotation {
  double theta;
  double phi;
};

inline XYRotation mub_to_zero_rotation(MubState s) {
  switch (s) {
    case MubState::zero: return {0.0, 0.0};
    case MubState::one: return {M_PI, 0.0};
    case MubState::plus: return {M_PI / 2, -M_PI / 2};
    case MubState::minus: return {M_PI / 2, M_PI / 2};
    case MubState::right: return {M_PI / 2, 0.0};
    case MubState::left: return {M_PI / 2, M_PI};
  }
  return {0.0, 0.0};
}

/// Bloch-sphere axis (x, y, z) along which the MUB state points.
inline Eigen::Vector3d mub_bloch(MubState s) {
  switch (s) {
    case MubState::zero: return {0, 0, 1};
    case MubState::one: return {0, 0, -1};
    case MubState::plus: return {1, 0, 0};
    case MubState::minus: return {-1, 0, 0};
    case MubState::right: return {0, 1, 0};
    case MubState::left: return {0, -1, 0};
  }
  return {0, 0, 0};
}

}  // namespace ionnode
