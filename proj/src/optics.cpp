#include <cmath>

#include "ionnode/circuits.hpp"

namespace ionnode::circ {

namespace {
constexpr double kDeg = M_PI / 180.0;

ComplexMatrix rotation(double theta) {
  ComplexMatrix r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}
}  // namespace

ComplexMatrix jones_retarder(double theta_deg, double retardance) {
  if (!std::isfinite(theta_deg) || !std::isfinite(retardance))
    throw ContractError("jones_retarder: non-finite angle");
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = std::polar(1.0, -retardance);
  const double t = theta_deg * kDeg;
  return rotation(t) * d * rotation(-t);
}

ComplexMatrix jones_hwp(double theta_deg) { return jones_retarder(theta_deg, M_PI); }
ComplexMatrix jones_qwp(double theta_deg) { return jones_retarder(theta_deg, M_PI / 2); }

ComplexMatrix detection_frame() {
  ComplexMatrix f = ComplexMatrix::Zero(2, 2);
  f(0, 0) = 1.0;
  f(1, 1) = std::complex<double>(0, -1);
  return f;
}

ComplexMatrix waveplate_unitary(double hwp_deg, double qwp_deg) {
  return jones_hwp(hwp_deg) * jones_qwp(qwp_deg) * detection_frame();
}

std::array<ComplexMatrix, 2> photon_measurement_operators(double hwp_deg, double qwp_deg) {
  const ComplexMatrix u = waveplate_unitary(hwp_deg, qwp_deg);
  ComplexMatrix h = ComplexMatrix::Zero(2, 2), v = ComplexMatrix::Zero(2, 2);
  h(0, 0) = 1.0;
  v(1, 1) = 1.0;
  return {u.adjoint() * h * u, u.adjoint() * v * u};
}

const char* to_string(PhotonBasis b) {
  switch (b) {
    case PhotonBasis::Z: return "Z";
    case PhotonBasis::X: return "X";
    case PhotonBasis::Y: return "Y";
  }
  return "?";
}

PhotonMeasure equatorial_setting(double alpha_deg) { return {alpha_deg / 4.0, 45.0}; }

PhotonMeasure photon_basis_setting(PhotonBasis b) {
  switch (b) {
    case PhotonBasis::Z: return {0.0, 0.0};
    case PhotonBasis::X: return equatorial_setting(0.0);
    case PhotonBasis::Y: return equatorial_setting(90.0);
  }
  return {0.0, 0.0};
}

PhotonMeasure mk_waveplate_setting(int k) {
  if (k < 1 || k > 3) throw ContractError("mk_waveplate_setting: k must be 1, 2 or 3");
  return equatorial_setting(60.0 * k);
}

ComplexMatrix mk_observable(int k) {
  const double a = k * M_PI / 3.0;
  return std::cos(a) * pauli_matrix('X') + std::sin(a) * pauli_matrix('Y');
}

}  // namespace ionnode::circ
