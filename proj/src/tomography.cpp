#include <cmath>

#include "json.hpp"

#include "ionnode/estim.hpp"

namespace ionnode::est {

namespace {

struct BasisCounts {
  std::int64_t plus = 0;
  std::int64_t minus = 0;
};

std::array<BasisCounts, 3> gather(const std::vector<CountsTable>& tables) {
  std::array<BasisCounts, 3> out{};
  for (const auto& t : tables) {
    int b;
    if (t.setting() == "X") b = 0;
    else if (t.setting() == "Y") b = 1;
    else if (t.setting() == "Z") b = 2;
    else throw ContractError("state tomography: table setting must be X, Y or Z, got '" + t.setting() + "'");
    for (const auto& [o, k] : t.outcomes()) {
      if (o.size() != 1) throw ContractError("state tomography: outcome '" + o + "' is not a single symbol");
      (outcome_sign(o[0]) > 0 ? out[b].plus : out[b].minus) += k;
    }
  }
  for (int b = 0; b < 3; ++b)
    if (out[b].plus + out[b].minus == 0)
      throw ContractError(std::string("state tomography: no counts in basis ") + "XYZ"[b]);
  return out;
}

struct Povm {
  std::vector<ComplexMatrix> proj;
  std::vector<double> n;
  double total = 0.0;
};

Povm make_povm(const std::array<BasisCounts, 3>& c) {
  Povm p;
  const char names[] = {'X', 'Y', 'Z'};
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  for (int b = 0; b < 3; ++b) {
    const ComplexMatrix s = pauli_matrix(names[b]);
    p.proj.push_back((id + s) / 2.0);
    p.n.push_back(static_cast<double>(c[b].plus));
    p.proj.push_back((id - s) / 2.0);
    p.n.push_back(static_cast<double>(c[b].minus));
  }
  for (double n : p.n) p.total += n;
  return p;
}

double loglik(const Povm& p, const ComplexMatrix& rho) {
  double l = 0.0;
  for (std::size_t j = 0; j < p.proj.size(); ++j) {
    if (p.n[j] == 0.0) continue;
    const double pj = (p.proj[j] * rho).trace().real();
    if (!(pj > 0.0)) return -INFINITY;
    l += p.n[j] * std::log(pj);
  }
  return l;
}

ComplexMatrix normalized(const ComplexMatrix& m) {
  ComplexMatrix h = (m + m.adjoint()) / 2.0;
  return h / h.trace().real();
}

const std::array<ComplexMatrix, 4>& paulis() {
  static const std::array<ComplexMatrix, 4> p{pauli_matrix('I'), pauli_matrix('X'), pauli_matrix('Y'),
                                              pauli_matrix('Z')};
  return p;
}

// Orthonormal Hermitian basis of d x d matrices under Re Tr(A^dag B).
std::vector<ComplexMatrix> hermitian_basis(int d) {
  std::vector<ComplexMatrix> out;
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(d, d);
    e(i, i) = 1.0;
    out.push_back(e);
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      ComplexMatrix s = ComplexMatrix::Zero(d, d), a = ComplexMatrix::Zero(d, d);
      s(i, j) = s(j, i) = r;
      a(i, j) = std::complex<double>(0, -r);
      a(j, i) = std::complex<double>(0, r);
      out.push_back(s);
      out.push_back(a);
    }
  return out;
}

Eigen::VectorXd coords(const std::vector<ComplexMatrix>& basis, const ComplexMatrix& m) {
  Eigen::VectorXd v(basis.size());
  for (std::size_t a = 0; a < basis.size(); ++a) v(a) = (basis[a] * m).trace().real();
  return v;
}

ComplexMatrix from_coords(const std::vector<ComplexMatrix>& basis, const Eigen::VectorXd& v) {
  ComplexMatrix m = ComplexMatrix::Zero(basis.front().rows(), basis.front().cols());
  for (std::size_t a = 0; a < basis.size(); ++a) m += v(a) * basis[a];
  return m;
}

ComplexMatrix tp_map(const ComplexMatrix& chi) {
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n) out += chi(m, n) * paulis()[n] * paulis()[m];
  return out;
}

ComplexMatrix clip_psd(const ComplexMatrix& m) {
  const ComplexMatrix h = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * ev.cast<std::complex<double>>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double state_loglik(const ComplexMatrix& rho, const std::vector<CountsTable>& tables) {
  return loglik(make_povm(gather(tables)), rho);
}

TomographyResult mle_state_tomography(const std::vector<CountsTable>& tables, const MleOptions& opt) {
  const Povm p = make_povm(gather(tables));
  ComplexMatrix rho = ComplexMatrix::Identity(2, 2) / 2.0;
  double l = loglik(p, rho);
  double eps = 1.0;
  TomographyResult res;
  if (opt.keep_history) res.loglik_history.push_back(l);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    ComplexMatrix r = ComplexMatrix::Zero(2, 2);
    for (std::size_t j = 0; j < p.proj.size(); ++j) {
      if (p.n[j] == 0.0) continue;
      r += (p.n[j] / p.total) / (p.proj[j] * rho).trace().real() * p.proj[j];
    }
    // Diluted step: shrink eps until the likelihood does not drop.
    ComplexMatrix next;
    double l_next = -INFINITY;
    eps = std::min(eps * 2.0, 1e8);
    for (int tries = 0; tries < 60; ++tries) {
      const ComplexMatrix m = ComplexMatrix::Identity(2, 2) + eps * r;
      next = normalized(m * rho * m.adjoint());
      l_next = loglik(p, next);
      if (l_next >= l) break;
      eps /= 2.0;
    }
    if (!(l_next >= l)) {
      next = rho;
      l_next = l;
    }
    const double change = max_abs<double>(ComplexMatrix(next - rho));
    rho = next;
    l = l_next;
    res.iterations = it;
    if (opt.keep_history) res.loglik_history.push_back(l);
    if (change <= opt.tol) {
      res.converged = true;
      break;
    }
  }
  res.rho_or_chi = rho;
  res.loglik = l;
  return res;
}

ComplexMatrix apply_chi(const ComplexMatrix& chi, const ComplexMatrix& rho) {
  if (chi.rows() != 4 || chi.cols() != 4 || rho.rows() != 2 || rho.cols() != 2)
    throw ContractError("apply_chi: expected a 4x4 chi and a 2x2 state");
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (int m = 0; m < 4; ++m)
    for (int n = 0; n < 4; ++n)
      if (chi(m, n) != 0.0) out += chi(m, n) * paulis()[m] * rho * paulis()[n];
  return out;
}

double process_fidelity(const ComplexMatrix& chi) {
  if (chi.rows() != 4 || chi.cols() != 4) throw ContractError("process_fidelity: chi must be 4x4");
  return chi(0, 0).real();
}

TomographyResult mle_process_tomography(const std::vector<ComplexMatrix>& inputs,
                                        const std::vector<ComplexMatrix>& outputs, const ProcessOptions& opt) {
  if (inputs.size() != outputs.size() || inputs.empty())
    throw ContractError("process tomography: need matching, nonempty input and output lists");
  for (const auto& m : inputs)
    if (m.rows() != 2 || m.cols() != 2) throw ContractError("process tomography: inputs must be 2x2");
  for (const auto& m : outputs)
    if (m.rows() != 2 || m.cols() != 2) throw ContractError("process tomography: outputs must be 2x2");

  const auto hb4 = hermitian_basis(4);
  const auto hb2 = hermitian_basis(2);
  const Eigen::Index k = static_cast<Eigen::Index>(inputs.size());
  Eigen::MatrixXd a(4 * k, 16);
  Eigen::VectorXd y(4 * k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (int b = 0; b < 16; ++b) a.block(4 * i, b, 4, 1) = coords(hb2, apply_chi(hb4[b], inputs[i]));
    y.segment(4 * i, 4) = coords(hb2, outputs[i]);
  }
  Eigen::MatrixXd t(4, 16);
  for (int b = 0; b < 16; ++b) t.col(b) = coords(hb2, tp_map(hb4[b]));
  const Eigen::VectorXd tb = coords(hb2, ComplexMatrix::Identity(2, 2));
  const Eigen::MatrixXd tt_inv = (t * t.transpose()).inverse();

  auto project_tp = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return v - t.transpose() * (tt_inv * (t * v - tb));
  };
  auto project_psd = [&](const Eigen::VectorXd& v) { return coords(hb4, clip_psd(from_coords(hb4, v))); };
  // Dykstra's alternating projections onto CP and TP.
  auto project = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd x = z, p = Eigen::VectorXd::Zero(16), q = Eigen::VectorXd::Zero(16);
    for (int it = 0; it < opt.projection_iterations; ++it) {
      const Eigen::VectorXd yv = project_tp(x + p);
      p = x + p - yv;
      const Eigen::VectorXd xn = project_psd(yv + q);
      q = yv + q - xn;
      const double change = (xn - x).norm();
      x = xn;
      if (change < 1e-14 && (t * x - tb).norm() < 1e-12) break;
    }
    return x;
  };

  const Eigen::MatrixXd ata = a.transpose() * a;
  const Eigen::VectorXd aty = a.transpose() * y;
  const double lip = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(ata).eigenvalues().maxCoeff();
  const double step = 1.0 / lip;

  Eigen::VectorXd x = project(ata.completeOrthogonalDecomposition().solve(aty));
  Eigen::VectorXd z = x;
  double tk = 1.0;
  TomographyResult res;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const Eigen::VectorXd xn = project(z - step * (ata * z - aty));
    const double tn = (1.0 + std::sqrt(1.0 + 4.0 * tk * tk)) / 2.0;
    z = xn + ((tk - 1.0) / tn) * (xn - x);
    const double change = (xn - x).norm();
    x = xn;
    tk = tn;
    res.iterations = it;
    if (change <= opt.tol) {
      res.converged = true;
      break;
    }
  }
  ComplexMatrix chi = clip_psd(from_coords(hb4, x));
  res.rho_or_chi = chi;
  res.loglik = -0.5 * (a * coords(hb4, chi) - y).squaredNorm();
  res.tp_residual = max_abs<double>(ComplexMatrix(tp_map(chi) - ComplexMatrix::Identity(2, 2)));
  if (res.tp_residual > 1e-6) res.converged = false;
  return res;
}

std::string tomography_json(const TomographyResult& r) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.rho_or_chi.rows(); ++i) {
    nlohmann::json rr = nlohmann::json::array(), ii = nlohmann::json::array();
    for (Eigen::Index j = 0; j < r.rho_or_chi.cols(); ++j) {
      rr.push_back(r.rho_or_chi(i, j).real());
      ii.push_back(r.rho_or_chi(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  nlohmann::json j{{"real", re},          {"imag", im},
                   {"loglik", r.loglik},  {"iterations", r.iterations},
                   {"converged", r.converged}, {"tp_residual", r.tp_residual}};
  return j.dump(2);
}

}  // namespace ionnode::est
