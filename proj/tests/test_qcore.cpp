#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "ionnode/gates.hpp"
#include "ionnode/qcore.hpp"
#include "ionnode/rng.hpp"

using namespace ionnode;
using C = std::complex<double>;

namespace {

ComplexMatrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = C(g(rng), g(rng));
  return m;
}

ComplexMatrix random_density(int dim, Rng& rng) {
  const ComplexMatrix g = random_matrix(dim, dim, rng);
  ComplexMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

ComplexMatrix random_unitary(int dim, Rng& rng) {
  Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(dim, dim, rng));
  return qr.householderQ();
}

// Bit q of index i in an n-qubit register, qubit 0 being the MSB.
std::size_t bit(std::size_t i, std::size_t q, std::size_t n) { return (i >> (n - 1 - q)) & 1U; }

// Embedding by explicit matrix elements: <i|U_full|j> = <i_T|U|j_T> if the
// untouched bits agree, else 0.
ComplexMatrix embed_oracle(const ComplexMatrix& u, const std::vector<std::size_t>& targets, std::size_t n) {
  const std::size_t d = std::size_t{1} << n;
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      bool rest_equal = true;
      for (std::size_t q = 0; q < n; ++q)
        if (std::find(targets.begin(), targets.end(), q) == targets.end() && bit(i, q, n) != bit(j, q, n))
          rest_equal = false;
      if (!rest_equal) continue;
      std::size_t si = 0, sj = 0;
      for (auto t : targets) {
        si = (si << 1) | bit(i, t, n);
        sj = (sj << 1) | bit(j, t, n);
      }
      out(Eigen::Index(i), Eigen::Index(j)) = u(Eigen::Index(si), Eigen::Index(sj));
    }
  return out;
}

// Makhlin invariants in the magic basis.
std::pair<C, C> makhlin(const ComplexMatrix& u) {
  ComplexMatrix q(4, 4);
  const C i(0, 1);
  q << 1, 0, 0, i, 0, i, 1, 0, 0, i, -1, 0, 1, 0, 0, -i;
  q /= std::sqrt(2.0);
  const ComplexMatrix ub = q.adjoint() * u * q;
  const ComplexMatrix m = ub.transpose() * ub;
  const C det = u.determinant();
  const C tr = m.trace();
  const C g1 = tr * tr / (16.0 * det);
  const C g2 = (tr * tr - (m * m).trace()) / (4.0 * det);
  return {g1, g2};
}

}  // namespace

TEST_SUITE("qcore") {
  TEST_CASE("kron matches the index formula") {
    Rng rng(11);
    const auto a = random_matrix(2, 3, rng), b = random_matrix(3, 2, rng);
    const auto k = kron<double>(a, b);
    REQUIRE(k.rows() == 6);
    REQUIRE(k.cols() == 6);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j)
        for (int p = 0; p < 3; ++p)
          for (int q = 0; q < 2; ++q) CHECK(std::abs(k(i * 3 + p, j * 2 + q) - a(i, j) * b(p, q)) < 1e-14);
  }

  TEST_CASE("embed agrees with the element-wise oracle for permuted targets") {
    Rng rng(12);
    const auto u2 = random_unitary(4, rng);
    const auto u1 = random_unitary(2, rng);
    for (std::vector<std::size_t> t : {std::vector<std::size_t>{0, 1}, {1, 0}, {2, 0}, {0, 2}, {1, 2}}) {
      CHECK(max_abs<double>(ComplexMatrix(embed<double>(u2, t, 3) - embed_oracle(u2, t, 3))) < 1e-14);
    }
    for (std::size_t t = 0; t < 3; ++t) {
      std::vector<std::size_t> tv{t};
      CHECK(max_abs<double>(ComplexMatrix(embed<double>(u1, tv, 3) - embed_oracle(u1, tv, 3))) < 1e-14);
    }
    // Leftmost qubit is the most significant: X on qubit 0 of |00> gives |10>.
    std::vector<std::size_t> first{0};
    const ComplexMatrix x0 = embed<double>(pauli_matrix('X'), first, 2);
    CHECK(std::abs(x0(2, 0) - 1.0) < 1e-15);
  }

  TEST_CASE("embed rejects mismatched operators") {
    std::vector<std::size_t> t{0, 1};
    CHECK_THROWS_AS(embed<double>(pauli_matrix('X'), t, 2), ContractError);
    std::vector<std::size_t> bad{3};
    CHECK_THROWS_AS(embed<double>(pauli_matrix('X'), bad, 2), ContractError);
  }

  TEST_CASE("partial trace matches explicit summation") {
    Rng rng(13);
    const QubitRegister reg({"a", "b", "c"});
    const DensityState s(reg, random_density(8, rng));
    const auto red = partial_trace(s, {"a", "c"});
    CHECK(red.reg().labels() == std::vector<std::string>{"a", "c"});
    for (int ra = 0; ra < 2; ++ra)
      for (int rc = 0; rc < 2; ++rc)
        for (int ca = 0; ca < 2; ++ca)
          for (int cc = 0; cc < 2; ++cc) {
            C sum = 0;
            for (int b = 0; b < 2; ++b) sum += s.rho()(ra * 4 + b * 2 + rc, ca * 4 + b * 2 + cc);
            CHECK(std::abs(red.rho()(ra * 2 + rc, ca * 2 + cc) - sum) < 1e-14);
          }
    // Kept labels come back in register order whatever order was asked for.
    CHECK(max_abs<double>(ComplexMatrix(partial_trace(s, {"c", "a"}).rho() - red.rho())) < 1e-15);
  }

  TEST_CASE("partial trace of a product state returns the factor") {
    Rng rng(14);
    const auto r1 = random_density(2, rng), r2 = random_density(4, rng);
    const DensityState s(QubitRegister({"x", "y", "z"}), kron<double>(r1, r2));
    CHECK(max_abs<double>(ComplexMatrix(partial_trace(s, {"x"}).rho() - r1)) < 1e-14);
    CHECK(max_abs<double>(ComplexMatrix(partial_trace(s, {"y", "z"}).rho() - r2)) < 1e-14);
  }

  TEST_CASE("rotations equal the matrix exponential of their generator") {
    for (double theta : {0.0, 0.3, M_PI / 2, M_PI, -2.1})
      for (double phi : {0.0, 0.7, M_PI / 2, -M_PI / 3}) {
        const ComplexMatrix h = std::cos(phi) * pauli_matrix('X') + std::sin(phi) * pauli_matrix('Y');
        const ComplexMatrix expected = (C(0, -theta / 2) * h).exp();
        CHECK(max_abs<double>(ComplexMatrix(rot_xy(theta, phi) - expected)) < 1e-12);
      }
    const ComplexMatrix ez = (C(0, -0.8 / 2) * pauli_matrix('Z')).exp();
    CHECK(max_abs<double>(ComplexMatrix(rot_z(0.8) - ez)) < 1e-12);
    CHECK(max_abs<double>(ComplexMatrix(rot_y(0.4) - rot_xy(0.4, M_PI / 2))) < 1e-15);
  }

  TEST_CASE("U_ent acts on |00> as -e^{-i pi/4}|11>") {
    ComplexVector v = ComplexVector::Zero(4);
    v(0) = 1;
    const ComplexVector out = u_ent_matrix() * v;
    CHECK(std::abs(out(3) - (-std::polar(1.0, -M_PI / 4))) < 1e-14);
    CHECK(std::abs(out(0)) + std::abs(out(1)) + std::abs(out(2)) < 1e-14);
    CHECK(is_unitary<double>(u_ent_matrix()));
  }

  TEST_CASE("U_ent is locally equivalent to CNOT") {
    const auto [g1, g2] = makhlin(u_ent_matrix());
    const auto [c1, c2] = makhlin(cnot_matrix());
    CHECK(std::abs(g1 - c1) < 1e-12);
    CHECK(std::abs(g2 - c2) < 1e-12);
    CHECK(std::abs(c1) < 1e-12);
    CHECK(std::abs(c2 - 1.0) < 1e-12);
  }

  TEST_CASE("density state validation") {
    const QubitRegister reg({"q"});
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 0.5;
    CHECK_THROWS_AS(DensityState(reg, m), ContractError);  // trace
    m(1, 1) = 0.5;
    m(0, 1) = 0.2;
    CHECK_THROWS_AS(DensityState(reg, m), ContractError);  // not Hermitian
    m(1, 0) = 0.2;
    CHECK_NOTHROW(DensityState(reg, m));
    m(0, 1) = m(1, 0) = 0.8;
    CHECK_THROWS_AS(DensityState(reg, m), ContractError);  // negative eigenvalue
    CHECK_THROWS_AS(DensityState(QubitRegister({"a", "b"}), ComplexMatrix::Identity(2, 2) / 2.0), ContractError);
    CHECK_THROWS_AS(QubitRegister({"a", "a"}), ContractError);
    CHECK_THROWS_AS(QubitRegister(std::vector<std::string>(7, "x")), ContractError);
  }

  TEST_CASE("apply_unitary rejects a non-unitary matrix") {
    const auto s = DensityState::ground(QubitRegister({"a"}));
    CHECK_THROWS_AS(apply_unitary(s, ComplexMatrix(2.0 * pauli_matrix('X')), {"a"}), ContractError);
    CHECK_THROWS_AS(apply_unitary(s, pauli_matrix('X'), {"b"}), ContractError);
  }

  TEST_CASE("Kraus completeness and composition") {
    ComplexMatrix k0 = ComplexMatrix::Identity(2, 2) * std::sqrt(0.9);
    ComplexMatrix k1 = pauli_matrix('X') * std::sqrt(0.1);
    const KrausChannel flip({k0, k1});
    CHECK_THROWS_AS(KrausChannel({k0}), ContractError);
    const auto twice = flip.compose(flip);
    // Two flips with p = 0.1 flip with probability 2p(1-p).
    auto s = apply_channel(DensityState::ground(QubitRegister({"q"})), twice, {"q"});
    CHECK(s.rho()(1, 1).real() == doctest::Approx(0.18).epsilon(1e-12));
  }

  TEST_CASE("expectation of Pauli strings") {
    ComplexVector bell = ComplexVector::Zero(4);
    bell(0) = bell(3) = 1 / std::sqrt(2.0);
    const auto s = DensityState::from_pure(QubitRegister({"a", "b"}), bell);
    CHECK(expectation(s, PauliString("ZZ")) == doctest::Approx(1.0));
    CHECK(expectation(s, PauliString("XX")) == doctest::Approx(1.0));
    CHECK(expectation(s, PauliString("YY")) == doctest::Approx(-1.0));
    CHECK(expectation(s, PauliString("ZI")) == doctest::Approx(0.0));
    CHECK_THROWS_AS(expectation(s, PauliString("Z")), ContractError);
    CHECK_THROWS_AS(PauliString("XQ"), ContractError);
  }

  TEST_CASE("sampled measurement frequencies follow the Born rule") {
    Rng rng(5);
    ComplexVector psi(2);
    psi << std::sqrt(0.3), std::sqrt(0.7);
    const auto s = DensityState::from_pure(QubitRegister({"q"}), psi);
    ComplexMatrix p0 = ComplexMatrix::Zero(2, 2), p1 = ComplexMatrix::Zero(2, 2);
    p0(0, 0) = 1;
    p1(1, 1) = 1;
    std::vector<ComplexMatrix> proj{p0, p1};
    int ones = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      auto [k, post] = sample_measurement<double>(s, std::span<const ComplexMatrix>(proj), rng);
      ones += static_cast<int>(k);
      CHECK(post.purity() == doctest::Approx(1.0));
    }
    CHECK(std::abs(ones / double(n) - 0.7) < 5 * std::sqrt(0.21 / n));
    std::vector<ComplexMatrix> incomplete{p0};
    CHECK_THROWS_AS(sample_measurement<double>(s, std::span<const ComplexMatrix>(incomplete), rng),
                    ContractError);
  }

  TEST_CASE("reset_qubit keeps the rest of the register") {
    Rng rng(6);
    const DensityState s(QubitRegister({"a", "b", "c"}), random_density(8, rng));
    ComplexMatrix r1 = ComplexMatrix::Zero(2, 2);
    r1(1, 1) = 1;
    const auto out = reset_qubit(s, "b", r1);
    CHECK(max_abs<double>(ComplexMatrix(partial_trace(out, {"a", "c"}).rho() - partial_trace(s, {"a", "c"}).rho())) <
          1e-14);
    CHECK(max_abs<double>(ComplexMatrix(partial_trace(out, {"b"}).rho() - r1)) < 1e-14);
  }

  TEST_CASE("trace distance") {
    ComplexMatrix a = ComplexMatrix::Zero(2, 2), b = ComplexMatrix::Zero(2, 2);
    a(0, 0) = 1;
    b(1, 1) = 1;
    CHECK(trace_distance<double>(a, b) == doctest::Approx(1.0));
    CHECK(trace_distance<double>(a, ComplexMatrix(ComplexMatrix::Identity(2, 2) / 2.0)) == doctest::Approx(0.5));
  }

  TEST_CASE("project_to_psd returns a valid state") {
    ComplexMatrix m(2, 2);
    m << 1.2, 0.0, 0.0, -0.2;
    const auto p = project_to_psd<double>(m);
    CHECK(min_eigenvalue<double>(p) >= -1e-15);
    CHECK(p.trace().real() == doctest::Approx(1.0));
    CHECK(p(0, 0).real() == doctest::Approx(1.0));
  }

  TEST_CASE("substreams are reproducible and distinct") {
    Rng a = substream(1, 2, 3), b = substream(1, 2, 3), c = substream(1, 2, 4), d = substream(2, 2, 3);
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
  }
}
