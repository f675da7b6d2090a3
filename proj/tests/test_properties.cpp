// Randomized invariants over states, channels and circuits.
#include "doctest.h"
#include "ionnode/circuits.hpp"
#include "ionnode/estim.hpp"

using namespace ionnode;
using namespace ionnode::circ;

namespace {

ComplexMatrix ginibre_state(int dim, Rng& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix a(dim, dim);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = {g(rng), g(rng)};
  ComplexMatrix rho = a * a.adjoint();
  return rho / rho.trace().real();
}

// Completely positive via the Choi matrix, trace preserving via sum K^dag K.
void check_cptp(const KrausChannel& ch) {
  const auto d = ch.dim();
  ComplexMatrix choi = ComplexMatrix::Zero(d * d, d * d);
  ComplexMatrix tp = ComplexMatrix::Zero(d, d);
  for (const auto& k : ch.operators()) {
    const Eigen::Map<const ComplexVector> v(k.data(), k.size());
    choi += v * v.adjoint();
    tp += k.adjoint() * k;
  }
  CHECK(min_eigenvalue<double>(choi) >= -1e-12);
  CHECK(max_abs<double>(ComplexMatrix(tp - ComplexMatrix::Identity(d, d))) < 1e-12);
}

Circuit random_circuit(Rng& rng) {
  Circuit c;
  c.name = "random";
  std::uniform_int_distribution<int> pick(0, 6), len(1, 12);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  bool memory_f = false;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    const Address target = memory_f ? Address::communication : Address::both;
    switch (pick(rng)) {
      case 0: c.ops.push_back(ZTheta{angle(rng), target}); break;
      case 1: c.ops.push_back(YThetaGlobal{angle(rng), target}); break;
      case 2: c.ops.push_back(MicrowaveRot{angle(rng), angle(rng), target}); break;
      case 3: c.ops.push_back(MicrowavePi{target}); break;
      case 4:
        if (!memory_f) c.ops.push_back(UEnt{});
        break;
      case 5:
        c.ops.push_back(Convert{Ion::memory, memory_f ? QubitType::S : QubitType::F});
        memory_f = !memory_f;
        break;
      case 6:
        if (memory_f) c.ops.push_back(Store{0.01});
        break;
    }
  }
  if (memory_f) c.ops.push_back(Convert{Ion::memory, QubitType::S});
  c.ops.push_back(IonMeasureZ{Address::both});
  return c;
}

}  // namespace

TEST_SUITE("properties") {
  TEST_CASE("GHZ fidelity decomposition holds for random three-qubit states") {
    Rng rng(2024);
    ComplexVector ghz = ComplexVector::Zero(8);
    ghz(0) = ghz(7) = 1 / std::sqrt(2.0);
    for (int trial = 0; trial < 100; ++trial) {
      const ComplexMatrix rho = ginibre_state(8, rng);
      std::array<double, 3> mk{};
      for (int k = 1; k <= 3; ++k) {
        const ComplexMatrix m = mk_observable(k);
        mk[k - 1] = (rho * kron<double>(kron<double>(m, m), m)).trace().real();
      }
      const double f = est::ghz_fidelity(rho(0, 0).real(), rho(7, 7).real(), mk);
      CHECK(std::abs(f - (ghz.adjoint() * rho * ghz)(0, 0).real()) <= 1e-9);
    }
  }

  TEST_CASE("every channel is CPTP across its parameter range") {
    for (double lambda : {0.0, 0.01, 0.5, 1.0}) {
      check_cptp(dev::depolarizing_channel(lambda, 1));
      check_cptp(dev::depolarizing_channel(lambda, 2));
    }
    for (double eps : {0.0, 0.0126, 0.25, 0.5}) {
      check_cptp(dev::conversion_channel(eps));
      check_cptp(dev::conversion_leg_channel(eps));
    }
    for (double t : {0.0, 0.05, 1.0, 100.0}) {
      check_cptp(dev::dephasing_channel(t, 0.985));
      check_cptp(dev::memory_channel(t, 0.985, dev::MemoryModel::isotropic));
      check_cptp(dev::memory_channel(t, 0.985, dev::MemoryModel::dephasing));
    }
  }

  TEST_CASE("random valid circuits produce valid states and distributions") {
    Rng rng(77);
    const auto noisy = dev::NoiseBundle::from_params(dev::DeviceParams{});
    const auto quiet = dev::NoiseBundle::noiseless();
    for (int trial = 0; trial < 60; ++trial) {
      const auto c = random_circuit(rng);
      REQUIRE(validate_circuit(c).empty());
      for (const auto* nb : {&noisy, &quiet}) {
        const auto s = final_state(c, *nb);  // throws on an invalid state
        CHECK(s.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
        double total = 0;
        for (const auto& [o, p] : outcome_distribution(c, *nb)) {
          CHECK(p >= -1e-12);
          total += p;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      }
      CHECK(format_circuit(parse_circuit(format_circuit(c))) == format_circuit(c));
      // Without noise the state stays pure.
      CHECK(final_state(c, quiet).purity() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("noiseless teleportation is the identity process") {
    const auto quiet = dev::NoiseBundle::noiseless();
    std::vector<ComplexMatrix> inputs, outputs;
    for (MubState s : kAllMubStates) {
      Eigen::Vector3d r;
      int axis = 0;
      for (PhotonBasis b : {PhotonBasis::X, PhotonBasis::Y, PhotonBasis::Z}) {
        double e = 0;
        for (const auto& [o, p] : outcome_distribution(compile_teleportation(s, 0.05, b), quiet))
          e += p * est::reinterpret_teleport_outcome(o.substr(0, 2), to_string(b)[0], est::outcome_sign(o[2]));
        r(axis++) = e;
      }
      const ComplexVector psi = mub_vector(s);
      inputs.push_back(psi * psi.adjoint());
      outputs.push_back((ComplexMatrix::Identity(2, 2) + r.x() * pauli_matrix('X') + r.y() * pauli_matrix('Y') +
                         r.z() * pauli_matrix('Z')) /
                        2.0);
    }
    const auto res = est::mle_process_tomography(inputs, outputs);
    CHECK(est::process_fidelity(res.rho_or_chi) == doctest::Approx(1.0).epsilon(1e-6));
  }

  TEST_CASE("state tomography stays physical on random data") {
    Rng rng(88);
    std::uniform_int_distribution<int> counts(0, 500);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<CountsTable> tables;
      for (const char* b : {"X", "Y", "Z"}) {
        CountsTable t(b);
        t.add("+", counts(rng));
        t.add("-", counts(rng) + 1);
        tables.push_back(t);
      }
      const auto res = est::mle_state_tomography(tables);
      CHECK(res.converged);
      CHECK(min_eigenvalue<double>(res.rho_or_chi) >= -1e-12);
      CHECK(res.rho_or_chi.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("identical seeds reproduce sampled tables") {
    const auto nb = dev::NoiseBundle::from_params(dev::DeviceParams{});
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
      const auto c = random_circuit(rng);
      Rng a = substream(5, 1, trial), b = substream(5, 1, trial);
      RunOptions opt;
      opt.mode = trial % 2 ? ExecMode::trajectory : ExecMode::exact;
      CHECK(run_circuit(c, nb, a, 200, opt) == run_circuit(c, nb, b, 200, opt));
    }
  }
}
