#include "doctest.h"
#include "ionnode/devmodel.hpp"
#include "ionnode/estim.hpp"
#include "ionnode/gates.hpp"

using namespace ionnode;
using namespace ionnode::est;

namespace {

CountsTable pm_table(const std::string& basis, std::int64_t plus, std::int64_t minus) {
  CountsTable t(basis);
  t.add("+", plus);
  t.add("-", minus);
  return t;
}

double bloch_loglik(const Eigen::Vector3d& r, const std::vector<CountsTable>& tables) {
  double ll = 0;
  for (const auto& t : tables) {
    const int axis = t.setting() == "X" ? 0 : t.setting() == "Y" ? 1 : 2;
    ll += t.count("+") * std::log((1 + r(axis)) / 2) + t.count("-") * std::log((1 - r(axis)) / 2);
  }
  return ll;
}

// Brute-force maximum likelihood over the Bloch ball: coarse grid, then a
// finer grid around the best point.
Eigen::Vector3d grid_mle(const std::vector<CountsTable>& tables) {
  Eigen::Vector3d best(0, 0, 0);
  double best_ll = bloch_loglik(best, tables);
  auto scan = [&](const Eigen::Vector3d& centre, double half, int steps) {
    const Eigen::Vector3d c = centre;
    for (int i = -steps; i <= steps; ++i)
      for (int j = -steps; j <= steps; ++j)
        for (int k = -steps; k <= steps; ++k) {
          const Eigen::Vector3d r = c + half / steps * Eigen::Vector3d(i, j, k);
          if (r.norm() >= 1.0 - 1e-9) continue;
          const double ll = bloch_loglik(r, tables);
          if (ll > best_ll) {
            best_ll = ll;
            best = r;
          }
        }
  };
  scan({0, 0, 0}, 1.0, 40);
  scan(best, 0.05, 25);
  scan(best, 0.004, 20);
  return best;
}

Eigen::Vector3d bloch_of(const ComplexMatrix& rho) {
  return {(rho * pauli_matrix('X')).trace().real(), (rho * pauli_matrix('Y')).trace().real(),
          (rho * pauli_matrix('Z')).trace().real()};
}

ComplexMatrix apply_kraus(const std::vector<ComplexMatrix>& ks, const ComplexMatrix& rho) {
  ComplexMatrix out = ComplexMatrix::Zero(2, 2);
  for (const auto& k : ks) out += k * rho * k.adjoint();
  return out;
}

std::vector<ComplexMatrix> mub_projectors() {
  std::vector<ComplexMatrix> out;
  for (MubState s : kAllMubStates) out.push_back(mub_vector(s) * mub_vector(s).adjoint());
  return out;
}

}  // namespace

TEST_SUITE("estim") {
  TEST_CASE("closed-form fidelities") {
    CHECK(bell_fidelity_correlators(0.92, 0.91, -0.90) == doctest::Approx(0.9325).epsilon(1e-15));
    CHECK(bell_fidelity_correlators(1, 1, -1) == doctest::Approx(1.0));
    CHECK(bell_fidelity_pop_parity(0.965, 0.961) == doctest::Approx(0.963));
    CHECK(ghz_fidelity(0.5, 0.5, {-1, 1, -1}) == doctest::Approx(1.0));
    CHECK(ghz_fidelity(0.45, 0.44, {-0.8, 0.8, -0.8}) == doctest::Approx(0.445 + 0.4));
    CHECK_THROWS_AS(ghz_fidelity(1.2, 0.0, {0, 0, 0}), ContractError);
    CHECK_THROWS_AS(mub_average_fidelity({1, 1, 1}), ContractError);
    CHECK(mub_average_fidelity({1, 1, 1, 1, 0.7, 0.7}) == doctest::Approx(0.9));
  }

  TEST_CASE("counting estimators") {
    CountsTable t("XX");
    t.add("0H", 40);
    t.add("1V", 40);
    t.add("0V", 10);
    t.add("1H", 10);
    const auto c = correlator_from_counts(t);
    CHECK(c.value == doctest::Approx(0.6));
    CHECK(c.error == doctest::Approx(std::sqrt(0.64 / 100)));
    const auto p = population(t, {"0H", "1V"});
    CHECK(p.value == doctest::Approx(0.8));
    CHECK(outcome_sign('H') == 1);
    CHECK(outcome_sign('-') == -1);
    CHECK_THROWS_AS(outcome_sign('Q'), ContractError);
    CHECK_THROWS_AS(correlator_from_counts(CountsTable("empty")), ContractError);
  }

  TEST_CASE("Table S1 reinterpretation, exhaustive") {
    const std::map<std::string, char> correction{{"00", 'I'}, {"01", 'X'}, {"10", 'Z'}, {"11", 'Y'}};
    int cases = 0;
    for (const auto& [bell, pauli] : correction)
      for (char basis : {'X', 'Y', 'Z'})
        for (int photon : {1, -1}) {
          // The correction flips the outcome iff it anticommutes with the basis.
          const ComplexMatrix p = pauli_matrix(pauli), b = pauli_matrix(basis);
          const bool anticommutes = max_abs<double>(ComplexMatrix(p * b + b * p)) < 1e-12;
          CHECK(reinterpret_teleport_outcome(bell, basis, photon) == (anticommutes ? -photon : photon));
          ++cases;
        }
    CHECK(cases == 24);
    CHECK_THROWS_AS(reinterpret_teleport_outcome("2", 'X', 1), ContractError);
    CHECK_THROWS_AS(reinterpret_teleport_outcome("00", 'W', 1), ContractError);
    CHECK_THROWS_AS(reinterpret_teleport_outcome("00", 'X', 0), ContractError);
  }

  TEST_CASE("parity fit recovers a known fringe") {
    ParityScan scan;
    for (int i = 0; i < 16; ++i) {
      const double phi = 2 * M_PI * i / 16;
      scan.phases.push_back(phi);
      scan.parities.push_back(0.9 * std::sin(phi + 0.3));
    }
    const auto f = fit_parity(scan);
    CHECK(f.at("C") == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(f.at("phi0") == doctest::Approx(0.3).epsilon(1e-12));
  }

  TEST_CASE("line, Ramsey, conversion and heating fits") {
    const auto line = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
    CHECK(line.at("slope") == doctest::Approx(2.0));
    CHECK(line.at("intercept") == doctest::Approx(1.0));
    CHECK_THROWS_AS(fit_line({1, 1}, {2, 3}), ContractError);

    std::vector<double> t, c;
    for (int i = 1; i <= 15; ++i) {
      t.push_back(0.1 * i);
      c.push_back(0.95 * std::exp(-t.back() / 0.985));
    }
    const auto r = fit_ramsey(t, c);
    CHECK(r.at("T2") == doctest::Approx(0.985).epsilon(1e-10));
    CHECK(r.at("A") == doctest::Approx(0.95).epsilon(1e-10));
    c.push_back(-0.01);
    t.push_back(2.0);
    CHECK_FALSE(fit_ramsey(t, c).warnings.empty());

    std::vector<double> n, f;
    for (int i = 1; i <= 8; ++i) {
      n.push_back(i);
      f.push_back(1 - 0.024 - 0.0126 * i);
    }
    const auto conv = fit_conversion(n, f);
    CHECK(conv.at("eps0") == doctest::Approx(0.024).epsilon(1e-12));
    CHECK(conv.at("eps") == doctest::Approx(0.0126).epsilon(1e-12));
    const auto flat = fit_conversion({1, 2, 3}, {0.97, 0.97, 0.97});
    CHECK(flat.at("eps") == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit_conversion({1, 2}, {0.9, 0.95}).warnings.size() == 1);

    const auto h = fit_heating({{0, 0.2, 0.01}, {50, 0.8, 0.02}, {100, 1.4, 0.03}});
    CHECK(h.at("slope") == doctest::Approx(0.012));
    CHECK(h.at("intercept") == doctest::Approx(0.2));
  }

  TEST_CASE("state MLE matches a brute-force Bloch-ball search") {
    const std::vector<std::vector<CountsTable>> cases = {
        {pm_table("X", 700, 300), pm_table("Y", 450, 550), pm_table("Z", 820, 180)},
        // Linear inversion would leave the ball here.
        {pm_table("X", 990, 10), pm_table("Y", 900, 100), pm_table("Z", 950, 50)},
        {pm_table("X", 50, 50), pm_table("Y", 50, 50), pm_table("Z", 100, 0)},
    };
    for (const auto& tables : cases) {
      const auto res = mle_state_tomography(tables);
      CHECK(res.converged);
      CHECK(min_eigenvalue<double>(res.rho_or_chi) >= -1e-12);
      CHECK(res.rho_or_chi.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
      const Eigen::Vector3d oracle = grid_mle(tables);
      CHECK((bloch_of(res.rho_or_chi) - oracle).norm() < 2e-3);
      CHECK(res.loglik >= bloch_loglik(oracle, tables) - 1e-6);
      CHECK(state_loglik(res.rho_or_chi, tables) == doctest::Approx(res.loglik).epsilon(1e-9));
    }
  }

  TEST_CASE("state MLE log-likelihood is nondecreasing") {
    MleOptions opt;
    opt.keep_history = true;
    const auto res =
        mle_state_tomography({pm_table("X", 990, 10), pm_table("Y", 900, 100), pm_table("Z", 950, 50)}, opt);
    REQUIRE(res.loglik_history.size() >= 2);
    for (std::size_t i = 1; i < res.loglik_history.size(); ++i)
      CHECK(res.loglik_history[i] >= res.loglik_history[i - 1] - 1e-9);
  }

  TEST_CASE("state MLE rejects malformed tables") {
    CHECK_THROWS_AS(mle_state_tomography({pm_table("Q", 1, 1)}), ContractError);
    CountsTable odd("X");
    odd.add("0H", 3);
    CHECK_THROWS_AS(mle_state_tomography({odd}), ContractError);
  }

  TEST_CASE("process tomography of known channels") {
    const auto inputs = mub_projectors();
    SUBCASE("identity") {
      const auto res = mle_process_tomography(inputs, inputs);
      CHECK(process_fidelity(res.rho_or_chi) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(res.tp_residual < 1e-6);
    }
    SUBCASE("depolarizing") {
      const auto ch = dev::depolarizing_channel(0.2, 1);
      std::vector<ComplexMatrix> outputs;
      for (const auto& r : inputs) outputs.push_back(apply_kraus(ch.operators(), r));
      const auto res = mle_process_tomography(inputs, outputs);
      CHECK(process_fidelity(res.rho_or_chi) == doctest::Approx(0.85).epsilon(1e-6));
      for (int i = 1; i < 4; ++i) CHECK(res.rho_or_chi(i, i).real() == doctest::Approx(0.05).epsilon(1e-6));
      for (std::size_t k = 0; k < inputs.size(); ++k)
        CHECK(max_abs<double>(ComplexMatrix(apply_chi(res.rho_or_chi, inputs[k]) - outputs[k])) < 1e-6);
    }
    SUBCASE("Pauli Z") {
      std::vector<ComplexMatrix> outputs;
      for (const auto& r : inputs) outputs.push_back(pauli_matrix('Z') * r * pauli_matrix('Z'));
      const auto res = mle_process_tomography(inputs, outputs);
      CHECK(res.rho_or_chi(3, 3).real() == doctest::Approx(1.0).epsilon(1e-6));
    }
  }

  TEST_CASE("average and process fidelity obey (2 F_p + 1)/3 for MUB inputs") {
    Rng rng(31);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 5; ++trial) {
      // Random CPTP map from a Stinespring isometry.
      ComplexMatrix a(4, 2);
      for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = {g(rng), g(rng)};
      Eigen::HouseholderQR<ComplexMatrix> qr(a);
      const ComplexMatrix v = ComplexMatrix(qr.householderQ()).leftCols(2);
      std::vector<ComplexMatrix> ks{v.topRows(2), v.bottomRows(2)};
      const auto inputs = mub_projectors();
      std::vector<ComplexMatrix> outputs;
      double fbar = 0;
      for (MubState s : kAllMubStates) {
        const auto psi = mub_vector(s);
        outputs.push_back(apply_kraus(ks, psi * psi.adjoint()));
        fbar += (psi.adjoint() * outputs.back() * psi)(0, 0).real() / 6;
      }
      const auto res = mle_process_tomography(inputs, outputs);
      CHECK((2 * process_fidelity(res.rho_or_chi) + 1) / 3 == doctest::Approx(fbar).epsilon(1e-6));
      CHECK(min_eigenvalue<double>(res.rho_or_chi) >= -1e-9);
    }
  }

  TEST_CASE("Kolmogorov-Smirnov test") {
    Rng rng(41);
    std::exponential_distribution<double> e7(7.0), e9(9.0);
    std::vector<double> good, bad;
    for (int i = 0; i < 20000; ++i) {
      good.push_back(e7(rng));
      bad.push_back(e9(rng));
    }
    CHECK(ks_test_exponential(good, 7.0).p_value > 0.01);
    CHECK(ks_test_exponential(bad, 7.0).p_value < 1e-6);
    // Asymptotic 5% critical value.
    CHECK(kolmogorov_pvalue(1.3581 / std::sqrt(1e6), 1000000) == doctest::Approx(0.05).epsilon(0.01));
    CHECK_THROWS_AS(ks_test_exponential({}, 7.0), ContractError);
  }

  TEST_CASE("bootstrap error of a population is binomial") {
    CountsTable t("Z");
    t.add("0", 700);
    t.add("1", 300);
    Rng rng(51);
    const double se = bootstrap_stderr(
        {t}, [](const std::vector<CountsTable>& ts) { return ts[0].frequency("0"); }, 2000, rng);
    CHECK(se == doctest::Approx(std::sqrt(0.21 / 1000)).epsilon(0.08));
  }

  TEST_CASE("tomography JSON") {
    TomographyResult r;
    r.rho_or_chi = ComplexMatrix::Identity(2, 2) / 2.0;
    r.converged = true;
    const auto j = tomography_json(r);
    CHECK(j.find("\"converged\": true") != std::string::npos);
    CHECK(j.find("\"real\"") != std::string::npos);
  }
}
