#include <sstream>

#include "doctest.h"
#include "ionnode/protocol.hpp"

using namespace ionnode;
using namespace ionnode::proto;

TEST_SUITE("protocol") {
  TEST_CASE("timing from the default device") {
    const dev::DeviceParams p;
    CHECK(attempt_cycle_duration(p) == doctest::Approx(15.06e-6).epsilon(1e-12));
    CHECK(batch_duration(p) == doctest::Approx(390.6e-6).epsilon(1e-12));
    CHECK(attempt_rate(p) == doctest::Approx(10 / 390.6e-6).epsilon(1e-12));
    // r = p_att x attempt rate.
    CHECK(derive_p_att(p) == doctest::Approx(7.0 * 390.6e-6 / 10).epsilon(1e-12));
    CHECK(attempts_in_window(p, 0.05) == 1280);
    CHECK(attempts_in_window(p, 0.0) == 0);
    CHECK(attempts_in_window(p, std::numeric_limits<double>::infinity()) ==
          std::numeric_limits<std::int64_t>::max());
  }

  TEST_CASE("attempt end times follow the batch grid") {
    const dev::DeviceParams p;
    CHECK(attempt_end_time(p, 0) == doctest::Approx(40e-6 + 200e-6 + 15.06e-6));
    CHECK(attempt_end_time(p, 9) == doctest::Approx(390.6e-6));
    CHECK(attempt_end_time(p, 10) == doctest::Approx(390.6e-6 + 40e-6 + 200e-6 + 15.06e-6));
  }

  TEST_CASE("rate above the attempt rate is rejected") {
    dev::DeviceParams p;
    p.ent_rate_r = 1e6;
    CHECK_THROWS_AS(derive_p_att(p), ContractError);
  }

  TEST_CASE("zero probability with no window never heralds") {
    const dev::DeviceParams p;
    TrialOptions opt;
    opt.p_att = 0.0;
    Rng rng(1);
    CHECK_THROWS_AS(run_entanglement_trial(p, opt, rng), ContractError);
    opt.window = 0.05;
    const auto r = run_entanglement_trial(p, opt, rng);
    CHECK_FALSE(r.success);
    CHECK(r.attempts_used == 1280);
  }

  TEST_CASE("certain success heralds on the first attempt") {
    const dev::DeviceParams p;
    TrialOptions opt;
    opt.p_att = 1.0;
    opt.window = 0.05;
    opt.record_trace = true;
    Rng rng(2);
    const auto r = run_entanglement_trial(p, opt, rng);
    REQUIRE(r.success);
    CHECK(r.attempts_used == 1);
    CHECK(*r.t_herald == doctest::Approx(attempt_end_time(p, 0)));
    CHECK(r.nbar_at_herald == doctest::Approx(0.2 + 0.012));
    CHECK(r.nbar_at_gate == doctest::Approx(0.2 + 0.012 + 20.0 * (0.05 - *r.t_herald)));
    REQUIRE(r.trace);
    int heralds = 0;
    for (const auto& e : r.trace->events()) heralds += e.kind == EventKind::herald_success;
    CHECK(heralds == 1);
  }

  TEST_CASE("success fraction matches 1 - exp(-rT)") {
    dev::DeviceParams p;
    TrialOptions opt;
    opt.p_att = derive_p_att(p);
    SUBCASE("T = 50 ms") {
      opt.window = 0.05;
      const auto res = run_trials(p, opt, 7, 1, 100000, 1);
      double ok = 0;
      for (const auto& r : res) ok += r.success;
      CHECK(std::abs(ok / 1e5 - 0.2953) < 0.006);
    }
    SUBCASE("T = 100 ms") {
      p.storage_T = 0.1;
      opt.window = 0.1;
      const auto res = run_trials(p, opt, 7, 2, 100000, 1);
      double ok = 0;
      for (const auto& r : res) ok += r.success;
      CHECK(std::abs(ok / 1e5 - (1 - std::exp(-0.7))) < 0.008);
    }
  }

  TEST_CASE("in-batch heating index") {
    const dev::DeviceParams p;
    TrialOptions opt;
    opt.p_att = 0.05;
    opt.window = 0.05;
    for (std::uint64_t i = 0; i < 200; ++i) {
      Rng rng = substream(3, 0, i);
      const auto r = run_entanglement_trial(p, opt, rng);
      if (!r.success) continue;
      const auto k = (r.attempts_used - 1) % p.attempts_per_batch + 1;
      CHECK(r.nbar_at_herald == doctest::Approx(p.nbar_after_eit + p.heat_per_attempt * double(k)));
    }
  }

  TEST_CASE("trials are independent of the worker count") {
    const dev::DeviceParams p;
    TrialOptions opt;
    opt.p_att = derive_p_att(p);
    opt.window = 0.05;
    const auto a = run_trials(p, opt, 99, 4, 5000, 1);
    const auto b = run_trials(p, opt, 99, 4, 5000, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].success == b[i].success);
      CHECK(a[i].attempts_used == b[i].attempts_used);
    }
  }

  TEST_CASE("event traces") {
    EventTrace t;
    t.add(0.0, EventKind::doppler);
    t.add(1.0, EventKind::herald_success, "attempt=0");
    CHECK_THROWS_AS(t.add(0.5, EventKind::pump), ContractError);
    CHECK_THROWS_AS(t.add(2.0, EventKind::herald_success), ContractError);
    std::ostringstream os;
    t.write_csv(os);
    CHECK(os.str() == "time_s,kind,payload\n0,doppler,\n1,herald_success,attempt=0\n");

    // A long failed trial stays ordered across many batch boundaries.
    const dev::DeviceParams p;
    TrialOptions opt;
    opt.p_att = 0.0;
    opt.window = 0.05;
    opt.record_trace = true;
    Rng rng(1);
    const auto r = run_entanglement_trial(p, opt, rng);
    REQUIRE(r.trace);
    CHECK(r.trace->events().size() == 128 * 2 + 1280 * 4);
  }

  TEST_CASE("measured herald rate") {
    const dev::DeviceParams p;
    Rng rng(4);
    CHECK(std::abs(measure_herald_rate(p, derive_p_att(p), 2000.0, rng) - 7.0) < 0.3);
    CHECK(measure_herald_rate(p, 0.0, 1.0, rng) == 0.0);
  }

  TEST_CASE("thermometry") {
    const dev::DeviceParams p;
    CHECK(nbar_after_attempts(p, 100) == doctest::Approx(0.2 + 1.2));
    CHECK_THROWS_AS(nbar_after_attempts(p, -1), ContractError);

    const auto e = estimate_nbar({1000, 100, 400});
    CHECK(e.nbar == doctest::Approx(1.0 / 3.0));
    CHECK(e.error > 0.0);
    CHECK_THROWS_AS(estimate_nbar({1000, 400, 400}), std::domain_error);
    CHECK_THROWS_AS(estimate_nbar({1000, 10, 0}), ContractError);
    CHECK_THROWS_AS(estimate_nbar({10, 20, 5}), ContractError);

    Rng rng(8);
    const auto rec = sample_sidebands(1.0, 0.5, 200000, rng);
    CHECK(std::abs(estimate_nbar(rec).nbar - 1.0) < 0.03);
    CHECK_THROWS_AS(sample_sidebands(1.0, 0.0, 10, rng), ContractError);
  }
}
