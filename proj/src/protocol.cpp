#include "ionnode/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace ionnode::proto {

double attempt_cycle_duration(const dev::DeviceParams& p) {
  return p.t_pump + p.t_mw_init + p.t_window;
}

double batch_duration(const dev::DeviceParams& p) {
  return p.t_doppler + p.t_eit + p.attempts_per_batch * attempt_cycle_duration(p);
}

double attempt_rate(const dev::DeviceParams& p) { return p.attempts_per_batch / batch_duration(p); }

double derive_p_att(const dev::DeviceParams& p) {
  const double rate = attempt_rate(p);
  if (p.ent_rate_r < 0.0) throw ContractError("ent_rate_r: must be nonnegative");
  if (p.ent_rate_r > rate)
    throw ContractError("ent_rate_r: exceeds the attempt rate " + std::to_string(rate) + " /s");
  return p.ent_rate_r / rate;
}

double attempt_end_time(const dev::DeviceParams& p, std::int64_t j) {
  const std::int64_t a = p.attempts_per_batch;
  return static_cast<double>(j / a) * batch_duration(p) + p.t_doppler + p.t_eit +
         static_cast<double>(j % a + 1) * attempt_cycle_duration(p);
}

std::int64_t attempts_in_window(const dev::DeviceParams& p, double window) {
  if (std::isinf(window)) return std::numeric_limits<std::int64_t>::max();
  if (window <= 0.0) return 0;
  const double batch = batch_duration(p);
  const auto full = static_cast<std::int64_t>(std::floor(window / batch));
  const double rem = window - static_cast<double>(full) * batch;
  const double usable = rem - p.t_doppler - p.t_eit;
  std::int64_t partial = 0;
  if (usable > 0.0)
    partial = std::min<std::int64_t>(p.attempts_per_batch,
                                     static_cast<std::int64_t>(std::floor(usable / attempt_cycle_duration(p))));
  return full * p.attempts_per_batch + partial;
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::doppler: return "doppler";
    case EventKind::eit: return "eit";
    case EventKind::pump: return "pump";
    case EventKind::mw_init: return "mw_init";
    case EventKind::excite: return "excite";
    case EventKind::herald_success: return "herald_success";
    case EventKind::herald_fail: return "herald_fail";
    case EventKind::convert: return "convert";
    case EventKind::gate: return "gate";
    case EventKind::measure: return "measure";
  }
  return "?";
}

void EventTrace::add(double time_s, EventKind kind, std::string payload) {
  if (!events_.empty() && time_s < events_.back().time_s)
    throw ContractError("EventTrace: event times must be nondecreasing");
  if (kind == EventKind::herald_success)
    for (const auto& e : events_)
      if (e.kind == EventKind::herald_success)
        throw ContractError("EventTrace: second herald_success");
  events_.push_back({time_s, kind, std::move(payload)});
}

void EventTrace::write_csv(std::ostream& os) const {
  os << "time_s,kind,payload\n";
  const auto old = os.precision(12);
  for (const auto& e : events_) os << e.time_s << ',' << to_string(e.kind) << ',' << e.payload << '\n';
  os.precision(old);
}

namespace {

EventTrace build_trace(const dev::DeviceParams& p, std::int64_t attempts, bool success,
                       double window) {
  EventTrace tr;
  // Times are computed from the batch grid; rounding may put a boundary a few
  // ulps before the previous event, so clamp to keep the trace ordered.
  auto add = [&tr](double t, EventKind k, std::string payload = {}) {
    if (!tr.events().empty()) t = std::max(t, tr.events().back().time_s);
    tr.add(t, k, std::move(payload));
  };
  const std::int64_t a = p.attempts_per_batch;
  const double batch = batch_duration(p), t_att = attempt_cycle_duration(p);
  for (std::int64_t j = 0; j < attempts; ++j) {
    const double b0 = static_cast<double>(j / a) * batch;
    if (j % a == 0) {
      add(b0, EventKind::doppler);
      add(b0 + p.t_doppler, EventKind::eit);
    }
    const double s = b0 + p.t_doppler + p.t_eit + static_cast<double>(j % a) * t_att;
    const std::string id = "attempt=" + std::to_string(j);
    add(s, EventKind::pump, id);
    add(s + p.t_pump, EventKind::mw_init, id);
    add(s + p.t_pump + p.t_mw_init, EventKind::excite, id);
    const bool last = success && j + 1 == attempts;
    add(s + t_att, last ? EventKind::herald_success : EventKind::herald_fail, id);
  }
  if (success) {
    const double t_end = std::isinf(window) ? tr.events().back().time_s : window;
    add(t_end, EventKind::convert, "memory F->S");
    add(t_end, EventKind::gate, "U_ent");
    add(t_end, EventKind::measure, "ions");
  }
  return tr;
}

}  // namespace

TrialResult run_entanglement_trial(const dev::DeviceParams& p, const TrialOptions& opt, Rng& rng) {
  if (!(opt.p_att >= 0.0 && opt.p_att <= 1.0))
    throw ContractError("run_entanglement_trial: p_att must lie in [0, 1]");
  if (opt.p_att == 0.0 && std::isinf(opt.window))
    throw ContractError("run_entanglement_trial: p_att = 0 with an unbounded window never heralds");
  const std::int64_t n_window = attempts_in_window(p, opt.window);

  TrialResult res;
  std::int64_t failures = std::numeric_limits<std::int64_t>::max();
  if (opt.p_att > 0.0) failures = std::geometric_distribution<std::int64_t>(opt.p_att)(rng);
  if (failures < n_window) {
    res.success = true;
    res.attempts_used = failures + 1;
    res.t_herald = attempt_end_time(p, failures);
    res.nbar_at_herald =
        p.nbar_after_eit + p.heat_per_attempt * static_cast<double>(failures % p.attempts_per_batch + 1);
    const double idle = std::isinf(opt.window) ? 0.0 : std::max(0.0, opt.window - *res.t_herald);
    res.nbar_at_gate = res.nbar_at_herald + p.heat_background * idle;
  } else {
    res.attempts_used = n_window;
  }
  if (opt.record_trace) res.trace = build_trace(p, res.attempts_used, res.success, opt.window);
  return res;
}

std::vector<TrialResult> run_trials(const dev::DeviceParams& p, const TrialOptions& opt,
                                    std::uint64_t master_seed, std::uint64_t stream, std::size_t n,
                                    unsigned workers) {
  std::vector<TrialResult> out(n);
  auto work = [&](unsigned w, unsigned nw) {
    for (std::size_t i = w; i < n; i += nw) {
      Rng rng = substream(master_seed, stream, i);
      out[i] = run_entanglement_trial(p, opt, rng);
    }
  };
  workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  for (auto& t : pool) t.join();
  return out;
}

double measure_herald_rate(const dev::DeviceParams& p, double p_att, double seconds, Rng& rng) {
  if (!(seconds > 0.0)) throw ContractError("measure_herald_rate: duration must be positive");
  if (p_att == 0.0) return 0.0;
  TrialOptions opt;
  opt.p_att = p_att;
  double t = 0.0;
  std::int64_t count = 0;
  for (;;) {
    t += *run_entanglement_trial(p, opt, rng).t_herald;
    if (t > seconds) break;
    ++count;
  }
  return static_cast<double>(count) / seconds;
}

double nbar_after_attempts(const dev::DeviceParams& p, std::int64_t n_attempts) {
  if (n_attempts < 0) throw ContractError("nbar_after_attempts: negative attempt count");
  return p.nbar_after_eit + p.heat_per_attempt * static_cast<double>(n_attempts);
}

ThermometryRecord sample_sidebands(double nbar, double pi_efficiency, std::int64_t shots, Rng& rng) {
  if (shots <= 0) throw ContractError("sample_sidebands: shots must be positive");
  if (!(nbar >= 0.0)) throw ContractError("sample_sidebands: nbar must be nonnegative");
  if (!(pi_efficiency > 0.0 && pi_efficiency <= 1.0))
    throw ContractError("sample_sidebands: pi efficiency must lie in (0, 1]");
  ThermometryRecord rec;
  rec.shots = shots;
  rec.blue_excitations = std::binomial_distribution<std::int64_t>(shots, pi_efficiency)(rng);
  rec.red_excitations =
      std::binomial_distribution<std::int64_t>(shots, pi_efficiency * nbar / (nbar + 1.0))(rng);
  return rec;
}

std::vector<HeatingPoint> simulate_heating_experiment(const dev::DeviceParams& p,
                                                      const std::vector<std::int64_t>& n_values,
                                                      std::int64_t shots, Rng& rng) {
  if (shots <= 0) throw ContractError("simulate_heating_experiment: shots must be positive");
  std::vector<HeatingPoint> out;
  for (auto n : n_values)
    out.push_back({n, sample_sidebands(nbar_after_attempts(p, n), p.sideband_pi_efficiency, shots, rng)});
  return out;
}

NbarEstimate estimate_nbar(const ThermometryRecord& rec) {
  if (rec.shots <= 0 || rec.red_excitations < 0 || rec.blue_excitations < 0 ||
      rec.red_excitations > rec.shots || rec.blue_excitations > rec.shots)
    throw ContractError("estimate_nbar: inconsistent record");
  if (rec.blue_excitations == 0) throw ContractError("estimate_nbar: no blue sideband excitations");
  const double red = static_cast<double>(rec.red_excitations);
  const double blue = static_cast<double>(rec.blue_excitations);
  const double n = static_cast<double>(rec.shots);
  const double ratio = red / blue;
  if (ratio >= 1.0)
    throw std::domain_error("estimate_nbar: red/blue ratio " + std::to_string(ratio) +
                            " >= 1 is outside the thermal model");
  const double var_red = red > 0 ? red * (1.0 - red / n) : 1.0;
  const double var_blue = blue * (1.0 - blue / n);
  const double var_ratio = (var_red + ratio * ratio * var_blue) / (blue * blue);
  const double d = 1.0 / ((1.0 - ratio) * (1.0 - ratio));
  return {ratio / (1.0 - ratio), d * std::sqrt(var_ratio)};
}

}  // namespace ionnode::proto
