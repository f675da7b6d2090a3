// Monte Carlo sequencer for the heralded entanglement loop and sideband
// thermometry.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ionnode/devmodel.hpp"
#include "ionnode/rng.hpp"

namespace ionnode::proto {

/// Pump + microwave init + excitation window; the ps excitation pulse itself
/// is negligible.
double attempt_cycle_duration(const dev::DeviceParams& p);
/// One cooling block plus attempts_per_batch attempts.
double batch_duration(const dev::DeviceParams& p);
/// Attempts per second averaged over a batch.
double attempt_rate(const dev::DeviceParams& p);
/// r / attempt_rate. Throws ContractError if r exceeds the attempt rate.
double derive_p_att(const dev::DeviceParams& p);

/// Time at which attempt `j` (0-based) finishes, measured from the start of
/// the first cooling block.
double attempt_end_time(const dev::DeviceParams& p, std::int64_t j);
/// Number of whole attempts that finish within `window` seconds.
std::int64_t attempts_in_window(const dev::DeviceParams& p, double window);

enum class EventKind {
  doppler, eit, pump, mw_init, excite, herald_success, herald_fail, convert, gate, measure
};
const char* to_string(EventKind k);

struct Event {
  double time_s;
  EventKind kind;
  std::string payload;
};

class EventTrace {
 public:
  /// Throws ContractError if `time_s` precedes the last event or a second
  /// herald_success is added.
  void add(double time_s, EventKind kind, std::string payload = {});
  const std::vector<Event>& events() const { return events_; }
  void write_csv(std::ostream& os) const;

 private:
  std::vector<Event> events_;
};

struct TrialResult {
  bool success = false;
  std::optional<double> t_herald;
  std::int64_t attempts_used = 0;
  double nbar_at_herald = 0.0;
  double nbar_at_gate = 0.0;  // after idle background heating until the window ends
  std::optional<EventTrace> trace;
};

struct TrialOptions {
  double p_att = 0.0;
  /// Storage window; infinity removes the cutoff.
  double window = std::numeric_limits<double>::infinity();
  bool record_trace = false;
};

/// One run of the cooling / attempt loop. The index of the successful
/// attempt is drawn from a geometric law, so runtime does not grow with the
/// number of failed attempts.
TrialResult run_entanglement_trial(const dev::DeviceParams& p, const TrialOptions& opt, Rng& rng);

/// `n` independent trials, trial i seeded from substream(master, stream, i).
/// Output is identical for any worker count.
std::vector<TrialResult> run_trials(const dev::DeviceParams& p, const TrialOptions& opt,
                                    std::uint64_t master_seed, std::uint64_t stream, std::size_t n,
                                    unsigned workers = 1);

/// Runs trials back to back with no window for `seconds` of simulated time
/// and returns successes per second.
double measure_herald_rate(const dev::DeviceParams& p, double p_att, double seconds, Rng& rng);

struct ThermometryRecord {
  std::int64_t shots = 0;
  std::int64_t red_excitations = 0;
  std::int64_t blue_excitations = 0;
};

/// Mean phonon number after N attempts from a fresh EIT cooling.
double nbar_after_attempts(const dev::DeviceParams& p, std::int64_t n_attempts);

/// Red/blue sideband counts for a thermal state of mean `nbar`.
ThermometryRecord sample_sidebands(double nbar, double pi_efficiency, std::int64_t shots, Rng& rng);

struct HeatingPoint {
  std::int64_t n_attempts;
  ThermometryRecord record;
};

std::vector<HeatingPoint> simulate_heating_experiment(const dev::DeviceParams& p,
                                                      const std::vector<std::int64_t>& n_values,
                                                      std::int64_t shots, Rng& rng);

struct NbarEstimate {
  double nbar;
  double error;  // one standard error
};

/// n = R/(1-R) with R = red/blue. Throws std::domain_error when R >= 1.
NbarEstimate estimate_nbar(const ThermometryRecord& rec);

}  // namespace ionnode::proto
