// Simulated experiments. Each runs end to end from a RunConfig and returns a
// report with raw tables, estimates and an acceptance verdict.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ionnode/circuits.hpp"
#include "ionnode/config.hpp"
#include "ionnode/counts.hpp"
#include "ionnode/protocol.hpp"

namespace ionnode::cli {

struct Report {
  std::string experiment;
  nlohmann::json estimates = nlohmann::json::object();
  /// counts_<key>.csv
  std::map<std::string, std::vector<CountsTable>> tables;
  /// trace_<key>.csv
  std::map<std::string, proto::EventTrace> traces;
  /// Other files, name -> content.
  std::map<std::string, std::string> files;
  std::string criterion;
  bool pass = false;
  double runtime_s = 0.0;

  double value(const std::string& name) const;
  /// "<experiment>: PASS|FAIL <criterion>"
  std::string verdict_line() const;
};

Report cmd_ion_photon(const RunConfig& cfg);
Report cmd_bell(const RunConfig& cfg);
Report cmd_storage(const RunConfig& cfg);
Report cmd_conversion(const RunConfig& cfg);
Report cmd_teleport(const RunConfig& cfg);
Report cmd_ghz(const RunConfig& cfg);
Report cmd_heating(const RunConfig& cfg);
Report cmd_ramsey(const RunConfig& cfg);
Report cmd_herald(const RunConfig& cfg);
Report cmd_check_waveplates(const RunConfig& cfg);
/// Runs a circuit from the text format with the calibrated noise.
Report cmd_run_circuit(const RunConfig& cfg, const std::string& circuit_text);

/// Dispatches on `name`; throws ContractError for an unknown experiment.
Report run_experiment(const std::string& name, const RunConfig& cfg);
const std::vector<std::string>& experiment_names();

/// Writes summary.json, counts_*.csv, trace_*.csv and extra files into
/// cfg.output_dir (created if missing).
void write_report(const Report& r, const RunConfig& cfg);

/// Average six-MUB memory fidelity 1 - eps0 - eps - (1 - e^{-T/T2})/2.
double storage_fidelity_budget(const dev::DeviceParams& p);

/// Bases that the Table S2 settings should measure, checked against the
/// photon measurement operators. Entry: (label, setting, max deviation).
struct WaveplateCheck {
  std::string label;
  circ::PhotonMeasure setting;
  double deviation;
  bool swapped;
};
std::vector<WaveplateCheck> check_waveplate_table();

}  // namespace ionnode::cli
