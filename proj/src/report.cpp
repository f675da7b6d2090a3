#include <filesystem>
#include <fstream>

#include "ionnode/experiments.hpp"

namespace ionnode::cli {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  return os;
}

}  // namespace

void write_report(const Report& r, const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);

  nlohmann::json files = nlohmann::json::array();
  for (const auto& [key, tables] : r.tables) {
    const std::string name = "counts_" + key + ".csv";
    auto os = open_out(dir / name);
    write_counts_csv(os, tables);
    files.push_back(name);
  }
  for (const auto& [key, trace] : r.traces) {
    const std::string name = "trace_" + key + ".csv";
    auto os = open_out(dir / name);
    trace.write_csv(os);
    files.push_back(name);
  }
  for (const auto& [name, content] : r.files) {
    auto os = open_out(dir / name);
    os << content;
    files.push_back(name);
  }

  nlohmann::json summary{
      {"experiment", r.experiment},
      {"pass", r.pass},
      {"criterion", r.criterion},
      {"runtime_s", r.runtime_s},
      {"estimates", r.estimates},
      {"files", files},
      {"provenance",
       {{"version", "ionnode 1.0.0"},
        {"master_seed", cfg.master_seed},
        {"config", nlohmann::json::parse(config_to_json(cfg))}}},
  };
  auto os = open_out(dir / "summary.json");
  os << summary.dump(2) << '\n';
}

}  // namespace ionnode::cli
