#include "ionnode/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

namespace ionnode::cli {

namespace {

using nlohmann::json;

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ContractError("config: key '" + key + "' must be a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ContractError("config: key '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ContractError("config: key '" + key + "' must be a string");
  return v.get<std::string>();
}

using Setter = std::function<void(RunConfig&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> s = [] {
    std::map<std::string, Setter> m;
    auto num = [&m](const char* key, double dev::DeviceParams::*field) {
      m[key] = [field](RunConfig& c, const json& v, const std::string& k) { c.device.*field = as_number(v, k); };
    };
    num("t_doppler", &dev::DeviceParams::t_doppler);
    num("t_eit", &dev::DeviceParams::t_eit);
    num("t_pump", &dev::DeviceParams::t_pump);
    num("t_mw_init", &dev::DeviceParams::t_mw_init);
    num("t_window", &dev::DeviceParams::t_window);
    num("ent_rate_r", &dev::DeviceParams::ent_rate_r);
    num("storage_T", &dev::DeviceParams::storage_T);
    num("T2_star", &dev::DeviceParams::T2_star);
    num("eps_spam", &dev::DeviceParams::eps_spam);
    num("eps_conv_roundtrip", &dev::DeviceParams::eps_conv_roundtrip);
    num("F_cp_target", &dev::DeviceParams::F_cp_target);
    num("F_bell_target", &dev::DeviceParams::F_bell_target);
    num("heat_per_attempt", &dev::DeviceParams::heat_per_attempt);
    num("heat_background", &dev::DeviceParams::heat_background);
    num("heat_rate_active", &dev::DeviceParams::heat_rate_active);
    num("nbar_after_eit", &dev::DeviceParams::nbar_after_eit);
    num("detect_err_ion", &dev::DeviceParams::detect_err_ion);
    num("gate_heating_coupling_kappa", &dev::DeviceParams::gate_heating_coupling_kappa);
    num("sideband_pi_efficiency", &dev::DeviceParams::sideband_pi_efficiency);
    m["attempts_per_batch"] = [](RunConfig& c, const json& v, const std::string& k) {
      const auto n = as_integer(v, k);
      if (n < 1 || n > 1'000'000) throw ContractError("config: key '" + k + "' must lie in [1, 1e6]");
      c.device.attempts_per_batch = static_cast<int>(n);
    };
    m["correlators_cp"] = [](RunConfig& c, const json& v, const std::string& k) {
      if (!v.is_array() || v.size() != 3) throw ContractError("config: key '" + k + "' must be [XX, YY, ZZ]");
      for (std::size_t i = 0; i < 3; ++i)
        c.device.correlators_cp[i] = as_number(v[i], k + "[" + std::to_string(i) + "]");
    };
    m["source_mode"] = [](RunConfig& c, const json& v, const std::string& k) {
      try {
        c.device.source_mode = dev::parse_source_mode(as_string(v, k));
      } catch (const ContractError& e) {
        throw ContractError(std::string("config: ") + e.what());
      }
    };
    m["memory_model"] = [](RunConfig& c, const json& v, const std::string& k) {
      try {
        c.device.memory_model = dev::parse_memory_model(as_string(v, k));
      } catch (const ContractError& e) {
        throw ContractError(std::string("config: ") + e.what());
      }
    };
    m["experiment"] = [](RunConfig& c, const json& v, const std::string& k) { c.experiment = as_string(v, k); };
    m["shots"] = [](RunConfig& c, const json& v, const std::string& k) {
      c.shots = as_integer(v, k);
      if (c.shots <= 0) throw ContractError("config: key 'shots' must be positive");
    };
    m["trials"] = [](RunConfig& c, const json& v, const std::string& k) {
      c.trials = as_integer(v, k);
      if (c.trials <= 0) throw ContractError("config: key 'trials' must be positive");
    };
    m["master_seed"] = [](RunConfig& c, const json& v, const std::string& k) {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ContractError("config: key '" + k + "' must be a nonnegative integer");
      c.master_seed = v.get<std::uint64_t>();
    };
    m["output_dir"] = [](RunConfig& c, const json& v, const std::string& k) { c.output_dir = as_string(v, k); };
    m["workers"] = [](RunConfig& c, const json& v, const std::string& k) {
      const auto n = as_integer(v, k);
      if (n < 1 || n > 256) throw ContractError("config: key 'workers' must lie in [1, 256]");
      c.workers = static_cast<unsigned>(n);
    };
    return m;
  }();
  return s;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ContractError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ContractError("config: top level must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    auto it = setters().find(key);
    if (it == setters().end()) throw ContractError("config: unknown key '" + key + "'");
    it->second(cfg, value, key);
  }
  try {
    cfg.device.validate();
  } catch (const ContractError& e) {
    throw ContractError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ContractError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const RunConfig& c) {
  const auto& d = c.device;
  json j{{"t_doppler", d.t_doppler},
         {"t_eit", d.t_eit},
         {"t_pump", d.t_pump},
         {"t_mw_init", d.t_mw_init},
         {"t_window", d.t_window},
         {"attempts_per_batch", d.attempts_per_batch},
         {"ent_rate_r", d.ent_rate_r},
         {"storage_T", d.storage_T},
         {"T2_star", d.T2_star},
         {"eps_spam", d.eps_spam},
         {"eps_conv_roundtrip", d.eps_conv_roundtrip},
         {"F_cp_target", d.F_cp_target},
         {"correlators_cp", {d.correlators_cp[0], d.correlators_cp[1], d.correlators_cp[2]}},
         {"F_bell_target", d.F_bell_target},
         {"heat_per_attempt", d.heat_per_attempt},
         {"heat_background", d.heat_background},
         {"heat_rate_active", d.heat_rate_active},
         {"nbar_after_eit", d.nbar_after_eit},
         {"detect_err_ion", d.detect_err_ion},
         {"gate_heating_coupling_kappa", d.gate_heating_coupling_kappa},
         {"sideband_pi_efficiency", d.sideband_pi_efficiency},
         {"source_mode", dev::to_string(d.source_mode)},
         {"memory_model", dev::to_string(d.memory_model)},
         {"experiment", c.experiment},
         {"master_seed", c.master_seed},
         {"output_dir", c.output_dir},
         {"workers", c.workers}};
  // Zero means "experiment default" and is not a valid explicit value.
  if (c.shots > 0) j["shots"] = c.shots;
  if (c.trials > 0) j["trials"] = c.trials;
  return j.dump(2);
}

}  // namespace ionnode::cli
