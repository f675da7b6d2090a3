#include <cmath>
#include <iomanip>
#include <sstream>

#include "ionnode/circuits.hpp"

namespace ionnode::circ {

namespace {

[[noreturn]] void bad(std::size_t line, const std::string& msg) {
  throw ContractError("circuit text line " + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

Ion parse_ion(const std::string& s, std::size_t line) {
  if (s == "memory") return Ion::memory;
  if (s == "communication") return Ion::communication;
  bad(line, "unknown ion '" + s + "'");
}

Address parse_address(const std::string& s, std::size_t line) {
  if (s == "both") return Address::both;
  if (s == "memory") return Address::memory;
  if (s == "communication") return Address::communication;
  bad(line, "unknown address '" + s + "'");
}

QubitType parse_type(const std::string& s, std::size_t line) {
  if (s == "S") return QubitType::S;
  if (s == "F") return QubitType::F;
  bad(line, "unknown qubit type '" + s + "'");
}

MubState parse_mub(const std::string& s, std::size_t line) {
  for (MubState m : kAllMubStates)
    if (s == mub_name(m)) return m;
  bad(line, "unknown state '" + s + "'");
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

double parse_angle(const std::string& token) {
  const auto pos = token.find("pi");
  try {
    if (pos == std::string::npos) return parse_number(token);
    std::string coef = token.substr(0, pos);
    std::string tail = token.substr(pos + 2);
    if (!coef.empty() && coef.back() == '*') coef.pop_back();
    double c = 1.0;
    if (coef == "-") c = -1.0;
    else if (coef == "+" || coef.empty()) c = 1.0;
    else c = parse_number(coef);
    double d = 1.0;
    if (!tail.empty()) {
      if (tail.front() != '/') throw std::invalid_argument(token);
      d = parse_number(tail.substr(1));
      if (d == 0.0) throw std::invalid_argument(token);
    }
    return c * M_PI / d;
  } catch (const std::invalid_argument&) {
    throw ContractError("bad angle '" + token + "'");
  } catch (const std::out_of_range&) {
    throw ContractError("bad angle '" + token + "'");
  }
}

Circuit parse_circuit(const std::string& text) {
  Circuit c;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto h = raw.find('#'); h != std::string::npos) raw.resize(h);
    std::istringstream ls(raw);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    const std::string& kind = tok[0];
    auto need = [&](std::size_t n) {
      if (tok.size() != n + 1)
        bad(line, "'" + kind + "' takes " + std::to_string(n) + " argument(s), got " + std::to_string(tok.size() - 1));
    };
    auto angle = [&](const std::string& s) {
      try {
        return parse_angle(s);
      } catch (const ContractError& e) {
        bad(line, e.what());
      }
    };
    if (kind == "name") {
      if (tok.size() < 2) bad(line, "'name' needs a value");
      c.name = tok[1];
    } else if (kind == "init") {
      need(2);
      auto& st = c.initial.at(parse_ion(tok[1], line));
      if (tok[2] == "absent") {
        st.present = false;
        st.live = false;
      } else if (tok[2] == "idle") {
        st.live = false;
      } else {
        st.type = parse_type(tok[2], line);
      }
    } else if (kind == "prep") {
      need(2);
      c.ops.push_back(PrepState{parse_ion(tok[1], line), parse_mub(tok[2], line)});
    } else if (kind == "uent") {
      need(0);
      c.ops.push_back(UEnt{});
    } else if (kind == "mwpi") {
      if (tok.size() > 2) bad(line, "'mwpi' takes at most one argument");
      c.ops.push_back(MicrowavePi{tok.size() == 2 ? parse_address(tok[1], line) : Address::both});
    } else if (kind == "herald") {
      need(0);
      c.ops.push_back(HeraldEpr{});
    } else if (kind == "z") {
      need(2);
      c.ops.push_back(ZTheta{angle(tok[1]), parse_address(tok[2], line)});
    } else if (kind == "y") {
      need(2);
      c.ops.push_back(YThetaGlobal{angle(tok[1]), parse_address(tok[2], line)});
    } else if (kind == "rot") {
      need(3);
      c.ops.push_back(MicrowaveRot{angle(tok[1]), angle(tok[2]), parse_address(tok[3], line)});
    } else if (kind == "convert") {
      need(2);
      c.ops.push_back(Convert{parse_ion(tok[1], line), parse_type(tok[2], line)});
    } else if (kind == "store") {
      need(1);
      try {
        c.ops.push_back(Store{parse_number(tok[1])});
      } catch (const std::exception&) {
        bad(line, "bad duration '" + tok[1] + "'");
      }
    } else if (kind == "photon") {
      need(2);
      try {
        c.ops.push_back(PhotonMeasure{parse_number(tok[1]), parse_number(tok[2])});
      } catch (const std::exception&) {
        bad(line, "bad waveplate angle");
      }
    } else if (kind == "measure") {
      need(1);
      c.ops.push_back(IonMeasureZ{parse_address(tok[1], line)});
    } else {
      bad(line, "unknown op '" + kind + "'");
    }
  }
  return c;
}

std::string format_circuit(const Circuit& c) {
  std::ostringstream os;
  if (!c.name.empty()) os << "name " << c.name << '\n';
  for (Ion i : {Ion::memory, Ion::communication}) {
    const auto& st = c.initial.at(i);
    if (!st.present) {
      os << "init " << to_string(i) << " absent\n";
      continue;
    }
    if (st.type != QubitType::S) os << "init " << to_string(i) << ' ' << to_string(st.type) << '\n';
    if (!st.live) os << "init " << to_string(i) << " idle\n";
  }
  for (const auto& op : c.ops) {
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, UEnt>) os << "uent";
          else if constexpr (std::is_same_v<T, ZTheta>) os << "z " << fmt(o.theta) << ' ' << to_string(o.target);
          else if constexpr (std::is_same_v<T, YThetaGlobal>) os << "y " << fmt(o.theta) << ' ' << to_string(o.intent);
          else if constexpr (std::is_same_v<T, MicrowaveRot>)
            os << "rot " << fmt(o.theta) << ' ' << fmt(o.phi) << ' ' << to_string(o.intent);
          else if constexpr (std::is_same_v<T, MicrowavePi>) os << "mwpi " << to_string(o.intent);
          else if constexpr (std::is_same_v<T, Convert>) os << "convert " << to_string(o.ion) << ' ' << to_string(o.to);
          else if constexpr (std::is_same_v<T, PhotonMeasure>) os << "photon " << fmt(o.hwp_deg) << ' ' << fmt(o.qwp_deg);
          else if constexpr (std::is_same_v<T, IonMeasureZ>) os << "measure " << to_string(o.which);
          else if constexpr (std::is_same_v<T, PrepState>) os << "prep " << to_string(o.ion) << ' ' << mub_name(o.state);
          else if constexpr (std::is_same_v<T, HeraldEpr>) os << "herald";
          else if constexpr (std::is_same_v<T, Store>) os << "store " << fmt(o.seconds);
        },
        op);
    os << '\n';
  }
  return os.str();
}

}  // namespace ionnode::circ
