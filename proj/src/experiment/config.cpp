#include "stackseek/experiment/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace stackseek::experiment {

namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& s) {
  const std::string t = trim(s);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument("expected a number, got '" + s + "'");
  return v;
}

long to_long(const std::string& s) {
  const std::string t = trim(s);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw std::invalid_argument("expected an integer, got '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  std::string t = trim(s);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::vector<double> to_list(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_double(tok));
  return out;
}

std::vector<std::vector<double>> to_rows(const std::string& s) {
  std::vector<std::vector<double>> out;
  for (const auto& row : split(s, ';'))
    if (!row.empty()) out.push_back(to_list(row));
  return out;
}

std::map<std::string, Setter> setters() {
  using C = ExperimentConfig;
  std::map<std::string, Setter> m;
  m["scenario"] = [](C& c, const std::string& v) {
    const std::string t = trim(v);
    if (t == "illustrative") c.scenario = Scenario::kIllustrative;
    else if (t == "testbed") c.scenario = Scenario::kTestbed;
    else if (t == "energy") c.scenario = Scenario::kEnergy;
    else throw std::invalid_argument("unknown scenario '" + t + "'");
  };
  m["name"] = [](C& c, const std::string& v) { c.name = trim(v); };
  m["iterations"] = [](C& c, const std::string& v) { c.iterations = to_long(v); };
  m["seed"] = [](C& c, const std::string& v) {
    const long s = to_long(v);
    if (s < 0) throw std::invalid_argument("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  };
  m["out"] = [](C& c, const std::string& v) { c.out = trim(v); };
  m["replicates"] = [](C& c, const std::string& v) { c.replicates = static_cast<int>(to_long(v)); };
  m["paper_sign"] = [](C& c, const std::string& v) { c.paper_sign = to_bool(v); };
  m["parallel_inner"] = [](C& c, const std::string& v) { c.parallel_inner = to_bool(v); };
  m["profile"] = [](C& c, const std::string& v) { c.profile = to_bool(v); };
  m["fd_step"] = [](C& c, const std::string& v) { c.fd_step = to_double(v); };

  m["schedule.eta_bar"] = [](C& c, const std::string& v) { c.schedule.eta_bar = to_double(v); };
  m["schedule.delta_bar"] = [](C& c, const std::string& v) { c.schedule.delta_bar = to_double(v); };
  m["schedule.beta_bar"] = [](C& c, const std::string& v) { c.schedule.beta_bar = to_double(v); };
  m["schedule.alpha"] = [](C& c, const std::string& v) { c.schedule.alpha = to_double(v); };

  m["inner.tol_base"] = [](C& c, const std::string& v) { c.inner_tol.base = to_double(v); };
  m["inner.tol_scale"] = [](C& c, const std::string& v) { c.inner_tol.scale = to_double(v); };
  m["inner.tol_floor"] = [](C& c, const std::string& v) { c.inner_tol.floor = to_double(v); };
  m["inner.max_iterations"] = [](C& c, const std::string& v) {
    c.inner.max_iterations = static_cast<int>(to_long(v));
  };
  m["inner.step"] = [](C& c, const std::string& v) { c.inner.step = to_double(v); };
  m["inner.projection_tol"] = [](C& c, const std::string& v) { c.inner.projection_tol = to_double(v); };
  m["inner.lipschitz_probes"] = [](C& c, const std::string& v) {
    c.inner.lipschitz_probes = static_cast<int>(to_long(v));
  };

  m["regime.kind"] = [](C& c, const std::string& v) {
    const auto k = scenarios::regime_from_string(trim(v));
    if (!k) throw std::invalid_argument("unknown regime '" + trim(v) + "'");
    c.regime = *k;
  };
  m["regime.eta"] = [](C& c, const std::string& v) { c.regime_eta = to_double(v); };
  m["regime.cycle"] = [](C& c, const std::string& v) { c.cycle = to_list(v); };
  m["regime.oracle_hi"] = [](C& c, const std::string& v) { c.oracle_hi = to_double(v); };
  m["regime.grid_step"] = [](C& c, const std::string& v) { c.grid_step = to_double(v); };

  const auto ill = [&m](const std::string& k, double scenarios::IllustrativeConfig::*f) {
    m["illustrative." + k] = [f](C& c, const std::string& v) { c.illustrative.*f = to_double(v); };
  };
  ill("epsilon", &scenarios::IllustrativeConfig::epsilon);
  ill("x1_min", &scenarios::IllustrativeConfig::x1_min);
  ill("x1_max", &scenarios::IllustrativeConfig::x1_max);
  ill("x2_min", &scenarios::IllustrativeConfig::x2_min);
  ill("x2_max", &scenarios::IllustrativeConfig::x2_max);
  ill("phi_w1", &scenarios::IllustrativeConfig::phi_w1);
  ill("phi_c1", &scenarios::IllustrativeConfig::phi_c1);
  ill("phi_w2", &scenarios::IllustrativeConfig::phi_w2);
  ill("phi_c2", &scenarios::IllustrativeConfig::phi_c2);
  ill("y0", &scenarios::IllustrativeConfig::y0);
  m["illustrative.induced_map"] = [](C& c, const std::string& v) {
    const std::string t = trim(v);
    if (t == "derived") c.illustrative.induced_map = scenarios::InducedMap::kDerived;
    else if (t == "published") c.illustrative.induced_map = scenarios::InducedMap::kPublished;
    else throw std::invalid_argument("induced_map must be 'derived' or 'published'");
  };

  m["testbed.pairs"] = [](C& c, const std::string& v) { c.testbed.pairs = static_cast<int>(to_long(v)); };
  m["testbed.box"] = [](C& c, const std::string& v) { c.testbed.box = to_double(v); };
  m["testbed.shift"] = [](C& c, const std::string& v) { c.testbed.shift = to_double(v); };
  m["testbed.y0"] = [](C& c, const std::string& v) { c.testbed.y0 = to_double(v); };

  m["energy.nodes"] = [](C& c, const std::string& v) { c.energy.nodes = static_cast<int>(to_long(v)); };
  m["energy.hours"] = [](C& c, const std::string& v) { c.energy.hours = static_cast<int>(to_long(v)); };
  m["energy.lines"] = [](C& c, const std::string& v) {
    c.energy.lines.clear();
    for (const auto& r : to_rows(v)) {
      if (r.size() != 4) throw std::invalid_argument("each line needs: from to susceptance limit");
      c.energy.lines.push_back({static_cast<int>(r[0]), static_cast<int>(r[1]), r[2], r[3]});
    }
  };
  m["energy.partners"] = [](C& c, const std::string& v) {
    c.energy.partners.clear();
    for (const auto& r : to_rows(v)) {
      if (r.size() != 2) throw std::invalid_argument("each trading pair needs two nodes");
      c.energy.partners.emplace_back(static_cast<int>(r[0]), static_cast<int>(r[1]));
    }
  };
  m["energy.demand"] = [](C& c, const std::string& v) { c.energy.demand = to_rows(v); };
  const auto evec = [&m](const std::string& k, std::vector<double> scenarios::EnergyConfig::*f) {
    m["energy." + k] = [f](C& c, const std::string& v) { c.energy.*f = to_list(v); };
  };
  evec("gen_cost", &scenarios::EnergyConfig::gen_cost);
  evec("gen_max", &scenarios::EnergyConfig::gen_max);
  evec("grid_max", &scenarios::EnergyConfig::grid_max);
  evec("storage_max", &scenarios::EnergyConfig::storage_max);
  evec("tariff", &scenarios::EnergyConfig::tariff);
  evec("price_ref", &scenarios::EnergyConfig::price_ref);
  evec("y0", &scenarios::EnergyConfig::y0);
  const auto enum_ = [&m](const std::string& k, double scenarios::EnergyConfig::*f) {
    m["energy." + k] = [f](C& c, const std::string& v) { c.energy.*f = to_double(v); };
  };
  enum_("trade_max", &scenarios::EnergyConfig::trade_max);
  enum_("trade_quadratic", &scenarios::EnergyConfig::trade_quadratic);
  enum_("grid_price_slope", &scenarios::EnergyConfig::grid_price_slope);
  enum_("grid_price_base", &scenarios::EnergyConfig::grid_price_base);
  enum_("penalty", &scenarios::EnergyConfig::penalty);
  enum_("theta_ref", &scenarios::EnergyConfig::theta_ref);
  enum_("theta_max", &scenarios::EnergyConfig::theta_max);
  return m;
}

void flatten(const nlohmann::json& j, const std::string& prefix,
             std::map<std::string, std::string>& out) {
  const auto scalar = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
      return buf;
    }
    throw std::invalid_argument("unsupported JSON value");
  };
  const auto row = [&](const nlohmann::json& a) {
    std::string s;
    for (const auto& e : a) s += (s.empty() ? "" : " ") + scalar(e);
    return s;
  };
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    std::string s;
    for (const auto& e : j) {
      if (e.is_array()) s += (s.empty() ? "" : "; ") + row(e);
      else s += (s.empty() ? "" : " ") + scalar(e);
    }
    out[prefix] = s;
  } else {
    out[prefix] = scalar(j);
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::kIllustrative: return "illustrative";
    case Scenario::kTestbed: return "testbed";
    case Scenario::kEnergy: return "energy";
  }
  return "?";
}

std::vector<std::string> known_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

std::map<std::string, std::string> read_flat(const std::string& text, bool json) {
  std::map<std::string, std::string> out;
  if (json) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError({std::string("malformed JSON: ") + e.what()});
    }
    if (!j.is_object()) throw ConfigError({"top-level JSON value must be an object"});
    flatten(j, "", out);
    return out;
  }
  std::vector<std::string> errors;
  std::string section;
  std::istringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back("line " + std::to_string(lineno) + ": unterminated section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = (section.empty() ? "" : section + ".") + trim(line.substr(0, eq));
    if (!out.emplace(key, trim(line.substr(eq + 1))).second)
      errors.push_back("duplicate key '" + key + "'");
  }
  if (!errors.empty()) throw ConfigError(errors);
  return out;
}

ExperimentConfig parse_config_text(const std::string& text, bool json) {
  const auto flat = read_flat(text, json);
  const auto table = setters();
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  if (!flat.count("scenario")) errors.push_back("missing required field 'scenario'");
  for (const auto& [key, value] : flat) {
    const auto it = table.find(key);
    if (it == table.end()) {
      errors.push_back("unknown key '" + key + "'");
      continue;
    }
    try {
      it->second(cfg, value);
    } catch (const std::exception& e) {
      errors.push_back(key + ": " + e.what());
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
  validate(cfg);
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  return parse_config_text(text, first != std::string::npos && text[first] == '{');
}

void validate(const ExperimentConfig& c) {
  std::vector<std::string> errors;
  if (c.iterations < 1) errors.push_back("iterations: K must be >= 1");
  if (c.replicates < 1) errors.push_back("replicates: R must be >= 1");
  if (c.name.empty()) errors.push_back("name must not be empty");
  if (c.out.empty()) errors.push_back("out must not be empty");
  if (c.fd_step && !(*c.fd_step > 0)) errors.push_back("fd_step must be positive");

  std::optional<double> smoothness;
  if (c.scenario == Scenario::kTestbed) {
    try {
      smoothness = scenarios::build_monotone_testbed(c.testbed).leader().meta.induced_smoothness;
    } catch (const std::exception& e) {
      errors.push_back(std::string("testbed: ") + e.what());
    }
  }
  if (c.scenario != Scenario::kIllustrative) {
    try {
      auto s = c.schedule;
      s.m = c.scenario == Scenario::kEnergy ? c.energy.hours : 1;
      s.validate(smoothness);
    } catch (const std::exception& e) {
      errors.push_back(std::string("schedule: ") + e.what());
    }
    if (!(c.inner_tol.base > 0) || !(c.inner_tol.scale > 0) || !(c.inner_tol.floor > 0))
      errors.push_back("inner: tolerance parameters must be positive");
    if (c.inner_tol.floor > c.inner_tol.base)
      errors.push_back("inner: tol_floor must not exceed tol_base");
    if (c.inner.max_iterations < 1) errors.push_back("inner: max_iterations must be >= 1");
    if (c.inner.step && !(*c.inner.step > 0)) errors.push_back("inner: step must be positive");
    if (c.inner.lipschitz_probes < 1) errors.push_back("inner: lipschitz_probes must be >= 1");
  } else if (!(c.schedule.alpha > 0.5)) {
    errors.push_back("schedule: alpha must exceed 0.5");
  }

  if (c.scenario == Scenario::kIllustrative) {
    if (!(c.regime_eta > 0)) errors.push_back("regime: eta must be positive");
    if (c.regime == scenarios::RegimeKind::kOscillating && c.cycle.empty())
      errors.push_back("regime: cycle must not be empty");
    if (!(c.grid_step > 0)) errors.push_back("regime: grid_step must be positive");
    if (!(c.oracle_hi > -c.illustrative.epsilon))
      errors.push_back("regime: oracle_hi must exceed -epsilon");
    if (!(c.illustrative.y0 + c.illustrative.epsilon > 0))
      errors.push_back("illustrative: y0 + epsilon must be positive");
    try {
      scenarios::build_illustrative(c.illustrative);
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
  }
  if (c.scenario == Scenario::kEnergy) {
    try {
      scenarios::validate_energy_config(c.energy);
    } catch (const std::exception& e) {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty()) throw ConfigError(errors);
}

}  // namespace stackseek::experiment
