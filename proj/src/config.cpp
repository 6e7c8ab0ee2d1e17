#include "nru/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nru/channel.hpp"
#include "nru/error.hpp"

namespace nru {

namespace {

const std::map<std::string, Mode> kModes = {{"analytic", Mode::analytic},
                                            {"simulate", Mode::simulate},
                                            {"optimize", Mode::optimize},
                                            {"compare-baselines", Mode::compare_baselines}};

const std::map<std::string, SweepAxis> kAxes = {{"none", SweepAxis::none},
                                                {"N_k", SweepAxis::N_k},
                                                {"payload", SweepAxis::payload},
                                                {"MCOT", SweepAxis::MCOT},
                                                {"P_dk_max", SweepAxis::P_dk_max}};

const std::map<std::string, Method> kMethods = {{"proposed", Method::proposed},
                                                {"ETEP", Method::ETEP},
                                                {"ETOP", Method::ETOP},
                                                {"OTEP", Method::OTEP},
                                                {"Cat4-LBT", Method::cat4_lbt},
                                                {"COT-adjust", Method::cot_adjust}};

template <typename E>
std::string name_of(const std::map<std::string, E>& m, E v) {
  for (const auto& [k, e] : m)
    if (e == v) return k;
  return "?";
}

template <typename E>
E lookup(const std::map<std::string, E>& m, const std::string& s, const char* what) {
  auto it = m.find(s);
  if (it != m.end()) return it->second;
  std::string options;
  for (const auto& kv : m) options += (options.empty() ? "" : ", ") + kv.first;
  throw ConfigError(std::string("unknown ") + what + " '" + s + "' (expected one of: " + options + ")");
}

class Reader {
public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& key, const std::string& msg) const {
    std::ostringstream os;
    os << origin_;
    if (n.Mark().line >= 0) os << ":" << n.Mark().line + 1;
    os << ": " << key << ": " << msg;
    throw ConfigError(os.str());
  }

  template <typename T>
  T as(const YAML::Node& n, const std::string& key) const {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, key, std::string("expected ") + type_name<T>());
    }
  }

  double positive(const YAML::Node& n, const std::string& key) const {
    double v = as<double>(n, key);
    if (!(v > 0) || !std::isfinite(v)) fail(n, key, "must be a finite value > 0");
    return v;
  }

  int at_least(const YAML::Node& n, const std::string& key, int lo) const {
    int v = as<int>(n, key);
    if (v < lo) fail(n, key, "must be >= " + std::to_string(lo));
    return v;
  }

  // Calls the handler registered for every key; unknown keys are errors.
  void each(const YAML::Node& map, const std::string& path,
            const std::map<std::string, std::function<void(const YAML::Node&, const std::string&)>>& handlers) const {
    if (!map.IsMap()) fail(map, path.empty() ? "document" : path, "expected a mapping");
    for (const auto& kv : map) {
      const std::string key = as<std::string>(kv.first, path);
      const std::string full = path.empty() ? key : path + "." + key;
      auto it = handlers.find(key);
      if (it == handlers.end()) fail(kv.first, full, "unknown key");
      try {
        it->second(kv.second, full);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        fail(kv.second, full, e.what());
      }
    }
  }

private:
  template <typename T>
  static const char* type_name() {
    if constexpr (std::is_same_v<T, int>) return "an integer";
    if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, std::int64_t>) return "an integer";
    if constexpr (std::is_same_v<T, double>) return "a number";
    if constexpr (std::is_same_v<T, bool>) return "true or false";
    return "a string";
  }

  std::string origin_;
};

using Handlers = std::map<std::string, std::function<void(const YAML::Node&, const std::string&)>>;

}  // namespace

std::string to_string(Mode m) { return name_of(kModes, m); }
std::string to_string(SweepAxis a) { return name_of(kAxes, a); }
std::string to_string(Method m) { return name_of(kMethods, m); }
Mode mode_from_string(const std::string& s) { return lookup(kModes, s, "mode"); }
SweepAxis axis_from_string(const std::string& s) { return lookup(kAxes, s, "sweep axis"); }
Method method_from_string(const std::string& s) { return lookup(kMethods, s, "method"); }

std::vector<Method> default_methods(Mode m) {
  switch (m) {
    case Mode::analytic:
    case Mode::simulate:
      return {Method::proposed, Method::cat4_lbt, Method::cot_adjust};
    case Mode::optimize:
      return {Method::proposed};
    case Mode::compare_baselines:
      return {Method::proposed, Method::ETOP, Method::OTEP, Method::ETEP};
  }
  return {};
}

double sweep_to_si(SweepAxis axis, double v) {
  switch (axis) {
    case SweepAxis::payload: return 8 * v;
    case SweepAxis::MCOT: return v * 1e-3;
    case SweepAxis::P_dk_max: return dbm_to_watts(v);
    default: return v;
  }
}

double sweep_from_si(SweepAxis axis, double v) {
  switch (axis) {
    case SweepAxis::payload: return v / 8;
    case SweepAxis::MCOT: return v * 1e3;
    case SweepAxis::P_dk_max: return watts_to_dbm(v);
    default: return v;
  }
}

std::string check_sweep_value(SweepAxis axis, double v) {
  std::ostringstream os;
  switch (axis) {
    case SweepAxis::N_k:
      if (v != std::floor(v) || v < 1 || v > 64) os << "N_k = " << v << " outside the integers 1..64";
      break;
    case SweepAxis::payload:
      if (!(v >= 800 && v <= 4096 * 8)) os << "payload = " << v / 8 << " bytes outside [100, 4096]";
      break;
    case SweepAxis::MCOT: {
      bool ok = false;
      for (double m : {2e-3, 3e-3, 8e-3, 10e-3}) ok = ok || std::abs(v - m) < 1e-12;
      if (!ok) os << "MCOT = " << v * 1e3 << " ms not one of 2, 3, 8, 10 ms";
      break;
    }
    case SweepAxis::P_dk_max:
      if (!(v > 0) || !std::isfinite(v)) os << "P_dk_max must be a finite power";
      break;
    case SweepAxis::none:
      break;
  }
  return os.str();
}

SweepConfig parse_sweep(const std::string& spec) {
  SweepConfig sw;
  auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("--sweep: expected axis=v1,v2,... got '" + spec + "'");
  sw.axis = axis_from_string(spec.substr(0, eq));
  std::stringstream list(spec.substr(eq + 1));
  std::string item;
  while (std::getline(list, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ConfigError("--sweep: '" + item + "' is not a number");
    sw.values.push_back(sweep_to_si(sw.axis, v));
  }
  if (sw.axis != SweepAxis::none && sw.values.empty()) throw ConfigError("--sweep: no values");
  for (double v : sw.values)
    if (auto msg = check_sweep_value(sw.axis, v); !msg.empty()) throw ConfigError("--sweep: " + msg);
  return sw;
}

void ExperimentConfig::validate() const {
  wifi.validate();
  nru.validate();
  if (net.N_k < 1 || net.N_k > 64) throw ConfigError("network.N_k must be in 1..64");
  if (net.K < 1) throw ConfigError("network.K must be >= 1");
  if (net.D < 0 || net.U < 0 || net.D + net.U < 1) throw ConfigError("network: need D + U >= 1 users");
  if (!(net.d_min >= 10 && net.d_max >= net.d_min && net.d_max <= 5000))
    throw ConfigError("network.distance_m must satisfy 10 <= min <= max <= 5000");
  if (!(wifi.payload_mean >= 800 && wifi.payload_mean <= 4096 * 8))
    throw ConfigError("wifi.payload_bytes must be in [100, 4096]");
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  if (sim_slots < 1) throw ConfigError("simulation.slots must be >= 1");
  if (rng != "mt19937_64") throw ConfigError("rng must be mt19937_64");
  if (sweep.axis != SweepAxis::none && sweep.values.empty()) throw ConfigError("sweep.values is empty");
  for (double v : sweep.values)
    if (auto msg = check_sweep_value(sweep.axis, v); !msg.empty()) throw ConfigError("sweep: " + msg);
}

ExperimentConfig parse_config(const std::string& yaml_text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ExperimentConfig c;
  Reader r(origin);
  if (!root.IsDefined() || root.IsNull()) throw ConfigError(origin + ": empty config");

  auto us = [&](double& dst) { return [&, p = &dst](const YAML::Node& n, const std::string& k) { *p = r.positive(n, k) * 1e-6; }; };
  auto bits = [&](double& dst) { return [&, p = &dst](const YAML::Node& n, const std::string& k) { *p = r.positive(n, k); }; };
  auto dbm = [&](double& dst) {
    return [&, p = &dst](const YAML::Node& n, const std::string& k) {
      double v = r.as<double>(n, k);
      if (!std::isfinite(v)) r.fail(n, k, "must be finite");
      *p = dbm_to_watts(v);
    };
  };

  Handlers wifi = {
      {"W_w", [&](const YAML::Node& n, const std::string& k) { c.wifi.W_w = r.positive(n, k); }},
      {"m_w", [&](const YAML::Node& n, const std::string& k) { c.wifi.m_w = r.at_least(n, k, 1); }},
      {"T_sigma_us", us(c.wifi.T_sigma)},
      {"SIFS_us", us(c.wifi.SIFS)},
      {"DIFS_us", us(c.wifi.DIFS)},
      {"PIFS_us", us(c.wifi.PIFS)},
      {"delta_us", us(c.wifi.delta)},
      {"RTS_bits", bits(c.wifi.RTS)},
      {"CTS_bits", bits(c.wifi.CTS)},
      {"H_bits", bits(c.wifi.H)},
      {"ACK_bits", bits(c.wifi.ACK)},
      {"r_w_mbps", [&](const YAML::Node& n, const std::string& k) { c.wifi.r_w = r.positive(n, k) * 1e6; }},
      {"payload_bytes",
       [&](const YAML::Node& n, const std::string& k) {
         double v = r.positive(n, k);
         if (v < 100 || v > 4096) r.fail(n, k, "must be in [100, 4096]");
         c.wifi.payload_mean = 8 * v;
       }},
  };
  Handlers nru = {
      {"W_l", [&](const YAML::Node& n, const std::string& k) {
         c.nru.W_l = r.positive(n, k);
         if (c.nru.W_l < 1) r.fail(n, k, "must be >= 1");
       }},
      {"m_l", [&](const YAML::Node& n, const std::string& k) { c.nru.m_l = r.at_least(n, k, 1); }},
      {"L", [&](const YAML::Node& n, const std::string& k) { c.nru.L = r.at_least(n, k, 1); }},
      {"T_f_us", us(c.nru.T_f)},
      {"m_p", [&](const YAML::Node& n, const std::string& k) { c.nru.m_p = r.at_least(n, k, 0); }},
      {"MCOT_ms", [&](const YAML::Node& n, const std::string& k) { c.nru.MCOT = r.positive(n, k) * 1e-3; }},
      {"T_gnb_ms",
       [&](const YAML::Node& n, const std::string& k) {
         double v = r.as<double>(n, k);
         if (!(v >= 0)) r.fail(n, k, "must be >= 0");
         c.nru.T_gnb = v * 1e-3;
       }},
      {"priority_class",
       [&](const YAML::Node& n, const std::string& k) {
         int v = r.as<int>(n, k);
         if (v < 1 || v > 4) r.fail(n, k, "must be 1..4");
         c.nru.priority_class = v;
       }},
      {"access_model",
       [&](const YAML::Node& n, const std::string& k) {
         c.nru.model = gnb_access_model_from_string(r.as<std::string>(n, k));
       }},
      {"tune_window", [&](const YAML::Node& n, const std::string& k) { c.net.tune_window = r.as<bool>(n, k); }},
  };
  Handlers network = {
      {"N_k", [&](const YAML::Node& n, const std::string& k) { c.net.N_k = r.at_least(n, k, 1); }},
      {"K", [&](const YAML::Node& n, const std::string& k) { c.net.K = r.at_least(n, k, 1); }},
      {"D", [&](const YAML::Node& n, const std::string& k) { c.net.D = r.at_least(n, k, 0); }},
      {"U", [&](const YAML::Node& n, const std::string& k) { c.net.U = r.at_least(n, k, 0); }},
      {"bandwidth_mhz", [&](const YAML::Node& n, const std::string& k) { c.net.bandwidth = r.positive(n, k) * 1e6; }},
      {"distance_m",
       [&](const YAML::Node& n, const std::string& k) {
         if (!n.IsSequence() || n.size() != 2) r.fail(n, k, "expected [min, max]");
         c.net.d_min = r.positive(n[0], k);
         c.net.d_max = r.positive(n[1], k);
         if (c.net.d_min < 10 || c.net.d_max < c.net.d_min || c.net.d_max > 5000)
           r.fail(n, k, "must satisfy 10 <= min <= max <= 5000");
       }},
      {"fading", [&](const YAML::Node& n, const std::string& k) { c.net.fading = r.as<bool>(n, k); }},
      {"fairness", [&](const YAML::Node& n, const std::string& k) { c.net.fairness = r.as<bool>(n, k); }},
      {"P_avg_dbm", dbm(c.net.P_avg)},
      {"P_gnb_max_dbm", dbm(c.net.P_gnb_max)},
      {"P_dk_max_dbm", dbm(c.net.P_dk_max)},
  };
  Handlers simulation = {
      {"slots",
       [&](const YAML::Node& n, const std::string& k) {
         auto v = r.as<double>(n, k);
         if (!(v >= 1) || v != std::floor(v) || v > 1e12) r.fail(n, k, "must be a whole number >= 1");
         c.sim_slots = static_cast<std::int64_t>(v);
       }},
  };
  Handlers sweep = {
      {"axis", [&](const YAML::Node& n, const std::string& k) {
         try {
           c.sweep.axis = axis_from_string(r.as<std::string>(n, k));
         } catch (const ConfigError& e) {
           r.fail(n, k, e.what());
         }
       }},
      {"values", [&](const YAML::Node& n, const std::string& k) {
         if (!n.IsSequence() || n.size() == 0) r.fail(n, k, "expected a nonempty list");
         c.sweep.values.clear();
         for (const auto& v : n) c.sweep.values.push_back(r.as<double>(v, k));
       }},
  };
  Handlers top = {
      {"name", [&](const YAML::Node& n, const std::string& k) { c.name = r.as<std::string>(n, k); }},
      {"mode", [&](const YAML::Node& n, const std::string& k) {
         try {
           c.mode = mode_from_string(r.as<std::string>(n, k));
         } catch (const ConfigError& e) {
           r.fail(n, k, e.what());
         }
       }},
      {"methods", [&](const YAML::Node& n, const std::string& k) {
         if (!n.IsSequence()) r.fail(n, k, "expected a list");
         for (const auto& m : n) {
           try {
             c.methods.push_back(method_from_string(r.as<std::string>(m, k)));
           } catch (const ConfigError& e) {
             r.fail(m, k, e.what());
           }
         }
       }},
      {"seed", [&](const YAML::Node& n, const std::string& k) { c.seed = r.as<std::uint64_t>(n, k); }},
      {"replicates", [&](const YAML::Node& n, const std::string& k) { c.replicates = r.at_least(n, k, 1); }},
      {"rng", [&](const YAML::Node& n, const std::string& k) {
         c.rng = r.as<std::string>(n, k);
         if (c.rng != "mt19937_64") r.fail(n, k, "only mt19937_64 is supported");
       }},
      {"output", [&](const YAML::Node& n, const std::string& k) { c.output = r.as<std::string>(n, k); }},
      {"wifi", [&](const YAML::Node& n, const std::string& k) { r.each(n, k, wifi); }},
      {"nru", [&](const YAML::Node& n, const std::string& k) { r.each(n, k, nru); }},
      {"network", [&](const YAML::Node& n, const std::string& k) { r.each(n, k, network); }},
      {"simulation", [&](const YAML::Node& n, const std::string& k) { r.each(n, k, simulation); }},
      {"sweep", [&](const YAML::Node& n, const std::string& k) { r.each(n, k, sweep); }},
  };
  r.each(root, "", top);

  // sweep values arrive in config units
  for (double& v : c.sweep.values) v = sweep_to_si(c.sweep.axis, v);
  if (root["sweep"]) {
    const YAML::Node& s = root["sweep"];
    if (c.sweep.axis != SweepAxis::none && c.sweep.values.empty()) r.fail(s, "sweep.values", "missing");
    for (std::size_t i = 0; i < c.sweep.values.size(); ++i)
      if (auto msg = check_sweep_value(c.sweep.axis, c.sweep.values[i]); !msg.empty())
        r.fail(s["values"][i], "sweep.values", msg);
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace nru
