#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nru/params.hpp"

namespace nru {

enum class Mode { analytic, simulate, optimize, compare_baselines };
enum class SweepAxis { none, N_k, payload, MCOT, P_dk_max };
enum class Method { proposed, ETEP, ETOP, OTEP, cat4_lbt, cot_adjust };

std::string to_string(Mode m);
std::string to_string(SweepAxis a);
std::string to_string(Method m);
Mode mode_from_string(const std::string& s);
SweepAxis axis_from_string(const std::string& s);
Method method_from_string(const std::string& s);

// Methods a mode runs when the config does not list any.
std::vector<Method> default_methods(Mode m);

// Everything below is SI (s, W, bits, Hz). Config files carry units in the key
// names (MCOT_ms, P_avg_dbm, payload_bytes, ...) and are converted on load.
struct NetworkConfig {
  int N_k = 10;
  int K = 1;
  int D = 5;
  int U = 5;
  double bandwidth = 20e6;
  double d_min = 10, d_max = 2000;
  bool fading = true;
  double P_avg = 0.19952623149688797;    // 23 dBm
  double P_gnb_max = 3.1622776601683795;  // 35 dBm
  double P_dk_max = 0.19952623149688797;  // 23 dBm
  bool fairness = true;  // impose the throughput-fairness floor
  bool tune_window = true;  // proposed method runs at the airtime-equalizing window
};

struct SweepConfig {
  SweepAxis axis = SweepAxis::none;
  std::vector<double> values;  // SI
};

struct ExperimentConfig {
  std::string name = "experiment";
  Mode mode = Mode::analytic;
  std::vector<Method> methods;  // empty: default_methods(mode)
  WifiParams wifi;
  NruParams nru;
  NetworkConfig net;
  std::int64_t sim_slots = 1000000;
  SweepConfig sweep;
  int replicates = 1;
  std::uint64_t seed = 1;
  std::string rng = "mt19937_64";
  std::string output;

  void validate() const;
};

// Throws ConfigError naming the origin, line and key.
ExperimentConfig parse_config(const std::string& yaml_text, const std::string& origin = "<string>");
ExperimentConfig load_config(const std::string& path);

// "axis=v1,v2,..." with values in config units.
SweepConfig parse_sweep(const std::string& spec);

// Config units to SI for one sweep axis, and back.
double sweep_to_si(SweepAxis axis, double v);
double sweep_from_si(SweepAxis axis, double v);

// Range checks on one SI sweep value; empty when valid.
std::string check_sweep_value(SweepAxis axis, double v);

}  // namespace nru
