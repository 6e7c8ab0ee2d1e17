#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nru/params.hpp"

namespace nru {

enum class Outcome { idle = 0, wifi_success, gnb_success, wifi_collision, cross_collision };

enum class GnbPhase { icca, ecca };

struct NodeState {
  int stage = 0;
  std::int64_t counter = 0;
  std::int64_t window = 0;
};

struct GnbState {
  GnbPhase phase = GnbPhase::icca;
  int idle_run = 0;  // consecutive idle ICCA slots
  NodeState backoff;
};

struct SimOptions {
  bool gnb_enabled = true;
  // payload per WiFi node, bits; empty means wifi.payload_mean for everyone
  std::vector<double> payloads;
};

struct SimStats {
  int N_k = 0;
  std::int64_t slots = 0;
  std::array<std::int64_t, 5> counts{};  // indexed by Outcome
  std::array<double, 5> seconds{};       // time spent per outcome class
  double total_seconds = 0;
  std::vector<std::int64_t> node_successes;
  std::vector<double> node_airtime;  // successful airtime per WiFi node (s)
  double gnb_airtime = 0;
  double wifi_payload_bits = 0;  // delivered payload, all nodes
  std::int64_t wifi_attempts = 0, wifi_collisions = 0;
  std::int64_t gnb_attempts = 0, gnb_collisions = 0, gnb_drops = 0;

  double tau_w() const;
  double tau_l() const;
  double p_w() const;
  double p_l() const;
  double time_fraction(Outcome o) const;
  double mean_slot() const { return total_seconds / static_cast<double>(slots); }
};

// Slot-level Monte-Carlo run of N_k saturated WiFi nodes and one Cat-4 gNB.
SimStats simulate(const WifiParams& wifi, const NruParams& nru, int N_k, std::int64_t horizon_slots,
                  std::uint64_t seed, const SimOptions& opt = {});

struct EmpiricalThroughput {
  double wifi_bits_per_s = 0;
  double gnb_airtime_fraction = 0;
  double wifi_airtime_per_node = 0;
};

EmpiricalThroughput empirical_throughputs(const SimStats& stats, double payload);

}  // namespace nru
