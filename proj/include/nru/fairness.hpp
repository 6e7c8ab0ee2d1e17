#pragma once

#include "nru/access.hpp"
#include "nru/params.hpp"

namespace nru {

// Saturated n-node WiFi network without a gNB, using the series-form access
// probability. n = 0 is an empty network (nothing transmits).
struct WifiNetwork {
  int n = 0;
  double tau = 0, p = 0, P_tr = 0, P_s = 1;
};

WifiNetwork standalone_wifi(const WifiParams& wifi, int n);

// Throughput of a standalone network whose nodes all carry `payload` bits.
double standalone_throughput(const WifiParams& wifi, const WifiNetwork& net, double payload);

// Aggregate WiFi goodput while coexisting with the gNB.
double wifi_throughput(const AccessState& s, const SlotBreakdown& slots, int N_k, double payload);

struct VirtualWifiSystem {
  int N_u = 0;
  double nr_rate = 0;
  double payload_mean_virtual = 0;
  WifiNetwork access;
  double T_s_v = 0, T_c_v = 0;
};

// Payload that lets an N_u-node WiFi network carry nr_rate bits/s.
VirtualWifiSystem virtual_payload(double nr_rate, const WifiParams& wifi, int N_u);

struct HybridNetwork {
  int N_k = 0, N_u = 0;
  WifiNetwork access;
  double payload_mean_con = 0;
  double T_s_con = 0, T_c_con = 0;
  double R_con = 0;
};

// Real and virtual nodes merged into one (N_k + N_u)-node WiFi network.
HybridNetwork hybrid_rate(const WifiParams& wifi, int N_k, const VirtualWifiSystem& v);

// Real WiFi system's payload-weighted share of the hybrid rate.
double wifi_rate_under_virtual(const HybridNetwork& hybrid, int N_k, int N_u, double payload_k,
                               double payload_v);

struct FairnessThreshold {
  double phi = 0;
  double rate_floor = 0;
  double s_k = 0, Q = 0, Z = 0, Y = 0;
  bool vacuous = false;
};

// Threshold on R^D + R^U equivalent to "WiFi under NR >= WiFi under a virtual WiFi".
// It depends only on access quantities and payloads, never on the NR rate.
FairnessThreshold fairness_threshold(const AccessState& s, const SlotBreakdown& slots,
                                     const WifiParams& wifi, int N_k, int N_u);

struct FairnessCheck {
  double R_W = 0;        // WiFi throughput next to the gNB
  double R_virtual = 0;  // WiFi throughput next to the virtual WiFi system
  double payload_virtual = 0;
  bool virtual_unbounded = false;  // nr_rate >= r_w, the virtual payload diverges
  bool satisfied = false;
};

// Evaluates both sides of the throughput-fairness constraint at an NR rate.
// When nr_rate >= r_w the virtual payload is unbounded and R_virtual takes its limit 0.
FairnessCheck evaluate_fairness(const AccessState& s, const SlotBreakdown& slots,
                                const WifiParams& wifi, int N_k, int N_u, double nr_rate);

}  // namespace nru
