#include "nru/fairness.hpp"

#include <cmath>
#include <limits>

#include "nru/error.hpp"
#include "nru/numerics.hpp"

namespace nru {

WifiNetwork standalone_wifi(const WifiParams& wifi, int n) {
  if (n < 0) throw DomainError("node count must be >= 0");
  WifiNetwork net;
  net.n = n;
  if (n == 0) return net;
  auto coll = [n](double tau) { return 1.0 - std::pow(1.0 - tau, n - 1); };
  // tau - f(p(tau)) is increasing: f falls with p and p rises with tau
  auto g = [&](double tau) { return tau - wifi_tau(coll(tau), wifi.W_w, wifi.m_w); };
  double tau = bisect(g, 0.0, 1.0, 1e-17, 2000);
  net.p = coll(tau);
  net.tau = wifi_tau(net.p, wifi.W_w, wifi.m_w);
  net.P_tr = 1.0 - std::pow(1.0 - net.tau, n);
  net.P_s = net.P_tr > 0 ? n * net.tau * std::pow(1.0 - net.tau, n - 1) / net.P_tr : 1.0;
  return net;
}

namespace {

// Mean time of a virtual slot that is not a success, (1-P_tr) T_sigma + P_tr (1-P_s) T_c.
double overhead_time(const WifiParams& wifi, const WifiNetwork& net) {
  return (1.0 - net.P_tr) * wifi.T_sigma + net.P_tr * (1.0 - net.P_s) * wifi.collision_duration();
}

}  // namespace

double standalone_throughput(const WifiParams& wifi, const WifiNetwork& net, double payload) {
  if (net.n == 0) return 0.0;
  double b = net.P_tr * net.P_s;
  return b * payload / (overhead_time(wifi, net) + b * wifi.success_duration(payload));
}

double wifi_throughput(const AccessState& s, const SlotBreakdown& slots, int N_k, double payload) {
  return N_k * s.tau_w * std::pow(1.0 - s.tau_w, N_k - 1) * (1.0 - s.tau_l) * payload / slots.t_slot;
}

VirtualWifiSystem virtual_payload(double nr_rate, const WifiParams& wifi, int N_u) {
  if (!(nr_rate >= 0)) throw DomainError("nr_rate must be >= 0");
  if (nr_rate >= wifi.r_w)
    throw InfeasibleError("virtual WiFi system cannot carry an NR rate >= r_w");
  VirtualWifiSystem v;
  v.N_u = N_u;
  v.nr_rate = nr_rate;
  v.access = standalone_wifi(wifi, N_u);
  v.T_c_v = wifi.collision_duration();
  if (N_u == 0 || nr_rate == 0) {
    v.payload_mean_virtual = 0;
  } else {
    double b = v.access.P_tr * v.access.P_s;
    double Y = wifi.handshake_overhead();
    v.payload_mean_virtual =
        (overhead_time(wifi, v.access) + Y * b) * wifi.r_w * nr_rate / (b * (wifi.r_w - nr_rate));
  }
  v.T_s_v = wifi.success_duration(v.payload_mean_virtual);
  return v;
}

HybridNetwork hybrid_rate(const WifiParams& wifi, int N_k, const VirtualWifiSystem& v) {
  if (N_k < 1) throw DomainError("N_k must be >= 1");
  HybridNetwork h;
  h.N_k = N_k;
  h.N_u = v.N_u;
  h.access = standalone_wifi(wifi, N_k + v.N_u);
  h.payload_mean_con =
      (N_k * wifi.payload_mean + v.N_u * v.payload_mean_virtual) / static_cast<double>(N_k + v.N_u);
  h.T_s_con = wifi.success_duration(h.payload_mean_con);
  h.T_c_con = wifi.collision_duration();
  h.R_con = standalone_throughput(wifi, h.access, h.payload_mean_con);
  return h;
}

double wifi_rate_under_virtual(const HybridNetwork& hybrid, int N_k, int N_u, double payload_k,
                               double payload_v) {
  double real = N_k * payload_k;
  return real * hybrid.R_con / (real + N_u * payload_v);
}

FairnessThreshold fairness_threshold(const AccessState& s, const SlotBreakdown& slots,
                                     const WifiParams& wifi, int N_k, int N_u) {
  FairnessThreshold f;
  f.Y = wifi.handshake_overhead();
  f.Z = slots.t_slot / (s.tau_w * std::pow(1.0 - s.tau_w, N_k - 1) * (1.0 - s.tau_l));
  WifiNetwork con = standalone_wifi(wifi, N_k + N_u);
  f.Q = overhead_time(wifi, con) / (con.P_tr * con.P_s);
  if (N_u == 0) {
    // no NR users to replace, the constraint says nothing
    f.vacuous = true;
    f.phi = -std::numeric_limits<double>::infinity();
    f.rate_floor = 0;
    return f;
  }
  WifiNetwork virt = standalone_wifi(wifi, N_u);
  double b = virt.P_tr * virt.P_s;
  f.s_k = (overhead_time(wifi, virt) + f.Y * b) * wifi.r_w / b;
  f.phi = (wifi.r_w * f.Z - wifi.r_w * (N_k + N_u) * (f.Q + f.Y) - N_k * wifi.payload_mean) /
          (N_u * f.s_k);
  // phi <= 0 puts the floor at or below zero, which every rate meets
  if (f.phi <= 0) {
    f.vacuous = true;
    f.rate_floor = 0;
  } else {
    f.rate_floor = f.phi * wifi.r_w / (1.0 + f.phi);
  }
  return f;
}

FairnessCheck evaluate_fairness(const AccessState& s, const SlotBreakdown& slots,
                                const WifiParams& wifi, int N_k, int N_u, double nr_rate) {
  FairnessCheck c;
  c.R_W = wifi_throughput(s, slots, N_k, wifi.payload_mean);
  if (nr_rate >= wifi.r_w) {
    c.virtual_unbounded = true;
    c.payload_virtual = std::numeric_limits<double>::infinity();
    c.R_virtual = 0;
  } else {
    VirtualWifiSystem v = virtual_payload(nr_rate, wifi, N_u);
    HybridNetwork h = hybrid_rate(wifi, N_k, v);
    c.payload_virtual = v.payload_mean_virtual;
    c.R_virtual = wifi_rate_under_virtual(h, N_k, N_u, wifi.payload_mean, v.payload_mean_virtual);
  }
  c.satisfied = c.R_W >= c.R_virtual;
  return c;
}

}  // namespace nru
