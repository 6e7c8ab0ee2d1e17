#pragma once

#include <array>
#include <cmath>

#include "nru/params.hpp"

namespace nru {

// Per-node WiFi access probability for conditional collision probability p,
// in the series form 2 / (1 + W + p W sum_{t<m} (2p)^t). It equals the
// closed form below everywhere and has no removable singularity at p = 1/2.
template <typename Scalar>
Scalar wifi_tau(Scalar p, Scalar W, int m) {
  Scalar sum = 0;
  Scalar term = 1;
  for (int t = 0; t < m; ++t) {
    sum += term;
    term *= Scalar(2) * p;
  }
  return Scalar(2) / (Scalar(1) + W + p * W * sum);
}

// 2(1-2p) / ((1-2p)(W+1) + p W (1 - (2p)^m)), singular (0/0) at p = 1/2.
template <typename Scalar>
Scalar wifi_tau_closed(Scalar p, Scalar W, int m) {
  using std::pow;
  Scalar a = Scalar(1) - Scalar(2) * p;
  return Scalar(2) * a / (a * (W + Scalar(1)) + p * W * (Scalar(1) - pow(Scalar(2) * p, m)));
}

// gNB access probability exactly as published, including the H1 term
// 2pW[1 - 2(2p)^(m-1)]. It has a pole near p = 0.458 and is negative just above it.
template <typename Scalar>
Scalar gnb_tau_published(Scalar p, Scalar W, int m, int L) {
  using std::pow;
  Scalar A = pow(Scalar(1) - p, L);
  Scalar num = Scalar(2) * p * (Scalar(1) - Scalar(2) * p) * (Scalar(1) + A);
  Scalar H1 = (Scalar(2) * W + Scalar(1)) * (Scalar(1) - Scalar(2) * p) +
              Scalar(2) * p * W * (Scalar(1) - Scalar(2) * pow(Scalar(2) * p, m - 1));
  Scalar den = (Scalar(2) - Scalar(2) * A) * (Scalar(1) - Scalar(3) * p + Scalar(2) * p * p) + p * H1;
  return num / den;
}

// Renewal-reward access probability of the ICCA/ECCA procedure: L idle slots then
// transmit; a busy ICCA slot enters ECCA stage 0; a collision moves one stage up
// (ICCA collision to stage 1); a collision at stage m-1 drops the packet.
// tau = expected transmissions / expected slots per packet.
template <typename Scalar>
Scalar gnb_tau_renewal(Scalar p, Scalar W, int m, int L) {
  using std::expm1;
  using std::log1p;
  using std::pow;
  Scalar A = pow(Scalar(1) - p, L);
  // expected ICCA slots until either L idle slots or the first busy one
  Scalar S_I = p > Scalar(0) ? (p < Scalar(1) ? -expm1(Scalar(L) * log1p(-p)) / p : Scalar(1))
                             : Scalar(L);
  auto E = [&](int s) {
    Scalar acc = 0;
    Scalar w = 1;
    for (int i = s; i < m; ++i) {
      acc += w * (std::ldexp(W, i) + Scalar(1)) / Scalar(2);
      w *= p;
    }
    return acc;
  };
  auto T = [&](int s) {
    Scalar acc = 0;
    Scalar w = 1;
    for (int i = s; i < m; ++i) {
      acc += w;
      w *= p;
    }
    return acc;
  };
  Scalar slots = S_I + A * (Scalar(1) + p * E(1)) + (Scalar(1) - A) * E(0);
  Scalar tx = A * (Scalar(1) + p * T(1)) + (Scalar(1) - A) * T(0);
  return tx / slots;
}

// gNB access probability under the configured model. The published form is
// a 0/0 at p = 0; it is evaluated at max(p, 1e-12) and at 1e-9 below that.
double gnb_tau(double p_l, const NruParams& nru);

struct AccessState {
  double tau_w = 0, tau_l = 0, p_w = 0, p_l = 0;
  double P_tr_w = 0, P_s_w = 1, P_tr_l = 0, P_s_l = 1;
  int iterations = 0;
  bool used_bisection = false;
};

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 100000;
  double damping = 0.5;
  bool gnb_silent = false;  // pins tau_l = 0
};

AccessState solve_access_fixed_point(const WifiParams& wifi, const NruParams& nru, int N_k,
                                     const SolverOptions& opt = {});

AccessState tx_probabilities(AccessState s, int N_k);

// |tau_w - f1(p_w)|, |p_w - coll_w|, |tau_l - f4(p_l)|, |p_l - coll_l|
std::array<double, 4> access_residuals(const AccessState& s, const WifiParams& wifi,
                                       const NruParams& nru, int N_k, bool gnb_silent = false);

struct SlotBreakdown {
  double t_idle = 0, t_succ_wifi = 0, t_succ_gnb = 0, t_coll_wifi = 0, t_coll_cross = 0;
  double t_slot = 0;
  double T_sigma = 0, T_s_w = 0, T_s_l = 0, T_c_w = 0, T_c_l = 0, T_lw = 0;
  // probabilities of the five outcome classes in a virtual slot
  std::array<double, 5> prob{};
};

SlotBreakdown slot_breakdown(const AccessState& s, const WifiParams& wifi, const NruParams& nru,
                             int N_k);

struct AirtimeRatios {
  double r_gnb = 0;
  double r_wifi_per_node = 0;
};

AirtimeRatios airtime_ratios(const AccessState& s, const SlotBreakdown& slots, int N_k);

// gNB successful transmissions per second, tau_l (1-tau_w)^N / t_slot.
double nr_access_factor(const AccessState& s, const SlotBreakdown& slots, int N_k);

struct WindowResult {
  double W_star = 0;       // real-valued root
  long W_rounded = 0;      // nearest integer
  int W_in_class = 0;      // nearest window of the priority class set
  bool in_class = false;
  bool at_boundary = false;  // equality unattainable inside [1, 2^16]
  double imbalance = 0;      // (r_gnb - r_wifi) / r_wifi at W_star
  AccessState state;
};

inline constexpr double kWindowMax = 65536.0;

WindowResult optimal_initial_window(const WifiParams& wifi, const NruParams& nru, int N_k,
                                    const SolverOptions& opt = {});

struct CotAdjustResult {
  double cot = 0;  // shortened channel occupancy (s)
  NruParams nru;
  AccessState state;
};

// Cat-4 window, channel occupancy shortened until the gNB's airtime equals the
// whole WiFi system's airtime.
CotAdjustResult cot_adjust(const WifiParams& wifi, const NruParams& nru, int N_k,
                           const SolverOptions& opt = {});

}  // namespace nru
