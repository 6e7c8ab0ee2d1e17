#include "nru/access.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nru/error.hpp"
#include "nru/numerics.hpp"

namespace nru {

double gnb_tau(double p_l, const NruParams& nru) {
  if (nru.model == GnbAccessModel::renewal)
    return gnb_tau_renewal(std::clamp(p_l, 0.0, 1.0), nru.W_l, nru.m_l, nru.L);
  double p = std::max(p_l, 1e-12);
  if (p < 1e-9) p = 1e-9;
  return gnb_tau_published(p, nru.W_l, nru.m_l, nru.L);
}

namespace {

double collision_wifi(double tau_w, double tau_l, int N) {
  return 1.0 - std::pow(1.0 - tau_w, N - 1) * (1.0 - tau_l);
}

double collision_gnb(double tau_w, int N) { return 1.0 - std::pow(1.0 - tau_w, N); }

void check_gnb_tau(double tau_l, double p_l) {
  if (!(tau_l >= 0.0 && tau_l <= 1.0)) {
    std::ostringstream os;
    os << "gNB access probability " << tau_l << " outside [0,1] at p_l = " << p_l
       << " (the published formula has a pole near p_l = 0.458)";
    throw DomainError(os.str());
  }
}

}  // namespace

AccessState tx_probabilities(AccessState s, int N_k) {
  s.P_tr_w = 1.0 - std::pow(1.0 - s.tau_w, N_k);
  s.P_s_w = s.P_tr_w > 0 ? std::min(1.0, N_k * s.tau_w * std::pow(1.0 - s.tau_w, N_k - 1) / s.P_tr_w) : 1.0;
  s.P_tr_l = s.tau_l;
  s.P_s_l = 1.0;
  return s;
}

AccessState solve_access_fixed_point(const WifiParams& wifi, const NruParams& nru, int N_k,
                                     const SolverOptions& opt) {
  if (N_k < 1) throw DomainError("N_k must be >= 1");
  wifi.validate();
  nru.validate();

  auto f1 = [&](double p) { return wifi_tau(p, wifi.W_w, wifi.m_w); };
  auto f4 = [&](double p) {
    if (opt.gnb_silent) return 0.0;
    double t = gnb_tau(p, nru);
    check_gnb_tau(t, p);
    return t;
  };

  AccessState s;
  double pw = 0.1, pl = 0.1;
  double res = 1.0;
  std::array<double, 4> last{};
  // Switch to bisection when the damped map stalls instead of contracting.
  const int stall_check = std::min(opt.max_iter, 5000);
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    double tw = f1(pw);
    double tl = f4(pl);
    double npw = collision_wifi(tw, tl, N_k);
    double npl = collision_gnb(tw, N_k);
    last = {0.0, std::abs(npw - pw), 0.0, std::abs(npl - pl)};
    res = std::max(last[1], last[3]);
    if (res < opt.tol) {
      // one undamped step so that tau is evaluated at the latest collision estimate
      s.p_w = npw;
      s.p_l = npl;
      s.tau_w = f1(npw);
      s.tau_l = f4(npl);
      s.iterations = it + 1;
      return tx_probabilities(s, N_k);
    }
    if (it == stall_check) break;
    pw += opt.damping * (npw - pw);
    pl += opt.damping * (npl - pl);
  }

  // g(tau_w) = tau_w - f1(p_w(tau_w)) is negative at 0 and non-negative at f1(0).
  auto g = [&](double tw) {
    double tl = f4(collision_gnb(tw, N_k));
    return tw - f1(collision_wifi(tw, tl, N_k));
  };
  double tw = bisect(g, 0.0, f1(0.0), 1e-17, 2000);
  double pl_b = collision_gnb(tw, N_k);
  double tl = f4(pl_b);
  double pw_b = collision_wifi(tw, tl, N_k);
  s.tau_w = f1(pw_b);
  s.tau_l = tl;
  s.p_w = pw_b;
  s.p_l = pl_b;
  s.iterations = it + 1;
  s.used_bisection = true;
  auto r = access_residuals(s, wifi, nru, N_k, opt.gnb_silent);
  if (*std::max_element(r.begin(), r.end()) >= opt.tol)
    throw ConvergenceError("access fixed point did not converge", r, s.iterations);
  return tx_probabilities(s, N_k);
}

std::array<double, 4> access_residuals(const AccessState& s, const WifiParams& wifi,
                                       const NruParams& nru, int N_k, bool gnb_silent) {
  double f4 = gnb_silent ? 0.0 : gnb_tau(s.p_l, nru);
  return {std::abs(s.tau_w - wifi_tau(s.p_w, wifi.W_w, wifi.m_w)),
          std::abs(s.p_w - collision_wifi(s.tau_w, s.tau_l, N_k)), std::abs(s.tau_l - f4),
          std::abs(s.p_l - collision_gnb(s.tau_w, N_k))};
}

SlotBreakdown slot_breakdown(const AccessState& s, const WifiParams& wifi, const NruParams& nru,
                             int N_k) {
  SlotBreakdown b;
  b.T_sigma = wifi.T_sigma;
  b.T_s_w = wifi.success_duration();
  b.T_c_w = wifi.collision_duration();
  b.T_s_l = nru.occupancy();
  b.T_c_l = nru.occupancy();
  b.T_lw = std::max(b.T_c_w, b.T_c_l);

  const double none = std::pow(1.0 - s.tau_w, N_k);
  const double one = N_k * s.tau_w * std::pow(1.0 - s.tau_w, N_k - 1);
  b.prob = {(1.0 - s.tau_l) * none, one * (1.0 - s.tau_l), s.tau_l * none,
            std::max(0.0, 1.0 - none - one) * (1.0 - s.tau_l), s.tau_l * (1.0 - none)};
  b.t_idle = b.prob[0] * b.T_sigma;
  b.t_succ_wifi = b.prob[1] * b.T_s_w;
  b.t_succ_gnb = b.prob[2] * b.T_s_l;
  b.t_coll_wifi = b.prob[3] * b.T_c_w;
  b.t_coll_cross = b.prob[4] * b.T_lw;
  b.t_slot = b.t_idle + b.t_succ_wifi + b.t_succ_gnb + b.t_coll_wifi + b.t_coll_cross;
  return b;
}

AirtimeRatios airtime_ratios(const AccessState& s, const SlotBreakdown& slots, int N_k) {
  AirtimeRatios r;
  r.r_gnb = s.P_s_l * s.P_tr_l * (1.0 - s.P_tr_w) * slots.T_s_l / slots.t_slot;
  r.r_wifi_per_node = s.P_s_w * s.P_tr_w * (1.0 - s.P_tr_l) * slots.T_s_w / (slots.t_slot * N_k);
  return r;
}

double nr_access_factor(const AccessState& s, const SlotBreakdown& slots, int N_k) {
  return s.tau_l * std::pow(1.0 - s.tau_w, N_k) / slots.t_slot;
}

namespace {

double imbalance_at(const WifiParams& wifi, NruParams nru, int N_k, double W,
                    const SolverOptions& opt, AccessState* out) {
  nru.W_l = W;
  AccessState s = solve_access_fixed_point(wifi, nru, N_k, opt);
  SlotBreakdown b = slot_breakdown(s, wifi, nru, N_k);
  AirtimeRatios r = airtime_ratios(s, b, N_k);
  if (out) *out = s;
  return (r.r_gnb - r.r_wifi_per_node) / r.r_wifi_per_node;
}

}  // namespace

WindowResult optimal_initial_window(const WifiParams& wifi, const NruParams& nru, int N_k,
                                    const SolverOptions& opt) {
  WindowResult w;
  double lo = 1.0, hi = kWindowMax;
  double f_lo = imbalance_at(wifi, nru, N_k, lo, opt, nullptr);
  double f_hi = imbalance_at(wifi, nru, N_k, hi, opt, nullptr);
  if (f_lo <= 0 || f_hi >= 0) {
    w.at_boundary = true;
    w.W_star = f_lo <= 0 ? lo : hi;
  } else {
    // r_gnb - r_wifi falls with W; bisect on log W
    for (int it = 0; it < 200 && hi / lo - 1.0 > 1e-14; ++it) {
      double mid = std::sqrt(lo * hi);
      double f = imbalance_at(wifi, nru, N_k, mid, opt, nullptr);
      if (f > 0)
        lo = mid;
      else
        hi = mid;
    }
    w.W_star = std::sqrt(lo * hi);
  }
  w.imbalance = imbalance_at(wifi, nru, N_k, w.W_star, opt, &w.state);
  w.W_rounded = std::lround(w.W_star);
  w.W_in_class = nru.nearest_class_window(w.W_star);
  w.in_class = nru.window_in_class(w.W_star);
  return w;
}

CotAdjustResult cot_adjust(const WifiParams& wifi, const NruParams& nru, int N_k,
                           const SolverOptions& opt) {
  auto excess = [&](double cot, AccessState* out) {
    NruParams n = nru;
    n.MCOT = cot;
    AccessState s = solve_access_fixed_point(wifi, n, N_k, opt);
    SlotBreakdown b = slot_breakdown(s, wifi, n, N_k);
    AirtimeRatios r = airtime_ratios(s, b, N_k);
    if (out) *out = s;
    return r.r_gnb - N_k * r.r_wifi_per_node;
  };
  CotAdjustResult res;
  res.nru = nru;
  double cot = nru.MCOT;
  if (excess(cot, nullptr) > 0) {
    double lo = 1e-6;
    if (excess(lo, nullptr) >= 0)
      cot = lo;
    else
      cot = bisect([&](double c) { return excess(c, nullptr); }, lo, nru.MCOT, 1e-12);
  }
  res.cot = cot;
  res.nru.MCOT = cot;
  excess(cot, &res.state);
  return res;
}

}  // namespace nru
