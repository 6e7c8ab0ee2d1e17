#include "nru/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nru/error.hpp"
#include "nru/numerics.hpp"

namespace nru {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kInf = std::numeric_limits<double>::infinity();

double snr_coefficient(const Scenario& s, double gain) { return s.MCOT * gain / s.sigma2; }

}  // namespace

void Scenario::validate() const {
  const int k = K();
  if (k < 1) throw DomainError("scenario needs at least one channel");
  if (p.size() != k || rate_floor.size() != k) throw DomainError("per-channel vectors need K entries");
  if (g_d.cols() != k || g_u.cols() != k) throw DomainError("gain matrices need K columns");
  if (D() + U() < 1) throw DomainError("scenario needs at least one user");
  if (!(B.array() > 0).all()) throw DomainError("bandwidths must be > 0");
  if (!(p.array() >= 0).all()) throw DomainError("access factors must be >= 0");
  if (!(g_d.array() >= 0).all() || !(g_u.array() >= 0).all())
    throw DomainError("gains must be >= 0");
  if (!(sigma2 > 0) || !(MCOT > 0) || !(P_avg > 0) || !(P_gnb_max > 0) || !(P_dk_max > 0))
    throw DomainError("noise, MCOT and power budgets must be > 0");
}

Eigen::VectorXd Scenario::weights(const Eigen::VectorXd& alpha) const {
  return ((1.0 + alpha.array()) * B.array() * p.array()).matrix();
}

Allocation zero_allocation(const Scenario& s) {
  Allocation a;
  a.t_d = Eigen::MatrixXd::Zero(s.D(), s.K());
  a.q_d = Eigen::MatrixXd::Zero(s.D(), s.K());
  a.t_u = Eigen::MatrixXd::Zero(s.U(), s.K());
  a.q_u = Eigen::MatrixXd::Zero(s.U(), s.K());
  return a;
}

double link_rate(double t, double q, double c, double bp) {
  if (t < 0 || q < 0) throw DomainError("rate: t and q must be >= 0");
  if (t == 0) {
    if (q > 0) throw DomainError("rate: q > 0 with t = 0 is not a valid pair");
    return 0.0;
  }
  return bp * t * std::log1p(c * q / t) / kLn2;
}

double link_rate_dt(double t, double q, double c, double bp) { return bp * h_func(c * q / t); }

double link_rate_dq(double t, double q, double c, double bp) {
  return bp * c / ((1.0 + c * q / t) * kLn2);
}

double rate_dl(double t, double q, double gain, double sigma2, double B, double p_k, double MCOT) {
  return link_rate(t, q, MCOT * gain / sigma2, B * p_k);
}

double rate_ul(double t, double q, double gain, double sigma2, double B, double p_k, double MCOT) {
  return link_rate(t, q, MCOT * gain / sigma2, B * p_k);
}

Eigen::VectorXd channel_rates(const Scenario& s, const Allocation& a) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(s.K());
  for (int k = 0; k < s.K(); ++k) {
    const double bp = s.B[k] * s.p[k];
    for (int d = 0; d < s.D(); ++d)
      r[k] += link_rate(a.t_d(d, k), a.q_d(d, k), snr_coefficient(s, s.g_d(d, k)), bp);
    for (int u = 0; u < s.U(); ++u)
      r[k] += link_rate(a.t_u(u, k), a.q_u(u, k), snr_coefficient(s, s.g_u(u, k)), bp);
  }
  return r;
}

double downlink_rate(const Scenario& s, const Allocation& a) {
  double r = 0;
  for (int k = 0; k < s.K(); ++k)
    for (int d = 0; d < s.D(); ++d)
      r += link_rate(a.t_d(d, k), a.q_d(d, k), snr_coefficient(s, s.g_d(d, k)), s.B[k] * s.p[k]);
  return r;
}

double uplink_rate(const Scenario& s, const Allocation& a) {
  double r = 0;
  for (int k = 0; k < s.K(); ++k)
    for (int u = 0; u < s.U(); ++u)
      r += link_rate(a.t_u(u, k), a.q_u(u, k), snr_coefficient(s, s.g_u(u, k)), s.B[k] * s.p[k]);
  return r;
}

double objective(const Scenario& s, const Allocation& a) { return channel_rates(s, a).sum(); }

double lagrangian(const Scenario& s, const Allocation& a, const Eigen::VectorXd& alpha) {
  Eigen::VectorXd r = channel_rates(s, a);
  return ((1.0 + alpha.array()) * r.array() - alpha.array() * s.rate_floor.array()).sum();
}

double Violations::max_budget() const {
  return std::max({time, negativity, dl_cap, dl_total, ul_average});
}

Violations constraint_violations(const Scenario& s, const Allocation& a) {
  Violations v;
  Eigen::VectorXd r = channel_rates(s, a);
  for (int k = 0; k < s.K(); ++k) {
    double sum = a.t_d.col(k).sum() + a.t_u.col(k).sum();
    v.time = std::max(v.time, std::abs(sum - s.MCOT) / s.MCOT);
    if (s.rate_floor[k] > 0)
      v.floor = std::max(v.floor, std::max(0.0, s.rate_floor[k] - r[k]) / s.rate_floor[k]);
  }
  double neg_t = std::min({0.0, a.t_d.size() ? a.t_d.minCoeff() : 0.0,
                           a.t_u.size() ? a.t_u.minCoeff() : 0.0});
  double neg_q = std::min({0.0, a.q_d.size() ? a.q_d.minCoeff() : 0.0,
                           a.q_u.size() ? a.q_u.minCoeff() : 0.0});
  v.negativity = std::max(-neg_t / s.MCOT, -neg_q / s.P_avg);
  if (s.D() > 0) {
    Eigen::ArrayXXd cap = a.t_d.array() * s.P_dk_max / s.MCOT;
    v.dl_cap = std::max(0.0, (a.q_d.array() - cap).maxCoeff()) / s.P_dk_max;
    v.dl_total = std::max(0.0, a.q_d.sum() - s.P_gnb_max) / s.P_gnb_max;
  }
  if (s.U() > 0) v.ul_average = std::max(0.0, a.q_u.sum() / s.U() - s.P_avg) / s.P_avg;
  return v;
}

TimeStep time_allocation(const Scenario& s, const Eigen::MatrixXd& q_d, const Eigen::MatrixXd& q_u,
                         const Eigen::VectorXd& alpha) {
  s.validate();
  const int D = s.D(), U = s.U(), n = D + U;
  TimeStep out;
  out.t_d = Eigen::MatrixXd::Zero(D, s.K());
  out.t_u = Eigen::MatrixXd::Zero(U, s.K());
  out.beta = Eigen::VectorXd::Zero(s.K());
  out.degenerate.assign(s.K(), false);
  const Eigen::VectorXd w = s.weights(alpha);

  Eigen::VectorXd mass(n), lower(n), t(n);
  for (int k = 0; k < s.K(); ++k) {
    for (int d = 0; d < D; ++d) {
      mass[d] = snr_coefficient(s, s.g_d(d, k)) * q_d(d, k);
      lower[d] = s.MCOT * q_d(d, k) / s.P_dk_max;
    }
    for (int u = 0; u < U; ++u) {
      mass[D + u] = snr_coefficient(s, s.g_u(u, k)) * q_u(u, k);
      lower[D + u] = 0.0;
    }
    const double sum_low = lower.sum();

    if (mass.sum() == 0 && sum_low == 0) {
      // nothing transmits on this channel, any split is optimal
      t.setConstant(s.MCOT / n);
      out.degenerate[k] = true;
    } else if (sum_low >= s.MCOT * (1 - 1e-14) || mass.sum() == 0 || !(w[k] > 0)) {
      t = lower;
      if (sum_low > 0 && sum_low >= s.MCOT * (1 - 1e-14)) {
        t *= s.MCOT / sum_low;
      } else {
        t.array() += (s.MCOT - sum_low) / n;
      }
      double b = 0;
      for (int i = 0; i < n; ++i)
        if (t[i] > 0 && mass[i] > 0 && w[k] > 0) b = std::max(b, w[k] * h_func(mass[i] / t[i]));
      out.beta[k] = b;
    } else {
      auto total = [&](double x) {
        double acc = 0;
        for (int i = 0; i < n; ++i) acc += std::max(mass[i] / x, lower[i]);
        return acc;
      };
      auto snr_at = [&](double beta) { return inverse_h(beta / w[k]); };
      // bracket beta by doubling from (1 + alpha) B p h(1)
      double lo = w[k] * h_func(1.0), hi = lo;
      if (total(snr_at(lo)) > s.MCOT) {
        for (int it = 0; it < 4000 && total(snr_at(hi)) > s.MCOT; ++it) hi *= 2;
      } else {
        for (int it = 0; it < 4000 && total(snr_at(lo)) < s.MCOT; ++it) lo *= 0.5;
      }
      if (!(total(snr_at(lo)) >= s.MCOT && total(snr_at(hi)) <= s.MCOT)) {
        std::ostringstream os;
        os << "time_allocation: beta bracket failed on channel " << k << " [" << lo << ", " << hi
           << "]";
        throw Error(os.str());
      }
      for (int it = 0; it < 300 && hi - lo > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        if (total(snr_at(mid)) > s.MCOT)
          lo = mid;
        else
          hi = mid;
      }
      double x = snr_at(0.5 * (lo + hi));
      // exact SNR on the active set found by the bisection
      double act_mass = 0, rest = s.MCOT;
      for (int i = 0; i < n; ++i) {
        if (mass[i] / x > lower[i])
          act_mass += mass[i];
        else
          rest -= lower[i];
      }
      if (act_mass > 0 && rest > 0) {
        double xs = act_mass / rest;
        bool same = true;
        for (int i = 0; i < n; ++i) {
          bool was = mass[i] / x > lower[i];
          bool now = mass[i] / xs > lower[i] * (1 - 1e-12);
          if (was != now && std::abs(mass[i] / xs - lower[i]) > 1e-12 * s.MCOT) same = false;
        }
        if (same) x = xs;
      }
      for (int i = 0; i < n; ++i) t[i] = std::max(mass[i] / x, lower[i]);
      out.beta[k] = w[k] * h_func(x);
    }
    out.t_d.col(k) = t.head(D);
    out.t_u.col(k) = t.tail(U);
  }
  return out;
}

UplinkPower uplink_power(const Scenario& s, const Eigen::MatrixXd& t_u, const Eigen::VectorXd& alpha) {
  const int U = s.U(), K = s.K();
  UplinkPower out;
  out.q_u = Eigen::MatrixXd::Zero(U, K);
  if (U == 0) {
    out.degenerate = true;
    return out;
  }
  const Eigen::VectorXd w = s.weights(alpha);
  const int n = U * K;
  Eigen::VectorXd t(n), a(n), c(n), cap = Eigen::VectorXd::Constant(n, kInf);
  for (int k = 0; k < K; ++k)
    for (int u = 0; u < U; ++u) {
      int i = k * U + u;
      t[i] = t_u(u, k);
      a[i] = w[k] / kLn2;
      c[i] = snr_coefficient(s, s.g_u(u, k));
    }
  WaterFill wf = water_fill(t, a, c, cap, U * s.P_avg);
  if (wf.degenerate) {
    out.degenerate = true;
    return out;
  }
  for (int k = 0; k < K; ++k)
    for (int u = 0; u < U; ++u) out.q_u(u, k) = wf.q[k * U + u];
  out.theta = U / wf.mu;
  return out;
}

DownlinkPower downlink_power(const Scenario& s, const Eigen::MatrixXd& t_d, const Eigen::VectorXd& alpha) {
  const int D = s.D(), K = s.K();
  DownlinkPower out;
  out.q_d = Eigen::MatrixXd::Zero(D, K);
  out.xi = Eigen::MatrixXd::Zero(D, K);
  if (D == 0) {
    out.degenerate = true;
    return out;
  }
  const Eigen::VectorXd w = s.weights(alpha);
  const int n = D * K;
  Eigen::VectorXd t(n), a(n), c(n), cap(n);
  for (int k = 0; k < K; ++k)
    for (int d = 0; d < D; ++d) {
      int i = k * D + d;
      t[i] = t_d(d, k);
      a[i] = w[k] / kLn2;
      c[i] = snr_coefficient(s, s.g_d(d, k));
      cap[i] = t[i] * s.P_dk_max / s.MCOT;
    }
  WaterFill wf = water_fill(t, a, c, cap, s.P_gnb_max);
  out.degenerate = wf.degenerate;
  out.total_slack = wf.budget_slack || wf.degenerate;
  out.gamma = out.total_slack ? 0.0 : 1.0 / wf.mu;
  for (int k = 0; k < K; ++k)
    for (int d = 0; d < D; ++d) {
      int i = k * D + d;
      out.q_d(d, k) = wf.q[i];
      bool capped = t[i] == 0 || wf.q[i] >= cap[i] * (1 - 1e-12);
      if (capped && c[i] > 0) {
        double marginal = t[i] > 0 ? w[k] * c[i] / ((1 + c[i] * wf.q[i] / t[i]) * kLn2) : w[k] * c[i] / kLn2;
        out.xi(d, k) = std::max(0.0, marginal - out.gamma);
      }
    }
  return out;
}

Allocation baseline_etep(const Scenario& s) {
  s.validate();
  Allocation a = zero_allocation(s);
  const double t = s.MCOT / (s.D() + s.U());
  a.t_d.setConstant(t);
  a.t_u.setConstant(t);
  // instantaneous downlink power P_dk_max / 2, scaled down if the total cap binds
  a.q_d.setConstant(t * 0.5 * s.P_dk_max / s.MCOT);
  if (s.D() > 0 && a.q_d.sum() > s.P_gnb_max) a.q_d *= s.P_gnb_max / a.q_d.sum();
  // the uplink average-power budget spread evenly over channels
  a.q_u.setConstant(s.P_avg / s.K());
  return a;
}

Allocation baseline_etop(const Scenario& s) {
  Allocation a = baseline_etep(s);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(s.K());
  a.q_u = uplink_power(s, a.t_u, alpha).q_u;
  a.q_d = downlink_power(s, a.t_d, alpha).q_d;
  return a;
}

Allocation baseline_otep(const Scenario& s) {
  Allocation a = baseline_etep(s);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(s.K());
  TimeStep ts = time_allocation(s, a.q_d, a.q_u, alpha);
  a.t_d = ts.t_d;
  a.t_u = ts.t_u;
  return a;
}

namespace {

struct Sweep {
  double lagrangian = 0;
  TimeStep time;
  UplinkPower ul;
  DownlinkPower dl;
};

// One time step followed by both power steps.
Sweep sweep(const Scenario& s, Allocation& a, const Eigen::VectorXd& alpha) {
  Sweep r;
  r.time = time_allocation(s, a.q_d, a.q_u, alpha);
  a.t_d = r.time.t_d;
  a.t_u = r.time.t_u;
  r.ul = uplink_power(s, a.t_u, alpha);
  r.dl = downlink_power(s, a.t_d, alpha);
  if (!r.ul.degenerate) a.q_u = r.ul.q_u;
  if (!r.dl.degenerate) a.q_d = r.dl.q_d;
  r.lagrangian = lagrangian(s, a, alpha);
  return r;
}

TraceRecord record(const Scenario& s, const Allocation& a, const Eigen::VectorXd& alpha, int outer,
                   int inner, const std::string& stage, const Sweep* sw) {
  TraceRecord t;
  t.outer = outer;
  t.inner = inner;
  t.stage = stage;
  t.objective = objective(s, a);
  t.lagrangian = lagrangian(s, a, alpha);
  t.max_violation = constraint_violations(s, a).max_budget();
  if (sw) {
    t.theta = sw->ul.theta;
    t.gamma = sw->dl.gamma;
  }
  t.alpha_max = alpha.size() ? alpha.maxCoeff() : 0.0;
  return t;
}

// lam x + (1 - lam) y
Allocation mix(const Allocation& x, const Allocation& y, double lam) {
  return {lam * x.t_d + (1 - lam) * y.t_d, lam * x.t_u + (1 - lam) * y.t_u,
          lam * x.q_d + (1 - lam) * y.q_d, lam * x.q_u + (1 - lam) * y.q_u};
}

// Sweeps from `a` while the Lagrangian does not fall; returns the last value.
double polish(const Scenario& s, Allocation& a, const Eigen::VectorXd& alpha, Sweep& last) {
  double prev = lagrangian(s, a, alpha);
  for (int f = 0; f < 200; ++f) {
    Allocation trial = a;
    Sweep sw = sweep(s, trial, alpha);
    if (sw.lagrangian < prev - 1e-12 * std::abs(prev)) break;
    a = trial;
    last = sw;
    bool done = std::abs(sw.lagrangian - prev) <= 1e-14 * std::abs(sw.lagrangian);
    prev = sw.lagrangian;
    if (done && f > 0) break;
  }
  return prev;
}

// Drops links holding less than 1e-6 of the MCOT; their time goes to the
// longest link of the channel. Returns false if nothing was dropped.
bool prune(const Scenario& s, Allocation& a) {
  bool any = false;
  for (int k = 0; k < s.K(); ++k) {
    double freed = 0;
    auto drop = [&](double& t, double& q) {
      if (t > 0 && t < 1e-6 * s.MCOT) {
        freed += t;
        t = q = 0;
        any = true;
      }
    };
    for (int d = 0; d < s.D(); ++d) drop(a.t_d(d, k), a.q_d(d, k));
    for (int u = 0; u < s.U(); ++u) drop(a.t_u(u, k), a.q_u(u, k));
    if (freed == 0) continue;
    Eigen::Index dl = 0, ul = 0;
    double td = s.D() ? a.t_d.col(k).maxCoeff(&dl) : -1;
    double tu = s.U() ? a.t_u.col(k).maxCoeff(&ul) : -1;
    if (td >= tu)
      a.t_d(dl, k) += freed;
    else
      a.t_u(ul, k) += freed;
  }
  return any;
}

// Maximizes the weighted rate for fixed alpha: the time/power alternation,
// a joint refinement, then alternation again so the multipliers come from the
// closed-form steps.
Allocation inner_solve(const Scenario& s, const Eigen::VectorXd& alpha, Allocation a, int outer,
                       const AlgorithmOptions& opt, AlgorithmResult& res, Sweep& last) {
  double prev = lagrangian(s, a, alpha);
  int it = 0;
  for (; it < opt.max_inner; ++it) {
    last = sweep(s, a, alpha);
    res.trace.push_back(record(s, a, alpha, outer, it + 1, "alternate", &last));
    if (std::abs(last.lagrangian - prev) <= opt.inner_tol * std::abs(last.lagrangian)) break;
    prev = last.lagrangian;
  }
  res.dual.inner_iterations += it + 1;

  if (opt.joint_refine) {
    Allocation j = joint_maximize(s, s.weights(alpha));
    if (lagrangian(s, j, alpha) > lagrangian(s, a, alpha)) a = j;
    res.trace.push_back(record(s, a, alpha, outer, it + 2, "joint", nullptr));
    double value = polish(s, a, alpha, last);
    // the barrier leaves inactive links slightly above zero and the
    // alternation only shrinks them geometrically
    Allocation p = a;
    if (prune(s, p)) {
      Sweep sp = last;
      double pv = polish(s, p, alpha, sp);
      if (pv >= value * (1 - 1e-12)) {
        a = p;
        last = sp;
      }
    }
    res.trace.push_back(record(s, a, alpha, outer, it + 3, "final", &last));
  }
  return a;
}

}  // namespace

AlgorithmResult run_algorithm1(const Scenario& s, const AlgorithmOptions& opt) {
  s.validate();
  AlgorithmResult res;
  const int K = s.K();
  Eigen::VectorXd floor = s.rate_floor.cwiseMax(0.0);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(K);
  res.dual.alpha = alpha;

  // A floor above the best rate its channel can reach alone can never be met.
  if (floor.maxCoeff() > 0) {
    std::ostringstream note;
    for (int k = 0; k < K; ++k) {
      if (floor[k] <= 0) continue;
      Eigen::VectorXd w = Eigen::VectorXd::Zero(K);
      w[k] = s.B[k] * s.p[k];
      if (w[k] <= 0) {
        res.infeasible = true;
        note << "channel " << k << ": no gNB access (p_k = 0); ";
        continue;
      }
      Allocation best = joint_maximize(s, w);
      double reach = channel_rates(s, best)[k];
      if (reach < floor[k] * (1 - 1e-9)) {
        res.infeasible = true;
        double dl = s.D() ? best.q_d.sum() / s.P_gnb_max : 0.0;
        double ul = s.U() ? best.q_u.sum() / (s.U() * s.P_avg) : 0.0;
        note << "channel " << k << ": floor " << floor[k] << " > reachable " << reach
             << " (binding: MCOT" << (dl > 1 - 1e-6 ? ", downlink total power" : "")
             << (ul > 1 - 1e-6 ? ", uplink average power" : "") << "); ";
      }
    }
    res.note = note.str();
  }

  const bool active = floor.maxCoeff() > 0 && !res.infeasible;

  // Dual coordinate descent on alpha: for one channel at a time, with the
  // other multipliers fixed, R_k is nondecreasing in alpha_k, so the dual
  // minimizer is the root of R_k(alpha_k) = floor_k, or alpha_k = 0 when the
  // floor is slack there.
  struct Point {
    double alpha = 0, g = 0;
    Allocation a;
    Sweep last;
  };
  Allocation a = baseline_etep(s);
  Sweep last;
  int evals = 0;
  auto solve_at = [&](const Eigen::VectorXd& al, const Allocation& start) {
    Point p;
    p.a = inner_solve(s, al, start, ++evals, opt, res, p.last);
    return p;
  };

  Point cur = solve_at(alpha, a);
  a = cur.a;
  last = cur.last;
  Eigen::VectorXd r = channel_rates(s, a);
  const double tol = opt.floor_tol;
  bool stuck = false;

  for (int cycle = 0; active && cycle < opt.max_outer && !stuck; ++cycle) {
    bool changed = false;
    for (int k = 0; k < K && !stuck; ++k) {
      if (floor[k] <= 0) continue;
      const bool met = r[k] >= floor[k] * (1 - tol);
      if (met && (alpha[k] == 0 || r[k] <= floor[k] * (1 + tol))) continue;
      auto eval = [&](double x) {
        Eigen::VectorXd al = alpha;
        al[k] = x;
        Point p = solve_at(al, a);
        p.alpha = x;
        p.g = channel_rates(s, p.a)[k] - floor[k];
        return p;
      };
      Point lo, hi;
      lo.alpha = hi.alpha = alpha[k];
      if (!met) {
        lo.g = r[k] - floor[k];
        double x = alpha[k] > 0 ? 2 * alpha[k] : s.B[k] * s.p[k];
        hi = eval(x);
        for (int d = 0; hi.g < 0 && d < 200; ++d) {
          lo = hi;
          hi = eval(2 * hi.alpha);
        }
        if (hi.g < 0) {
          stuck = true;
          break;
        }
      } else {
        hi.g = r[k] - floor[k];
        hi.a = a;
        hi.last = last;
        lo = eval(0.0);
      }
      Point pick = lo.g >= 0 ? lo : hi;
      if (lo.g < 0) {
        // Illinois variant of regula falsi; the high side is always feasible
        int side = 0;
        for (int it = 0; it < 200; ++it) {
          if (hi.alpha - lo.alpha <= 1e-13 * hi.alpha) break;
          double x = hi.alpha - hi.g * (hi.alpha - lo.alpha) / (hi.g - lo.g);
          if (!(x > lo.alpha && x < hi.alpha)) x = 0.5 * (lo.alpha + hi.alpha);
          Point m = eval(x);
          if (std::abs(m.g) <= tol * floor[k]) {
            pick = m;
            break;
          }
          if (m.g < 0) {
            lo = m;
            if (side == -1) hi.g *= 0.5;
            side = -1;
          } else {
            hi = m;
            if (side == 1) lo.g *= 0.5;
            side = 1;
          }
          pick = hi;
        }
      }
      if (pick.g > tol * floor[k] && lo.g < 0) {
        // R_k jumps across the root: the maximizer set there is a face, and
        // the point on it that meets the floor is a blend of the two sides
        double l0 = 0, l1 = 1;
        for (int it = 0; it < 100; ++it) {
          double lm = 0.5 * (l0 + l1);
          if (channel_rates(s, mix(hi.a, lo.a, lm))[k] >= floor[k])
            l1 = lm;
          else
            l0 = lm;
        }
        pick.a = mix(hi.a, lo.a, l1);
      }
      const double old = alpha[k];
      if (std::abs(pick.alpha - old) > 1e-9 * std::max(old, pick.alpha)) changed = true;
      alpha[k] = pick.alpha;
      a = pick.a;
      last = pick.last;
      r = channel_rates(s, a);
    }
    if (!changed) break;
  }

  res.dual.outer_iterations = evals;
  res.alloc = a;
  res.dual.alpha = alpha;
  res.dual.beta = last.time.beta;
  res.dual.theta = last.ul.theta;
  res.dual.gamma = last.dl.gamma;
  res.dual.xi = last.dl.xi;
  bool feasible = true;
  for (int k = 0; k < K; ++k)
    if (floor[k] > 0 && r[k] < floor[k] * (1 - 1e-6)) feasible = false;
  res.converged = feasible && !stuck;
  if (!feasible && !res.infeasible) res.note += "no iterate met every fairness floor; ";
  res.objective = objective(s, res.alloc);
  return res;
}

}  // namespace nru

namespace nru {

double KktResiduals::max() const {
  return std::max({time_marginal, ul_marginal, dl_marginal, slack_theta, slack_gamma, slack_xi});
}

namespace {

// (max - min) / max over a set of positive values; 0 for fewer than two
struct Spread {
  double lo = kInf, hi = 0;
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double value() const { return hi > 0 && lo < kInf ? (hi - lo) / hi : 0.0; }
};

}  // namespace

KktResiduals kkt_residuals(const Scenario& s, const Allocation& a, const DualState& dual) {
  KktResiduals r;
  const int K = s.K(), D = s.D(), U = s.U();
  Eigen::VectorXd alpha = dual.alpha.size() == K ? dual.alpha : Eigen::VectorXd::Zero(K);
  const Eigen::VectorXd w = s.weights(alpha);
  const double obj = std::max(objective(s, a), 1e-300);
  auto capped = [&](int d, int k) {
    return a.q_d(d, k) >= a.t_d(d, k) * s.P_dk_max / s.MCOT * (1 - 1e-9);
  };
  Spread ul, dl;
  for (int k = 0; k < K; ++k) {
    Spread tm;
    for (int d = 0; d < D; ++d) {
      if (a.t_d(d, k) <= 0 || a.q_d(d, k) <= 0) continue;
      const double c = snr_coefficient(s, s.g_d(d, k));
      if (capped(d, k)) continue;
      tm.add(w[k] * h_func(c * a.q_d(d, k) / a.t_d(d, k)));
      dl.add(w[k] * c / ((1 + c * a.q_d(d, k) / a.t_d(d, k)) * kLn2));
    }
    for (int u = 0; u < U; ++u) {
      if (a.t_u(u, k) <= 0 || a.q_u(u, k) <= 0) continue;
      const double c = snr_coefficient(s, s.g_u(u, k));
      tm.add(w[k] * h_func(c * a.q_u(u, k) / a.t_u(u, k)));
      ul.add(w[k] * c / ((1 + c * a.q_u(u, k) / a.t_u(u, k)) * kLn2));
    }
    r.time_marginal = std::max(r.time_marginal, tm.value());
  }
  r.ul_marginal = ul.value();
  r.dl_marginal = dl.value();
  if (U > 0) r.slack_theta = dual.theta * std::abs(U * s.P_avg - a.q_u.sum()) / U / obj;
  if (D > 0) {
    r.slack_gamma = dual.gamma * std::abs(s.P_gnb_max - a.q_d.sum()) / obj;
    if (dual.xi.rows() == D && dual.xi.cols() == K) {
      double acc = 0;
      for (int k = 0; k < K; ++k)
        for (int d = 0; d < D; ++d)
          acc += dual.xi(d, k) * std::abs(a.t_d(d, k) * s.P_dk_max / s.MCOT - a.q_d(d, k));
      r.slack_xi = acc / obj;
    }
  }
  return r;
}

}  // namespace nru
