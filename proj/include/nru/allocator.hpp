#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nru {

// One gNB serving downlink users D and uplink users U over K unlicensed channels.
// Powers q are time-averaged over the MCOT, q = p t / MCOT.
struct Scenario {
  Eigen::VectorXd B;           // bandwidth per channel (Hz)
  Eigen::VectorXd p;           // gNB successful accesses per second per channel
  Eigen::VectorXd rate_floor;  // fairness floor on R^D + R^U per channel (bits/s)
  Eigen::MatrixXd g_d;         // D x K, |h|^2
  Eigen::MatrixXd g_u;         // U x K, |h|^2
  double sigma2 = 0;
  double MCOT = 8e-3;
  double P_avg = 0.2;      // average-power cap, (1/U) sum q_u <= P_avg
  double P_gnb_max = 3.16;  // sum q_d <= P_gnb_max
  double P_dk_max = 0.2;   // q_d <= (t_d / MCOT) P_dk_max

  int K() const { return static_cast<int>(B.size()); }
  int D() const { return static_cast<int>(g_d.rows()); }
  int U() const { return static_cast<int>(g_u.rows()); }
  void validate() const;
  // (1 + alpha_k) B_k p_k
  Eigen::VectorXd weights(const Eigen::VectorXd& alpha) const;
};

struct Allocation {
  Eigen::MatrixXd t_d, t_u;  // seconds
  Eigen::MatrixXd q_d, q_u;  // watts, time-averaged
};

Allocation zero_allocation(const Scenario& s);

struct DualState {
  Eigen::VectorXd alpha;  // fairness
  Eigen::VectorXd beta;   // per-channel time budget
  double theta = 0;       // uplink average power
  double gamma = 0;       // downlink total power
  Eigen::MatrixXd xi;     // per-link downlink caps
  int outer_iterations = 0;  // inner solves, one per alpha tried
  int inner_iterations = 0;
};

// p_k t B log2(1 + MCOT q |h|^2 / (sigma2 t)); 0 at t = 0.
double rate_dl(double t, double q, double gain, double sigma2, double B, double p_k, double MCOT);
double rate_ul(double t, double q, double gain, double sigma2, double B, double p_k, double MCOT);

// Same rate with c = MCOT |h|^2 / sigma2 and bp = B p_k folded in.
double link_rate(double t, double q, double c, double bp);
double link_rate_dt(double t, double q, double c, double bp);
double link_rate_dq(double t, double q, double c, double bp);

Eigen::VectorXd channel_rates(const Scenario& s, const Allocation& a);
double downlink_rate(const Scenario& s, const Allocation& a);
double uplink_rate(const Scenario& s, const Allocation& a);
double objective(const Scenario& s, const Allocation& a);
double lagrangian(const Scenario& s, const Allocation& a, const Eigen::VectorXd& alpha);

struct Violations {
  double time = 0, negativity = 0, dl_cap = 0, dl_total = 0, ul_average = 0, floor = 0;
  double max_budget() const;  // everything except the fairness floor
};

// Relative violations of every constraint of the allocation problem.
Violations constraint_violations(const Scenario& s, const Allocation& a);

struct TimeStep {
  Eigen::MatrixXd t_d, t_u;
  Eigen::VectorXd beta;
  std::vector<bool> degenerate;  // channel whose powers are all zero
};

// Optimal times for fixed powers. Interior links share one SNR x* with
// (1 + alpha) B p h(x*) = beta; downlink times are floored at MCOT q / P_dk_max.
TimeStep time_allocation(const Scenario& s, const Eigen::MatrixXd& q_d, const Eigen::MatrixXd& q_u,
                         const Eigen::VectorXd& alpha);

struct UplinkPower {
  Eigen::MatrixXd q_u;
  double theta = 0;
  bool degenerate = false;  // every uplink time is zero
};

UplinkPower uplink_power(const Scenario& s, const Eigen::MatrixXd& t_u,
                         const Eigen::VectorXd& alpha);

struct DownlinkPower {
  Eigen::MatrixXd q_d;
  double gamma = 0;
  Eigen::MatrixXd xi;
  bool total_slack = false;
  bool degenerate = false;
};

DownlinkPower downlink_power(const Scenario& s, const Eigen::MatrixXd& t_d,
                             const Eigen::VectorXd& alpha);

struct TraceRecord {
  int outer = 0;
  int inner = 0;
  std::string stage;
  double objective = 0;
  double lagrangian = 0;
  double max_violation = 0;
  double theta = 0;
  double gamma = 0;
  double alpha_max = 0;
};

struct AlgorithmOptions {
  int max_outer = 100;      // coordinate cycles over alpha
  double floor_tol = 1e-9;  // relative
  int max_inner = 2000;
  double inner_tol = 1e-8;
  bool joint_refine = true;
};

struct AlgorithmResult {
  Allocation alloc;
  DualState dual;
  std::vector<TraceRecord> trace;
  double objective = 0;
  bool converged = false;
  bool infeasible = false;
  std::string note;
};

AlgorithmResult run_algorithm1(const Scenario& s, const AlgorithmOptions& opt = {});

Allocation baseline_etep(const Scenario& s);
Allocation baseline_etop(const Scenario& s);
Allocation baseline_otep(const Scenario& s);

// Global maximizer of sum_k w_k R_k over all budgets by a primal log-barrier
// Newton method. Used to finish the alternation, which can stall when a
// downlink link sits on its per-link cap (the cap ties t and q together).
struct JointOptions {
  double gap = 1e-11;  // target duality gap relative to the objective
  int max_newton = 200;
};

Allocation joint_maximize(const Scenario& s, const Eigen::VectorXd& w,
                          const JointOptions& opt = {});

// Optimality residuals at an allocation. Marginal spreads are relative; the
// slackness terms are multiplier times slack over the objective.
struct KktResiduals {
  double time_marginal = 0;  // spread of (1+alpha) B p h(x) over interior links, per channel
  double ul_marginal = 0;    // spread of the uplink power marginals over active links
  double dl_marginal = 0;    // same for uncapped active downlink links
  double slack_theta = 0;
  double slack_gamma = 0;
  double slack_xi = 0;
  double max() const;
};

KktResiduals kkt_residuals(const Scenario& s, const Allocation& a, const DualState& dual);

}  // namespace nru
