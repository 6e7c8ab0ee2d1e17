#include "nru/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

#include "nru/access.hpp"
#include "nru/channel.hpp"
#include "nru/error.hpp"
#include "nru/fairness.hpp"
#include "nru/macsim.hpp"

namespace nru {

std::string to_string(RowStatus s) {
  switch (s) {
    case RowStatus::ok: return "ok";
    case RowStatus::flagged: return "flagged";
    case RowStatus::failed: return "failed";
  }
  return "?";
}

Stat summarize(const std::vector<double>& v) {
  Stat st;
  double sum = 0;
  int n = 0;
  for (double x : v)
    if (std::isfinite(x)) sum += x, ++n;
  if (n == 0) return st;
  st.mean = sum / n;
  double ss = 0;
  for (double x : v)
    if (std::isfinite(x)) ss += (x - st.mean) * (x - st.mean);
  st.sd = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  return st;
}

bool ExperimentResult::hard_failure() const {
  return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.status == RowStatus::failed; });
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_access_method(Method m) {
  return m == Method::proposed || m == Method::cat4_lbt || m == Method::cot_adjust;
}

bool is_allocation_method(Method m) {
  return m == Method::proposed || m == Method::ETEP || m == Method::ETOP || m == Method::OTEP;
}

ExperimentConfig at_point(ExperimentConfig c, double v) {
  switch (c.sweep.axis) {
    case SweepAxis::N_k: c.net.N_k = static_cast<int>(v); break;
    case SweepAxis::payload: c.wifi.payload_mean = v; break;
    case SweepAxis::MCOT: c.nru.MCOT = v; break;
    case SweepAxis::P_dk_max: c.net.P_dk_max = v; break;
    case SweepAxis::none: break;
  }
  return c;
}

// Channel access of one method: the window (or COT) it runs with and the solved state.
struct Access {
  NruParams nru;
  AccessState state;
  SlotBreakdown slots;
};

Access access_for(const ExperimentConfig& c, Method m) {
  Access a;
  a.nru = c.nru;
  const int N = c.net.N_k;
  if (m == Method::cot_adjust) {
    CotAdjustResult r = cot_adjust(c.wifi, c.nru, N);
    a.nru = r.nru;
    a.state = r.state;
  } else if (m == Method::cat4_lbt || !c.net.tune_window) {
    a.state = solve_access_fixed_point(c.wifi, a.nru, N);
  } else {
    WindowResult w = optimal_initial_window(c.wifi, c.nru, N);
    if (w.at_boundary) throw InfeasibleError("no window in [1, 65536] equalizes airtime");
    a.nru.W_l = w.W_star;
    a.state = w.state;
  }
  a.slots = slot_breakdown(a.state, c.wifi, a.nru, N);
  return a;
}

struct Samples {
  std::vector<double> tau_w, tau_l, r_gnb, r_wifi, R_W, R_virtual, floor, dl, ul, total, met;
};

void finish(ResultRow& row, const Samples& s) {
  row.tau_w = summarize(s.tau_w);
  row.tau_l = summarize(s.tau_l);
  row.r_gnb = summarize(s.r_gnb);
  row.r_wifi_per_node = summarize(s.r_wifi);
  row.R_W = summarize(s.R_W);
  row.R_virtual = summarize(s.R_virtual);
  row.rate_floor = summarize(s.floor);
  row.nr_dl = summarize(s.dl);
  row.nr_ul = summarize(s.ul);
  row.nr_total = summarize(s.total);
  row.fairness_met = summarize(s.met).mean;
}

void analytic_row(const ExperimentConfig& c, Method m, ResultRow& row) {
  Access a = access_for(c, m);
  const int N = c.net.N_k;
  AirtimeRatios r = airtime_ratios(a.state, a.slots, N);
  Samples s;
  s.tau_w = {a.state.tau_w};
  s.tau_l = {a.state.tau_l};
  s.r_gnb = {r.r_gnb};
  s.r_wifi = {r.r_wifi_per_node};
  s.R_W = {wifi_throughput(a.state, a.slots, N, c.wifi.payload_mean)};
  if (c.net.fairness) s.floor = {fairness_threshold(a.state, a.slots, c.wifi, N, c.net.D + c.net.U).rate_floor};
  row.replicates = 1;
  row.W_l = a.nru.W_l;
  row.occupancy = a.nru.occupancy();
  finish(row, s);
}

void simulate_row(const ExperimentConfig& c, Method m, ResultRow& row) {
  Access a = access_for(c, m);
  const int N = c.net.N_k;
  Samples s;
  for (int i = 0; i < c.replicates; ++i) {
    SimStats st = simulate(c.wifi, a.nru, N, c.sim_slots, c.seed + static_cast<std::uint64_t>(i));
    EmpiricalThroughput e = empirical_throughputs(st, c.wifi.payload_mean);
    s.tau_w.push_back(st.tau_w());
    s.tau_l.push_back(st.tau_l());
    s.r_gnb.push_back(e.gnb_airtime_fraction);
    s.r_wifi.push_back(e.wifi_airtime_per_node);
    s.R_W.push_back(e.wifi_bits_per_s);
  }
  row.replicates = c.replicates;
  row.W_l = std::max(1.0, std::round(a.nru.W_l));  // the simulator's whole-slot window
  row.occupancy = a.nru.occupancy();
  finish(row, s);
}

Scenario build_scenario(const ExperimentConfig& c, const Access& a, std::uint64_t seed) {
  const int K = c.net.K, N = c.net.N_k;
  Scenario s;
  s.B = Eigen::VectorXd::Constant(K, c.net.bandwidth);
  s.p = Eigen::VectorXd::Constant(K, nr_access_factor(a.state, a.slots, N));
  s.rate_floor = Eigen::VectorXd::Zero(K);
  if (c.net.fairness)
    s.rate_floor.setConstant(fairness_threshold(a.state, a.slots, c.wifi, N, c.net.D + c.net.U).rate_floor);
  s.g_d = draw_gains(c.net.D, K, c.net.d_min, c.net.d_max, seed, 0, c.net.fading).gain;
  s.g_u = draw_gains(c.net.U, K, c.net.d_min, c.net.d_max, seed, 1, c.net.fading).gain;
  s.sigma2 = noise_power(c.net.bandwidth);
  s.MCOT = a.nru.MCOT;
  s.P_avg = c.net.P_avg;
  s.P_gnb_max = c.net.P_gnb_max;
  s.P_dk_max = c.net.P_dk_max;
  return s;
}

void allocation_row(const ExperimentConfig& c, Method m, ResultRow& row, std::vector<TraceRow>& trace,
                    bool want_trace) {
  // every allocation method shares the proposed channel access
  Access a = access_for(c, Method::proposed);
  const int N = c.net.N_k, N_u = c.net.D + c.net.U;
  Samples s;
  std::ostringstream notes;
  for (int i = 0; i < c.replicates; ++i) {
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(i);
    Scenario sc = build_scenario(c, a, seed);
    Allocation alloc;
    switch (m) {
      case Method::ETEP: alloc = baseline_etep(sc); break;
      case Method::ETOP: alloc = baseline_etop(sc); break;
      case Method::OTEP: alloc = baseline_otep(sc); break;
      default: {
        AlgorithmResult r = run_algorithm1(sc);
        alloc = r.alloc;
        if (r.infeasible || !r.converged) {
          row.status = RowStatus::flagged;
          notes << "replicate " << i << ": " << (r.note.empty() ? "not converged; " : r.note);
        }
        if (want_trace)
          for (const TraceRecord& t : r.trace) trace.push_back({to_string(m), row.value, i, seed, t});
      }
    }
    Eigen::VectorXd rates = channel_rates(sc, alloc);
    double worst_virtual = 0;
    bool met = true;
    for (int k = 0; k < sc.K(); ++k) {
      FairnessCheck f = evaluate_fairness(a.state, a.slots, c.wifi, N, N_u, rates[k]);
      worst_virtual = std::max(worst_virtual, f.R_virtual);
      // the floor form, with the same relative slack the allocator is held to
      if (c.net.fairness && rates[k] < sc.rate_floor[k] * (1 - 1e-6)) met = false;
    }
    s.tau_w.push_back(a.state.tau_w);
    s.tau_l.push_back(a.state.tau_l);
    s.R_W.push_back(wifi_throughput(a.state, a.slots, N, c.wifi.payload_mean));
    s.R_virtual.push_back(worst_virtual);
    s.floor.push_back(sc.rate_floor.maxCoeff());
    s.dl.push_back(downlink_rate(sc, alloc));
    s.ul.push_back(uplink_rate(sc, alloc));
    s.total.push_back(objective(sc, alloc));
    if (c.net.fairness) s.met.push_back(met ? 1.0 : 0.0);
  }
  AirtimeRatios r = airtime_ratios(a.state, a.slots, N);
  s.r_gnb = {r.r_gnb};
  s.r_wifi = {r.r_wifi_per_node};
  row.replicates = c.replicates;
  row.W_l = a.nru.W_l;
  row.occupancy = a.nru.occupancy();
  row.note += notes.str();
  finish(row, s);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  std::vector<Method> methods = cfg.methods.empty() ? default_methods(cfg.mode) : cfg.methods;
  const bool allocation = cfg.mode == Mode::optimize || cfg.mode == Mode::compare_baselines;
  for (Method m : methods) {
    if (allocation ? !is_allocation_method(m) : !is_access_method(m))
      throw ConfigError("method " + to_string(m) + " is not available in mode " + to_string(cfg.mode));
  }
  std::vector<double> values = cfg.sweep.axis == SweepAxis::none ? std::vector<double>{kNaN} : cfg.sweep.values;

  struct Task {
    double value;
    Method method;
  };
  std::vector<Task> tasks;
  for (double v : values)
    for (Method m : methods) tasks.push_back({v, m});

  std::vector<ResultRow> rows(tasks.size());
  std::vector<std::vector<TraceRow>> traces(tasks.size());
  auto run = [&](std::size_t i) {
    const Task& t = tasks[i];
    ResultRow& row = rows[i];
    ExperimentConfig c = std::isnan(t.value) ? cfg : at_point(cfg, t.value);
    row.experiment = cfg.name;
    row.mode = cfg.mode;
    row.method = t.method;
    row.axis = cfg.sweep.axis;
    row.value = std::isnan(t.value) ? kNaN : sweep_from_si(cfg.sweep.axis, t.value);
    row.seed = cfg.seed;
    row.N_k = c.net.N_k;
    try {
      c.validate();
      switch (cfg.mode) {
        case Mode::analytic: analytic_row(c, t.method, row); break;
        case Mode::simulate: simulate_row(c, t.method, row); break;
        default: allocation_row(c, t.method, row, traces[i], true); break;
      }
    } catch (const InfeasibleError& e) {
      row.status = RowStatus::flagged;
      row.note += e.what();
    } catch (const std::exception& e) {
      row.status = RowStatus::failed;
      row.note += e.what();
    }
  };

  int n = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n = std::min<int>(n, static_cast<int>(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < tasks.size();) run(i);
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  ExperimentResult res;
  res.rows = std::move(rows);
  for (auto& t : traces) res.trace.insert(res.trace.end(), t.begin(), t.end());
  return res;
}

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {
      "experiment", "mode", "method", "axis", "value", "replicates", "seed", "N_k", "W_l", "occupancy_ms",
      "tau_w", "tau_w_sd", "tau_l", "tau_l_sd", "r_gnb", "r_gnb_sd", "r_wifi_per_node", "r_wifi_per_node_sd",
      "R_W", "R_W_sd", "R_virtual", "R_virtual_sd", "rate_floor", "rate_floor_sd", "nr_dl", "nr_dl_sd",
      "nr_ul", "nr_ul_sd", "nr_total", "nr_total_sd", "fairness_met", "status", "note"};
  return cols;
}

const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = {"method", "value", "replicate", "seed", "outer", "inner",
                                                "stage", "objective", "lagrangian", "max_violation",
                                                "theta", "gamma", "alpha_max"};
  return cols;
}

CsvTable results_table(const std::vector<ResultRow>& rows) {
  CsvTable t;
  t.header = result_columns();
  for (const ResultRow& r : rows) {
    std::vector<std::string> f = {r.experiment, to_string(r.mode), to_string(r.method), to_string(r.axis),
                                  format_number(r.value), std::to_string(r.replicates), std::to_string(r.seed),
                                  std::to_string(r.N_k), format_number(r.W_l), format_number(r.occupancy * 1e3)};
    for (const Stat* s : {&r.tau_w, &r.tau_l, &r.r_gnb, &r.r_wifi_per_node, &r.R_W, &r.R_virtual, &r.rate_floor,
                          &r.nr_dl, &r.nr_ul, &r.nr_total}) {
      f.push_back(format_number(s->mean));
      f.push_back(format_number(s->sd));
    }
    f.push_back(format_number(r.fairness_met));
    f.push_back(to_string(r.status));
    f.push_back(r.note);
    t.rows.push_back(std::move(f));
  }
  return t;
}

CsvTable trace_table(const std::vector<TraceRow>& rows) {
  CsvTable t;
  t.header = trace_columns();
  for (const TraceRow& r : rows) {
    const TraceRecord& x = r.rec;
    t.rows.push_back({r.method, format_number(r.value), std::to_string(r.replicate), std::to_string(r.seed),
                      std::to_string(x.outer), std::to_string(x.inner), x.stage, format_number(x.objective),
                      format_number(x.lagrangian), format_number(x.max_violation), format_number(x.theta),
                      format_number(x.gamma), format_number(x.alpha_max)});
  }
  return t;
}

}  // namespace nru
