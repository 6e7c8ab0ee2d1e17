#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "nru/allocator.hpp"
#include "nru/config.hpp"
#include "nru/csv.hpp"

namespace nru {

// ok: normal; flagged: a soft problem such as an unreachable fairness floor;
// failed: the row could not be computed (hard failure).
enum class RowStatus { ok, flagged, failed };

std::string to_string(RowStatus s);

struct Stat {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
};

// Mean and sample standard deviation of the finite entries; sd = 0 for one entry.
Stat summarize(const std::vector<double>& v);

struct ResultRow {
  std::string experiment;
  Mode mode = Mode::analytic;
  Method method = Method::proposed;
  SweepAxis axis = SweepAxis::none;
  double value = std::numeric_limits<double>::quiet_NaN();  // config units
  int replicates = 0;
  std::uint64_t seed = 0;
  int N_k = 0;
  double W_l = 0;        // gNB initial window in use
  double occupancy = 0;  // channel occupancy per access (s)
  Stat tau_w, tau_l, r_gnb, r_wifi_per_node, R_W, R_virtual, rate_floor, nr_dl, nr_ul, nr_total;
  // fraction of replicates where every channel meets its fairness floor
  double fairness_met = std::numeric_limits<double>::quiet_NaN();
  RowStatus status = RowStatus::ok;
  std::string note;
};

struct TraceRow {
  std::string method;
  double value = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  TraceRecord rec;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  // sweep-major, then method in config order
  std::vector<TraceRow> trace;
  bool hard_failure() const;
};

// threads = 0 uses the hardware concurrency. Output does not depend on it.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 0);

const std::vector<std::string>& result_columns();
const std::vector<std::string>& trace_columns();
CsvTable results_table(const std::vector<ResultRow>& rows);
CsvTable trace_table(const std::vector<TraceRow>& rows);

}  // namespace nru
