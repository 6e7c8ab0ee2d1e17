// Command-line front end: one verb per pipeline, CSV out.

#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "nru/config.hpp"
#include "nru/csv.hpp"
#include "nru/error.hpp"
#include "nru/experiment.hpp"

using namespace nru;

namespace {

struct Verb {
  std::string name;
  std::string help;
  std::optional<Mode> mode;  // empty: the config decides
  bool proposed_only = false;
  bool force_fairness = false;
};

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string mode;
  std::string sweep;
  std::string trace;
  int threads = 0;
};

int run_verb(const Verb& v, const Flags& f) {
  ExperimentConfig cfg = load_config(f.config);
  std::optional<Mode> mode = v.mode;
  if (!f.mode.empty()) mode = mode_from_string(f.mode);
  if (mode && *mode != cfg.mode) {
    cfg.mode = *mode;
    cfg.methods.clear();  // the config's method list belongs to its own mode
  }
  if (v.proposed_only) cfg.methods = {Method::proposed};
  if (v.force_fairness) cfg.net.fairness = true;
  if (f.seed) cfg.seed = *f.seed;
  if (!f.sweep.empty()) cfg.sweep = parse_sweep(f.sweep);

  ExperimentResult res = run_experiment(cfg, f.threads);
  const std::string out = f.out.empty() ? cfg.output : f.out;
  CsvTable table = results_table(res.rows);
  auto make_parent = [](const std::string& path) {
    std::filesystem::path parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  };
  if (out.empty() || out == "-") {
    write_csv(std::cout, table);
  } else {
    make_parent(out);
    write_csv_file(out, table);
  }
  if (!f.trace.empty()) {
    make_parent(f.trace);
    write_csv_file(f.trace, trace_table(res.trace));
  }

  int flagged = 0, failed = 0;
  for (const ResultRow& r : res.rows) {
    flagged += r.status == RowStatus::flagged;
    failed += r.status == RowStatus::failed;
  }
  std::cerr << res.rows.size() << " rows (" << flagged << " flagged, " << failed << " failed)";
  if (!out.empty() && out != "-") std::cerr << " -> " << out;
  std::cerr << "\n";
  for (const ResultRow& r : res.rows)
    if (r.status == RowStatus::failed) std::cerr << "failed: " << to_string(r.method) << " at " << to_string(r.axis)
                                                 << " = " << format_number(r.value) << ": " << r.note << "\n";
  return res.hard_failure() ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NR-U / WiFi coexistence models, allocation and simulation"};
  app.require_subcommand(1);
  const std::vector<Verb> verbs = {
      {"analyze", "access probabilities, airtime and WiFi throughput", Mode::analytic},
      {"tune-window", "airtime-equalizing gNB window", Mode::analytic, true},
      {"fairness", "throughput fairness after allocation", Mode::optimize, true, true},
      {"optimize", "time and power allocation", Mode::optimize},
      {"simulate", "slot-level Monte-Carlo of the access procedure", Mode::simulate},
      {"compare", "proposed allocation against the ETEP/ETOP/OTEP baselines", Mode::compare_baselines},
      {"run", "whatever mode the config names", std::nullopt},
  };
  Flags flags;
  std::string seed_text;
  const Verb* chosen = nullptr;
  for (const Verb& v : verbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    sub->add_option("--config", flags.config, "experiment config (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed_text, "base seed; replicate i uses seed + i");
    sub->add_option("--out", flags.out, "result CSV path, '-' for stdout (default: config output)");
    sub->add_option("--mode", flags.mode, "analytic | simulate | optimize | compare-baselines");
    sub->add_option("--sweep", flags.sweep, "axis=v1,v2,... in config units (N_k, payload, MCOT, P_dk_max)");
    sub->add_option("--trace", flags.trace, "write the allocator's iteration trace CSV here");
    sub->add_option("--threads", flags.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    sub->callback([&chosen, &v] { chosen = &v; });
  }
  CLI11_PARSE(app, argc, argv);

  try {
    if (!seed_text.empty()) {
      std::size_t used = 0;
      unsigned long long s = 0;
      try {
        s = std::stoull(seed_text, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != seed_text.size() || seed_text[0] == '-')
        throw ConfigError("--seed: expected an unsigned 64-bit integer, got '" + seed_text + "'");
      flags.seed = s;
    }
    return run_verb(*chosen, flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
