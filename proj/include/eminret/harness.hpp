#pragma once

// Experiment runner: one scenario, many scheduler configurations, energy
// reports normalized against the PABFD baseline.

#include <atomic>
#include <charconv>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "eminret/energy.hpp"
#include "eminret/io.hpp"
#include "eminret/model.hpp"
#include "eminret/schedulers.hpp"
#include "eminret/workload.hpp"

namespace eminret {

enum class SourceKind { scenario_file, swf, synth };

struct ScenarioSource {
  SourceKind kind = SourceKind::synth;
  std::string path;        // scenario_file, swf
  std::size_t jobs = 0;    // swf: first N jobs; synth: job count
  std::uint64_t seed = 0;  // synth
  SynthParams params;      // synth
};

struct FleetSpec {
  std::size_t hosts = 0;  // 0: use the hosts listed in the scenario file
  HostSpec prototype = reference_host(0);
};

enum class ReportFormat { csv, json, markdown };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  if (s == "markdown" || s == "md") return ReportFormat::markdown;
  throw Error(ErrorCode::ConfigError, "unknown report format '" + std::string(s) + "'");
}

inline std::string_view report_extension(ReportFormat f) {
  switch (f) {
    case ReportFormat::csv: return "csv";
    case ReportFormat::json: return "json";
    case ReportFormat::markdown: return "md";
  }
  return "txt";
}

struct ExperimentConfig {
  ScenarioSource source;
  FleetSpec fleet;
  std::vector<std::string> algorithms;
  MetricWeights weights;  // weights.time is used when weight_sweep is empty
  std::vector<double> weight_sweep{kTimeWeightSweep.begin(), kTimeWeightSweep.end()};
  std::size_t workers = 1;
  std::string out_dir;
  ReportFormat format = ReportFormat::csv;
};

struct ComparisonRow {
  std::string algorithm;
  std::size_t fleet_hosts = 0;
  // Means over the weight sweep for EMinRET / MinDFT rows.
  double hosts_used = 0;
  double vms_placed = 0;
  double vms_unplaced = 0;
  double energy_kwh = 0;
  double saving_pct = 0;
  double normalized_energy = 0;
  double busy_seconds = 0;
};

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace detail {

inline SynthParams synth_params_from_json(const json& j) {
  SynthParams p;
  p.mean_interarrival = j.value("mean_interarrival", p.mean_interarrival);
  p.min_duration = j.value("min_duration", p.min_duration);
  p.max_duration = j.value("max_duration", p.max_duration);
  p.min_procs = j.value("min_procs", p.min_procs);
  p.max_procs = j.value("max_procs", p.max_procs);
  return p;
}

inline bool uses_time_weight(const SchedulerConfig& c) {
  return c.algorithm == Algorithm::EMinRET || c.algorithm == Algorithm::MinDFT;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const json& j) {
  try {
    ExperimentConfig c;
    const json& src = j.at("scenario");
    if (src.contains("file")) {
      c.source.kind = SourceKind::scenario_file;
      c.source.path = src.at("file").get<std::string>();
    } else if (src.contains("swf")) {
      c.source.kind = SourceKind::swf;
      c.source.path = src.at("swf").get<std::string>();
      c.source.jobs = src.at("jobs").get<std::size_t>();
    } else if (src.contains("synth")) {
      const json& s = src.at("synth");
      c.source.kind = SourceKind::synth;
      c.source.seed = s.value("seed", std::uint64_t{0});
      c.source.jobs = s.at("jobs").get<std::size_t>();
      c.source.params = detail::synth_params_from_json(s);
    } else {
      throw Error(ErrorCode::ConfigError, "scenario needs one of file | swf | synth");
    }

    if (j.contains("fleet")) {
      const json& f = j.at("fleet");
      c.fleet.hosts = f.value("hosts", std::size_t{0});
      if (f.contains("host")) {
        json proto = f.at("host");
        c.fleet.prototype = host_from_json(proto);
      }
      const std::string power = f.value("power", std::string("table"));
      if (power == "linear") {
        const PowerModel& p = c.fleet.prototype.power;
        c.fleet.prototype.power = PowerModel::linear(p.idle_watts, p.max_watts);
      } else if (power != "table") {
        throw Error(ErrorCode::ConfigError, "fleet.power must be table | linear");
      }
    }
    if (c.source.kind != SourceKind::scenario_file && c.fleet.hosts == 0) {
      throw Error(ErrorCode::ConfigError, "fleet.hosts is required for swf and synth sources");
    }

    c.algorithms = j.value("algorithms", all_scheduler_labels());
    if (c.algorithms.empty()) throw Error(ErrorCode::ConfigError, "at least one algorithm");

    if (j.contains("weights")) {
      const json& w = j.at("weights");
      for (Resource r : kAllResources) {
        c.weights[r] = w.value(std::string(to_string(r)), c.weights[r]);
      }
      if (w.contains("time")) {
        const json& t = w.at("time");
        if (t.is_array()) {
          c.weight_sweep = t.get<std::vector<double>>();
        } else {
          c.weights.time = t.get<double>();
          c.weight_sweep.clear();
        }
      }
    }
    validate_weights(c.weights);
    for (double t : c.weight_sweep) {
      if (!(t >= 0)) throw Error(ErrorCode::ConfigError, "time weights must be >= 0");
    }

    c.workers = std::max<std::size_t>(1, j.value("workers", std::size_t{1}));
    if (j.contains("output")) {
      const json& o = j.at("output");
      c.out_dir = o.value("dir", std::string());
      c.format = parse_report_format(o.value("format", std::string("csv")));
    }
    for (const std::string& label : c.algorithms) parse_scheduler_label(label);
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

inline ExperimentConfig read_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
  ExperimentConfig c = parse_experiment_config(j);
  // Relative input paths resolve against the config file's directory.
  if (!c.source.path.empty() && std::filesystem::path(c.source.path).is_relative()) {
    c.source.path = (std::filesystem::path(path).parent_path() / c.source.path).string();
  }
  return c;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

inline Scenario build_scenario(const ExperimentConfig& config) {
  std::vector<HostSpec> hosts;
  std::vector<VmRequest> vms;
  switch (config.source.kind) {
    case SourceKind::scenario_file: {
      ScenarioFile file = read_scenario_file(config.source.path);
      hosts = std::move(file.hosts);
      vms = std::move(file.vms);
      break;
    }
    case SourceKind::swf: {
      std::ifstream in(config.source.path);
      if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + config.source.path);
      const SwfTrace trace = parse_swf(in);
      vms = jobs_to_vms(trace.jobs, std::min(config.source.jobs, trace.jobs.size())).vms;
      break;
    }
    case SourceKind::synth:
      vms = synth_workload(config.source.seed, config.source.jobs, config.source.params);
      break;
  }
  if (config.fleet.hosts > 0) hosts = make_fleet(config.fleet.prototype, config.fleet.hosts);
  return validate_scenario(std::move(hosts), std::move(vms));
}

// Outcome of one (algorithm, time weight) run.
struct RunOutcome {
  Schedule schedule;
  EnergyReport energy;
};

inline RunOutcome evaluate(const Scenario& scenario, const SchedulerConfig& config) {
  RunOutcome out;
  out.schedule = run_scheduler(scenario, config);
  if (out.schedule.assignments.size() + out.schedule.unplaced.size() != scenario.vms.size()) {
    throw Error(ErrorCode::InfeasibleSchedule, "VM count not conserved");
  }
  out.energy = schedule_energy(scenario, out.schedule);
  return out;
}

namespace detail {

struct Task {
  std::size_t row;  // index into the algorithm list; npos for the hidden baseline
  SchedulerConfig config;
  std::string label;
};

// Runs fn(i) for i in [0, n) on up to `workers` threads; the first failure
// (lowest index) is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1), std::max<std::size_t>(n, 1));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

inline std::vector<ComparisonRow> run_experiment(const ExperimentConfig& config,
                                                 const Scenario& scenario) {
  if (config.algorithms.empty()) throw Error(ErrorCode::ConfigError, "at least one algorithm");

  std::vector<detail::Task> tasks;
  constexpr std::size_t kBaseline = static_cast<std::size_t>(-1);
  bool has_baseline = false;
  for (std::size_t row = 0; row < config.algorithms.size(); ++row) {
    const std::string& label = config.algorithms[row];
    SchedulerConfig sc = parse_scheduler_label(label, config.weights);
    has_baseline = has_baseline || sc.algorithm == Algorithm::PABFD;
    if (detail::uses_time_weight(sc) && !config.weight_sweep.empty()) {
      for (double w : config.weight_sweep) {
        sc.weights.time = w;
        tasks.push_back({row, sc, label});
      }
    } else {
      tasks.push_back({row, sc, label});
    }
  }
  if (!has_baseline) tasks.push_back({kBaseline, parse_scheduler_label("pabfd"), "pabfd"});

  std::vector<RunOutcome> outcomes(tasks.size());
  detail::parallel_for(tasks.size(), config.workers, [&](std::size_t i) {
    try {
      outcomes[i] = evaluate(scenario, tasks[i].config);
    } catch (const Error& e) {
      throw Error(e.code(), tasks[i].label + ": " + e.what());
    }
  });

  std::vector<ComparisonRow> rows(config.algorithms.size());
  std::vector<std::size_t> runs(config.algorithms.size(), 0);
  double baseline = 0;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const RunOutcome& o = outcomes[i];
    if (parse_scheduler_label(tasks[i].label).algorithm == Algorithm::PABFD) {
      baseline = o.energy.total;
    }
    if (tasks[i].row == kBaseline) continue;
    ComparisonRow& r = rows[tasks[i].row];
    r.algorithm = tasks[i].label;
    r.fleet_hosts = scenario.hosts.size();
    r.hosts_used += static_cast<double>(o.schedule.hosts_used());
    r.vms_placed += static_cast<double>(o.schedule.assignments.size());
    r.vms_unplaced += static_cast<double>(o.schedule.unplaced.size());
    r.energy_kwh += o.energy.total;
    r.busy_seconds += static_cast<double>(o.energy.total_busy_time);
    ++runs[tasks[i].row];
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double n = static_cast<double>(runs[k]);
    ComparisonRow& r = rows[k];
    r.hosts_used /= n;
    r.vms_placed /= n;
    r.vms_unplaced /= n;
    r.energy_kwh /= n;
    r.busy_seconds /= n;
    if (parse_scheduler_label(r.algorithm).algorithm == Algorithm::PABFD) {
      r.normalized_energy = 1.0;
      r.saving_pct = 0.0;
    } else {
      r.normalized_energy = baseline > 0 ? r.energy_kwh / baseline : 0.0;
      r.saving_pct = baseline > 0 ? (1.0 - r.energy_kwh / baseline) * 100.0 : 0.0;
    }
  }
  return rows;
}

inline std::vector<ComparisonRow> run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, build_scenario(config));
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace detail {

// Shortest round-trip text, independent of the global locale.
inline std::string number_text(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

inline std::string fixed_text(double x, int digits) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, digits);
  return std::string(buf, ptr);
}

}  // namespace detail

inline std::string emit_report(const std::vector<ComparisonRow>& rows, ReportFormat format) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "no rows to report");
  using detail::number_text;
  std::string out;
  switch (format) {
    case ReportFormat::csv:
      out += "algorithm,hosts,vms,kwh,saving_pct,busy_s,normalized_energy,fleet_hosts,unplaced\n";
      for (const ComparisonRow& r : rows) {
        out += r.algorithm + ',' + number_text(r.hosts_used) + ',' + number_text(r.vms_placed) +
               ',' + number_text(r.energy_kwh) + ',' + number_text(r.saving_pct) + ',' +
               number_text(r.busy_seconds) + ',' + number_text(r.normalized_energy) + ',' +
               std::to_string(r.fleet_hosts) + ',' + number_text(r.vms_unplaced) + '\n';
      }
      break;
    case ReportFormat::json: {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const ComparisonRow& r : rows) {
        arr.push_back(nlohmann::ordered_json{{"algorithm", r.algorithm},
                                             {"hosts", r.hosts_used},
                                             {"vms", r.vms_placed},
                                             {"kwh", r.energy_kwh},
                                             {"saving_pct", r.saving_pct},
                                             {"busy_s", r.busy_seconds},
                                             {"normalized_energy", r.normalized_energy},
                                             {"fleet_hosts", r.fleet_hosts},
                                             {"unplaced", r.vms_unplaced}});
      }
      out = arr.dump(2) + '\n';
      break;
    }
    case ReportFormat::markdown:
      out += "| Algorithm | #Hosts (fleet) | #Hosts used | #VMs | Energy (KWh) | Saving (%) | "
             "Normalized energy | Busy time (s) | Unplaced |\n";
      out += "|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";
      for (const ComparisonRow& r : rows) {
        out += "| " + r.algorithm + " | " + std::to_string(r.fleet_hosts) + " | " +
               number_text(r.hosts_used) + " | " + number_text(r.vms_placed) + " | " +
               detail::fixed_text(r.energy_kwh, 2) + " | " + detail::fixed_text(r.saving_pct, 0) +
               "% | " + detail::fixed_text(r.normalized_energy, 3) + " | " +
               number_text(r.busy_seconds) + " | " + number_text(r.vms_unplaced) + " |\n";
      }
      break;
  }
  return out;
}

inline std::string write_report(const std::vector<ComparisonRow>& rows, ReportFormat format,
                                const std::string& out_dir) {
  const std::string text = emit_report(rows, format);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const std::string path =
      (std::filesystem::path(out_dir) / ("report." + std::string(report_extension(format)))).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
  return path;
}

}  // namespace eminret
