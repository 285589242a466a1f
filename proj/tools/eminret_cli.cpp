// Command-line front end: convert, run, oracle, validate, schedule.
//
// Exit codes: 0 success, 2 configuration / input error, 3 infeasible scenario.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "eminret/eminret.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

int exit_code_for(eminret::ErrorCode code) {
  using eminret::ErrorCode;
  switch (code) {
    case ErrorCode::HeterogeneousFleet:
    case ErrorCode::InfeasibleVm:
    case ErrorCode::InfeasibleSchedule:
    case ErrorCode::NoFeasibleAssignment:
      return kExitInfeasible;
    default:
      return kExitConfig;
  }
}

eminret::Scenario load_scenario(const std::string& path) {
  eminret::ScenarioFile file = eminret::read_scenario_file(path);
  return eminret::validate_scenario(std::move(file.hosts), std::move(file.vms));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware placement of fixed-interval VM requests"};
  app.require_subcommand(1);

  // convert
  auto* convert = app.add_subcommand("convert", "Convert an SWF trace into a scenario file");
  std::string swf_path;
  std::string out_path;
  std::size_t job_limit = 0;
  std::size_t convert_hosts = 0;
  convert->add_option("--swf", swf_path, "SWF trace")->required();
  convert->add_option("--jobs", job_limit, "Use the first N jobs")->required();
  convert->add_option("--out", out_path, "Scenario file to write")->required();
  convert->add_option("--hosts", convert_hosts,
                      "Fleet size to record (default: one host per VM)");

  // run
  auto* run = app.add_subcommand("run", "Run an experiment config and emit a comparison report");
  std::string config_path;
  std::string run_out;
  std::string format_text;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", run_out, "Output directory (default: print to stdout)");
  run->add_option("--format", format_text, "csv | json | markdown");
  run->add_option("--workers", workers, "Concurrent scheduler runs");
  run->add_option("--seed", seed, "Override the synthetic workload seed");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exact minimum busy time for a small scenario");
  std::string oracle_scenario;
  oracle->add_option("--scenario", oracle_scenario, "Scenario file")->required();

  // validate
  auto* validate = app.add_subcommand("validate", "Lint a scenario file");
  std::string validate_scenario_path;
  validate->add_option("--scenario", validate_scenario_path, "Scenario file")->required();

  // schedule
  auto* schedule = app.add_subcommand("schedule", "Run one algorithm and print its energy report");
  std::string schedule_scenario;
  std::string algorithm = "eminret-1";
  double time_weight = 1.0;
  bool csv = false;
  schedule->add_option("--scenario", schedule_scenario, "Scenario file")->required();
  schedule->add_option("--algorithm", algorithm, "Algorithm label, e.g. eminret-7, pabfd");
  schedule->add_option("--time-weight", time_weight, "Weight of the busy-time increase");
  schedule->add_flag("--csv", csv, "Per-host CSV instead of JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*convert) {
      std::ifstream in(swf_path);
      if (!in) throw eminret::Error(eminret::ErrorCode::IoFailure, "cannot open " + swf_path);
      const eminret::SwfTrace trace = eminret::parse_swf(in);
      for (const auto& d : trace.diagnostics) {
        std::cerr << swf_path << ':' << d.line << ": " << d.message << '\n';
      }
      const auto conv = eminret::jobs_to_vms(trace.jobs, std::min(job_limit, trace.jobs.size()));
      for (const auto& d : conv.diagnostics) std::cerr << d.message << '\n';
      const std::size_t hosts = convert_hosts > 0 ? convert_hosts : std::max<std::size_t>(conv.vms.size(), 1);
      const auto fleet = eminret::make_fleet(eminret::reference_host(0), hosts);
      eminret::validate_scenario(fleet, conv.vms);
      eminret::write_scenario_file(out_path, fleet, conv.vms);
      std::cout << "wrote " << conv.vms.size() << " VMs and " << hosts << " hosts to " << out_path
                << '\n';
    } else if (*run) {
      eminret::ExperimentConfig config = eminret::read_experiment_config(config_path);
      if (!run_out.empty()) config.out_dir = run_out;
      if (!format_text.empty()) config.format = eminret::parse_report_format(format_text);
      if (workers) config.workers = std::max<std::size_t>(*workers, 1);
      if (seed) config.source.seed = *seed;
      const auto rows = eminret::run_experiment(config);
      if (config.out_dir.empty()) {
        std::cout << eminret::emit_report(rows, config.format);
      } else {
        std::cout << eminret::write_report(rows, config.format, config.out_dir) << '\n';
      }
    } else if (*oracle) {
      const eminret::Scenario scenario = load_scenario(oracle_scenario);
      const auto result = eminret::brute_force_min_busy_time(scenario);
      std::cout << eminret::oracle_result_to_json(result).dump(2) << '\n';
    } else if (*validate) {
      const eminret::Scenario scenario = load_scenario(validate_scenario_path);
      eminret::Seconds horizon = 0;
      for (const auto& v : scenario.vms) horizon = std::max(horizon, v.finish_time());
      std::cout << "ok: " << scenario.hosts.size() << " hosts, " << scenario.vms.size()
                << " VMs, horizon " << horizon << " s\n";
    } else if (*schedule) {
      const eminret::Scenario scenario = load_scenario(schedule_scenario);
      eminret::MetricWeights weights;
      weights.time = time_weight;
      const auto config = eminret::parse_scheduler_label(algorithm, weights);
      const auto outcome = eminret::evaluate(scenario, config);
      if (csv) {
        eminret::write_energy_csv(std::cout, outcome.energy);
      } else {
        nlohmann::json j = eminret::energy_report_to_json(outcome.energy);
        j["algorithm"] = algorithm;
        j["schedule"] = eminret::schedule_to_json(outcome.schedule);
        std::cout << j.dump(2) << '\n';
      }
    }
  } catch (const eminret::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
