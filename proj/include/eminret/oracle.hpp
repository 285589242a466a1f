#pragma once

// Exhaustive minimizer of the summed host busy time for small instances.

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "eminret/model.hpp"
#include "eminret/timeline.hpp"

namespace eminret {

inline constexpr std::size_t kOracleMaxVms = 10;
inline constexpr std::size_t kOracleMaxHosts = 4;

struct OracleOptions {
  // Hosts are identical, so host k is only opened once host k-1 is in use.
  bool symmetry_pruning = true;
};

struct OracleResult {
  std::map<VmId, HostId> best_assignment;
  Seconds optimal_busy_time = 0;
  std::uint64_t explored = 0;  // complete feasible assignments visited
};

// Visits every complete feasible assignment in lexicographic order of the
// host index chosen for each VM (VMs in scenario order). `visit` receives
// host indices, one per VM.
inline std::uint64_t for_each_feasible_assignment(
    const Scenario& scenario, const std::function<void(const std::vector<std::size_t>&)>& visit,
    OracleOptions options = {}) {
  const std::size_t n = scenario.vms.size();
  const std::size_t m = scenario.hosts.size();
  if (n > kOracleMaxVms || m > kOracleMaxHosts) {
    throw Error(ErrorCode::InstanceTooLarge,
                std::to_string(n) + " VMs on " + std::to_string(m) + " hosts exceeds " +
                    std::to_string(kOracleMaxVms) + "/" + std::to_string(kOracleMaxHosts));
  }
  std::vector<std::vector<VmRequest>> on_host(m);
  std::vector<std::size_t> choice(n, 0);
  std::uint64_t count = 0;

  std::function<void(std::size_t, std::size_t)> descend = [&](std::size_t i, std::size_t used) {
    if (i == n) {
      ++count;
      visit(choice);
      return;
    }
    const VmRequest& vm = scenario.vms[i];
    const std::size_t limit = options.symmetry_pruning ? std::min(m, used + 1) : m;
    for (std::size_t j = 0; j < limit; ++j) {
      if (!feasible_with(scenario.hosts[j], on_host[j], vm)) continue;
      choice[i] = j;
      on_host[j].push_back(vm);
      descend(i + 1, std::max(used, j + 1));
      on_host[j].pop_back();
    }
  };
  descend(0, 0);
  return count;
}

inline Schedule assignment_to_schedule(const Scenario& scenario,
                                       const std::vector<std::size_t>& choice) {
  Schedule s;
  for (std::size_t i = 0; i < choice.size(); ++i) {
    s.assign(scenario.vms[i].id, scenario.hosts[choice[i]].id);
  }
  return s;
}

inline Seconds assignment_busy_time(const Scenario& scenario,
                                    const std::vector<std::size_t>& choice) {
  std::vector<std::vector<Interval>> per_host(scenario.hosts.size());
  for (std::size_t i = 0; i < choice.size(); ++i) {
    per_host[choice[i]].push_back(interval_of(scenario.vms[i]));
  }
  Seconds total = 0;
  for (const auto& ivs : per_host) total += span_union(ivs);
  return total;
}

inline OracleResult brute_force_min_busy_time(const Scenario& scenario,
                                              OracleOptions options = {}) {
  std::vector<std::size_t> best;
  Seconds best_time = 0;
  bool found = false;
  const std::uint64_t explored = for_each_feasible_assignment(
      scenario,
      [&](const std::vector<std::size_t>& choice) {
        const Seconds t = assignment_busy_time(scenario, choice);
        if (!found || t < best_time) {
          found = true;
          best_time = t;
          best = choice;
        }
      },
      options);
  if (!found) throw Error(ErrorCode::NoFeasibleAssignment, "no assignment places every VM");

  OracleResult result;
  result.optimal_busy_time = best_time;
  result.explored = explored;
  for (std::size_t i = 0; i < best.size(); ++i) {
    result.best_assignment.emplace(scenario.vms[i].id, scenario.hosts[best[i]].id);
  }
  return result;
}

}  // namespace eminret
