#pragma once

// Host power model and exact energy integration over a schedule.
//
// A host draws power only while it is busy (at least one VM running). Within
// a busy interval CPU utilization is piecewise constant between VM start and
// finish events, so the integral is a finite sum over those segments.

#include <cassert>
#include <map>
#include <span>
#include <vector>

#include "eminret/model.hpp"
#include "eminret/timeline.hpp"

namespace eminret {

inline constexpr double kJoulesPerKwh = 3.6e6;

inline double joules_to_kwh(double joules) { return joules / kJoulesPerKwh; }

// Fraction of the host's aggregate MIPS allocated to VMs active at t.
inline double utilization_at(const HostSpec& host, std::span<const VmRequest> host_vms,
                             Seconds t) {
  double mips = 0;
  for (const VmRequest& v : host_vms) {
    if (v.start_time <= t && t < v.finish_time()) mips += v.demand.total_mips();
  }
  const double u = mips / host.capacity.total_mips();
  assert(u <= 1.0 + 1e-9);
  return std::clamp(u, 0.0, 1.0);
}

inline double power_at(const PowerModel& model, double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw Error(ErrorCode::UtilizationOutOfRange, "utilization " + std::to_string(u));
  }
  if (model.is_linear()) return model.idle_watts + (model.max_watts - model.idle_watts) * u;

  const auto& table = model.table;
  auto hi = std::lower_bound(table.begin(), table.end(), u,
                             [](const PowerPoint& p, double x) { return p.utilization < x; });
  if (hi == table.end()) return table.back().watts;
  if (hi->utilization == u || hi == table.begin()) return hi->watts;
  auto lo = hi - 1;
  const double frac = (u - lo->utilization) / (hi->utilization - lo->utilization);
  return lo->watts + (hi->watts - lo->watts) * frac;
}

// Energy of one host in KWh, integrated over its busy intervals only.
inline double host_energy(const HostSpec& host, std::span<const VmRequest> host_vms) {
  struct Edge {
    Seconds time;
    double mips;
    int active;
  };
  std::vector<Edge> edges;
  edges.reserve(host_vms.size() * 2);
  for (const VmRequest& v : host_vms) {
    edges.push_back({v.start_time, v.demand.total_mips(), 1});
    edges.push_back({v.finish_time(), -v.demand.total_mips(), -1});
  }
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.time < b.time; });

  const double capacity = host.capacity.total_mips();
  double joules = 0;
  double mips = 0;
  int active = 0;
  std::size_t i = 0;
  while (i < edges.size()) {
    const Seconds t = edges[i].time;
    for (; i < edges.size() && edges[i].time == t; ++i) {
      mips += edges[i].mips;
      active += edges[i].active;
    }
    if (i == edges.size() || active == 0) continue;
    const Seconds next = edges[i].time;
    const double u = std::clamp(mips / capacity, 0.0, 1.0);
    joules += power_at(host.power, u) * static_cast<double>(next - t);
  }
  return joules_to_kwh(joules);
}

// Schedule-independent dynamic energy of one VM under the linear model.
inline double vm_dynamic_energy(const HostSpec& host, const VmRequest& vm) {
  const double u = vm.demand.total_mips() / host.capacity.total_mips();
  return joules_to_kwh((host.power.max_watts - host.power.idle_watts) * u *
                       static_cast<double>(vm.duration));
}

struct EnergyReport {
  std::map<HostId, double> per_host;             // KWh
  std::map<HostId, Seconds> per_host_busy_time;  // seconds
  double total = 0;                              // KWh
  Seconds total_busy_time = 0;
  // idle_watts x total busy seconds, in KWh.
  double idle_component = 0;
  // Sum of per-VM dynamic energy for linear models; total - idle otherwise.
  double dynamic_component = 0;
};

inline EnergyReport schedule_energy(const Scenario& scenario, const Schedule& schedule) {
  if (!schedule.consistent()) {
    throw Error(ErrorCode::InfeasibleSchedule, "assignments and per-host lists disagree");
  }
  const auto index = index_by_id(scenario);
  std::map<HostId, const HostSpec*> hosts;
  for (const HostSpec& h : scenario.hosts) hosts.emplace(h.id, &h);

  EnergyReport report;
  bool all_linear = true;
  double dynamic = 0;
  for (const auto& [host_id, list] : schedule.per_host) {
    auto h = hosts.find(host_id);
    if (h == hosts.end()) {
      throw Error(ErrorCode::InfeasibleSchedule,
                  "schedule names unknown host " + std::to_string(host_id.value));
    }
    const HostSpec& host = *h->second;
    const std::vector<VmRequest> vms = vms_on(scenario, index, schedule, host_id);
    if (!host_feasible(host, vms)) {
      throw Error(ErrorCode::InfeasibleSchedule,
                  "capacity exceeded on host " + std::to_string(host_id.value));
    }
    const double kwh = host_energy(host, vms);
    const Seconds busy = host_busy_time(vms);
    report.per_host[host_id] = kwh;
    report.per_host_busy_time[host_id] = busy;
    report.total += kwh;
    report.total_busy_time += busy;
    report.idle_component += joules_to_kwh(host.power.idle_watts * static_cast<double>(busy));
    all_linear = all_linear && host.power.is_linear();
    for (const VmRequest& v : vms) dynamic += vm_dynamic_energy(host, v);
  }
  report.dynamic_component = all_linear ? dynamic : report.total - report.idle_component;
  return report;
}

}  // namespace eminret
