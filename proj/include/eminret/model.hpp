#pragma once

// Domain types shared by the timeline, energy, scheduler, workload and
// oracle headers. Everything here is a plain value type.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace eminret {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ErrorCode {
  InvalidArgument,
  HeterogeneousFleet,
  InfeasibleVm,
  InvalidPowerTable,
  DuplicateId,
  UtilizationOutOfRange,
  InfeasibleSchedule,
  EmptyTrace,
  InstanceTooLarge,
  NoFeasibleAssignment,
  ConfigError,
  ParseError,
  IoFailure,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::HeterogeneousFleet: return "HeterogeneousFleet";
    case ErrorCode::InfeasibleVm: return "InfeasibleVm";
    case ErrorCode::InvalidPowerTable: return "InvalidPowerTable";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UtilizationOutOfRange: return "UtilizationOutOfRange";
    case ErrorCode::InfeasibleSchedule: return "InfeasibleSchedule";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::NoFeasibleAssignment: return "NoFeasibleAssignment";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Identifiers and time
// ---------------------------------------------------------------------------

// Whole seconds. Integer time keeps interval unions exact.
using Seconds = std::int64_t;

template <typename Tag>
struct Id {
  std::int64_t value = 0;

  constexpr Id() = default;
  constexpr explicit Id(std::int64_t v) : value(v) {}

  friend constexpr auto operator<=>(const Id&, const Id&) = default;
};

using VmId = Id<struct VmTag>;
using HostId = Id<struct HostTag>;

// ---------------------------------------------------------------------------
// Resources
// ---------------------------------------------------------------------------

// Axes used by the utilization and efficiency metrics. `cpu` is the
// aggregate computing power (cores x MIPS per core).
enum class Resource : std::size_t { cpu = 0, ram, netbw, io, storage };

inline constexpr std::array<Resource, 5> kAllResources = {
    Resource::cpu, Resource::ram, Resource::netbw, Resource::io, Resource::storage};

inline std::string_view to_string(Resource r) {
  switch (r) {
    case Resource::cpu: return "cpu";
    case Resource::ram: return "ram";
    case Resource::netbw: return "netbw";
    case Resource::io: return "io";
    case Resource::storage: return "storage";
  }
  return "?";
}

struct ResourceVector {
  double cores = 0;          // count
  double mips_per_core = 0;  // MIPS
  double ram = 0;            // MB
  double net_bw = 0;         // Mbit/s
  double storage = 0;        // GB
  double io = 0;             // abstract units; a capacity of 0 means unbounded

  friend bool operator==(const ResourceVector&, const ResourceVector&) = default;

  double total_mips() const { return cores * mips_per_core; }

  // Amount along one metric axis.
  double amount(Resource r) const {
    switch (r) {
      case Resource::cpu: return total_mips();
      case Resource::ram: return ram;
      case Resource::netbw: return net_bw;
      case Resource::io: return io;
      case Resource::storage: return storage;
    }
    return 0;
  }

  bool non_negative() const {
    return cores >= 0 && mips_per_core >= 0 && ram >= 0 && net_bw >= 0 && storage >= 0 &&
           io >= 0;
  }
};

// Demand-to-capacity ratio along an axis; unbounded axes report 0.
inline double normalized(const ResourceVector& demand, const ResourceVector& capacity,
                         Resource r) {
  const double cap = capacity.amount(r);
  if (cap <= 0) return 0.0;
  return demand.amount(r) / cap;
}

inline bool bounded(const ResourceVector& capacity, Resource r) {
  return capacity.amount(r) > 0;
}

// ---------------------------------------------------------------------------
// VM catalog
// ---------------------------------------------------------------------------

inline constexpr int kCustomVmType = 0;

// The four VM types used by the trace experiments (cores, MIPS, MB, Mbit/s, GB).
inline const std::array<ResourceVector, 4>& vm_catalog() {
  static const std::array<ResourceVector, 4> catalog = {{
      {2, 2500, 871, 100, 5, 0},
      {1, 2000, 3840, 100, 5, 0},
      {1, 1000, 1536, 100, 5, 0},
      {1, 500, 613, 100, 5, 0},
  }};
  return catalog;
}

// `type` is 1-based.
inline const ResourceVector& catalog_demand(int type) {
  if (type < 1 || type > 4) throw Error(ErrorCode::InvalidArgument, "VM type must be 1..4");
  return vm_catalog()[static_cast<std::size_t>(type - 1)];
}

struct VmRequest {
  VmId id;
  int vm_type = kCustomVmType;  // 1..4 for catalog types, 0 for custom
  ResourceVector demand;
  Seconds start_time = 0;
  Seconds duration = 1;

  Seconds finish_time() const { return start_time + duration; }

  friend bool operator==(const VmRequest&, const VmRequest&) = default;
};

inline VmRequest make_catalog_vm(std::int64_t id, int type, Seconds start, Seconds duration) {
  return VmRequest{VmId{id}, type, catalog_demand(type), start, duration};
}

// ---------------------------------------------------------------------------
// Power model
// ---------------------------------------------------------------------------

struct PowerPoint {
  double utilization = 0;
  double watts = 0;

  friend bool operator==(const PowerPoint&, const PowerPoint&) = default;
};

struct PowerModel {
  double idle_watts = 0;
  double max_watts = 0;
  std::vector<PowerPoint> table;  // empty: linear model

  friend bool operator==(const PowerModel&, const PowerModel&) = default;

  bool is_linear() const { return table.empty(); }

  static PowerModel linear(double idle, double max) { return PowerModel{idle, max, {}}; }

  static PowerModel from_table(std::vector<PowerPoint> points) {
    PowerModel m;
    if (!points.empty()) {
      m.idle_watts = points.front().watts;
      m.max_watts = points.back().watts;
    }
    m.table = std::move(points);
    return m;
  }
};

// Measured power of the reference 4-core server at 0%, 10%, ..., 100% load.
inline PowerModel reference_power_table() {
  return PowerModel::from_table({{0.0, 93.7},
                                 {0.1, 97.0},
                                 {0.2, 101.0},
                                 {0.3, 105.0},
                                 {0.4, 110.0},
                                 {0.5, 116.0},
                                 {0.6, 121.0},
                                 {0.7, 125.0},
                                 {0.8, 129.0},
                                 {0.9, 133.0},
                                 {1.0, 135.0}});
}

inline void validate_power_model(const PowerModel& m) {
  if (!(m.idle_watts > 0) || !(m.idle_watts <= m.max_watts)) {
    throw Error(ErrorCode::InvalidPowerTable, "require 0 < idle_watts <= max_watts");
  }
  if (m.table.empty()) return;
  if (m.table.size() < 2) throw Error(ErrorCode::InvalidPowerTable, "table needs >= 2 rows");
  if (m.table.front().utilization != 0.0 || m.table.back().utilization != 1.0) {
    throw Error(ErrorCode::InvalidPowerTable, "table must span utilization 0..1");
  }
  for (std::size_t i = 1; i < m.table.size(); ++i) {
    if (!(m.table[i].utilization > m.table[i - 1].utilization)) {
      throw Error(ErrorCode::InvalidPowerTable, "utilizations must be strictly increasing");
    }
    if (m.table[i].watts < m.table[i - 1].watts) {
      throw Error(ErrorCode::InvalidPowerTable, "watts must be non-decreasing");
    }
  }
  if (m.table.front().watts != m.idle_watts || m.table.back().watts != m.max_watts) {
    throw Error(ErrorCode::InvalidPowerTable, "idle/max watts must match the table ends");
  }
}

// ---------------------------------------------------------------------------
// Hosts
// ---------------------------------------------------------------------------

struct HostSpec {
  HostId id;
  ResourceVector capacity;
  PowerModel power;

  friend bool operator==(const HostSpec&, const HostSpec&) = default;
};

// 4 cores x 2660 MIPS, 8 GB RAM, 10 Gbit/s, 1 TB, with the measured power table.
inline ResourceVector reference_host_capacity() { return {4, 2660, 8192, 10000, 1000, 0}; }

inline HostSpec reference_host(std::int64_t id) {
  return HostSpec{HostId{id}, reference_host_capacity(), reference_power_table()};
}

inline std::vector<HostSpec> make_fleet(const HostSpec& prototype, std::size_t count) {
  std::vector<HostSpec> fleet;
  fleet.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    HostSpec h = prototype;
    h.id = HostId{static_cast<std::int64_t>(i)};
    fleet.push_back(std::move(h));
  }
  return fleet;
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

struct MetricWeights {
  double time = 1.0;
  std::array<double, 5> resource{940.0, 24414.0, 1.0, 0.0, 0.0001};  // cpu, ram, netbw, io, storage

  double& operator[](Resource r) { return resource[static_cast<std::size_t>(r)]; }
  double operator[](Resource r) const { return resource[static_cast<std::size_t>(r)]; }

  friend bool operator==(const MetricWeights&, const MetricWeights&) = default;

  static MetricWeights uniform(double time_weight, double resource_weight) {
    MetricWeights w;
    w.time = time_weight;
    w.resource.fill(resource_weight);
    return w;
  }
};

inline constexpr std::array<double, 5> kTimeWeightSweep = {0.001, 0.01, 1.0, 100.0, 3600.0};

inline void validate_weights(const MetricWeights& w) {
  if (!(w.time >= 0)) throw Error(ErrorCode::InvalidArgument, "time weight must be >= 0");
  for (double x : w.resource) {
    if (!(x >= 0)) throw Error(ErrorCode::InvalidArgument, "resource weights must be >= 0");
  }
}

// ---------------------------------------------------------------------------
// Scenario and schedule
// ---------------------------------------------------------------------------

struct Scenario {
  std::vector<HostSpec> hosts;  // sorted by id
  std::vector<VmRequest> vms;   // input order preserved

  friend bool operator==(const Scenario&, const Scenario&) = default;

  const VmRequest& vm(VmId id) const {
    auto it = std::find_if(vms.begin(), vms.end(), [&](const VmRequest& v) { return v.id == id; });
    if (it == vms.end()) throw Error(ErrorCode::InvalidArgument, "unknown VM id");
    return *it;
  }
};

namespace detail {

inline bool same_capacity_and_power(const HostSpec& a, const HostSpec& b) {
  return a.capacity == b.capacity && a.power == b.power;
}

// Per-core MIPS and core count must fit; every other bounded axis must fit.
inline bool fits_empty_host(const ResourceVector& demand, const ResourceVector& cap) {
  if (demand.cores > cap.cores) return false;
  if (demand.mips_per_core > cap.mips_per_core) return false;
  for (Resource r : kAllResources) {
    if (r == Resource::cpu) continue;
    if (bounded(cap, r) && demand.amount(r) > cap.amount(r)) return false;
  }
  return true;
}

}  // namespace detail

// Checks every type invariant and returns the scenario with hosts ordered by id.
inline Scenario validate_scenario(std::vector<HostSpec> hosts, std::vector<VmRequest> vms) {
  std::set<HostId> host_ids;
  for (const HostSpec& h : hosts) {
    if (!host_ids.insert(h.id).second) throw Error(ErrorCode::DuplicateId, "duplicate host id");
    if (!h.capacity.non_negative()) {
      throw Error(ErrorCode::InvalidArgument, "host capacity must be non-negative");
    }
    if (h.capacity.cores < 1 || !(h.capacity.mips_per_core > 0)) {
      throw Error(ErrorCode::InvalidArgument, "host needs >= 1 core and positive MIPS");
    }
    validate_power_model(h.power);
  }
  for (std::size_t i = 1; i < hosts.size(); ++i) {
    if (!detail::same_capacity_and_power(hosts[0], hosts[i])) {
      throw Error(ErrorCode::HeterogeneousFleet,
                  "host " + std::to_string(hosts[i].id.value) + " differs from host " +
                      std::to_string(hosts[0].id.value));
    }
  }
  std::sort(hosts.begin(), hosts.end(),
            [](const HostSpec& a, const HostSpec& b) { return a.id < b.id; });

  std::set<VmId> vm_ids;
  for (const VmRequest& v : vms) {
    if (!vm_ids.insert(v.id).second) throw Error(ErrorCode::DuplicateId, "duplicate VM id");
    if (!v.demand.non_negative()) {
      throw Error(ErrorCode::InvalidArgument, "VM demand must be non-negative");
    }
    if (v.duration <= 0 || v.start_time < 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "VM " + std::to_string(v.id.value) + " needs duration > 0 and start >= 0");
    }
    if (v.vm_type != kCustomVmType && !(v.demand == catalog_demand(v.vm_type))) {
      throw Error(ErrorCode::InvalidArgument,
                  "VM " + std::to_string(v.id.value) + " demand differs from its catalog type");
    }
    if (!hosts.empty() && !detail::fits_empty_host(v.demand, hosts.front().capacity)) {
      throw Error(ErrorCode::InfeasibleVm,
                  "VM " + std::to_string(v.id.value) + " does not fit an empty host");
    }
  }
  return Scenario{std::move(hosts), std::move(vms)};
}

inline Scenario validate_scenario(const Scenario& s) { return validate_scenario(s.hosts, s.vms); }

struct Schedule {
  std::map<VmId, HostId> assignments;
  std::map<HostId, std::vector<VmId>> per_host;
  std::vector<VmId> unplaced;

  friend bool operator==(const Schedule&, const Schedule&) = default;

  void assign(VmId vm, HostId host) {
    assignments[vm] = host;
    per_host[host].push_back(vm);
  }

  void unassign(VmId vm) {
    auto it = assignments.find(vm);
    if (it == assignments.end()) return;
    auto& list = per_host[it->second];
    list.erase(std::remove(list.begin(), list.end(), vm), list.end());
    if (list.empty()) per_host.erase(it->second);
    assignments.erase(it);
  }

  std::size_t hosts_used() const { return per_host.size(); }

  // assignments and per_host describe the same mapping.
  bool consistent() const {
    std::size_t count = 0;
    for (const auto& [host, list] : per_host) {
      if (list.empty()) return false;
      for (VmId vm : list) {
        auto it = assignments.find(vm);
        if (it == assignments.end() || it->second != host) return false;
        ++count;
      }
    }
    return count == assignments.size();
  }
};

inline std::map<VmId, std::size_t> index_by_id(const Scenario& scenario) {
  std::map<VmId, std::size_t> index;
  for (std::size_t i = 0; i < scenario.vms.size(); ++i) index.emplace(scenario.vms[i].id, i);
  return index;
}

// VMs placed on `host`, resolved against the scenario.
inline std::vector<VmRequest> vms_on(const Scenario& scenario,
                                     const std::map<VmId, std::size_t>& index,
                                     const Schedule& schedule, HostId host) {
  std::vector<VmRequest> out;
  auto it = schedule.per_host.find(host);
  if (it == schedule.per_host.end()) return out;
  out.reserve(it->second.size());
  for (VmId id : it->second) {
    auto found = index.find(id);
    if (found == index.end()) throw Error(ErrorCode::InvalidArgument, "schedule names unknown VM");
    out.push_back(scenario.vms[found->second]);
  }
  return out;
}

inline std::vector<VmRequest> vms_on(const Scenario& scenario, const Schedule& schedule,
                                     HostId host) {
  return vms_on(scenario, index_by_id(scenario), schedule, host);
}

}  // namespace eminret
