#pragma once

// Line-delimited JSON scenario files and JSON/CSV renderings of reports.
// Key names are documented in docs/FORMATS.md.

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "eminret/energy.hpp"
#include "eminret/model.hpp"
#include "eminret/oracle.hpp"

namespace eminret {

using nlohmann::json;

namespace detail {

inline json resources_to_json(const ResourceVector& r) {
  return json{{"cores", r.cores},     {"mips_per_core", r.mips_per_core},
              {"ram", r.ram},         {"net_bw", r.net_bw},
              {"storage", r.storage}, {"io", r.io}};
}

inline ResourceVector resources_from_json(const json& j) {
  ResourceVector r;
  r.cores = j.at("cores").get<double>();
  r.mips_per_core = j.at("mips_per_core").get<double>();
  r.ram = j.value("ram", 0.0);
  r.net_bw = j.value("net_bw", 0.0);
  r.storage = j.value("storage", 0.0);
  r.io = j.value("io", 0.0);
  return r;
}

inline json power_to_json(const PowerModel& p) {
  json j{{"idle_watts", p.idle_watts}, {"max_watts", p.max_watts}};
  if (!p.table.empty()) {
    json rows = json::array();
    for (const PowerPoint& pt : p.table) {
      rows.push_back(json{{"utilization", pt.utilization}, {"watts", pt.watts}});
    }
    j["table"] = std::move(rows);
  }
  return j;
}

inline PowerModel power_from_json(const json& j) {
  if (j.contains("table")) {
    std::vector<PowerPoint> points;
    for (const json& row : j.at("table")) {
      points.push_back({row.at("utilization").get<double>(), row.at("watts").get<double>()});
    }
    PowerModel m = PowerModel::from_table(std::move(points));
    if (j.contains("idle_watts") && j.at("idle_watts").get<double>() != m.idle_watts) {
      throw Error(ErrorCode::InvalidPowerTable, "idle_watts disagrees with table");
    }
    if (j.contains("max_watts") && j.at("max_watts").get<double>() != m.max_watts) {
      throw Error(ErrorCode::InvalidPowerTable, "max_watts disagrees with table");
    }
    return m;
  }
  return PowerModel::linear(j.at("idle_watts").get<double>(), j.at("max_watts").get<double>());
}

}  // namespace detail

inline json host_to_json(const HostSpec& h) {
  return json{{"kind", "host"},
              {"id", h.id.value},
              {"capacity", detail::resources_to_json(h.capacity)},
              {"power", detail::power_to_json(h.power)}};
}

inline HostSpec host_from_json(const json& j) {
  HostSpec h;
  h.id = HostId{j.value("id", std::int64_t{0})};
  h.capacity = detail::resources_from_json(j.at("capacity"));
  h.power = j.contains("power") ? detail::power_from_json(j.at("power")) : reference_power_table();
  return h;
}

inline json vm_to_json(const VmRequest& v) {
  return json{{"kind", "vm"},
              {"id", v.id.value},
              {"vm_type", v.vm_type},
              {"demand", detail::resources_to_json(v.demand)},
              {"start_time", v.start_time},
              {"duration", v.duration}};
}

inline VmRequest vm_from_json(const json& j) {
  VmRequest v;
  v.id = VmId{j.at("id").get<std::int64_t>()};
  v.vm_type = j.value("vm_type", kCustomVmType);
  if (j.contains("demand")) {
    v.demand = detail::resources_from_json(j.at("demand"));
  } else if (v.vm_type != kCustomVmType) {
    v.demand = catalog_demand(v.vm_type);
  } else {
    throw Error(ErrorCode::ParseError, "custom VM without demand");
  }
  v.start_time = j.at("start_time").get<Seconds>();
  v.duration = j.at("duration").get<Seconds>();
  return v;
}

// Unvalidated contents of a scenario file.
struct ScenarioFile {
  std::vector<HostSpec> hosts;
  std::vector<VmRequest> vms;
};

inline ScenarioFile read_scenario(std::istream& in) {
  ScenarioFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "vm") {
        out.vms.push_back(vm_from_json(j));
      } else if (kind == "host") {
        out.hosts.push_back(host_from_json(j));
      } else if (kind == "fleet") {
        HostSpec proto = host_from_json(j.at("host"));
        const auto count = j.at("count").get<std::size_t>();
        const auto first = j.value("first_id", std::int64_t{0});
        for (std::size_t k = 0; k < count; ++k) {
          proto.id = HostId{first + static_cast<std::int64_t>(k)};
          out.hosts.push_back(proto);
        }
      } else {
        throw Error(ErrorCode::ParseError, "unknown record kind '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ParseError && e.code() != ErrorCode::InvalidArgument &&
          e.code() != ErrorCode::InvalidPowerTable) {
        throw;
      }
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline ScenarioFile read_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  return read_scenario(in);
}

// A homogeneous fleet with ids 0..m-1 is written as a single "fleet" record.
inline void write_scenario(std::ostream& out, const std::vector<HostSpec>& hosts,
                           const std::vector<VmRequest>& vms) {
  bool compact = !hosts.empty();
  for (std::size_t i = 0; i < hosts.size() && compact; ++i) {
    compact = hosts[i].id.value == static_cast<std::int64_t>(i) &&
              hosts[i].capacity == hosts[0].capacity && hosts[i].power == hosts[0].power;
  }
  if (compact) {
    json proto = host_to_json(hosts[0]);
    proto.erase("kind");
    proto.erase("id");
    out << json{{"kind", "fleet"}, {"count", hosts.size()}, {"host", proto}}.dump() << '\n';
  } else {
    for (const HostSpec& h : hosts) out << host_to_json(h).dump() << '\n';
  }
  for (const VmRequest& v : vms) out << vm_to_json(v).dump() << '\n';
}

inline void write_scenario_file(const std::string& path, const std::vector<HostSpec>& hosts,
                                const std::vector<VmRequest>& vms) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  write_scenario(out, hosts, vms);
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

inline json schedule_to_json(const Schedule& s) {
  json assignments = json::array();
  for (const auto& [vm, host] : s.assignments) {
    assignments.push_back(json{{"vm", vm.value}, {"host", host.value}});
  }
  json unplaced = json::array();
  for (VmId v : s.unplaced) unplaced.push_back(v.value);
  return json{{"assignments", assignments}, {"unplaced", unplaced}};
}

inline json energy_report_to_json(const EnergyReport& r) {
  json hosts = json::array();
  for (const auto& [id, kwh] : r.per_host) {
    hosts.push_back(
        json{{"host_id", id.value}, {"busy_seconds", r.per_host_busy_time.at(id)}, {"kwh", kwh}});
  }
  return json{{"total_kwh", r.total},
              {"total_busy_seconds", r.total_busy_time},
              {"idle_component_kwh", r.idle_component},
              {"dynamic_component_kwh", r.dynamic_component},
              {"per_host", hosts}};
}

inline void write_energy_csv(std::ostream& out, const EnergyReport& r) {
  out << "host_id,busy_seconds,kwh\n";
  for (const auto& [id, kwh] : r.per_host) {
    std::ostringstream kwh_text;
    kwh_text.imbue(std::locale::classic());
    kwh_text.precision(12);
    kwh_text << kwh;
    out << id.value << ',' << r.per_host_busy_time.at(id) << ',' << kwh_text.str() << '\n';
  }
}

inline json oracle_result_to_json(const OracleResult& r) {
  json assignments = json::array();
  for (const auto& [vm, host] : r.best_assignment) {
    assignments.push_back(json{{"vm", vm.value}, {"host", host.value}});
  }
  return json{{"optimal_busy_seconds", r.optimal_busy_time},
              {"explored", r.explored},
              {"assignment", assignments}};
}

}  // namespace eminret
