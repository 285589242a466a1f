#pragma once

// Placement algorithms for fixed-interval, non-preemptive VM requests:
//
//   eminret   - minimize the combined busy-time increase / resource efficiency
//               metric, with the same-type staggered-overlap swap step
//   mindft    - minimize the busy-time increase only
//   epobf     - maximize performance per watt
//   pabfd     - power-aware best fit decreasing
//   vbp-norm  - norm-based vector bin packing (L1 / L2)
//
// Every argmin/argmax breaks ties by the lowest host id and every VM order
// breaks ties by VM id, so a run is a pure function of (scenario, config).

#include <charconv>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eminret/energy.hpp"
#include "eminret/model.hpp"
#include "eminret/timeline.hpp"

namespace eminret {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class VmOrderKey { earliest_start, earliest_finish, longest_duration, latest_finish };
enum class HostVmKey { by_start, by_finish };

struct SortOrder {
  VmOrderKey key = VmOrderKey::earliest_start;
  HostVmKey host_vm_key = HostVmKey::by_start;

  friend bool operator==(const SortOrder&, const SortOrder&) = default;
};

enum class Algorithm { EMinRET, MinDFT, EPOBF, PABFD, VBPNorm };

struct SchedulerConfig {
  Algorithm algorithm = Algorithm::EMinRET;
  SortOrder sort;
  MetricWeights weights;
  int norm_degree = 0;  // 1 or 2 for VBPNorm, 0 otherwise
  bool swap_enabled = true;

  friend bool operator==(const SchedulerConfig&, const SchedulerConfig&) = default;
};

// EMinRET-k, k = 1..8: VM order key x host VM key.
inline SortOrder eminret_sort_order(int k) {
  if (k < 1 || k > 8) throw Error(ErrorCode::ConfigError, "EMinRET configuration must be 1..8");
  static constexpr VmOrderKey keys[] = {VmOrderKey::earliest_start, VmOrderKey::earliest_finish,
                                        VmOrderKey::longest_duration, VmOrderKey::latest_finish};
  return SortOrder{keys[(k - 1) / 2], (k - 1) % 2 == 0 ? HostVmKey::by_start : HostVmKey::by_finish};
}

inline const std::vector<std::string>& all_scheduler_labels() {
  static const std::vector<std::string> labels = {
      "pabfd",     "vbp-norm-l1", "vbp-norm-l2", "epobf-st",  "epobf-ft",
      "mindft-st", "mindft-ft",   "eminret-1",   "eminret-2", "eminret-3",
      "eminret-4", "eminret-5",   "eminret-6",   "eminret-7", "eminret-8"};
  return labels;
}

// Accepts the labels above, plus "-noswap" on EMinRET labels.
inline SchedulerConfig parse_scheduler_label(std::string_view label,
                                             const MetricWeights& weights = {}) {
  SchedulerConfig c;
  c.weights = weights;
  auto bad = [&] { return Error(ErrorCode::ConfigError, "unknown algorithm '" + std::string(label) + "'"); };
  constexpr std::string_view kNoSwap = "-noswap";
  if (label.starts_with("eminret-")) {
    std::string_view rest = label.substr(8);
    if (rest.ends_with(kNoSwap)) {
      c.swap_enabled = false;
      rest.remove_suffix(kNoSwap.size());
    }
    int k = 0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), k);
    if (ec != std::errc{} || ptr != rest.data() + rest.size() || k < 1 || k > 8) throw bad();
    c.algorithm = Algorithm::EMinRET;
    c.sort = eminret_sort_order(k);
    return c;
  }
  c.swap_enabled = false;
  if (label == "mindft-st" || label == "mindft-ft") {
    c.algorithm = Algorithm::MinDFT;
  } else if (label == "epobf-st" || label == "epobf-ft") {
    c.algorithm = Algorithm::EPOBF;
  } else if (label == "pabfd") {
    c.algorithm = Algorithm::PABFD;
    return c;
  } else if (label == "vbp-norm-l1" || label == "vbp-norm-l2") {
    c.algorithm = Algorithm::VBPNorm;
    c.norm_degree = label.back() == '1' ? 1 : 2;
    return c;
  } else {
    throw bad();
  }
  c.sort.key = label.ends_with("-st") ? VmOrderKey::earliest_start : VmOrderKey::earliest_finish;
  return c;
}

inline std::string scheduler_label(const SchedulerConfig& c) {
  switch (c.algorithm) {
    case Algorithm::PABFD: return "pabfd";
    case Algorithm::VBPNorm: return c.norm_degree == 1 ? "vbp-norm-l1" : "vbp-norm-l2";
    case Algorithm::EPOBF:
      return c.sort.key == VmOrderKey::earliest_start ? "epobf-st" : "epobf-ft";
    case Algorithm::MinDFT:
      return c.sort.key == VmOrderKey::earliest_start ? "mindft-st" : "mindft-ft";
    case Algorithm::EMinRET: {
      for (int k = 1; k <= 8; ++k) {
        if (eminret_sort_order(k) == c.sort) {
          return "eminret-" + std::to_string(k) + (c.swap_enabled ? "" : "-noswap");
        }
      }
      break;
    }
  }
  return "custom";
}

inline void validate_config(const SchedulerConfig& c) {
  validate_weights(c.weights);
  const bool vbp = c.algorithm == Algorithm::VBPNorm;
  if (vbp != (c.norm_degree == 1 || c.norm_degree == 2)) {
    throw Error(ErrorCode::ConfigError, "norm_degree must be 1|2 exactly for VBPNorm");
  }
}

// ---------------------------------------------------------------------------
// VM ordering
// ---------------------------------------------------------------------------

// Strict weak order: primary key, then finish time, then VM id.
struct VmOrderLess {
  VmOrderKey key;

  bool operator()(const VmRequest& a, const VmRequest& b) const {
    switch (key) {
      case VmOrderKey::earliest_start:
        if (a.start_time != b.start_time) return a.start_time < b.start_time;
        break;
      case VmOrderKey::earliest_finish:
        break;
      case VmOrderKey::longest_duration:
        if (a.duration != b.duration) return a.duration > b.duration;
        break;
      case VmOrderKey::latest_finish:
        if (a.finish_time() != b.finish_time()) return a.finish_time() > b.finish_time();
        break;
    }
    if (a.finish_time() != b.finish_time()) return a.finish_time() < b.finish_time();
    return a.id < b.id;
  }
};

inline std::vector<VmRequest> sort_vms(std::vector<VmRequest> vms, VmOrderKey key) {
  std::stable_sort(vms.begin(), vms.end(), VmOrderLess{key});
  return vms;
}

// Order of a host's allocated VMs when looking for a swap partner.
struct HostVmLess {
  HostVmKey key;

  bool operator()(const VmRequest& a, const VmRequest& b) const {
    if (key == HostVmKey::by_start) {
      if (a.start_time != b.start_time) return a.start_time < b.start_time;
      if (a.finish_time() != b.finish_time()) return a.finish_time() < b.finish_time();
    } else {
      if (a.finish_time() != b.finish_time()) return a.finish_time() < b.finish_time();
      if (a.start_time != b.start_time) return a.start_time < b.start_time;
    }
    return a.id < b.id;
  }
};

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

// Plain demand sum over every assigned VM divided by capacity, no temporal
// weighting, clamped to [0, 1]. Unbounded axes report 0.
inline double resource_utilization(const HostSpec& host, std::span<const VmRequest> host_vms,
                                   Resource r) {
  if (!bounded(host.capacity, r)) return 0.0;
  double sum = 0;
  for (const VmRequest& v : host_vms) sum += v.demand.amount(r);
  return std::clamp(sum / host.capacity.amount(r), 0.0, 1.0);
}

namespace detail {

inline double efficiency_from_utilization(const std::array<double, 5>& utilization,
                                          const MetricWeights& w) {
  double re = 0;
  for (Resource r : kAllResources) {
    const double term = (1.0 - utilization[static_cast<std::size_t>(r)]) * w[r];
    re += term * term;
  }
  return re;
}

inline double time_term(double difftime, const MetricWeights& w) {
  const double t = difftime * w.time;
  return t * t;
}

}  // namespace detail

inline double resource_efficiency(const HostSpec& host, std::span<const VmRequest> host_vms,
                                  const MetricWeights& weights) {
  std::array<double, 5> u{};
  for (Resource r : kAllResources) {
    u[static_cast<std::size_t>(r)] = resource_utilization(host, host_vms, r);
  }
  return detail::efficiency_from_utilization(u, weights);
}

// `host_vms` already contains the tentatively placed VM.
inline double ret_metric(Seconds difftime, const HostSpec& host,
                         std::span<const VmRequest> host_vms, const MetricWeights& weights) {
  if (difftime < 0) throw Error(ErrorCode::InvalidArgument, "difftime must be >= 0");
  return detail::time_term(static_cast<double>(difftime), weights) +
         resource_efficiency(host, host_vms, weights);
}

inline bool can_swap(const VmRequest& new_vm, const VmRequest& allocated_vm) {
  return same_vm_type(new_vm, allocated_vm) && overlaps(allocated_vm, new_vm) &&
         new_vm.duration > allocated_vm.duration;
}

// ---------------------------------------------------------------------------
// Placement engine
// ---------------------------------------------------------------------------

namespace detail {

// Mutable per-host state for one scheduler run.
class HostState {
 public:
  explicit HostState(const HostSpec& spec) : spec_(&spec) {}

  const HostSpec& spec() const { return *spec_; }
  const std::vector<VmRequest>& vms() const { return vms_; }
  const BusyProfile& profile() const { return profile_; }
  bool empty() const { return vms_.empty(); }

  // Plain demand-sum utilization from the running demand sums, with optional
  // adjustments for a tentative add / remove.
  std::array<double, 5> utilization(const VmRequest* plus, const VmRequest* minus) const {
    std::array<double, 5> u{};
    for (Resource r : kAllResources) {
      const auto i = static_cast<std::size_t>(r);
      if (!bounded(spec_->capacity, r)) continue;
      double sum = demand_sum_[i];
      if (plus != nullptr) sum += plus->demand.amount(r);
      if (minus != nullptr) sum -= minus->demand.amount(r);
      u[i] = std::clamp(sum / spec_->capacity.amount(r), 0.0, 1.0);
    }
    return u;
  }

  // Unclamped normalized residual capacity per axis.
  std::array<double, 5> residual() const {
    std::array<double, 5> res{};
    for (Resource r : kAllResources) {
      const auto i = static_cast<std::size_t>(r);
      res[i] = bounded(spec_->capacity, r) ? 1.0 - demand_sum_[i] / spec_->capacity.amount(r) : 0.0;
    }
    return res;
  }

  bool fits(const VmRequest& vm, const VmRequest* without = nullptr) const {
    return sweep_fits(spec_->capacity, vms_, interval_of(vm), vm.demand, without);
  }

  Seconds busy_time() const { return busy_; }

  // Busy time after replacing `out` with `in`.
  Seconds busy_time_swapped(const VmRequest& in, const VmRequest& out) const {
    std::vector<Interval> ivs;
    ivs.reserve(vms_.size());
    for (const VmRequest& v : vms_) {
      if (v.id != out.id) ivs.push_back(interval_of(v));
    }
    ivs.push_back(interval_of(in));
    return span_union(ivs);
  }

  void add(const VmRequest& vm) {
    vms_.push_back(vm);
    profile_.add(interval_of(vm));
    busy_ = profile_.span();
    for (Resource r : kAllResources) {
      demand_sum_[static_cast<std::size_t>(r)] += vm.demand.amount(r);
    }
  }

  void remove(VmId id) {
    auto it = std::find_if(vms_.begin(), vms_.end(), [&](const VmRequest& v) { return v.id == id; });
    if (it == vms_.end()) return;
    for (Resource r : kAllResources) {
      demand_sum_[static_cast<std::size_t>(r)] -= it->demand.amount(r);
    }
    vms_.erase(it);
    profile_ = BusyProfile::of(std::span<const VmRequest>(vms_));
    busy_ = profile_.span();
  }

 private:
  const HostSpec* spec_;
  std::vector<VmRequest> vms_;
  BusyProfile profile_;
  Seconds busy_ = 0;
  std::array<double, 5> demand_sum_{};
};

class Placement {
 public:
  explicit Placement(const Scenario& scenario) {
    hosts_.reserve(scenario.hosts.size());
    for (const HostSpec& h : scenario.hosts) hosts_.emplace_back(h);
  }

  std::vector<HostState>& hosts() { return hosts_; }
  const std::vector<HostState>& hosts() const { return hosts_; }

  void mark_unplaced(VmId id) { unplaced_.push_back(id); }

  // Identical empty hosts score identically; only the first needs a look.
  template <typename Fn>
  void for_each_candidate_host(Fn&& fn) {
    bool seen_empty = false;
    for (std::size_t j = 0; j < hosts_.size(); ++j) {
      if (hosts_[j].empty()) {
        if (seen_empty) continue;
        seen_empty = true;
      }
      fn(j, hosts_[j]);
    }
  }

  Schedule to_schedule() const {
    Schedule s;
    for (const HostState& h : hosts_) {
      for (const VmRequest& v : h.vms()) s.assign(v.id, h.spec().id);
    }
    s.unplaced = unplaced_;
    return s;
  }

 private:
  std::vector<HostState> hosts_;
  std::vector<VmId> unplaced_;
};

enum class TimeMetric { ret, difftime };

// Shared loop of EMinRET and MinDFT. `pending` must already be ordered by
// `less`; displaced VMs re-enter the remaining list at their sorted position.
//
// Terminates: each swap replaces a placed VM with a strictly longer one and
// each ordinary placement adds a VM, so the total placed duration strictly
// increases with every commit.
template <typename Less>
Schedule busy_time_greedy(const Scenario& scenario, std::vector<VmRequest> pending, Less less,
                          const MetricWeights& weights, HostVmKey host_vm_key, bool swap,
                          TimeMetric metric) {
  Placement placement(scenario);
  const HostVmLess host_less{host_vm_key};

  for (std::size_t i = 0; i < pending.size(); ++i) {
    const VmRequest vm = pending[i];
    std::optional<std::size_t> best_host;
    std::optional<VmRequest> best_swap;
    double best_score = std::numeric_limits<double>::infinity();

    placement.for_each_candidate_host([&](std::size_t j, const HostState& host) {
      const VmRequest* swap_out = nullptr;
      if (swap) {
        for (const VmRequest& allocated : host.vms()) {
          if (can_swap(vm, allocated) && (swap_out == nullptr || host_less(allocated, *swap_out))) {
            swap_out = &allocated;
          }
        }
      }
      if (!host.fits(vm, swap_out)) return;

      const Seconds before = host.busy_time();
      const Seconds after = swap_out != nullptr
                                ? host.busy_time_swapped(vm, *swap_out)
                                : before + host.profile().uncovered(interval_of(vm));
      // A swap can shrink the host's span; the metric takes the increase only.
      const Seconds difftime = std::max<Seconds>(after - before, 0);

      double score = static_cast<double>(difftime);
      if (metric == TimeMetric::ret) {
        score = time_term(static_cast<double>(difftime), weights) +
                efficiency_from_utilization(host.utilization(&vm, swap_out), weights);
      }
      if (score < best_score) {
        best_score = score;
        best_host = j;
        best_swap = swap_out != nullptr ? std::optional<VmRequest>(*swap_out) : std::nullopt;
      }
    });

    if (!best_host) {
      placement.mark_unplaced(vm.id);
      continue;
    }
    HostState& host = placement.hosts()[*best_host];
    if (best_swap) {
      host.remove(best_swap->id);
      auto pos = std::upper_bound(pending.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                  pending.end(), *best_swap, less);
      pending.insert(pos, *best_swap);
    }
    host.add(vm);
  }
  return placement.to_schedule();
}

// Generic single-pass placement: `score(host)` returns nullopt for hosts
// that cannot take the VM; the lowest score wins, ties to the lowest id.
template <typename Score>
Schedule single_pass(const Scenario& scenario, const std::vector<VmRequest>& ordered,
                     Score&& score) {
  Placement placement(scenario);
  for (const VmRequest& vm : ordered) {
    std::optional<std::size_t> best_host;
    double best = std::numeric_limits<double>::infinity();
    placement.for_each_candidate_host([&](std::size_t j, const HostState& host) {
      if (!host.fits(vm)) return;
      const double s = score(host, vm);
      if (!best_host || s < best) {
        best = s;
        best_host = j;
      }
    });
    if (best_host) {
      placement.hosts()[*best_host].add(vm);
    } else {
      placement.mark_unplaced(vm.id);
    }
  }
  return placement.to_schedule();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Algorithms
// ---------------------------------------------------------------------------

inline Schedule eminret_schedule(const Scenario& scenario, const SchedulerConfig& config) {
  return detail::busy_time_greedy(scenario, sort_vms(scenario.vms, config.sort.key),
                                  VmOrderLess{config.sort.key}, config.weights,
                                  config.sort.host_vm_key, config.swap_enabled,
                                  detail::TimeMetric::ret);
}

inline Schedule mindft_schedule(const Scenario& scenario, const SchedulerConfig& config) {
  return detail::busy_time_greedy(scenario, sort_vms(scenario.vms, config.sort.key),
                                  VmOrderLess{config.sort.key}, config.weights,
                                  config.sort.host_vm_key, false, detail::TimeMetric::difftime);
}

inline Schedule epobf_schedule(const Scenario& scenario, const SchedulerConfig& config) {
  return detail::single_pass(scenario, sort_vms(scenario.vms, config.sort.key),
                             [](const detail::HostState& host, const VmRequest&) {
                               const HostSpec& h = host.spec();
                               return -(h.capacity.total_mips() / h.power.max_watts);
                             });
}

// Decreasing requested CPU (cores x MIPS), ties by VM id.
inline std::vector<VmRequest> pabfd_order(std::vector<VmRequest> vms) {
  std::stable_sort(vms.begin(), vms.end(), [](const VmRequest& a, const VmRequest& b) {
    const double ca = a.demand.total_mips();
    const double cb = b.demand.total_mips();
    if (ca != cb) return ca > cb;
    return a.id < b.id;
  });
  return vms;
}

// Power increase is evaluated at the VM's start instant.
inline Schedule pabfd_schedule(const Scenario& scenario) {
  return detail::single_pass(
      scenario, pabfd_order(scenario.vms), [](const detail::HostState& host, const VmRequest& vm) {
        const HostSpec& h = host.spec();
        const double before = utilization_at(h, host.vms(), vm.start_time);
        const double after =
            std::clamp(before + vm.demand.total_mips() / h.capacity.total_mips(), 0.0, 1.0);
        return power_at(h.power, after) - power_at(h.power, before);
      });
}

namespace detail {

// Per-axis weights exp(mean normalized demand) over the whole VM list.
inline std::array<double, 5> ffd_avg_sum_weights(const Scenario& scenario) {
  std::array<double, 5> w{};
  if (scenario.hosts.empty()) return w;
  const ResourceVector& cap = scenario.hosts.front().capacity;
  for (Resource r : kAllResources) {
    const auto i = static_cast<std::size_t>(r);
    if (!bounded(cap, r)) continue;
    double sum = 0;
    for (const VmRequest& v : scenario.vms) sum += normalized(v.demand, cap, r);
    w[i] = std::exp(scenario.vms.empty() ? 0.0 : sum / static_cast<double>(scenario.vms.size()));
  }
  return w;
}

// Mean normalized demand over the bounded axes, quantized so that float
// noise in the sum does not decide the order.
inline std::int64_t ffd_size_key(const VmRequest& vm, const ResourceVector& cap) {
  double sum = 0;
  int axes = 0;
  for (Resource r : kAllResources) {
    if (!bounded(cap, r)) continue;
    sum += normalized(vm.demand, cap, r);
    ++axes;
  }
  return std::llround((axes == 0 ? 0.0 : sum / axes) * 1e9);
}

}  // namespace detail

inline Schedule vbp_norm_schedule(const Scenario& scenario, int degree) {
  if (degree != 1 && degree != 2) throw Error(ErrorCode::ConfigError, "norm degree must be 1 or 2");
  if (scenario.hosts.empty()) {
    Schedule s;
    for (const VmRequest& v : scenario.vms) s.unplaced.push_back(v.id);
    return s;
  }
  const ResourceVector& cap = scenario.hosts.front().capacity;
  const auto weights = detail::ffd_avg_sum_weights(scenario);

  std::vector<VmRequest> ordered = scenario.vms;
  std::stable_sort(ordered.begin(), ordered.end(), [&](const VmRequest& a, const VmRequest& b) {
    const auto ka = detail::ffd_size_key(a, cap);
    const auto kb = detail::ffd_size_key(b, cap);
    if (ka != kb) return ka > kb;
    return a.id < b.id;
  });

  return detail::single_pass(scenario, ordered, [&](const detail::HostState& host,
                                                    const VmRequest& vm) {
    const auto residual = host.residual();
    double norm = 0;
    for (Resource r : kAllResources) {
      if (!bounded(cap, r)) continue;
      const auto i = static_cast<std::size_t>(r);
      const double gap = std::abs(residual[i] - normalized(vm.demand, cap, r));
      norm += weights[i] * (degree == 1 ? gap : gap * gap);
    }
    return norm;
  });
}

inline Schedule run_scheduler(const Scenario& scenario, const SchedulerConfig& config) {
  validate_config(config);
  switch (config.algorithm) {
    case Algorithm::EMinRET: return eminret_schedule(scenario, config);
    case Algorithm::MinDFT: return mindft_schedule(scenario, config);
    case Algorithm::EPOBF: return epobf_schedule(scenario, config);
    case Algorithm::PABFD: return pabfd_schedule(scenario);
    case Algorithm::VBPNorm: return vbp_norm_schedule(scenario, config.norm_degree);
  }
  throw Error(ErrorCode::ConfigError, "unknown algorithm");
}

// Sum of host busy times of a schedule.
inline Seconds total_busy_time(const Scenario& scenario, const Schedule& schedule) {
  const auto index = index_by_id(scenario);
  Seconds total = 0;
  for (const auto& [host, list] : schedule.per_host) {
    total += host_busy_time(vms_on(scenario, index, schedule, host));
  }
  return total;
}

}  // namespace eminret
