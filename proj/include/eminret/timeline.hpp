#pragma once

// Interval-union algebra, host busy time and time-varying capacity checks.
// All intervals are half-open [start, end).

#include <algorithm>
#include <span>
#include <vector>

#include "eminret/model.hpp"

namespace eminret {

struct Interval {
  Seconds start = 0;
  Seconds end = 0;

  Seconds length() const { return end - start; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval interval_of(const VmRequest& vm) { return {vm.start_time, vm.finish_time()}; }

// Sorted, disjoint, non-adjacent intervals of one host.
class BusyProfile {
 public:
  BusyProfile() = default;

  static BusyProfile of(std::span<const Interval> intervals) {
    std::vector<Interval> sorted;
    sorted.reserve(intervals.size());
    for (const Interval& iv : intervals) {
      if (iv.start < iv.end) sorted.push_back(iv);
    }
    std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) {
      return a.start < b.start || (a.start == b.start && a.end < b.end);
    });
    BusyProfile p;
    for (const Interval& iv : sorted) {
      if (!p.merged_.empty() && iv.start <= p.merged_.back().end) {
        p.merged_.back().end = std::max(p.merged_.back().end, iv.end);
      } else {
        p.merged_.push_back(iv);
      }
    }
    return p;
  }

  static BusyProfile of(std::span<const VmRequest> vms) {
    std::vector<Interval> ivs;
    ivs.reserve(vms.size());
    for (const VmRequest& v : vms) ivs.push_back(interval_of(v));
    return of(std::span<const Interval>(ivs));
  }

  const std::vector<Interval>& merged() const { return merged_; }

  Seconds span() const {
    Seconds total = 0;
    for (const Interval& iv : merged_) total += iv.length();
    return total;
  }

  // Length of `iv` not already covered; the busy-time increase of adding it.
  Seconds uncovered(Interval iv) const {
    if (iv.start >= iv.end) return 0;
    Seconds covered = 0;
    // First merged interval that ends after iv.start.
    auto it = std::upper_bound(merged_.begin(), merged_.end(), iv.start,
                               [](Seconds t, const Interval& m) { return t < m.end; });
    for (; it != merged_.end() && it->start < iv.end; ++it) {
      covered += std::min(it->end, iv.end) - std::max(it->start, iv.start);
    }
    return iv.length() - covered;
  }

  void add(Interval iv) {
    if (iv.start >= iv.end) return;
    auto first = std::lower_bound(merged_.begin(), merged_.end(), iv.start,
                                  [](const Interval& m, Seconds t) { return m.end < t; });
    auto last = first;
    while (last != merged_.end() && last->start <= iv.end) {
      iv.start = std::min(iv.start, last->start);
      iv.end = std::max(iv.end, last->end);
      ++last;
    }
    first = merged_.erase(first, last);
    merged_.insert(first, iv);
  }

 private:
  std::vector<Interval> merged_;
};

// Measure of the union. Order-independent; empty input gives 0.
inline Seconds span_union(std::span<const Interval> intervals) {
  return BusyProfile::of(intervals).span();
}

inline Seconds host_busy_time(std::span<const VmRequest> host_vms) {
  return BusyProfile::of(host_vms).span();
}

inline Seconds estimate_busy_time_with(std::span<const VmRequest> host_vms,
                                       const VmRequest& candidate) {
  const BusyProfile profile = BusyProfile::of(host_vms);
  return profile.span() + profile.uncovered(interval_of(candidate));
}

// Staggered overlap: a starts first, b starts before a ends, b ends after a.
inline bool overlaps(const VmRequest& a, const VmRequest& b) {
  return a.start_time < b.start_time && b.start_time < a.finish_time() &&
         a.finish_time() < b.finish_time();
}

// Same VM type means the same demand vector, not the same catalog label.
inline bool same_vm_type(const VmRequest& a, const VmRequest& b) { return a.demand == b.demand; }

namespace detail {

// Absolute slack for floating-point sums of fractional demands.
inline bool within_capacity(double used, double cap) {
  return used <= cap * (1.0 + 1e-9) + 1e-9;
}

// Running totals along every capacity-checked axis.
struct Load {
  double cores = 0;
  double mips = 0;
  double ram = 0;
  double net_bw = 0;
  double storage = 0;
  double io = 0;

  void add(const ResourceVector& d, double sign) {
    cores += sign * d.cores;
    mips += sign * d.total_mips();
    ram += sign * d.ram;
    net_bw += sign * d.net_bw;
    storage += sign * d.storage;
    io += sign * d.io;
  }

  bool fits(const ResourceVector& cap) const {
    if (!within_capacity(cores, cap.cores)) return false;
    if (!within_capacity(mips, cap.total_mips())) return false;
    if (!within_capacity(ram, cap.ram)) return false;
    if (!within_capacity(net_bw, cap.net_bw)) return false;
    if (!within_capacity(storage, cap.storage)) return false;
    if (cap.io > 0 && !within_capacity(io, cap.io)) return false;
    return true;
  }
};

struct LoadEvent {
  Seconds time;
  bool is_end;
  const ResourceVector* demand;
};

// Event sweep over the VMs that intersect `window`, with `extra` active for
// the whole window. `skip` (may be null) is left out.
template <typename Range>
bool sweep_fits(const ResourceVector& capacity, const Range& host_vms, Interval window,
                const ResourceVector& extra, const VmRequest* skip) {
  std::vector<LoadEvent> events;
  for (const VmRequest& v : host_vms) {
    if (skip != nullptr && v.id == skip->id) continue;
    if (v.start_time >= window.end || v.finish_time() <= window.start) continue;
    events.push_back({std::max(v.start_time, window.start), false, &v.demand});
    if (v.finish_time() < window.end) events.push_back({v.finish_time(), true, &v.demand});
  }
  Load load;
  load.add(extra, 1.0);
  if (events.empty()) return load.fits(capacity);
  // Ends before starts at equal times: half-open intervals do not contend.
  std::sort(events.begin(), events.end(), [](const LoadEvent& a, const LoadEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.is_end && !b.is_end;
  });
  std::size_t i = 0;
  while (i < events.size()) {
    const Seconds t = events[i].time;
    for (; i < events.size() && events[i].time == t; ++i) {
      load.add(*events[i].demand, events[i].is_end ? -1.0 : 1.0);
    }
    if (!load.fits(capacity)) return false;
  }
  return true;
}

}  // namespace detail

// True iff adding `candidate` keeps every resource within capacity at every
// instant of the candidate's interval.
inline bool feasible_with(const HostSpec& host, std::span<const VmRequest> host_vms,
                          const VmRequest& candidate) {
  return detail::sweep_fits(host.capacity, host_vms, interval_of(candidate), candidate.demand,
                            nullptr);
}

// Whole-host check: every instant within capacity.
inline bool host_feasible(const HostSpec& host, std::span<const VmRequest> host_vms) {
  for (const VmRequest& v : host_vms) {
    if (v.demand.mips_per_core > host.capacity.mips_per_core) return false;
  }
  const BusyProfile profile = BusyProfile::of(host_vms);
  for (const Interval& iv : profile.merged()) {
    if (!detail::sweep_fits(host.capacity, host_vms, iv, ResourceVector{}, nullptr)) return false;
  }
  return true;
}

}  // namespace eminret
