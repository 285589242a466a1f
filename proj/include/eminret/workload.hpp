#pragma once

// Standard Workload Format (SWF) ingestion, job -> VM conversion and a
// seeded synthetic workload generator.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "eminret/model.hpp"

namespace eminret {

// Columns 1, 2, 3, 4, 5, 8 and 9 of an SWF record; -1 marks a missing value.
struct SwfJob {
  std::int64_t job_id = 0;
  Seconds submit_time = -1;
  Seconds wait_time = -1;
  Seconds run_time = -1;
  std::int64_t allocated_procs = -1;
  std::int64_t requested_procs = -1;
  Seconds requested_runtime = -1;

  friend bool operator==(const SwfJob&, const SwfJob&) = default;
};

struct Diagnostic {
  std::size_t line = 0;  // 1-based; 0 when not tied to an input line
  std::string message;
};

struct SwfTrace {
  std::vector<SwfJob> jobs;
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

inline bool parse_number(std::string_view token, double& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::int64_t as_whole(double x) { return x < 0 ? -1 : std::llround(x); }

}  // namespace detail

inline constexpr std::size_t kSwfMinFields = 9;

// Malformed lines are skipped and reported; a trace without a single job
// record is an error.
inline SwfTrace parse_swf(std::istream& in) {
  SwfTrace trace;
  std::set<std::int64_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    const auto first = view.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    if (view[first] == ';') continue;

    const auto fields = detail::split_ws(view);
    if (fields.size() < kSwfMinFields) {
      trace.diagnostics.push_back({line_no, "expected at least 9 fields, got " +
                                                std::to_string(fields.size())});
      continue;
    }
    double v[kSwfMinFields];
    bool ok = true;
    for (std::size_t i = 0; i < kSwfMinFields && ok; ++i) {
      if (!detail::parse_number(fields[i], v[i])) {
        trace.diagnostics.push_back(
            {line_no, "non-numeric field " + std::to_string(i + 1) + " '" + std::string(fields[i]) + "'"});
        ok = false;
      }
    }
    if (!ok) continue;

    SwfJob job;
    job.job_id = std::llround(v[0]);
    job.submit_time = detail::as_whole(v[1]);
    job.wait_time = detail::as_whole(v[2]);
    job.run_time = detail::as_whole(v[3]);
    job.allocated_procs = detail::as_whole(v[4]);
    job.requested_procs = detail::as_whole(v[7]);
    job.requested_runtime = detail::as_whole(v[8]);
    if (!seen.insert(job.job_id).second) {
      trace.diagnostics.push_back({line_no, "duplicate job id " + std::to_string(job.job_id)});
      continue;
    }
    trace.jobs.push_back(job);
  }
  if (trace.jobs.empty()) throw Error(ErrorCode::EmptyTrace, "no job records in trace");
  return trace;
}

inline SwfTrace parse_swf(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_swf(in);
}

struct Conversion {
  std::vector<VmRequest> vms;
  std::vector<Diagnostic> diagnostics;  // one per skipped (unusable) job
};

// Start = submit + wait, duration = requested runtime (else actual runtime),
// VM count = allocated procs (else requested procs). VM types are drawn from
// one round-robin counter shared by all jobs.
inline Conversion jobs_to_vms(const std::vector<SwfJob>& jobs, std::size_t limit,
                              std::int64_t first_vm_id = 0) {
  if (limit > jobs.size()) {
    throw Error(ErrorCode::InvalidArgument, "job limit " + std::to_string(limit) +
                                                " exceeds trace length " +
                                                std::to_string(jobs.size()));
  }
  Conversion out;
  std::int64_t next_id = first_vm_id;
  std::size_t round_robin = 0;
  for (std::size_t i = 0; i < limit; ++i) {
    const SwfJob& job = jobs[i];
    const Seconds duration = job.requested_runtime > 0 ? job.requested_runtime : job.run_time;
    const std::int64_t count = job.allocated_procs > 0 ? job.allocated_procs : job.requested_procs;
    if (duration <= 0 || count <= 0 || job.submit_time < 0) {
      out.diagnostics.push_back(
          {0, "JobUnusable: job " + std::to_string(job.job_id) +
                  " has no positive duration, processor count or submit time"});
      continue;
    }
    const Seconds start = job.submit_time + std::max<Seconds>(job.wait_time, 0);
    for (std::int64_t k = 0; k < count; ++k) {
      const int type = static_cast<int>(round_robin % vm_catalog().size()) + 1;
      ++round_robin;
      out.vms.push_back(make_catalog_vm(next_id++, type, start, duration));
    }
  }
  return out;
}

struct SynthParams {
  double mean_interarrival = 600.0;  // seconds, exponential
  Seconds min_duration = 600;        // log-uniform bounds
  Seconds max_duration = 12 * 3600;
  int min_procs = 1;
  int max_procs = 8;

  friend bool operator==(const SynthParams&, const SynthParams&) = default;
};

inline std::vector<SwfJob> synth_jobs(std::uint64_t seed, std::size_t n_jobs,
                                      const SynthParams& params = {}) {
  if (n_jobs < 1) throw Error(ErrorCode::InvalidArgument, "n_jobs must be >= 1");
  if (params.min_duration < 1 || params.max_duration < params.min_duration ||
      params.min_procs < 1 || params.max_procs < params.min_procs ||
      !(params.mean_interarrival >= 0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid synthetic workload parameters");
  }
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(
      params.mean_interarrival > 0 ? 1.0 / params.mean_interarrival : 1.0);
  std::uniform_real_distribution<double> log_dur(std::log(static_cast<double>(params.min_duration)),
                                                 std::log(static_cast<double>(params.max_duration)));
  std::uniform_int_distribution<int> procs(params.min_procs, params.max_procs);

  std::vector<SwfJob> jobs;
  jobs.reserve(n_jobs);
  double clock = 0;
  for (std::size_t i = 0; i < n_jobs; ++i) {
    if (i > 0 && params.mean_interarrival > 0) clock += gap(rng);
    const Seconds duration =
        std::clamp<Seconds>(std::llround(std::exp(log_dur(rng))), params.min_duration,
                            params.max_duration);
    SwfJob job;
    job.job_id = static_cast<std::int64_t>(i + 1);
    job.submit_time = std::llround(clock);
    job.wait_time = 0;
    job.run_time = duration;
    job.requested_runtime = duration;
    job.allocated_procs = procs(rng);
    job.requested_procs = job.allocated_procs;
    jobs.push_back(job);
  }
  return jobs;
}

inline std::vector<VmRequest> synth_workload(std::uint64_t seed, std::size_t n_jobs,
                                             const SynthParams& params = {}) {
  const auto jobs = synth_jobs(seed, n_jobs, params);
  return jobs_to_vms(jobs, jobs.size()).vms;
}

}  // namespace eminret
