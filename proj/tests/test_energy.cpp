#include <gtest/gtest.h>

#include <random>

#include "eminret/energy.hpp"
#include "eminret/schedulers.hpp"
#include "test_support.hpp"

using namespace eminret;
using namespace eminret::testing;

namespace {

const PowerModel kLinear = PowerModel::linear(93.7, 135.0);

HostSpec linear_host(std::int64_t id) {
  HostSpec h = reference_host(id);
  h.power = kLinear;
  return h;
}

}  // namespace

TEST(UtilizationAt, Examples) {
  const HostSpec h = reference_host(0);
  const std::vector<VmRequest> none;
  EXPECT_EQ(utilization_at(h, none, 5), 0.0);
  const std::vector<VmRequest> one = {make_catalog_vm(1, 1, 0, 100)};
  EXPECT_NEAR(utilization_at(h, one, 50), 5000.0 / 10640.0, 1e-12);
  EXPECT_EQ(utilization_at(h, one, 100), 0.0);  // finish instant is free
  VmRequest full{VmId{2}, kCustomVmType, ResourceVector{4, 2660, 1, 1, 0, 0}, 0, 10};
  EXPECT_EQ(utilization_at(h, std::vector<VmRequest>{full}, 0), 1.0);
}

TEST(PowerAt, TableRowsAreReproducedExactly) {
  const PowerModel m = reference_power_table();
  const double expected[] = {93.7, 97.0, 101.0, 105.0, 110.0, 116.0,
                             121.0, 125.0, 129.0, 133.0, 135.0};
  for (int i = 0; i <= 10; ++i) {
    EXPECT_EQ(power_at(m, i / 10.0), expected[i]) << "u=" << i / 10.0;
  }
}

TEST(PowerAt, InterpolatesBetweenBracketingRows) {
  const PowerModel m = reference_power_table();
  EXPECT_NEAR(power_at(m, 0.35), 107.5, 1e-12);
  for (int i = 0; i < 10; ++i) {
    const double u = i / 10.0 + 0.05;
    const double p = power_at(m, u);
    EXPECT_GE(p, m.table[i].watts);
    EXPECT_LE(p, m.table[i + 1].watts);
    EXPECT_NEAR(p, reference_watts(m, u), 1e-12);
  }
}

TEST(PowerAt, LinearModeAndRangeErrors) {
  EXPECT_NEAR(power_at(kLinear, 0.5), 114.35, 1e-12);
  EXPECT_EQ(power_at(kLinear, 0.0), 93.7);
  EXPECT_EQ(power_at(kLinear, 1.0), 135.0);
  try {
    power_at(kLinear, 1.5);
    FAIL() << "expected UtilizationOutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UtilizationOutOfRange);
  }
  EXPECT_THROW(power_at(kLinear, -0.1), Error);
}

TEST(HostEnergy, Examples) {
  VmRequest full{VmId{1}, kCustomVmType, ResourceVector{4, 2660, 1, 1, 0, 0}, 0, 3600};
  EXPECT_NEAR(host_energy(linear_host(0), std::vector<VmRequest>{full}), 0.135, 1e-12);
  EXPECT_EQ(host_energy(linear_host(0), std::vector<VmRequest>{}), 0.0);
}

TEST(HostEnergy, SixVmHostMatchesRiemannSum) {
  const auto vms = six_vm_example();
  const HostSpec h = unit_host(0, PowerModel::linear(1.0, 3.0));
  const std::vector<VmRequest> on = {find_vm(vms, 1), find_vm(vms, 6)};
  const double kwh = host_energy(h, on);
  // b * 10 h + a * (0.5 * 1 h + 1.0 * 9 h) with b = 1 W, a = 2 W.
  EXPECT_NEAR(kwh, (1.0 * 10 + 2.0 * (0.5 + 9.0)) / 1000.0, 1e-12);
  EXPECT_NEAR(kwh, riemann_energy_kwh(h, on), 1e-6 * kwh);
}

TEST(HostEnergy, MatchesRiemannSumOnRandomHosts) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<Seconds> pos(0, 3 * kHour);
  std::uniform_int_distribution<Seconds> len(1, 2 * kHour);
  std::uniform_int_distribution<int> type(1, 4);
  std::uniform_int_distribution<int> count(1, 6);
  int checked = 0;
  while (checked < 60) {
    std::vector<VmRequest> vms;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) vms.push_back(make_catalog_vm(i, type(rng), pos(rng), len(rng)));
    const HostSpec h = checked % 2 == 0 ? reference_host(0) : linear_host(0);
    if (!feasible_per_second(h, vms)) continue;
    const double kwh = host_energy(h, vms);
    EXPECT_NEAR(kwh, riemann_energy_kwh(h, vms), 1e-6 * kwh);
    ++checked;
  }
}

TEST(ScheduleEnergy, EmptyAndSingleHost) {
  const Scenario s = six_vm_scenario(3, PowerModel::linear(1.0, 3.0));
  const EnergyReport empty = schedule_energy(s, Schedule{});
  EXPECT_EQ(empty.total, 0.0);
  EXPECT_EQ(empty.total_busy_time, 0);

  Schedule one;
  one.assign(VmId{1}, HostId{0});
  one.assign(VmId{6}, HostId{0});
  const EnergyReport r = schedule_energy(s, one);
  EXPECT_EQ(r.total, host_energy(s.hosts[0], std::vector<VmRequest>{find_vm(s.vms, 1),
                                                                     find_vm(s.vms, 6)}));
}

TEST(ScheduleEnergy, FourteenHourScheduleBeatsTwentyHourPacking) {
  const Scenario s = six_vm_scenario(3, PowerModel::linear(1.0, 3.0));
  // S1: two hosts, 10 h each.
  Schedule s1;
  for (int id : {1, 3, 4, 5}) s1.assign(VmId{id}, HostId{0});
  for (int id : {2, 6}) s1.assign(VmId{id}, HostId{1});
  // S2: VM1 + VM6 together, the short VMs on two more hosts.
  Schedule s2;
  for (int id : {1, 6}) s2.assign(VmId{id}, HostId{0});
  for (int id : {2, 3}) s2.assign(VmId{id}, HostId{1});
  for (int id : {4, 5}) s2.assign(VmId{id}, HostId{2});
  const EnergyReport e1 = schedule_energy(s, s1);
  const EnergyReport e2 = schedule_energy(s, s2);
  EXPECT_EQ(e1.total_busy_time, 20 * kHour);
  EXPECT_EQ(e2.total_busy_time, 14 * kHour);
  EXPECT_LT(e2.total, e1.total);
  EXPECT_NEAR(e1.dynamic_component, e2.dynamic_component, 1e-12);
}

TEST(ScheduleEnergy, LinearDecompositionHolds) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Scenario s = random_small_instance(rng);
    const Schedule sched = run_scheduler(s, parse_scheduler_label("eminret-7"));
    const EnergyReport r = schedule_energy(s, sched);
    double dynamic = 0;
    for (const VmRequest& v : s.vms) {
      dynamic += (135.0 - 93.7) * v.demand.total_mips() / s.hosts[0].capacity.total_mips() *
                 static_cast<double>(v.duration) / 3.6e6;
    }
    const double idle = 93.7 * static_cast<double>(r.total_busy_time) / 3.6e6;
    EXPECT_NEAR(r.total, idle + dynamic, 1e-9 * r.total);
    EXPECT_NEAR(r.dynamic_component, dynamic, 1e-9 * dynamic);
    EXPECT_NEAR(r.idle_component, idle, 1e-9 * idle);
  }
}

TEST(ScheduleEnergy, RejectsInconsistentOrOverloadedSchedules) {
  const Scenario s = six_vm_scenario(2);
  Schedule overloaded;
  for (int id : {1, 2, 3}) overloaded.assign(VmId{id}, HostId{0});
  try {
    schedule_energy(s, overloaded);
    FAIL() << "expected InfeasibleSchedule";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InfeasibleSchedule);
  }
  Schedule unknown;
  unknown.assign(VmId{1}, HostId{42});
  EXPECT_THROW(schedule_energy(s, unknown), Error);
}
