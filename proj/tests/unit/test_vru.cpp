// Copyright 2026 The vve-bridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fixtures.hpp"

#include <vve/vru_safety.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace
{

using vve::frames::Frame;
using vve::frames::PlanarPose;
using vve::vru::AlertLevel;
using vve_test::geo_at;
namespace sy = vve::sync;
namespace vru = vve::vru;

// Synthetic actor with two virtual samples one second apart.
sy::ActorState moving(sy::ActorKind kind, double x0, double y0, double x1, double y1, std::uint64_t t1_us)
{
  sy::ActorState s;
  s.kind = kind;
  s.stale = false;
  s.prev_geo = vve::frames::GeoPose{vve_test::kLat0, vve_test::kLon0, 0.0, t1_us - 1'000'000};
  s.last_geo = vve::frames::GeoPose{vve_test::kLat0, vve_test::kLon0, 0.0, t1_us};
  s.prev_virtual = PlanarPose{x0, y0, 0.0, Frame::Fc};
  s.last_virtual = PlanarPose{x1, y1, 0.0, Frame::Fc};
  return s;
}

sy::ActorState parked(double x, double y, std::uint64_t t_us)
{
  return moving(sy::ActorKind::vehicle, x, y, x, y, t_us);
}

}  // namespace

TEST(Classify, Thresholds)
{
  const vru::AlertParams p;
  EXPECT_EQ(vru::classify(50.0, std::nullopt, p), AlertLevel::none);
  EXPECT_EQ(vru::classify(15.0, std::nullopt, p), AlertLevel::none);
  EXPECT_EQ(vru::classify(14.99, std::nullopt, p), AlertLevel::caution);
  EXPECT_EQ(vru::classify(7.0, std::nullopt, p), AlertLevel::caution);
  EXPECT_EQ(vru::classify(6.99, std::nullopt, p), AlertLevel::warning);
  EXPECT_EQ(vru::classify(30.0, 4.9, p), AlertLevel::caution);
  EXPECT_EQ(vru::classify(30.0, 2.4, p), AlertLevel::warning);
}

TEST(Assess, OpeningAtFiftyMetersIsNone)
{
  const auto v = parked(0.0, 0.0, 2'000'000);
  const auto ped = moving(sy::ActorKind::pedestrian, 49.0, 0.0, 50.0, 0.0, 2'000'000);
  const auto s = vru::assess(v, ped, {}, 2'000'000);
  EXPECT_EQ(s.level, AlertLevel::none);
  EXPECT_DOUBLE_EQ(s.distance_m, 50.0);
  EXPECT_FALSE(s.ttc_s);
  EXPECT_LT(*s.closing_speed_mps, 0.0);
}

TEST(Assess, TtcFromClosingSpeed)
{
  // 10 m apart closing at 5 m/s: ttc = 10 / 5 = 2 s < 2.5 s.
  const auto v = parked(0.0, 0.0, 2'000'000);
  const auto ped = moving(sy::ActorKind::pedestrian, 15.0, 0.0, 10.0, 0.0, 2'000'000);
  const auto s = vru::assess(v, ped, {}, 2'000'000);
  ASSERT_TRUE(s.ttc_s);
  EXPECT_DOUBLE_EQ(*s.closing_speed_mps, 5.0);
  EXPECT_DOUBLE_EQ(*s.ttc_s, 2.0);
  EXPECT_EQ(s.level, AlertLevel::warning);
}

TEST(Assess, SlowClosingHasNoTtc)
{
  const auto v = parked(0.0, 0.0, 2'000'000);
  const auto ped = moving(sy::ActorKind::pedestrian, 20.05, 0.0, 20.0, 0.0, 2'000'000);
  const auto s = vru::assess(v, ped, {}, 2'000'000);
  EXPECT_FALSE(s.ttc_s);
  EXPECT_EQ(s.level, AlertLevel::none);
}

TEST(Assess, StaleActorYieldsNone)
{
  auto v = parked(0.0, 0.0, 2'000'000);
  v.stale = true;
  const auto ped = parked(1.0, 0.0, 2'000'000);
  const auto s = vru::assess(v, ped, {}, 2'000'000);
  EXPECT_EQ(s.level, AlertLevel::none);
  EXPECT_TRUE(s.stale);
}

TEST(Assess, DistanceSymmetric)
{
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const auto a = moving(sy::ActorKind::vehicle, u(rng), u(rng), u(rng), u(rng), 5'000'000);
    const auto b = moving(sy::ActorKind::pedestrian, u(rng), u(rng), u(rng), u(rng), 5'000'000);
    EXPECT_EQ(vru::assess(a, b, {}, 5'000'000).distance_m, vru::assess(b, a, {}, 5'000'000).distance_m);
    EXPECT_EQ(vru::closing_speed(a, b), vru::closing_speed(b, a));
  }
}

TEST(Assess, ParkedSuppressionIsOptIn)
{
  const auto v = parked(0.0, 0.0, 2'000'000);
  const auto ped = parked(3.0, 0.0, 2'000'000);
  vru::AlertParams p;
  EXPECT_EQ(vru::assess(v, ped, p, 2'000'000).level, AlertLevel::warning);
  p.suppress_when_parked = true;
  EXPECT_EQ(vru::assess(v, ped, p, 2'000'000).level, AlertLevel::none);
}

TEST(Hysteresis, HoldsForOneSecondAfterChange)
{
  const vru::AlertParams p;
  const auto v = parked(0.0, 0.0, 10'000'000);
  auto at = [&](double d, std::uint64_t t) {
    auto ped = parked(d, 0.0, t);
    auto veh = v;
    veh.last_geo->timestamp_us = t;
    veh.prev_geo->timestamp_us = t - 1'000'000;
    return std::pair{veh, ped};
  };
  auto [v0, p0] = at(5.0, 10'000'000);
  const auto s0 = vru::assess(v0, p0, p, 10'000'000);
  ASSERT_EQ(s0.level, AlertLevel::warning);
  EXPECT_EQ(s0.since_us, 10'000'000u);

  auto [v1, p1] = at(20.0, 10'500'000);
  const auto s1 = vru::assess(v1, p1, p, 10'500'000, s0);
  EXPECT_EQ(s1.level, AlertLevel::warning);
  EXPECT_EQ(s1.since_us, 10'000'000u);

  auto [v2, p2] = at(20.0, 10'999'999);
  EXPECT_EQ(vru::assess(v2, p2, p, 10'999'999, s1).level, AlertLevel::warning);

  auto [v3, p3] = at(20.0, 11'000'000);
  const auto s3 = vru::assess(v3, p3, p, 11'000'000, s1);
  EXPECT_EQ(s3.level, AlertLevel::none);
  EXPECT_EQ(s3.since_us, 11'000'000u);
}

TEST(Hysteresis, RandomWalkNeverDeescalatesEarly)
{
  const vru::AlertParams p;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> step(-3.0, 3.0);
  double d = 20.0;
  std::optional<vru::AlertState> prev;
  std::uint64_t last_change = 0;
  for (std::uint64_t k = 1; k < 5000; ++k) {
    const std::uint64_t t = 1'000'000 + k * 100'000;
    d = std::clamp(d + step(rng), 0.5, 40.0);
    const auto veh = parked(0.0, 0.0, t);
    const auto ped = parked(d, 0.0, t);
    const auto s = vru::assess(veh, ped, p, t, prev);
    const AlertLevel raw = vru::classify(s.distance_m, s.ttc_s, p);
    EXPECT_GE(s.level, raw);
    if (prev && s.level != prev->level) {
      if (s.level < prev->level) {
        EXPECT_GE(t - last_change, 1'000'000u);
      }
      last_change = t;
      EXPECT_EQ(s.since_us, t);
    }
    if (s.level > raw) {
      EXPECT_LT(t - s.since_us, 1'000'000u);
    }
    prev = s;
  }
}

class RegistryAlerts : public ::testing::Test
{
protected:
  // Vehicle real at (0, 0), pedestrian real at (real_north, 0); virtual placement is independent.
  void build(double real_north, double virtual_x, double shift_n = 0.0, double shift_e = 0.0)
  {
    reg.register_actor({1, sy::ActorKind::vehicle, std::nullopt, vve_test::test_origin(), std::nullopt});
    reg.register_actor({2, sy::ActorKind::pedestrian, std::nullopt, vve_test::test_origin(), std::nullopt});
    reg.reset_anchor(1, geo_at(shift_n, shift_e, 0.0, 0), {0.0, 0.0, 0.0, Frame::Fc}, 0);
    reg.reset_anchor(2, geo_at(real_north + shift_n, shift_e, 0.0, 0), {virtual_x, 0.0, 0.0, Frame::Fc}, 0);
  }
  void step(double veh_north, double ped_north, std::uint64_t t, double shift_n = 0.0, double shift_e = 0.0)
  {
    reg.update_actor(1, geo_at(veh_north + shift_n, shift_e, 0.0, t), t);
    vru::ingest_psm(reg, {2, geo_at(ped_north + shift_n, shift_e, 0.0, t), 1.0, t}, t);
    reg.tick(t);
  }
  sy::ActorRegistry reg;
  vru::AlertMonitor monitor;
};

TEST_F(RegistryAlerts, VirtualDistanceGovernsNotReal)
{
  build(25.0, 6.0);
  step(0.0, 25.0, 100'000);
  const auto transitions = monitor.evaluate(*reg.snapshot(), 100'000);
  ASSERT_EQ(transitions.size(), 1u);
  EXPECT_EQ(transitions[0].to, AlertLevel::warning);
  EXPECT_NEAR(transitions[0].distance_m, 6.0, 1e-9);
  const auto states = monitor.states();
  EXPECT_EQ(states.at({1, 2}).level, AlertLevel::warning);
}

TEST(RegistryAlertsRelativity, SharedRealOffsetChangesNothing)
{
  auto run = [](double shift_n, double shift_e) {
    sy::ActorRegistry reg;
    vru::AlertMonitor monitor;
    reg.register_actor({1, sy::ActorKind::vehicle, std::nullopt, vve_test::test_origin(), std::nullopt});
    reg.register_actor({2, sy::ActorKind::pedestrian, std::nullopt, vve_test::test_origin(), std::nullopt});
    reg.reset_anchor(1, geo_at(shift_n, shift_e, 0.0, 0), {0.0, 0.0, 0.0, Frame::Fc}, 0);
    reg.reset_anchor(2, geo_at(-30.0 + shift_n, 20.0 + shift_e, 0.0, 0), {30.0, 0.0, 180.0, Frame::Fc}, 0);
    std::vector<vru::AlertTransition> all;
    for (std::uint64_t k = 1; k <= 40; ++k) {
      const std::uint64_t t = k * 500'000;
      reg.update_actor(1, geo_at(shift_n, shift_e, 0.0, t), t);
      vru::ingest_psm(reg, {2, geo_at(-30.0 + 0.7 * static_cast<double>(k) + shift_n, 20.0 + shift_e, 0.0, t), 1.4, t},
                      t);
      reg.tick(t);
      for (auto & tr : monitor.evaluate(*reg.snapshot(), t)) {
        all.push_back(tr);
      }
    }
    return all;
  };
  const auto a = run(0.0, 0.0);
  const auto b = run(123.0, -77.0);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_FALSE(a.empty());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].timestamp_us, b[i].timestamp_us);
    EXPECT_EQ(a[i].to, b[i].to);
    EXPECT_NEAR(a[i].distance_m, b[i].distance_m, 1e-6);
  }
}

TEST(IngestPsm, FollowsPedestrianAnchor)
{
  sy::ActorRegistry reg;
  reg.register_actor({2, sy::ActorKind::pedestrian, std::nullopt, vve_test::test_origin(), std::nullopt});
  reg.reset_anchor(2, geo_at(-20.0, 0.0, 0.0, 0), {10.0, 3.0, 90.0, Frame::Fc}, 0);
  auto out = vru::ingest_psm(reg, {2, geo_at(-20.0, 0.0, 0.0, 1), 1.4, 1}, 1);
  ASSERT_EQ(out.status, sy::UpdateStatus::accepted);
  EXPECT_EQ(*out.state->last_virtual, (PlanarPose{10.0, 3.0, 90.0, Frame::Fc}));

  // 5 m along the reset heading advances 5 m along the virtual anchor heading (+y for Fc 90).
  out = vru::ingest_psm(reg, {2, geo_at(-15.0, 0.0, 0.0, 2), 1.4, 2}, 2);
  EXPECT_NEAR(out.state->last_virtual->x, 10.0, 1e-9);
  EXPECT_NEAR(out.state->last_virtual->y, 8.0, 1e-9);
  EXPECT_DOUBLE_EQ(out.state->speed_mps, 1.4);
}

TEST(IngestPsm, RejectsNonPedestrianAndBadSpeed)
{
  sy::ActorRegistry reg;
  reg.register_actor({1, sy::ActorKind::vehicle, std::nullopt, vve_test::test_origin(), std::nullopt});
  reg.register_actor({2, sy::ActorKind::pedestrian, std::nullopt, vve_test::test_origin(), std::nullopt});
  reg.reset_anchor(1, geo_at(0, 0, 0, 0), {0, 0, 0, Frame::Fc}, 0);
  reg.reset_anchor(2, geo_at(0, 0, 0, 0), {0, 0, 0, Frame::Fc}, 0);
  EXPECT_EQ(vru::ingest_psm(reg, {1, geo_at(1, 0, 0, 5), 1.0, 5}, 5).status, sy::UpdateStatus::invalid);
  EXPECT_EQ(vru::ingest_psm(reg, {2, geo_at(1, 0, 0, 5), -1.0, 5}, 5).status, sy::UpdateStatus::invalid);
  EXPECT_EQ(vru::ingest_psm(reg, {9, geo_at(1, 0, 0, 5), 1.0, 5}, 5).status, sy::UpdateStatus::unknown_actor);
}

TEST(AlertParams, ValidateRejectsInconsistent)
{
  vru::AlertParams p;
  p.warning_distance_m = 20.0;
  EXPECT_THROW(vru::validate(p), vve::ConfigError);
  p = {};
  p.hysteresis_s = -1.0;
  EXPECT_THROW(vru::validate(p), vve::ConfigError);
}
