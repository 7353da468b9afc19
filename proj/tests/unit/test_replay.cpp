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
#include "scenario_oracle.hpp"

#include <vve/error.hpp>
#include <vve/replay.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace
{

namespace h = vve::harness;
using vve::frames::Frame;
using vve::frames::PlanarPose;
using vve::json_io::Json;
using vve::vru::AlertLevel;

std::string slurp(const std::filesystem::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_lines(const std::filesystem::path & p)
{
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

Json minimal_scenario()
{
  return Json::parse(R"({
    "name": "t", "seed": 1, "duration_s": 2.0, "tick_hz": 10.0,
    "origin": {"latitude_deg": 40.0, "longitude_deg": -83.0},
    "actors": [{"id": 1, "kind": "vehicle", "virtual_initial": {"x": 0, "y": 0, "psi": 0},
                "trajectory": {"kind": "straight", "speed_mps": 2.0, "rate_hz": 10.0}}]
  })");
}

}  // namespace

TEST(Scenario, ParseDefaultsAndSeeds)
{
  const auto sc = h::load_scenario(vve_test::scenario_path("pedestrian_behind_vehicle.json"));
  EXPECT_EQ(sc.name, "pedestrian_behind_vehicle");
  ASSERT_EQ(sc.actors.size(), 2u);
  EXPECT_EQ(sc.actors[1].msg_type, vve::wire::MsgType::psm);
  EXPECT_EQ(sc.actors[0].msg_type, vve::wire::MsgType::pose);
  ASSERT_TRUE(sc.actors[1].trajectory);
  EXPECT_EQ(sc.actors[1].trajectory->duration_s, 20.0);
  EXPECT_EQ(sc.actors[1].trajectory->rate_hz, 2.0);
  EXPECT_EQ(sc.session.channel_seed, 16u);
}

TEST(Scenario, ParseRejectsBadFields)
{
  auto j = minimal_scenario();
  j["tick_hz"] = 0.0;
  EXPECT_THROW(h::parse_scenario(j, "."), vve::ConfigError);
  j = minimal_scenario();
  j["actors"][0]["msg_type"] = "smoke_signal";
  EXPECT_THROW(h::parse_scenario(j, "."), vve::ConfigError);
  j = minimal_scenario();
  j["commands"] = Json::array({Json{{"at_s", 1.0}, {"type", "teleport"}, {"actor_id", 1}}});
  EXPECT_THROW(h::parse_scenario(j, "."), vve::ConfigError);
  j = minimal_scenario();
  j["commands"] = Json::array({Json{{"at_s", -1.0}, {"type", "confirm_transition"}, {"actor_id", 1}}});
  EXPECT_THROW(h::parse_scenario(j, "."), vve::ConfigError);
}

TEST(Replay, LosslessRoundTripErrorNegligible)
{
  const auto m = h::replay(h::load_scenario(vve_test::scenario_path("figure_eight_lossless.json")));
  EXPECT_GT(m.roundtrip_samples, 0u);
  EXPECT_LE(m.rms_roundtrip_error_m, 1e-6);
  EXPECT_LE(m.max_roundtrip_error_m, 1e-6);
  EXPECT_GE(m.max_roundtrip_error_m, m.rms_roundtrip_error_m);
  EXPECT_EQ(m.channel.dropped_injected_loss, 0u);
  EXPECT_EQ(m.channel.accepted, m.datagrams_sent);
  EXPECT_EQ(m.ticks, 600u);
}

TEST(Replay, PedestrianScenarioMatchesArithmeticOracle)
{
  const auto file = vve_test::scenario_path("pedestrian_behind_vehicle.json");
  const auto oracle = vve_test::evaluate_crossing(file);
  ASSERT_TRUE(oracle.first_below_warning);
  EXPECT_GE(oracle.min_real_distance_m, 20.0);

  const auto m = h::replay(h::load_scenario(file));
  std::size_t escalations = 0;
  std::optional<std::uint64_t> warning_tick;
  for (const auto & e : m.alert_timeline) {
    if (e.transition.from == AlertLevel::caution && e.transition.to == AlertLevel::warning) {
      ++escalations;
      warning_tick = e.tick;
    }
  }
  EXPECT_EQ(escalations, 1u);
  ASSERT_TRUE(warning_tick);
  EXPECT_EQ(*warning_tick, *oracle.first_below_warning);
  ASSERT_FALSE(m.alert_timeline.empty());
  EXPECT_EQ(m.alert_timeline.front().tick, *oracle.first_below_caution);
  const double d = oracle.ticks[*warning_tick].virtual_distance_m;
  for (const auto & e : m.alert_timeline) {
    if (e.tick == *warning_tick) {
      EXPECT_NEAR(e.transition.distance_m, d, 1e-6);
    }
  }
}

TEST(Replay, DeterministicLogs)
{
  const auto sc = h::load_scenario(vve_test::scenario_path("operator_commands.json"));
  const auto a = vve_test::fresh_dir("replay_a");
  const auto b = vve_test::fresh_dir("replay_b");
  const auto ma = h::replay(sc, {a, {}});
  const auto mb = h::replay(sc, {b, {}});
  EXPECT_EQ(h::to_json(ma).dump(), h::to_json(mb).dump());
  for (const auto * name :
       {"ticks.jsonl", "alerts.jsonl", "anchors.jsonl", "commands.jsonl", "transitions.jsonl", "metrics.json"}) {
    ASSERT_TRUE(std::filesystem::exists(a / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  EXPECT_EQ(count_lines(a / "ticks.jsonl"), ma.ticks * 2);
  EXPECT_EQ(count_lines(a / "commands.jsonl"), 5u);
}

TEST(Replay, SeedChangesLossyOutcome)
{
  auto sc = h::load_scenario(vve_test::scenario_path("latency_loss.json"));
  sc.duration_s = 20.0;
  for (auto & a : sc.actors) {
    a.trajectory->duration_s = 20.0;
  }
  const auto m1 = h::replay(sc);
  h::apply_seed(sc, 43);
  const auto m2 = h::replay(sc);
  EXPECT_EQ(m1.datagrams_sent, m2.datagrams_sent);
  EXPECT_NE(h::to_json(m1).dump(), h::to_json(m2).dump());
}

TEST(Replay, LatencyAndLossMeasured)
{
  const auto m = h::replay(h::load_scenario(vve_test::scenario_path("latency_loss.json")));
  EXPECT_EQ(m.datagrams_sent, 2000u);
  EXPECT_NEAR(m.median_latency_ms, 100.0, 10.0);
  EXPECT_NEAR(m.measured_loss, 0.3, 3.0 * std::sqrt(0.3 * 0.7 / 2000.0));
  EXPECT_EQ(m.latency_samples + m.channel.dropped_injected_loss, m.datagrams_sent);
}

TEST(Replay, CommandsAppliedAndRejected)
{
  const auto m = h::replay(h::load_scenario(vve_test::scenario_path("operator_commands.json")));
  EXPECT_EQ(m.commands_applied, 4u);
  EXPECT_EQ(m.commands_rejected, 1u);
}

TEST(Replay, BlockTransitionFiresOnce)
{
  auto sc = h::load_scenario(vve_test::scenario_path("block_transition.json"));
  h::Replayer r(sc);
  const auto m = r.run();
  EXPECT_EQ(m.transitions, 1u);
  const auto events = r.session().registry().anchor_events();
  ASSERT_FALSE(events.empty());
  const auto & last = events.back();
  EXPECT_EQ(last.reason, vve::sync::AnchorReason::transition);
  EXPECT_EQ(vve::sync::real_to_virtual(last.anchor.reset_geo, last.anchor), (PlanarPose{105.0, 0.0, 0.0, Frame::Fc}));
}

TEST(Replay, HandlesVirtualOnlyActorsAndEmptyRuns)
{
  auto j = minimal_scenario();
  j["actors"].push_back(Json{{"id", 5}, {"kind", "pedestrian"}});
  j["duration_s"] = 0.0;
  j["actors"][0]["trajectory"]["duration_s"] = 0.0;
  const auto m = h::replay(h::parse_scenario(j, "."));
  EXPECT_EQ(m.ticks, 0u);
  EXPECT_EQ(m.datagrams_sent, 0u);
  EXPECT_EQ(m.rms_roundtrip_error_m, 0.0);
}

TEST(CompareTrajectories, ZeroPerturbedAndMismatched)
{
  const auto origin = vve_test::test_origin();
  const auto anchor =
    vve::sync::make_anchor(vve_test::geo_at(0, 0, 30.0), {10.0, -4.0, 15.0, Frame::Fc}, origin, 0);
  std::vector<vve::frames::GeoPose> real;
  std::vector<PlanarPose> virt;
  for (int i = 0; i < 50; ++i) {
    real.push_back(vve_test::geo_at(i * 0.8, i * 0.3, 30.0, static_cast<std::uint64_t>(i)));
    virt.push_back(vve::sync::real_to_virtual(real.back(), anchor));
  }
  const std::vector<vve::sync::SyncAnchor> one{anchor};
  auto e = h::compare_trajectories(real, virt, one);
  EXPECT_EQ(e.max_m, 0.0);
  EXPECT_EQ(e.rms_m, 0.0);
  ASSERT_EQ(e.pointwise_m.size(), 50u);

  virt[17].y += 0.05;
  e = h::compare_trajectories(real, virt, one);
  EXPECT_NEAR(e.max_m, 0.05, 1e-12);
  EXPECT_NEAR(e.pointwise_m[17], 0.05, 1e-12);
  EXPECT_NEAR(e.rms_m, 0.05 / std::sqrt(50.0), 1e-12);

  // A rigid 2 m offset of the whole virtual trajectory shows up uniformly.
  for (auto & v : virt) {
    v.x += 2.0;
  }
  virt[17].y -= 0.05;
  e = h::compare_trajectories(real, virt, one);
  EXPECT_NEAR(e.rms_m, 2.0, 1e-9);
  EXPECT_NEAR(e.max_m, 2.0, 1e-9);

  virt.pop_back();
  EXPECT_THROW(h::compare_trajectories(real, virt, one), vve::ConfigError);
}
