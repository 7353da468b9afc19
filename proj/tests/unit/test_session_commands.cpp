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

#include <vve/commands.hpp>
#include <vve/session.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace
{

namespace cmd = vve::commands;
namespace se = vve::session;
using vve::frames::Frame;
using vve::frames::PlanarPose;
using vve::json_io::Json;
using vve_test::geo_at;

std::vector<cmd::Issue> issues_of(const Json & body)
{
  try {
    cmd::parse_command(body);
  } catch (const cmd::CommandRejected & e) {
    EXPECT_EQ(e.code(), cmd::RejectCode::invalid);
    return e.issues();
  }
  ADD_FAILURE() << "accepted: " << body.dump();
  return {};
}

bool has_field(const std::vector<cmd::Issue> & issues, const std::string & field)
{
  return std::any_of(issues.begin(), issues.end(), [&](const cmd::Issue & i) { return i.field == field; });
}

se::SessionConfig two_actor_config()
{
  return se::parse_session_config(Json::parse(R"({
    "seed": 5,
    "origin": {"latitude_deg": 40.0, "longitude_deg": -83.0},
    "actors": [
      {"id": 1, "kind": "vehicle", "virtual_initial": {"x": 0, "y": 0, "psi": 0}},
      {"id": 2, "kind": "pedestrian", "virtual_initial": {"x": 10, "y": 0, "psi": 0}}
    ]
  })"),
                                  ".");
}

Json pose_json(double x, double y, double psi) { return {{"x", x}, {"y", y}, {"psi", psi}}; }

class SessionTest : public ::testing::Test
{
protected:
  SessionTest() : session(two_actor_config()) {}

  void feed(vve::sync::ActorId id, double north, double east, double heading, std::uint64_t t)
  {
    session.registry().update_actor(id, geo_at(north, east, heading, t), t);
  }

  se::Session session;
};

}  // namespace

TEST(ParseCommand, CollectsFieldReasons)
{
  auto issues = issues_of(Json{{"type", "teleport"}, {"actor_id", "one"}, {"colour", 3}});
  EXPECT_TRUE(has_field(issues, "actor_id"));
  EXPECT_TRUE(has_field(issues, "pose"));
  EXPECT_TRUE(has_field(issues, "colour"));

  issues = issues_of(Json{{"type", "fly"}});
  EXPECT_TRUE(has_field(issues, "type"));
  issues = issues_of(Json::array());
  EXPECT_EQ(issues.size(), 1u);

  issues = issues_of(Json{{"type", "teleport"}, {"actor_id", 70000}, {"pose", pose_json(0, 0, 0)}});
  EXPECT_TRUE(has_field(issues, "actor_id"));

  issues = issues_of(Json{{"type", "teleport"}, {"actor_id", 1}, {"pose", pose_json(0, 0, 270)}});
  EXPECT_FALSE(issues.empty());

  issues = issues_of(Json{{"type", "set_thresholds"}, {"warning_distance_m", "near"}, {"bogus", 1}});
  EXPECT_TRUE(has_field(issues, "warning_distance_m"));
  EXPECT_TRUE(has_field(issues, "bogus"));
  issues = issues_of(Json{{"type", "set_thresholds"}});
  EXPECT_FALSE(issues.empty());

  issues = issues_of(Json{{"type", "set_channel"}, {"loss_probability", 2.0}});
  EXPECT_FALSE(issues.empty());

  issues = issues_of(Json{{"type", "spawn_actor"}, {"actor_id", 3}, {"kind", "robot"},
                          {"real", {{"latitude_deg", 40.0}, {"longitude_deg", -83.0}, {"heading_deg", 0.0}}}});
  EXPECT_TRUE(has_field(issues, "kind"));
  EXPECT_TRUE(has_field(issues, "virtual_initial"));
}

TEST(ParseCommand, CanonicalRoundTrip)
{
  const std::vector<Json> bodies = {
    {{"type", "teleport"}, {"actor_id", 2}, {"pose", pose_json(50, 0, 180)}},
    {{"type", "reset_anchor"}, {"actor_id", 1}, {"virtual_initial", pose_json(100, 50, -90)}},
    {{"type", "set_channel"}, {"fixed_delay_ms", 100.0}, {"loss_probability", 0.1}},
    {{"type", "set_thresholds"}, {"caution_distance_m", 20.0}},
    {{"type", "confirm_transition"}, {"actor_id", 4}},
    {{"type", "spawn_actor"}, {"actor_id", 9}, {"kind", "pedestrian"}, {"virtual_initial", pose_json(1, 2, 3)}},
  };
  for (const auto & b : bodies) {
    const auto c = cmd::parse_command(b);
    const auto canonical = cmd::to_json(c);
    EXPECT_EQ(cmd::to_json(cmd::parse_command(canonical)).dump(), canonical.dump()) << b.dump();
    EXPECT_EQ(std::string(cmd::command_name(c)), b.at("type").get<std::string>());
  }
}

TEST(ParseCommand, ChannelOverlay)
{
  const auto c = std::get<cmd::SetChannel>(cmd::parse_command(Json{{"type", "set_channel"}, {"jitter_ms", 7.0}}));
  const auto m = cmd::apply_overlay(c, {100.0, 1.0, 0.2});
  EXPECT_EQ(m, (vve::harness::ChannelModel{100.0, 7.0, 0.2}));
}

TEST_F(SessionTest, TeleportReflectedImmediately)
{
  feed(1, 0, 0, 0, 100);
  feed(2, 5, 0, 0, 100);
  const auto r = session.command(Json{{"type", "teleport"}, {"actor_id", 2}, {"pose", pose_json(50, 0, 180)}}, 200);
  ASSERT_TRUE(r.at("ok").get<bool>()) << r.dump();
  EXPECT_EQ(*session.registry().actor(2)->last_virtual, (PlanarPose{50.0, 0.0, 180.0, Frame::Fc}));
  const auto snap = session.snapshot_json(200);
  bool found = false;
  for (const auto & a : snap.at("actors")) {
    if (a.at("actor_id") == 2) {
      EXPECT_EQ(a.at("virtual").at("x"), 50.0);
      EXPECT_EQ(a.at("virtual").at("psi"), 180.0);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST_F(SessionTest, ResetAnchorVisibleWithoutNewFix)
{
  feed(1, 0, 0, 90.0, 100);
  feed(1, 0, 3.0, 90.0, 200);
  const auto r = session.command(
    Json{{"type", "reset_anchor"}, {"actor_id", 1}, {"virtual_initial", pose_json(100, 50, -90)}}, 300);
  ASSERT_TRUE(r.at("ok").get<bool>()) << r.dump();
  EXPECT_EQ(*session.registry().actor(1)->last_virtual, (PlanarPose{100.0, 50.0, -90.0, Frame::Fc}));
  feed(1, 0, 13.0, 90.0, 400);
  EXPECT_NEAR(session.registry().actor(1)->last_virtual->y, 40.0, 1e-9);
}

TEST_F(SessionTest, RejectionCodes)
{
  auto r = session.command(Json{{"type", "teleport"}, {"actor_id", 7}, {"pose", pose_json(0, 0, 0)}}, 1);
  EXPECT_EQ(r.at("code"), "unknown_actor");
  r = session.command(Json{{"type", "teleport"}, {"actor_id", 1}, {"pose", pose_json(0, 0, 0)}}, 1);
  EXPECT_EQ(r.at("code"), "conflict");
  r = session.command(Json{{"type", "confirm_transition"}, {"actor_id", 1}}, 1);
  EXPECT_EQ(r.at("code"), "conflict");
  r = session.command(Json{{"type", "spawn_actor"}, {"actor_id", 1}, {"kind", "vehicle"}}, 1);
  EXPECT_EQ(r.at("code"), "conflict");
  r = session.command(Json{{"type", "teleport"}}, 1);
  EXPECT_EQ(r.at("code"), "invalid");
  ASSERT_FALSE(r.at("errors").empty());
  EXPECT_TRUE(r.at("errors")[0].contains("field"));
  EXPECT_TRUE(r.at("errors")[0].contains("reason"));
  EXPECT_TRUE(session.command_log().empty());
}

TEST_F(SessionTest, SetChannelLossIsBinomial)
{
  const auto r = session.command(Json{{"type", "set_channel"}, {"loss_probability", 0.5}}, 1);
  ASSERT_TRUE(r.at("ok").get<bool>());
  constexpr int n = 10000;
  int lost = 0;
  for (int i = 0; i < n; ++i) {
    lost += session.channel().next().lost;
  }
  EXPECT_NEAR(static_cast<double>(lost) / n, 0.5, 3.0 * std::sqrt(0.25 / n));
}

TEST_F(SessionTest, SetThresholdsChangesClassification)
{
  feed(1, 0, 0, 0, 100);
  feed(2, 0, 0, 0, 100);
  // Pedestrian anchored 10 m ahead of the parked vehicle.
  auto t = session.tick(100);
  ASSERT_EQ(t.alerts.size(), 1u);
  EXPECT_EQ(t.alerts[0].to, vve::vru::AlertLevel::caution);
  session.command(Json{{"type", "set_thresholds"}, {"warning_distance_m", 12.0}}, 150);
  EXPECT_EQ(session.alert_monitor().params().warning_distance_m, 12.0);
  t = session.tick(200);
  ASSERT_EQ(t.alerts.size(), 1u);
  EXPECT_EQ(t.alerts[0].to, vve::vru::AlertLevel::warning);
  const auto r = session.command(Json{{"type", "set_thresholds"}, {"warning_distance_m", 99.0}}, 250);
  EXPECT_EQ(r.at("code"), "invalid");
  EXPECT_EQ(session.alert_monitor().params().warning_distance_m, 12.0);
}

TEST_F(SessionTest, SpawnWithRealAnchorsImmediately)
{
  const Json real = vve::json_io::to_json(geo_at(20, 0, 0, 10));
  const auto r = session.command(Json{{"type", "spawn_actor"},
                                      {"actor_id", 3},
                                      {"kind", "pedestrian"},
                                      {"virtual_initial", pose_json(1, 2, 3)},
                                      {"real", real}},
                                 10);
  ASSERT_TRUE(r.at("ok").get<bool>()) << r.dump();
  EXPECT_EQ(*session.registry().actor(3)->last_virtual, (PlanarPose{1.0, 2.0, 3.0, Frame::Fc}));
}

TEST_F(SessionTest, CommandLogReplaysToIdenticalAnchors)
{
  feed(1, 0, 0, 0, 100);
  feed(2, 5, 0, 10, 100);
  session.command(Json{{"type", "teleport"}, {"actor_id", 2}, {"pose", pose_json(50, 0, 180)}}, 200);
  feed(1, 4, 4, 45, 300);
  session.command(Json{{"type", "reset_anchor"}, {"actor_id", 1}, {"virtual_initial", pose_json(100, 50, -90)}}, 400);
  session.command(Json{{"type", "spawn_actor"},
                       {"actor_id", 3},
                       {"kind", "vehicle"},
                       {"virtual_initial", pose_json(7, 7, 7)},
                       {"real", vve::json_io::to_json(geo_at(1, 1, 1, 450))}},
                  450);
  session.command(Json{{"type", "set_channel"}, {"fixed_delay_ms", 3.0}}, 500);

  // Serialize and parse the log to mimic reconstruction from commands.jsonl.
  std::vector<se::CommandRecord> log;
  for (const auto & rec : session.command_log()) {
    log.push_back(se::parse_command_record(Json::parse(se::to_json(rec).dump())));
  }
  ASSERT_EQ(log.size(), 4u);

  vve::sync::ActorRegistry rebuilt;
  for (const auto & reg : two_actor_config().actors) {
    rebuilt.register_actor(reg);
  }
  // First-fix anchors come from data, not commands.
  for (const auto & ev : session.registry().anchor_events()) {
    if (ev.reason == vve::sync::AnchorReason::reset && ev.timestamp_us == 100) {
      rebuilt.reset_anchor(ev.actor_id, ev.anchor.reset_geo, ev.anchor.virtual_initial, ev.timestamp_us);
    }
  }
  se::replay_command_log(rebuilt, log);
  for (vve::sync::ActorId id : {1, 2, 3}) {
    ASSERT_TRUE(rebuilt.actor(id)) << id;
    EXPECT_EQ(*rebuilt.actor(id)->anchor, *session.registry().actor(id)->anchor) << id;
  }
}

TEST_F(SessionTest, ObserversSeeCommandsAndAnchors)
{
  std::vector<se::EventKind> kinds;
  const auto token = session.subscribe([&](const se::SessionEvent & e) { kinds.push_back(e.kind); });
  feed(2, 5, 0, 10, 100);
  session.command(Json{{"type", "teleport"}, {"actor_id", 2}, {"pose", pose_json(50, 0, 180)}}, 200);
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), se::EventKind::command), kinds.end());
  EXPECT_NE(std::find(kinds.begin(), kinds.end(), se::EventKind::anchor), kinds.end());
  session.unsubscribe(token);
  const auto n = kinds.size();
  session.command(Json{{"type", "set_channel"}, {"jitter_ms", 1.0}}, 300);
  EXPECT_EQ(kinds.size(), n);
}

TEST_F(SessionTest, SnapshotShape)
{
  feed(1, 0, 0, 0, 100);
  const auto s = session.snapshot_json(150);
  for (const auto * key : {"server_time_us", "version", "actors", "alerts", "pending_transitions", "channel",
                           "thresholds", "transition_policy", "commands_applied"}) {
    EXPECT_TRUE(s.contains(key)) << key;
  }
  EXPECT_EQ(s.at("server_time_us"), 150u);
  EXPECT_EQ(s.at("actors").size(), 2u);
  // No block map configured.
  EXPECT_TRUE(s.at("transition_policy").is_null());
  EXPECT_TRUE(s.at("map").is_null());
}

TEST(SessionConfig, RejectsBadInput)
{
  EXPECT_THROW(se::parse_session_config(Json::parse(R"({"channel": {"loss_probability": -1}})"), "."),
               vve::ConfigError);
  EXPECT_THROW(se::parse_session_config(Json::parse(R"({"transition_policy": "sometimes"})"), "."),
               vve::ConfigError);
  EXPECT_THROW(
    se::parse_session_config(Json::parse(R"({"actors": [{"id": 1, "kind": "vehicle"}, {"id": 1, "kind": "vehicle"}]})"),
                             "."),
    vve::ConfigError);
  EXPECT_THROW(se::parse_session_config(Json::parse(R"({"map_file": "nope.json"})"), "."), vve::ConfigError);
}
