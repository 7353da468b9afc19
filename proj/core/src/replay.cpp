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

#include "vve/replay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <queue>
#include <set>

namespace vve::harness
{
namespace
{

using json_io::Json;

enum class EventType : std::uint8_t { deliver = 0, emit = 1, command = 2, tick = 3 };

// Ties at the same virtual time resolve by type, then by insertion order.
struct Event
{
  std::uint64_t time_us;
  EventType type;
  std::uint64_t seq;
  std::size_t index;  // emission, command or tick index
  wire::Frame frame{};
  std::uint64_t tx_us{0};

  bool operator>(const Event & o) const
  {
    if (time_us != o.time_us) {
      return time_us > o.time_us;
    }
    if (type != o.type) {
      return type > o.type;
    }
    return seq > o.seq;
  }
};

struct Emission
{
  std::uint64_t tx_us;
  std::size_t actor;
  frames::GeoPose pose;
};

class LogSink
{
public:
  explicit LogSink(const std::optional<std::filesystem::path> & dir)
  {
    if (!dir) {
      return;
    }
    std::filesystem::create_directories(*dir);
    for (const char * name : {"ticks", "alerts", "anchors", "commands", "transitions"}) {
      auto & s = streams_[name];
      s.open(*dir / (std::string(name) + ".jsonl"), std::ios::binary | std::ios::trunc);
      if (!s) {
        throw ConfigError("cannot write " + (*dir / (std::string(name) + ".jsonl")).string());
      }
    }
  }

  void write(const std::string & stream, const Json & record)
  {
    auto it = streams_.find(stream);
    if (it != streams_.end()) {
      it->second << record.dump() << '\n';
    }
  }

private:
  std::map<std::string, std::ofstream> streams_;
};

double planar_distance(const frames::PlanarPose & a, const frames::PlanarPose & b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

std::uint64_t seconds_to_us(double s) { return static_cast<std::uint64_t>(std::llround(s * 1e6)); }

}  // namespace

Scenario parse_scenario(const Json & doc, const std::filesystem::path & base_dir)
{
  Scenario sc;
  sc.session = session::parse_session_config(doc, base_dir);
  sc.name = doc.contains("name") ? json_io::require_string(doc, "name", "") : std::string("scenario");
  sc.duration_s = json_io::require_number(doc, "duration_s", "");
  if (!(sc.duration_s >= 0.0) || sc.duration_s > 86400.0) {
    throw json_io::FieldError("duration_s", "must be in [0, 86400]");
  }
  sc.tick_hz = json_io::number_or(doc, "tick_hz", 10.0, "");
  if (!(sc.tick_hz >= 1.0 && sc.tick_hz <= 1000.0)) {
    throw json_io::FieldError("tick_hz", "must be in [1, 1000]");
  }
  if (doc.contains("start_time_us")) {
    sc.start_time_us = json_io::require_uint(doc, "start_time_us", "");
  }

  const frames::GeoOrigin default_origin =
    doc.contains("origin") ? json_io::parse_origin(doc.at("origin"), "origin") : frames::GeoOrigin(0.0, 0.0);
  const std::uint64_t seed = sc.session.channel_seed;

  if (doc.contains("actors")) {
    const Json & actors = doc.at("actors");
    for (std::size_t i = 0; i < actors.size(); ++i) {
      const std::string path = "actors[" + std::to_string(i) + "]";
      const auto & reg = sc.session.actors.at(i);
      ActorScript script;
      script.actor_id = reg.actor_id;
      script.kind = reg.kind;
      script.msg_type = reg.kind == sync::ActorKind::pedestrian ? wire::MsgType::psm : wire::MsgType::pose;
      if (actors[i].contains("msg_type")) {
        const std::string t = json_io::require_string(actors[i], "msg_type", path);
        if (t == "pose") {
          script.msg_type = wire::MsgType::pose;
        } else if (t == "psm") {
          script.msg_type = wire::MsgType::psm;
        } else {
          throw json_io::FieldError(path + ".msg_type", "expected \"pose\" or \"psm\"");
        }
      }
      if (actors[i].contains("trajectory")) {
        Json traj = actors[i].at("trajectory");
        if (!traj.is_object()) {
          throw json_io::FieldError(path + ".trajectory", "expected an object");
        }
        if (!traj.contains("duration_s")) {
          traj["duration_s"] = sc.duration_s;
        }
        if (!traj.contains("start_time_us")) {
          traj["start_time_us"] = sc.start_time_us;
        }
        const bool pinned_seed = traj.contains("seed");
        script.trajectory = parse_trajectory_spec(traj, default_origin, base_dir, path + ".trajectory");
        script.seed_pinned = pinned_seed;
        if (!pinned_seed) {
          script.trajectory->seed = seed + reg.actor_id;
        }
      }
      sc.actors.push_back(std::move(script));
    }
  }

  if (doc.contains("commands")) {
    const Json & cmds = doc.at("commands");
    if (!cmds.is_array()) {
      throw json_io::FieldError("commands", "expected an array");
    }
    for (std::size_t i = 0; i < cmds.size(); ++i) {
      const std::string path = "commands[" + std::to_string(i) + "]";
      const double at_s = json_io::require_number(cmds[i], "at_s", path);
      if (!(at_s >= 0.0)) {
        throw json_io::FieldError(path + ".at_s", "must be >= 0");
      }
      Json body = cmds[i];
      body.erase("at_s");
      try {
        commands::parse_command(body);
      } catch (const commands::CommandRejected & e) {
        const auto & issue = e.issues().front();
        throw json_io::FieldError(json_io::join_path(path, issue.field), issue.reason);
      }
      sc.commands.push_back({seconds_to_us(at_s), std::move(body)});
    }
    std::stable_sort(sc.commands.begin(), sc.commands.end(), [](const auto & a, const auto & b) {
      return a.at_us < b.at_us;
    });
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path & file)
{
  return parse_scenario(json_io::load_json_file(file), file.parent_path());
}

void apply_seed(Scenario & scenario, std::uint64_t seed)
{
  scenario.session.channel_seed = seed;
  for (auto & a : scenario.actors) {
    if (a.trajectory && !a.seed_pinned) {
      a.trajectory->seed = seed + a.actor_id;
    }
  }
}

Json to_json(const RunMetrics & m)
{
  Json timeline = Json::array();
  for (const auto & e : m.alert_timeline) {
    timeline.push_back(json_io::merge_objects({{"tick", e.tick}}, json_io::to_json(e.transition)));
  }
  return {
    {"rms_roundtrip_error_m", m.rms_roundtrip_error_m},
    {"max_roundtrip_error_m", m.max_roundtrip_error_m},
    {"roundtrip_samples", m.roundtrip_samples},
    {"ticks", m.ticks},
    {"datagrams_sent", m.datagrams_sent},
    {"channel", json_io::to_json(m.channel)},
    {"measured_loss", m.measured_loss},
    {"median_latency_ms", m.median_latency_ms},
    {"mean_latency_ms", m.mean_latency_ms},
    {"latency_samples", m.latency_samples},
    {"transitions", m.transitions},
    {"commands_applied", m.commands_applied},
    {"commands_rejected", m.commands_rejected},
    {"alert_timeline", timeline}};
}

Replayer::Replayer(Scenario scenario, ReplayOptions options)
: scenario_(std::move(scenario)),
  options_(std::move(options)),
  session_(std::make_unique<session::Session>(scenario_.session))
{
}

Replayer::~Replayer() = default;

RunMetrics Replayer::run()
{
  RunMetrics metrics;
  metrics.log_dir = options_.out_dir;
  LogSink log(options_.out_dir);
  session::Session & s = *session_;

  std::vector<Emission> emissions;
  for (std::size_t i = 0; i < scenario_.actors.size(); ++i) {
    if (!scenario_.actors[i].trajectory) {
      continue;
    }
    for (const auto & pose : generate(*scenario_.actors[i].trajectory)) {
      emissions.push_back({pose.timestamp_us, i, pose});
    }
  }
  std::stable_sort(emissions.begin(), emissions.end(), [](const Emission & a, const Emission & b) {
    return a.tx_us < b.tx_us;
  });

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::uint64_t seq = 0;
  for (std::size_t i = 0; i < emissions.size(); ++i) {
    queue.push({emissions[i].tx_us, EventType::emit, seq++, i});
  }
  for (std::size_t i = 0; i < scenario_.commands.size(); ++i) {
    queue.push({scenario_.start_time_us + scenario_.commands[i].at_us, EventType::command, seq++, i});
  }
  const auto tick_count = static_cast<std::uint64_t>(std::floor(scenario_.duration_s * scenario_.tick_hz + 1e-9));
  for (std::uint64_t k = 0; k < tick_count; ++k) {
    const std::uint64_t t =
      scenario_.start_time_us + static_cast<std::uint64_t>(std::llround(static_cast<double>(k) * 1e6 / scenario_.tick_hz));
    queue.push({t, EventType::tick, seq++, static_cast<std::size_t>(k)});
  }

  std::vector<std::uint64_t> latencies;
  double sum_sq = 0.0;
  std::uint64_t current_tick = 0;

  while (!queue.empty()) {
    Event ev = queue.top();
    queue.pop();
    if (options_.pace) {
      options_.pace(ev.time_us);
    }
    switch (ev.type) {
      case EventType::emit: {
        const Emission & e = emissions[ev.index];
        const ActorScript & a = scenario_.actors[e.actor];
        const double speed = a.trajectory->speed_mps;
        const wire::Frame frame = wire::encode(wire::make_datagram(a.msg_type, a.kind, a.actor_id, e.pose, speed));
        ++metrics.datagrams_sent;
        const ChannelVerdict verdict = s.channel().next();
        if (verdict.lost) {
          s.counters().count_received(ev.time_us);
          s.counters().count_injected_loss();
          break;
        }
        queue.push({ev.time_us + verdict.delay_us, EventType::deliver, seq++, ev.index, frame, e.tx_us});
        break;
      }
      case EventType::deliver: {
        const auto routed = s.router().handle(ev.frame, ev.time_us);
        if (routed.datagram) {
          latencies.push_back(ev.time_us - routed.datagram->timestamp_us);
        }
        break;
      }
      case EventType::command: {
        const Json response = s.command(scenario_.commands[ev.index].body, ev.time_us);
        if (response.at("ok").get<bool>()) {
          ++metrics.commands_applied;
        } else {
          ++metrics.commands_rejected;
        }
        log.write(
          "commands",
          {{"tick", current_tick},
           {"t_us", ev.time_us},
           {"request", scenario_.commands[ev.index].body},
           {"response", response}});
        break;
      }
      case EventType::tick: {
        current_tick = ev.index;
        const session::TickResult result = s.tick(ev.time_us);
        ++metrics.ticks;
        for (const auto & t : result.transitions) {
          ++metrics.transitions;
          log.write("transitions", json_io::merge_objects({{"tick", current_tick}}, blocks::to_json(t)));
        }
        for (const auto & a : result.anchors) {
          log.write("anchors", json_io::merge_objects({{"tick", current_tick}}, json_io::to_json(a)));
        }
        for (const auto & a : result.alerts) {
          metrics.alert_timeline.push_back({current_tick, a});
          log.write("alerts", json_io::merge_objects({{"tick", current_tick}}, json_io::to_json(a)));
        }

        const auto snap = s.registry().snapshot();
        const blocks::BlockMap * map = s.supervisor() ? &s.supervisor()->map() : nullptr;
        for (const auto & [id, actor] : snap->actors) {
          Json row;
          row["tick"] = current_tick;
          row["t_us"] = ev.time_us;
          row["actor_id"] = id;
          row["kind"] = std::string(sync::to_string(actor->kind));
          row["stale"] = actor->stale;
          row["real"] = actor->last_geo ? json_io::to_json(*actor->last_geo) : Json(nullptr);
          row["virtual"] = actor->last_virtual ? json_io::to_json(*actor->last_virtual) : Json(nullptr);
          Json rt = nullptr;
          Json err = nullptr;
          if (actor->anchor && actor->last_virtual && actor->last_geo) {
            const frames::GeoPose back =
              sync::virtual_to_real(*actor->last_virtual, *actor->anchor, actor->last_geo->timestamp_us);
            const double d = planar_distance(
              frames::geo_to_fr(back, actor->anchor->origin),
              frames::geo_to_fr(*actor->last_geo, actor->anchor->origin));
            rt = json_io::to_json(back);
            err = d;
            sum_sq += d * d;
            metrics.max_roundtrip_error_m = std::max(metrics.max_roundtrip_error_m, d);
            ++metrics.roundtrip_samples;
          }
          row["roundtrip"] = rt;
          row["roundtrip_error_m"] = err;
          std::optional<blocks::BlockId> block;
          if (map && actor->last_virtual) {
            block = blocks::locate(*actor->last_virtual, *map);
          }
          row["block"] = block ? Json(*block) : Json(nullptr);
          log.write("ticks", row);
        }
        break;
      }
    }
  }

  if (metrics.roundtrip_samples > 0) {
    metrics.rms_roundtrip_error_m = std::sqrt(sum_sq / static_cast<double>(metrics.roundtrip_samples));
  }
  metrics.channel = s.counters().snapshot();
  if (metrics.datagrams_sent > 0) {
    metrics.measured_loss =
      static_cast<double>(metrics.channel.dropped_injected_loss) / static_cast<double>(metrics.datagrams_sent);
  }
  metrics.latency_samples = latencies.size();
  if (!latencies.empty()) {
    std::sort(latencies.begin(), latencies.end());
    const std::size_t n = latencies.size();
    const double median_us = n % 2 == 1 ? static_cast<double>(latencies[n / 2])
                                        : 0.5 * static_cast<double>(latencies[n / 2 - 1] + latencies[n / 2]);
    metrics.median_latency_ms = median_us / 1000.0;
    double total = 0.0;
    for (auto l : latencies) {
      total += static_cast<double>(l);
    }
    metrics.mean_latency_ms = total / static_cast<double>(n) / 1000.0;
  }

  if (options_.out_dir) {
    std::ofstream out(*options_.out_dir / "metrics.json", std::ios::binary | std::ios::trunc);
    out << to_json(metrics).dump(2) << '\n';
  }
  return metrics;
}

RunMetrics replay(const Scenario & scenario, const ReplayOptions & options)
{
  Replayer r(scenario, options);
  return r.run();
}

TrajectoryError compare_trajectories(
  std::span<const frames::GeoPose> real, std::span<const frames::PlanarPose> recorded_virtual,
  std::span<const sync::SyncAnchor> anchors)
{
  if (real.size() != recorded_virtual.size()) {
    throw ConfigError("real and virtual trajectories differ in length");
  }
  if (anchors.size() != 1 && anchors.size() != real.size()) {
    throw ConfigError("expected one anchor or one anchor per sample");
  }
  TrajectoryError out;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < real.size(); ++i) {
    const sync::SyncAnchor & anchor = anchors.size() == 1 ? anchors[0] : anchors[i];
    const double d = planar_distance(sync::real_to_virtual(real[i], anchor), recorded_virtual[i]);
    out.pointwise_m.push_back(d);
    out.max_m = std::max(out.max_m, d);
    sum_sq += d * d;
  }
  if (!real.empty()) {
    out.rms_m = std::sqrt(sum_sq / static_cast<double>(real.size()));
  }
  return out;
}

}  // namespace vve::harness
