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

#include "vve/bridge_io.hpp"
#include "vve/console_server.hpp"
#include "vve/replay.hpp"
#include "vve/session.hpp"
#include "vve/trajectory.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

namespace
{

using vve::json_io::Json;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

void install_signal_handlers()
{
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
}

/// Appends session events to per-kind JSONL files.
class EventLog
{
public:
  explicit EventLog(const std::filesystem::path & dir)
  {
    std::filesystem::create_directories(dir);
    for (const char * name : {"alert", "transition", "anchor", "command"}) {
      streams_[name].open(dir / (std::string(name) + "s.jsonl"), std::ios::app);
    }
  }

  void write(const vve::session::SessionEvent & e)
  {
    std::lock_guard lock(mutex_);
    auto & s = streams_[std::string(vve::session::to_string(e.kind))];
    s << Json{{"timestamp_us", e.timestamp_us}, {"data", e.payload}}.dump() << '\n';
    s.flush();
  }

private:
  std::mutex mutex_;
  std::map<std::string, std::ofstream> streams_;
};

struct RunArgs
{
  std::string listen{"0.0.0.0:47001"};
  std::string map_file;
  std::string config_file;
  std::string feedback_dest;
  double feedback_rate_hz{10.0};
  std::uint16_t console_port{vve::console::kDefaultConsolePort};
  bool no_console{false};
  std::string ui_dir;
  std::string log_dir;
  double tick_hz{10.0};
  double duration_s{0.0};
};

int run_live(const RunArgs & args)
{
  vve::session::SessionConfig config;
  if (!args.config_file.empty()) {
    const std::filesystem::path file(args.config_file);
    config = vve::session::parse_session_config(vve::json_io::load_json_file(file), file.parent_path());
  }
  if (!args.map_file.empty()) {
    config.map = vve::blocks::load_block_map(args.map_file);
  }
  if (!(args.tick_hz > 0.0 && args.tick_hz <= 100.0)) {
    throw vve::ConfigError("--tick-hz must be in (0, 100]");
  }

  vve::session::Session session(config);
  std::unique_ptr<EventLog> event_log;
  if (!args.log_dir.empty()) {
    event_log = std::make_unique<EventLog>(args.log_dir);
    session.subscribe([&event_log](const vve::session::SessionEvent & e) { event_log->write(e); });
  }
  session.subscribe([](const vve::session::SessionEvent & e) {
    if (e.kind == vve::session::EventKind::alert) {
      spdlog::info("alert {}", e.payload.dump());
    } else if (e.kind == vve::session::EventKind::transition) {
      spdlog::info("block transition {}", e.payload.dump());
    }
  });

  vve::wire::Listener listener(
    vve::wire::Endpoint::parse(args.listen, vve::wire::kDefaultIngestPort), session.router(), session.channel());
  listener.start();
  spdlog::info("ingest listening on udp port {}", listener.port());

  std::unique_ptr<vve::wire::Broadcaster> broadcaster;
  if (!args.feedback_dest.empty()) {
    broadcaster = std::make_unique<vve::wire::Broadcaster>(
      vve::wire::Endpoint::parse(args.feedback_dest, vve::wire::kDefaultFeedbackPort), session.registry(),
      args.feedback_rate_hz);
    broadcaster->start();
    spdlog::info("feedback to {} at {} Hz", args.feedback_dest, args.feedback_rate_hz);
  }

  std::unique_ptr<vve::console::ConsoleServer> console;
  if (!args.no_console) {
    vve::console::ConsoleOptions opts;
    opts.port = args.console_port;
    if (!args.ui_dir.empty()) {
      opts.static_dir = args.ui_dir;
    }
    console = std::make_unique<vve::console::ConsoleServer>(session, opts);
    console->start();
    spdlog::info("console on http://0.0.0.0:{}/", console->port());
  }

  install_signal_handlers();
  using clock = std::chrono::steady_clock;
  const auto period =
    std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / args.tick_hz));
  const auto start = clock::now();
  auto next = start;
  while (!g_stop) {
    session.tick(vve::wire::now_us());
    if (args.duration_s > 0.0 && clock::now() - start >= std::chrono::duration<double>(args.duration_s)) {
      break;
    }
    next += period;
    std::this_thread::sleep_until(next);
  }

  if (console) {
    console->stop();
  }
  if (broadcaster) {
    broadcaster->stop();
  }
  listener.stop();
  const auto stats = session.counters().snapshot();
  spdlog::info("stopped; received {} accepted {}", stats.received, stats.accepted);
  std::cout << vve::json_io::to_json(stats).dump() << '\n';
  return 0;
}

struct ReplayArgs
{
  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool realtime{false};
  std::optional<std::uint16_t> console_port;
};

int run_replay(const ReplayArgs & args)
{
  vve::harness::Scenario scenario = vve::harness::load_scenario(args.scenario);
  if (args.seed) {
    vve::harness::apply_seed(scenario, *args.seed);
  }
  vve::harness::ReplayOptions options;
  if (!args.out.empty()) {
    options.out_dir = args.out;
  }
  if (args.realtime) {
    const auto wall_start = std::chrono::steady_clock::now();
    const std::uint64_t virtual_start = scenario.start_time_us;
    options.pace = [wall_start, virtual_start](std::uint64_t t) {
      if (t > virtual_start) {
        std::this_thread::sleep_until(wall_start + std::chrono::microseconds(t - virtual_start));
      }
    };
  }
  vve::harness::Replayer replayer(scenario, options);
  std::unique_ptr<vve::console::ConsoleServer> console;
  if (args.console_port) {
    vve::console::ConsoleOptions opts;
    opts.port = *args.console_port;
    console = std::make_unique<vve::console::ConsoleServer>(replayer.session(), opts);
    console->start();
    spdlog::info("console on http://0.0.0.0:{}/", console->port());
  }
  const vve::harness::RunMetrics metrics = replayer.run();
  if (console) {
    console->stop();
  }
  std::cout << vve::harness::to_json(metrics).dump(2) << '\n';
  return 0;
}

struct GenArgs
{
  std::string kind{"figure_eight"};
  std::string out;
  std::string spec_file;
  double speed_mps{5.0};
  double duration_s{60.0};
  double rate_hz{10.0};
  double extent_m{20.0};
  double radius_m{10.0};
  double heading_deg{0.0};
  double origin_lat{0.0};
  double origin_lon{0.0};
  double jitter_m{0.0};
  std::uint64_t seed{0};
};

int run_gen(const GenArgs & args)
{
  const vve::frames::GeoOrigin origin(args.origin_lat, args.origin_lon);
  vve::harness::TrajectorySpec spec;
  if (!args.spec_file.empty()) {
    const std::filesystem::path file(args.spec_file);
    spec = vve::harness::parse_trajectory_spec(vve::json_io::load_json_file(file), origin, file.parent_path(), "");
  } else {
    const auto kind = vve::harness::parse_trajectory_kind(args.kind);
    if (!kind) {
      throw vve::ConfigError("unknown trajectory kind '" + args.kind + "'");
    }
    if (*kind == vve::harness::TrajectoryKind::waypoint_file) {
      throw vve::ConfigError("waypoint_file trajectories need --spec");
    }
    spec.kind = *kind;
    spec.origin = origin;
    spec.speed_mps = *kind == vve::harness::TrajectoryKind::stationary ? 0.0 : args.speed_mps;
    spec.duration_s = args.duration_s;
    spec.rate_hz = args.rate_hz;
    spec.extent_m = args.extent_m;
    spec.radius_m = args.radius_m;
    spec.heading_deg = args.heading_deg;
    spec.position_jitter_m = args.jitter_m;
    spec.seed = args.seed;
  }
  const auto poses = vve::harness::generate(spec);
  Json out_poses = Json::array();
  for (const auto & p : poses) {
    out_poses.push_back(vve::json_io::to_json(p));
  }
  const Json doc{{"spec", vve::harness::to_json(spec)}, {"poses", out_poses}};
  std::ofstream out(args.out, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw vve::ConfigError("cannot write " + args.out);
  }
  out << doc.dump(2) << '\n';
  spdlog::info("wrote {} poses to {}", poses.size(), args.out);
  return 0;
}

struct FeedArgs
{
  std::string scenario;
  std::string dest{"127.0.0.1:47001"};
  double speedup{1.0};
};

/// Streams a scenario's trajectories to a live bridge over UDP, paced by their timestamps.
int run_feed(const FeedArgs & args)
{
  const vve::harness::Scenario scenario = vve::harness::load_scenario(args.scenario);
  if (!(args.speedup > 0.0)) {
    throw vve::ConfigError("--speedup must be > 0");
  }
  struct Item
  {
    std::uint64_t t;
    vve::wire::Datagram d;
  };
  std::vector<Item> items;
  for (const auto & a : scenario.actors) {
    if (!a.trajectory) {
      continue;
    }
    for (const auto & p : vve::harness::generate(*a.trajectory)) {
      items.push_back({p.timestamp_us, vve::wire::make_datagram(a.msg_type, a.kind, a.actor_id, p, a.trajectory->speed_mps)});
    }
  }
  std::stable_sort(items.begin(), items.end(), [](const Item & a, const Item & b) { return a.t < b.t; });
  const auto dest = vve::wire::Endpoint::parse(args.dest, vve::wire::kDefaultIngestPort);
  vve::wire::UdpSocket socket;
  install_signal_handlers();
  const auto wall_start = std::chrono::steady_clock::now();
  const std::uint64_t t0 = items.empty() ? 0 : items.front().t;
  const std::uint64_t wall_t0 = vve::wire::now_us();
  std::uint64_t sent = 0;
  for (const auto & item : items) {
    if (g_stop) {
      break;
    }
    const auto offset = std::chrono::duration<double>(static_cast<double>(item.t - t0) / 1e6 / args.speedup);
    std::this_thread::sleep_until(wall_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(offset));
    vve::wire::Datagram d = item.d;
    // Restamp with wall time so a live bridge sees current fixes.
    d.timestamp_us = wall_t0 + static_cast<std::uint64_t>(static_cast<double>(item.t - t0) / args.speedup);
    if (socket.send_to(vve::wire::encode(d), dest)) {
      ++sent;
    }
  }
  spdlog::info("sent {} of {} datagrams to {}", sent, items.size(), dest.to_string());
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"vve-bridge: real/virtual pose synchronization bridge"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  RunArgs run;
  auto * run_cmd = app.add_subcommand("run", "Live bridge: UDP ingest, feedback, console");
  run_cmd->add_option("--listen", run.listen, "Ingest bind address host:port")->capture_default_str();
  run_cmd->add_option("--map", run.map_file, "Block map file")->check(CLI::ExistingFile);
  run_cmd->add_option("--config", run.config_file, "Session config file")->check(CLI::ExistingFile);
  run_cmd->add_option("--feedback-dest", run.feedback_dest, "Virtual-GPS feedback destination host:port");
  run_cmd->add_option("--feedback-rate", run.feedback_rate_hz, "Feedback rate in Hz")->capture_default_str();
  run_cmd->add_option("--console-port", run.console_port, "Console HTTP/WebSocket port")->capture_default_str();
  run_cmd->add_flag("--no-console", run.no_console, "Do not start the console service");
  run_cmd->add_option("--ui-dir", run.ui_dir, "Static console UI directory")->check(CLI::ExistingDirectory);
  run_cmd->add_option("--log-dir", run.log_dir, "Directory for alert/command/anchor event logs");
  run_cmd->add_option("--tick-hz", run.tick_hz, "Staleness/alert evaluation rate")->capture_default_str();
  run_cmd->add_option("--duration", run.duration_s, "Stop after this many seconds (0 = until signalled)");

  ReplayArgs replay;
  auto * replay_cmd = app.add_subcommand("replay", "Deterministic scenario replay on a virtual clock");
  replay_cmd->add_option("--scenario", replay.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--out", replay.out, "Output directory for logs and metrics");
  replay_cmd->add_option("--seed", replay.seed, "Override the scenario seed");
  replay_cmd->add_flag("--realtime", replay.realtime, "Pace the virtual clock with wall time");
  replay_cmd->add_option("--console-port", replay.console_port, "Serve the console during the run");

  GenArgs gen;
  auto * gen_cmd = app.add_subcommand("gen-traj", "Write a synthetic trajectory");
  gen_cmd->add_option("--kind", gen.kind, "straight, circle, figure_eight, stationary")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output file")->required();
  gen_cmd->add_option("--spec", gen.spec_file, "Trajectory spec file (overrides the flags)")->check(CLI::ExistingFile);
  gen_cmd->add_option("--speed", gen.speed_mps, "m/s")->capture_default_str();
  gen_cmd->add_option("--duration", gen.duration_s, "s")->capture_default_str();
  gen_cmd->add_option("--rate", gen.rate_hz, "Hz")->capture_default_str();
  gen_cmd->add_option("--extent", gen.extent_m, "Figure-eight amplitude, m")->capture_default_str();
  gen_cmd->add_option("--radius", gen.radius_m, "Circle radius, m")->capture_default_str();
  gen_cmd->add_option("--heading", gen.heading_deg, "Initial heading, deg clockwise from north");
  gen_cmd->add_option("--origin-lat", gen.origin_lat, "deg");
  gen_cmd->add_option("--origin-lon", gen.origin_lon, "deg");
  gen_cmd->add_option("--jitter", gen.jitter_m, "Uniform position noise, m");
  gen_cmd->add_option("--seed", gen.seed, "Noise seed");

  FeedArgs feed;
  auto * feed_cmd = app.add_subcommand("feed", "Send a scenario's trajectories to a live bridge over UDP");
  feed_cmd->add_option("--scenario", feed.scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  feed_cmd->add_option("--dest", feed.dest, "Bridge ingest address host:port")->capture_default_str();
  feed_cmd->add_option("--speedup", feed.speedup, "Playback speed factor")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_default_logger(spdlog::stderr_color_mt("vve"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*run_cmd) {
      return run_live(run);
    }
    if (*replay_cmd) {
      return run_replay(replay);
    }
    if (*gen_cmd) {
      return run_gen(gen);
    }
    if (*feed_cmd) {
      return run_feed(feed);
    }
  } catch (const vve::Error & e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::exception & e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 1;
}
