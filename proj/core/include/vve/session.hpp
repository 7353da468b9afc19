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

#ifndef VVE__SESSION_HPP_
#define VVE__SESSION_HPP_

#include "vve/blocks.hpp"
#include "vve/bridge_io.hpp"
#include "vve/channel.hpp"
#include "vve/commands.hpp"
#include "vve/json_io.hpp"
#include "vve/sync.hpp"
#include "vve/vru_safety.hpp"
#include "vve/wire.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace vve::session
{

struct SessionConfig
{
  sync::RegistryConfig registry;
  vru::AlertParams alerts;
  harness::ChannelModel channel;
  std::uint64_t channel_seed{0};
  wire::RouterConfig router;
  std::optional<blocks::BlockMap> map;
  blocks::TransitionPolicy transition_policy{blocks::TransitionPolicy::manual_confirm};
  std::uint64_t transition_cooldown_us{5'000'000};
  std::vector<sync::ActorRegistration> actors;
};

/// Reads the live-mode config file (docs/scenario.md, "session config").
SessionConfig parse_session_config(
  const json_io::Json & doc, const std::filesystem::path & base_dir);

enum class EventKind : std::uint8_t { alert, transition, anchor, command };

std::string_view to_string(EventKind kind);

struct SessionEvent
{
  EventKind kind;
  std::uint64_t timestamp_us;
  json_io::Json payload;
};

struct CommandRecord
{
  std::uint64_t seq{0};
  std::uint64_t timestamp_us{0};
  std::string source;  // "operator" or "auto"
  json_io::Json request;
  json_io::Json resolved;  // anchor-changing commands: the exact real/virtual pair applied
};

json_io::Json to_json(const CommandRecord & record);
CommandRecord parse_command_record(const json_io::Json & obj);

struct TickResult
{
  std::vector<vru::AlertTransition> alerts;
  std::vector<blocks::TransitionEvent> transitions;
  std::vector<sync::AnchorEvent> anchors;
};

/// One bridge session: registry, ingest path, alerting, block supervision and the command log.
/// Commands and ticks are applied one at a time in arrival order; ingest and snapshot reads run
/// concurrently with both.
class Session
{
public:
  explicit Session(SessionConfig config);
  Session(const Session &) = delete;
  Session & operator=(const Session &) = delete;

  sync::ActorRegistry & registry() { return registry_; }
  const sync::ActorRegistry & registry() const { return registry_; }
  wire::ChannelCounters & counters() { return counters_; }
  wire::DatagramRouter & router() { return router_; }
  harness::ChannelSimulator & channel() { return channel_; }
  const vru::AlertMonitor & alert_monitor() const { return alerts_; }
  const blocks::BlockSupervisor * supervisor() const { return supervisor_.get(); }

  /// Staleness, block transitions, then alerts, against one snapshot time.
  TickResult tick(std::uint64_t now_us);

  /// Parses, applies and logs a request. Returns {"ok": true, "seq", "result"} or the rejection.
  json_io::Json command(const json_io::Json & body, std::uint64_t now_us);

  /// Throws commands::CommandRejected.
  json_io::Json apply(const commands::Command & command, std::uint64_t now_us);

  json_io::Json snapshot_json(std::uint64_t now_us) const;
  json_io::Json actor_json(sync::ActorId id) const;

  std::vector<CommandRecord> command_log() const;

  using Observer = std::function<void(const SessionEvent &)>;
  std::size_t subscribe(Observer observer);
  void unsubscribe(std::size_t token);

private:
  json_io::Json apply_locked(const commands::Command & command, std::uint64_t now_us, CommandRecord & record);
  void record_locked(CommandRecord record, std::vector<SessionEvent> & events);
  std::vector<sync::AnchorEvent> drain_anchor_events_locked();
  void notify(const std::vector<SessionEvent> & events);

  sync::ActorRegistry registry_;
  wire::ChannelCounters counters_;
  wire::DatagramRouter router_;
  harness::ChannelSimulator channel_;
  vru::AlertMonitor alerts_;
  std::unique_ptr<blocks::BlockSupervisor> supervisor_;

  mutable std::mutex apply_mutex_;
  std::vector<CommandRecord> log_;
  std::size_t anchor_events_seen_{0};

  std::mutex observer_mutex_;
  std::map<std::size_t, Observer> observers_;
  std::size_t next_token_{0};
};

json_io::Json actor_state_json(const sync::ActorState & actor, const blocks::BlockMap * map);

/// Applies the anchor-affecting records of a command log to `registry` (which should hold the
/// session's initial registrations) and returns the anchors it produced, in order.
std::vector<sync::AnchorEvent> replay_command_log(
  sync::ActorRegistry & registry, const std::vector<CommandRecord> & log);

}  // namespace vve::session

#endif  // VVE__SESSION_HPP_
