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

#ifndef VVE__REPLAY_HPP_
#define VVE__REPLAY_HPP_

// Virtual-clock scenario replay. Every pose goes through encode, the seeded channel model,
// decode and the session ingest path, exactly as on the live link.

#include "vve/json_io.hpp"
#include "vve/session.hpp"
#include "vve/trajectory.hpp"
#include "vve/wire.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vve::harness
{

struct ActorScript
{
  sync::ActorId actor_id{0};
  sync::ActorKind kind{sync::ActorKind::vehicle};
  wire::MsgType msg_type{wire::MsgType::pose};
  std::optional<TrajectorySpec> trajectory;  // actors without one only exist virtually
  bool seed_pinned{false};
};

struct ScheduledCommand
{
  std::uint64_t at_us{0};  // offset from the scenario start
  json_io::Json body;
};

struct Scenario
{
  std::string name;
  session::SessionConfig session;
  double duration_s{0.0};
  double tick_hz{10.0};
  std::uint64_t start_time_us{0};
  std::vector<ActorScript> actors;
  std::vector<ScheduledCommand> commands;
};

/// Scenario schema is documented in docs/scenario.md. Throws ConfigError (often FieldError).
Scenario parse_scenario(const json_io::Json & doc, const std::filesystem::path & base_dir);
Scenario load_scenario(const std::filesystem::path & file);

/// Replaces the channel seed and every trajectory seed that was not pinned explicitly.
void apply_seed(Scenario & scenario, std::uint64_t seed);

struct TimelineEntry
{
  std::uint64_t tick{0};
  vru::AlertTransition transition;
};

struct RunMetrics
{
  double rms_roundtrip_error_m{0.0};
  double max_roundtrip_error_m{0.0};
  std::uint64_t roundtrip_samples{0};
  std::uint64_t ticks{0};
  std::uint64_t datagrams_sent{0};
  wire::ChannelStats channel;
  double measured_loss{0.0};  // injected losses / sent
  double median_latency_ms{0.0};
  double mean_latency_ms{0.0};
  std::uint64_t latency_samples{0};
  std::vector<TimelineEntry> alert_timeline;
  std::uint64_t transitions{0};
  std::uint64_t commands_applied{0};
  std::uint64_t commands_rejected{0};
  std::optional<std::filesystem::path> log_dir;
};

json_io::Json to_json(const RunMetrics & metrics);

struct ReplayOptions
{
  std::optional<std::filesystem::path> out_dir;
  // Called with the virtual time of each event before it is processed. Real-time mode sleeps
  // here; virtual-clock mode leaves it empty.
  std::function<void(std::uint64_t)> pace;
};

/// Runs one scenario. The session is exposed so a console can observe a real-time run.
class Replayer
{
public:
  Replayer(Scenario scenario, ReplayOptions options = {});
  ~Replayer();

  session::Session & session() { return *session_; }
  RunMetrics run();

private:
  Scenario scenario_;
  ReplayOptions options_;
  std::unique_ptr<session::Session> session_;
};

RunMetrics replay(const Scenario & scenario, const ReplayOptions & options = {});

struct TrajectoryError
{
  double rms_m{0.0};
  double max_m{0.0};
  std::vector<double> pointwise_m;
};

/// Maps each real pose through real_to_virtual and measures its distance to the recorded
/// virtual pose. `anchors` holds one anchor for all samples or one per sample. Throws
/// ConfigError on a length mismatch.
TrajectoryError compare_trajectories(
  std::span<const frames::GeoPose> real, std::span<const frames::PlanarPose> recorded_virtual,
  std::span<const sync::SyncAnchor> anchors);

}  // namespace vve::harness

#endif  // VVE__REPLAY_HPP_
