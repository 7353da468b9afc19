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

#ifndef VVE__VRU_SAFETY_HPP_
#define VVE__VRU_SAFETY_HPP_

#include "vve/frames.hpp"
#include "vve/sync.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace vve::vru
{

/// One received personal safety message.
struct PsmRecord
{
  sync::ActorId actor_id{0};
  frames::GeoPose geo;
  double speed_mps{0.0};
  std::uint64_t rx_timestamp_us{0};
};

/// Feeds a PSM through the pedestrian's own anchor. Non-pedestrian targets and negative speeds
/// come back as UpdateStatus::invalid.
sync::UpdateOutcome ingest_psm(sync::ActorRegistry & registry, const PsmRecord & psm, std::uint64_t now_us);

enum class AlertLevel : std::uint8_t { none = 0, caution = 1, warning = 2 };

std::string_view to_string(AlertLevel level);
std::optional<AlertLevel> parse_alert_level(std::string_view text);

struct AlertParams
{
  double caution_distance_m{15.0};
  double caution_ttc_s{5.0};
  double warning_distance_m{7.0};
  double warning_ttc_s{2.5};
  double hysteresis_s{1.0};
  double min_closing_speed_mps{0.1};
  bool suppress_when_parked{false};
  double parked_speed_mps{0.1};

  friend bool operator==(const AlertParams &, const AlertParams &) = default;
};

/// Throws ConfigError unless thresholds are positive and warning is inside caution.
void validate(const AlertParams & params);

struct AlertState
{
  AlertLevel level{AlertLevel::none};
  double distance_m{0.0};
  std::optional<double> ttc_s;
  std::optional<double> closing_speed_mps;
  std::uint64_t since_us{0};  // time of the last level change
  bool stale{false};

  friend bool operator==(const AlertState &, const AlertState &) = default;
};

struct Velocity
{
  double vx{0.0};
  double vy{0.0};
};

/// Fc-frame velocity from the last two samples; zero when only one sample exists.
Velocity virtual_velocity(const sync::ActorState & actor);

/// Rate at which the separation shrinks (positive when converging).
double closing_speed(const sync::ActorState & a, const sync::ActorState & b);

/// Raw level from distance and TTC, before hysteresis.
AlertLevel classify(double distance_m, std::optional<double> ttc_s, const AlertParams & params);

/// Assesses one vehicle/pedestrian pair in the virtual frame. `previous` carries the hysteresis
/// state from the last tick.
AlertState assess(
  const sync::ActorState & vehicle, const sync::ActorState & pedestrian, const AlertParams & params,
  std::uint64_t now_us, const std::optional<AlertState> & previous = std::nullopt);

struct AlertTransition
{
  std::uint64_t timestamp_us{0};
  sync::ActorId vehicle_id{0};
  sync::ActorId pedestrian_id{0};
  AlertLevel from{AlertLevel::none};
  AlertLevel to{AlertLevel::none};
  double distance_m{0.0};
  std::optional<double> ttc_s;

  friend bool operator==(const AlertTransition &, const AlertTransition &) = default;
};

using ActorPair = std::pair<sync::ActorId, sync::ActorId>;  // (vehicle, pedestrian)

/// Keeps per-pair hysteresis state across ticks.
class AlertMonitor
{
public:
  explicit AlertMonitor(AlertParams params = {});

  AlertParams params() const;
  void set_params(const AlertParams & params);

  /// Assesses every vehicle/pedestrian pair with virtual poses and returns level changes.
  std::vector<AlertTransition> evaluate(const sync::RegistrySnapshot & snapshot, std::uint64_t now_us);

  std::map<ActorPair, AlertState> states() const;

private:
  mutable std::mutex mutex_;
  AlertParams params_;
  std::map<ActorPair, AlertState> states_;
};

}  // namespace vve::vru

#endif  // VVE__VRU_SAFETY_HPP_
