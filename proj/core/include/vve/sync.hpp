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

#ifndef VVE__SYNC_HPP_
#define VVE__SYNC_HPP_

#include "vve/error.hpp"
#include "vve/frames.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string_view>
#include <vector>

namespace vve::sync
{

using ActorId = std::uint16_t;

enum class ActorKind : std::uint8_t { vehicle = 0x01, pedestrian = 0x02 };

std::string_view to_string(ActorKind kind);
std::optional<ActorKind> parse_actor_kind(std::string_view text);

class UnknownActorError : public Error
{
public:
  explicit UnknownActorError(ActorId id);
  ActorId actor_id() const { return id_; }

private:
  ActorId id_;
};

/// Operation not valid in the actor's current state (e.g. teleport before the first fix).
class SyncStateError : public Error
{
public:
  using Error::Error;
};

/// Reset-time pairing of the real pose with the virtual initial pose.
struct SyncAnchor
{
  frames::PlanarPose anchor_g0;  // Fg
  frames::PlanarPose anchor_v0;  // Fv
  frames::PlanarPose base_f0;    // F, always (0, 0, 0)
  frames::GeoOrigin origin;
  std::uint64_t reset_timestamp_us{0};
  frames::GeoPose reset_geo;
  frames::PlanarPose virtual_initial;  // Fc, as configured

  friend bool operator==(const SyncAnchor &, const SyncAnchor &) = default;
};

/// Throws DomainError when the virtual initial pose is not a finite Fc pose with heading in
/// (-180, 180].
SyncAnchor make_anchor(
  const frames::GeoPose & real, const frames::PlanarPose & virtual_initial,
  const frames::GeoOrigin & origin, std::uint64_t reset_timestamp_us);

/// Full forward chain Fr -> Fg -> F -> Fv -> Fc. Output heading wrapped into (-180, 180].
frames::PlanarPose real_to_virtual(const frames::GeoPose & geo, const SyncAnchor & anchor);

/// Inverse chain Fc -> Fv -> F -> Fg -> Fr -> geodetic.
frames::GeoPose virtual_to_real(
  const frames::PlanarPose & pose_c, const SyncAnchor & anchor, std::uint64_t timestamp_us = 0);

struct Point2
{
  double x;
  double y;
};

/// Body corners (front-left, front-right, rear-right, rear-left) of a rectangle centred on the
/// Fc pose.
std::array<Point2, 4> vehicle_footprint(
  const frames::PlanarPose & pose_c, double length_m, double width_m);

struct ActorRegistration
{
  ActorId actor_id{0};
  ActorKind kind{ActorKind::vehicle};
  // When set, the first real fix defines reset time and anchors to this Fc pose.
  std::optional<frames::PlanarPose> virtual_initial;
  // Defaults to the real position at the first reset.
  std::optional<frames::GeoOrigin> origin;
  std::optional<std::uint64_t> stale_threshold_us;
};

struct ActorState
{
  ActorId actor_id{0};
  ActorKind kind{ActorKind::vehicle};
  std::optional<SyncAnchor> anchor;
  std::optional<frames::GeoPose> last_geo;
  std::optional<frames::PlanarPose> last_virtual;  // Fc
  // Previous sample under the same anchor; cleared on every re-anchor.
  std::optional<frames::GeoPose> prev_geo;
  std::optional<frames::PlanarPose> prev_virtual;
  double speed_mps{0.0};
  std::uint64_t last_update_us{0};
  bool stale{true};
  std::uint64_t stale_threshold_us{0};
  std::optional<frames::PlanarPose> pending_virtual_initial;
  std::optional<frames::GeoOrigin> configured_origin;
  std::uint64_t anchor_generation{0};
};

enum class AnchorReason : std::uint8_t { reset, teleport, transition };

std::string_view to_string(AnchorReason reason);

struct AnchorEvent
{
  ActorId actor_id;
  std::uint64_t timestamp_us;
  AnchorReason reason;
  SyncAnchor anchor;
};

enum class UpdateStatus : std::uint8_t { accepted, unknown_actor, out_of_order, unanchored, invalid };

std::string_view to_string(UpdateStatus status);

struct UpdateOutcome
{
  UpdateStatus status;
  std::shared_ptr<const ActorState> state;  // current state, null for unknown actors
};

struct RegistryConfig
{
  std::uint64_t vehicle_stale_us{500'000};
  std::uint64_t pedestrian_stale_us{3'000'000};
};

struct RegistryCounters
{
  std::uint64_t accepted{0};
  std::uint64_t dropped_out_of_order{0};
  std::uint64_t dropped_unknown_actor{0};
  std::uint64_t dropped_unanchored{0};
  std::uint64_t dropped_invalid{0};
};

/// Immutable point-in-time view of the whole registry.
struct RegistrySnapshot
{
  std::uint64_t version{0};
  std::map<ActorId, std::shared_ptr<const ActorState>> actors;
  RegistryCounters counters;
};

/// Multi-actor state store. Writers are serialized; readers get immutable snapshots and only
/// contend with writers for the duration of a pointer copy.
class ActorRegistry
{
public:
  explicit ActorRegistry(RegistryConfig config = {});

  const RegistryConfig & config() const { return config_; }

  /// Throws ConfigError if the id is taken or the registration is malformed.
  void register_actor(const ActorRegistration & registration);

  /// Stores a new anchor so that real_to_virtual(real) == virtual_initial.
  SyncAnchor reset_anchor(
    ActorId id, const frames::GeoPose & real, const frames::PlanarPose & virtual_initial,
    std::uint64_t now_us, AnchorReason reason = AnchorReason::reset);

  /// Re-anchors at the actor's latest real pose.
  SyncAnchor teleport_virtual(
    ActorId id, const frames::PlanarPose & new_pose, std::uint64_t now_us,
    AnchorReason reason = AnchorReason::teleport);

  /// Ingests a real fix. Older-than-stored timestamps are dropped and counted.
  UpdateOutcome update_actor(
    ActorId id, const frames::GeoPose & geo, std::uint64_t now_us, double speed_mps = 0.0);

  /// Recomputes staleness against now_us.
  void tick(std::uint64_t now_us);

  std::shared_ptr<const RegistrySnapshot> snapshot() const;
  std::shared_ptr<const ActorState> actor(ActorId id) const;
  bool contains(ActorId id) const;

  std::vector<AnchorEvent> anchor_events() const;

private:
  using ActorMap = std::map<ActorId, std::shared_ptr<const ActorState>>;

  SyncAnchor reanchor_locked(
    ActorMap & actors, ActorState state, const frames::GeoPose & real,
    const frames::PlanarPose & virtual_initial, std::uint64_t now_us, AnchorReason reason,
    bool counts_as_fix);
  void publish_locked(ActorMap actors);

  RegistryConfig config_;

  mutable std::mutex write_mutex_;
  RegistryCounters counters_;
  std::vector<AnchorEvent> anchor_events_;

  mutable std::mutex publish_mutex_;
  std::shared_ptr<const RegistrySnapshot> current_;
};

}  // namespace vve::sync

#endif  // VVE__SYNC_HPP_
