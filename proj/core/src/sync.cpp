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

#include "vve/sync.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace vve::sync
{

using frames::Frame;
using frames::GeoOrigin;
using frames::GeoPose;
using frames::PlanarPose;

namespace
{

bool is_stale(std::uint64_t now_us, std::uint64_t last_update_us, std::uint64_t threshold_us)
{
  return now_us > last_update_us && now_us - last_update_us > threshold_us;
}

}  // namespace

std::string_view to_string(ActorKind kind)
{
  switch (kind) {
    case ActorKind::vehicle:
      return "vehicle";
    case ActorKind::pedestrian:
      return "pedestrian";
  }
  return "unknown";
}

std::optional<ActorKind> parse_actor_kind(std::string_view text)
{
  if (text == "vehicle") {
    return ActorKind::vehicle;
  }
  if (text == "pedestrian") {
    return ActorKind::pedestrian;
  }
  return std::nullopt;
}

std::string_view to_string(AnchorReason reason)
{
  switch (reason) {
    case AnchorReason::reset:
      return "reset";
    case AnchorReason::teleport:
      return "teleport";
    case AnchorReason::transition:
      return "transition";
  }
  return "unknown";
}

std::string_view to_string(UpdateStatus status)
{
  switch (status) {
    case UpdateStatus::accepted:
      return "accepted";
    case UpdateStatus::unknown_actor:
      return "unknown_actor";
    case UpdateStatus::out_of_order:
      return "out_of_order";
    case UpdateStatus::unanchored:
      return "unanchored";
    case UpdateStatus::invalid:
      return "invalid";
  }
  return "unknown";
}

UnknownActorError::UnknownActorError(ActorId id)
: Error("unknown actor " + std::to_string(id)), id_(id)
{
}

SyncAnchor make_anchor(
  const GeoPose & real, const PlanarPose & virtual_initial, const GeoOrigin & origin,
  std::uint64_t reset_timestamp_us)
{
  if (virtual_initial.frame != Frame::Fc) {
    throw FrameMismatchError("virtual initial pose must be in the Fc frame");
  }
  frames::validate(virtual_initial);
  if (!(virtual_initial.psi > -180.0 && virtual_initial.psi <= 180.0)) {
    throw DomainError("virtual initial heading out of (-180, 180]");
  }
  const PlanarPose anchor_g0 = frames::fr_to_fg(frames::geo_to_fr(real, origin));
  return SyncAnchor{
    anchor_g0,
    frames::fv_fc_convert(virtual_initial),
    PlanarPose{0.0, 0.0, 0.0, Frame::F},
    origin,
    reset_timestamp_us,
    real,
    virtual_initial};
}

PlanarPose real_to_virtual(const GeoPose & geo, const SyncAnchor & anchor)
{
  const PlanarPose fg = frames::fr_to_fg(frames::geo_to_fr(geo, anchor.origin));
  const PlanarPose f = frames::fg_to_f(fg, anchor.anchor_g0, anchor.base_f0);
  const PlanarPose fv = frames::f_to_fv(f, anchor.base_f0, anchor.anchor_v0);
  PlanarPose fc = frames::fv_fc_convert(fv);
  fc.psi = frames::wrap_heading_half_open(fc.psi);
  return fc;
}

GeoPose virtual_to_real(
  const PlanarPose & pose_c, const SyncAnchor & anchor, std::uint64_t timestamp_us)
{
  if (pose_c.frame != Frame::Fc) {
    throw FrameMismatchError("virtual_to_real expects an Fc pose");
  }
  const PlanarPose fv = frames::fv_fc_convert(pose_c);
  const PlanarPose f = frames::fv_to_f(fv, anchor.base_f0, anchor.anchor_v0);
  const PlanarPose fg = frames::f_to_fg(f, anchor.anchor_g0, anchor.base_f0);
  return frames::fr_to_geo(frames::fg_to_fr(fg), anchor.origin, timestamp_us);
}

std::array<Point2, 4> vehicle_footprint(const PlanarPose & pose_c, double length_m, double width_m)
{
  // Forward in Fc is (cos psi, sin psi).
  const auto [s, c] = frames::sincos_deg(pose_c.psi);
  const double hl = 0.5 * length_m;
  const double hw = 0.5 * width_m;
  const Point2 fwd{c * hl, s * hl};
  const Point2 lat{-s * hw, c * hw};
  return {{
    {pose_c.x + fwd.x + lat.x, pose_c.y + fwd.y + lat.y},
    {pose_c.x + fwd.x - lat.x, pose_c.y + fwd.y - lat.y},
    {pose_c.x - fwd.x - lat.x, pose_c.y - fwd.y - lat.y},
    {pose_c.x - fwd.x + lat.x, pose_c.y - fwd.y + lat.y},
  }};
}

ActorRegistry::ActorRegistry(RegistryConfig config)
: config_(config), current_(std::make_shared<RegistrySnapshot>())
{
}

void ActorRegistry::register_actor(const ActorRegistration & registration)
{
  if (registration.virtual_initial) {
    // Fails early instead of at the first fix.
    if (registration.virtual_initial->frame != Frame::Fc) {
      throw ConfigError("virtual_initial must be an Fc pose");
    }
    frames::validate(*registration.virtual_initial);
    if (!(registration.virtual_initial->psi > -180.0 && registration.virtual_initial->psi <= 180.0)) {
      throw ConfigError("virtual_initial heading out of (-180, 180]");
    }
  }

  std::lock_guard lock(write_mutex_);
  ActorMap actors = snapshot()->actors;
  if (actors.count(registration.actor_id) != 0) {
    throw ConfigError("actor " + std::to_string(registration.actor_id) + " already registered");
  }
  ActorState state;
  state.actor_id = registration.actor_id;
  state.kind = registration.kind;
  state.stale_threshold_us = registration.stale_threshold_us.value_or(
    registration.kind == ActorKind::vehicle ? config_.vehicle_stale_us
                                            : config_.pedestrian_stale_us);
  state.pending_virtual_initial = registration.virtual_initial;
  state.configured_origin = registration.origin;
  actors.emplace(state.actor_id, std::make_shared<const ActorState>(std::move(state)));
  publish_locked(std::move(actors));
}

SyncAnchor ActorRegistry::reanchor_locked(
  ActorMap & actors, ActorState state, const GeoPose & real, const PlanarPose & virtual_initial,
  std::uint64_t now_us, AnchorReason reason, bool counts_as_fix)
{
  GeoOrigin origin = state.anchor ? state.anchor->origin
                                  : state.configured_origin.value_or(
                                      GeoOrigin(real.latitude_deg, real.longitude_deg));
  SyncAnchor anchor = make_anchor(real, virtual_initial, origin, now_us);

  state.anchor = anchor;
  state.pending_virtual_initial.reset();
  state.last_geo = real;
  state.last_virtual = real_to_virtual(real, anchor);
  state.prev_geo.reset();
  state.prev_virtual.reset();
  if (counts_as_fix) {
    state.last_update_us = std::max(state.last_update_us, now_us);
  }
  state.stale = is_stale(now_us, state.last_update_us, state.stale_threshold_us);
  ++state.anchor_generation;

  anchor_events_.push_back({state.actor_id, now_us, reason, anchor});
  actors[state.actor_id] = std::make_shared<const ActorState>(std::move(state));
  return anchor;
}

SyncAnchor ActorRegistry::reset_anchor(
  ActorId id, const GeoPose & real, const PlanarPose & virtual_initial, std::uint64_t now_us,
  AnchorReason reason)
{
  frames::validate(real);
  std::lock_guard lock(write_mutex_);
  ActorMap actors = snapshot()->actors;
  auto it = actors.find(id);
  if (it == actors.end()) {
    throw UnknownActorError(id);
  }
  SyncAnchor anchor = reanchor_locked(actors, *it->second, real, virtual_initial, now_us, reason, true);
  publish_locked(std::move(actors));
  return anchor;
}

SyncAnchor ActorRegistry::teleport_virtual(
  ActorId id, const PlanarPose & new_pose, std::uint64_t now_us, AnchorReason reason)
{
  std::lock_guard lock(write_mutex_);
  ActorMap actors = snapshot()->actors;
  auto it = actors.find(id);
  if (it == actors.end()) {
    throw UnknownActorError(id);
  }
  if (!it->second->last_geo) {
    throw SyncStateError("actor " + std::to_string(id) + " has no real pose yet");
  }
  const GeoPose real = *it->second->last_geo;
  SyncAnchor anchor = reanchor_locked(actors, *it->second, real, new_pose, now_us, reason, false);
  publish_locked(std::move(actors));
  return anchor;
}

UpdateOutcome ActorRegistry::update_actor(
  ActorId id, const GeoPose & geo, std::uint64_t now_us, double speed_mps)
{
  std::lock_guard lock(write_mutex_);
  ActorMap actors = snapshot()->actors;
  auto it = actors.find(id);
  if (it == actors.end()) {
    ++counters_.dropped_unknown_actor;
    publish_locked(std::move(actors));
    return {UpdateStatus::unknown_actor, nullptr};
  }
  const ActorState & current = *it->second;

  if (current.last_geo && geo.timestamp_us < current.last_geo->timestamp_us) {
    ++counters_.dropped_out_of_order;
    auto state = it->second;
    publish_locked(std::move(actors));
    return {UpdateStatus::out_of_order, state};
  }

  try {
    frames::validate(geo);
    if (!current.anchor) {
      if (!current.pending_virtual_initial) {
        ++counters_.dropped_unanchored;
        auto state = it->second;
        publish_locked(std::move(actors));
        return {UpdateStatus::unanchored, state};
      }
      ActorState next = current;
      next.speed_mps = speed_mps;
      reanchor_locked(
        actors, std::move(next), geo, *current.pending_virtual_initial, now_us,
        AnchorReason::reset, true);
    } else {
      ActorState next = current;
      const PlanarPose virtual_pose = real_to_virtual(geo, *current.anchor);
      next.prev_geo = current.last_geo;
      next.prev_virtual = current.last_virtual;
      next.last_geo = geo;
      next.last_virtual = virtual_pose;
      next.speed_mps = speed_mps;
      next.last_update_us = std::max(current.last_update_us, now_us);
      next.stale = is_stale(now_us, next.last_update_us, next.stale_threshold_us);
      actors[id] = std::make_shared<const ActorState>(std::move(next));
    }
  } catch (const Error &) {
    ++counters_.dropped_invalid;
    auto state = it->second;
    publish_locked(std::move(actors));
    return {UpdateStatus::invalid, state};
  }

  ++counters_.accepted;
  auto state = actors[id];
  publish_locked(std::move(actors));
  return {UpdateStatus::accepted, state};
}

void ActorRegistry::tick(std::uint64_t now_us)
{
  std::lock_guard lock(write_mutex_);
  ActorMap actors = snapshot()->actors;
  bool changed = false;
  for (auto & [id, state] : actors) {
    const bool stale =
      !state->last_geo || is_stale(now_us, state->last_update_us, state->stale_threshold_us);
    if (stale != state->stale) {
      ActorState next = *state;
      next.stale = stale;
      state = std::make_shared<const ActorState>(std::move(next));
      changed = true;
    }
  }
  if (changed) {
    publish_locked(std::move(actors));
  }
}

std::shared_ptr<const RegistrySnapshot> ActorRegistry::snapshot() const
{
  std::lock_guard lock(publish_mutex_);
  return current_;
}

std::shared_ptr<const ActorState> ActorRegistry::actor(ActorId id) const
{
  auto snap = snapshot();
  auto it = snap->actors.find(id);
  return it == snap->actors.end() ? nullptr : it->second;
}

bool ActorRegistry::contains(ActorId id) const { return actor(id) != nullptr; }

std::vector<AnchorEvent> ActorRegistry::anchor_events() const
{
  std::lock_guard lock(write_mutex_);
  return anchor_events_;
}

void ActorRegistry::publish_locked(ActorMap actors)
{
  auto next = std::make_shared<RegistrySnapshot>();
  {
    std::lock_guard lock(publish_mutex_);
    next->version = current_->version + 1;
  }
  next->actors = std::move(actors);
  next->counters = counters_;
  std::lock_guard lock(publish_mutex_);
  current_ = std::move(next);
}

}  // namespace vve::sync
