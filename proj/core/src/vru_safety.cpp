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

#include "vve/vru_safety.hpp"

#include "vve/error.hpp"

#include <cmath>
#include <string>

namespace vve::vru
{

using sync::ActorKind;
using sync::ActorState;

sync::UpdateOutcome ingest_psm(sync::ActorRegistry & registry, const PsmRecord & psm, std::uint64_t now_us)
{
  auto actor = registry.actor(psm.actor_id);
  if (!actor) {
    // Routed through the registry so the drop is counted there.
    return registry.update_actor(psm.actor_id, psm.geo, now_us, psm.speed_mps);
  }
  if (actor->kind != ActorKind::pedestrian || !std::isfinite(psm.speed_mps) || psm.speed_mps < 0.0) {
    return {sync::UpdateStatus::invalid, actor};
  }
  return registry.update_actor(psm.actor_id, psm.geo, now_us, psm.speed_mps);
}

std::string_view to_string(AlertLevel level)
{
  switch (level) {
    case AlertLevel::none:
      return "none";
    case AlertLevel::caution:
      return "caution";
    case AlertLevel::warning:
      return "warning";
  }
  return "unknown";
}

std::optional<AlertLevel> parse_alert_level(std::string_view text)
{
  if (text == "none") {
    return AlertLevel::none;
  }
  if (text == "caution") {
    return AlertLevel::caution;
  }
  if (text == "warning") {
    return AlertLevel::warning;
  }
  return std::nullopt;
}

void validate(const AlertParams & p)
{
  auto positive = [](double v, const char * name) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw ConfigError(std::string(name) + " must be a positive number");
    }
  };
  positive(p.caution_distance_m, "caution_distance_m");
  positive(p.caution_ttc_s, "caution_ttc_s");
  positive(p.warning_distance_m, "warning_distance_m");
  positive(p.warning_ttc_s, "warning_ttc_s");
  positive(p.min_closing_speed_mps, "min_closing_speed_mps");
  if (!std::isfinite(p.hysteresis_s) || p.hysteresis_s < 0.0) {
    throw ConfigError("hysteresis_s must be >= 0");
  }
  if (!std::isfinite(p.parked_speed_mps) || p.parked_speed_mps < 0.0) {
    throw ConfigError("parked_speed_mps must be >= 0");
  }
  if (p.warning_distance_m > p.caution_distance_m) {
    throw ConfigError("warning_distance_m must not exceed caution_distance_m");
  }
  if (p.warning_ttc_s > p.caution_ttc_s) {
    throw ConfigError("warning_ttc_s must not exceed caution_ttc_s");
  }
}

Velocity virtual_velocity(const ActorState & actor)
{
  if (!actor.last_virtual || !actor.prev_virtual || !actor.last_geo || !actor.prev_geo) {
    return {};
  }
  if (actor.last_geo->timestamp_us <= actor.prev_geo->timestamp_us) {
    return {};
  }
  const double dt = static_cast<double>(actor.last_geo->timestamp_us - actor.prev_geo->timestamp_us) * 1e-6;
  return {
    (actor.last_virtual->x - actor.prev_virtual->x) / dt,
    (actor.last_virtual->y - actor.prev_virtual->y) / dt};
}

double closing_speed(const ActorState & a, const ActorState & b)
{
  if (!a.last_virtual || !b.last_virtual) {
    return 0.0;
  }
  const double rx = b.last_virtual->x - a.last_virtual->x;
  const double ry = b.last_virtual->y - a.last_virtual->y;
  const double d = std::hypot(rx, ry);
  if (d == 0.0) {
    return 0.0;
  }
  const Velocity va = virtual_velocity(a);
  const Velocity vb = virtual_velocity(b);
  return -(rx * (vb.vx - va.vx) + ry * (vb.vy - va.vy)) / d;
}

AlertLevel classify(double distance_m, std::optional<double> ttc_s, const AlertParams & params)
{
  if (distance_m < params.warning_distance_m || (ttc_s && *ttc_s < params.warning_ttc_s)) {
    return AlertLevel::warning;
  }
  if (distance_m < params.caution_distance_m || (ttc_s && *ttc_s < params.caution_ttc_s)) {
    return AlertLevel::caution;
  }
  return AlertLevel::none;
}

AlertState assess(
  const ActorState & vehicle, const ActorState & pedestrian, const AlertParams & params,
  std::uint64_t now_us, const std::optional<AlertState> & previous)
{
  const AlertLevel prev_level = previous ? previous->level : AlertLevel::none;
  const std::uint64_t prev_since = previous ? previous->since_us : now_us;

  AlertState out;
  if (vehicle.last_virtual && pedestrian.last_virtual) {
    out.distance_m = std::hypot(
      pedestrian.last_virtual->x - vehicle.last_virtual->x,
      pedestrian.last_virtual->y - vehicle.last_virtual->y);
  }

  if (vehicle.stale || pedestrian.stale || !vehicle.last_virtual || !pedestrian.last_virtual) {
    out.level = AlertLevel::none;
    out.stale = true;
    out.since_us = prev_level == AlertLevel::none ? prev_since : now_us;
    return out;
  }

  const double closing = closing_speed(vehicle, pedestrian);
  out.closing_speed_mps = closing;
  if (closing > params.min_closing_speed_mps) {
    out.ttc_s = out.distance_m / closing;
  }

  AlertLevel level = classify(out.distance_m, out.ttc_s, params);
  if (params.suppress_when_parked) {
    const Velocity v = virtual_velocity(vehicle);
    if (std::hypot(v.vx, v.vy) < params.parked_speed_mps) {
      level = AlertLevel::none;
    }
  }

  // No de-escalation within the hysteresis window after the last change.
  const auto hold_us = static_cast<std::uint64_t>(std::llround(params.hysteresis_s * 1e6));
  if (previous && level < prev_level && now_us >= prev_since && now_us - prev_since < hold_us) {
    level = prev_level;
  }

  out.level = level;
  out.since_us = level == prev_level ? prev_since : now_us;
  return out;
}

AlertMonitor::AlertMonitor(AlertParams params) : params_(params) { validate(params_); }

AlertParams AlertMonitor::params() const
{
  std::lock_guard lock(mutex_);
  return params_;
}

void AlertMonitor::set_params(const AlertParams & params)
{
  validate(params);
  std::lock_guard lock(mutex_);
  params_ = params;
}

std::vector<AlertTransition> AlertMonitor::evaluate(
  const sync::RegistrySnapshot & snapshot, std::uint64_t now_us)
{
  std::lock_guard lock(mutex_);
  std::vector<AlertTransition> transitions;
  for (const auto & [vid, vehicle] : snapshot.actors) {
    if (vehicle->kind != ActorKind::vehicle) {
      continue;
    }
    for (const auto & [pid, pedestrian] : snapshot.actors) {
      if (pedestrian->kind != ActorKind::pedestrian) {
        continue;
      }
      const ActorPair key{vid, pid};
      auto it = states_.find(key);
      if (it == states_.end() && (!vehicle->last_virtual || !pedestrian->last_virtual)) {
        continue;
      }
      std::optional<AlertState> previous;
      if (it != states_.end()) {
        previous = it->second;
      }
      AlertState next = assess(*vehicle, *pedestrian, params_, now_us, previous);
      const AlertLevel before = previous ? previous->level : AlertLevel::none;
      if (next.level != before) {
        transitions.push_back({now_us, vid, pid, before, next.level, next.distance_m, next.ttc_s});
      }
      states_[key] = next;
    }
  }
  return transitions;
}

std::map<ActorPair, AlertState> AlertMonitor::states() const
{
  std::lock_guard lock(mutex_);
  return states_;
}

}  // namespace vve::vru
