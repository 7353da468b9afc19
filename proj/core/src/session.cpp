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

#include "vve/session.hpp"

#include <cmath>
#include <set>

namespace vve::session
{
namespace
{

using json_io::Json;

Json optional_json(const auto & value)
{
  return value ? json_io::to_json(*value) : Json(nullptr);
}

Json channel_model_json(const harness::ChannelModel & m)
{
  return {
    {"fixed_delay_ms", m.fixed_delay_ms},
    {"jitter_ms", m.jitter_ms},
    {"loss_probability", m.loss_probability}};
}

Json registry_counters_json(const sync::RegistryCounters & c)
{
  return {
    {"accepted", c.accepted},
    {"dropped_out_of_order", c.dropped_out_of_order},
    {"dropped_unknown_actor", c.dropped_unknown_actor},
    {"dropped_unanchored", c.dropped_unanchored},
    {"dropped_invalid", c.dropped_invalid}};
}

Json resolved_anchor_json(const sync::SyncAnchor & anchor, sync::AnchorReason reason)
{
  return {
    {"reason", std::string(sync::to_string(reason))},
    {"real", json_io::to_json(anchor.reset_geo)},
    {"virtual", json_io::to_json(anchor.virtual_initial)},
    {"reset_timestamp_us", anchor.reset_timestamp_us}};
}

sync::ActorRegistration parse_registration(
  const Json & obj, const std::optional<frames::GeoOrigin> & default_origin, const std::string & path)
{
  sync::ActorRegistration r;
  r.actor_id = json_io::parse_actor_id(obj, "id", path);
  const std::string kind = json_io::require_string(obj, "kind", path);
  const auto parsed = sync::parse_actor_kind(kind);
  if (!parsed) {
    throw json_io::FieldError(json_io::join_path(path, "kind"), "expected \"vehicle\" or \"pedestrian\"");
  }
  r.kind = *parsed;
  if (obj.contains("virtual_initial")) {
    r.virtual_initial = json_io::parse_pose(
      obj.at("virtual_initial"), frames::Frame::Fc, json_io::join_path(path, "virtual_initial"));
  }
  if (obj.contains("origin")) {
    r.origin = json_io::parse_origin(obj.at("origin"), json_io::join_path(path, "origin"));
  } else {
    r.origin = default_origin;
  }
  if (obj.contains("stale_threshold_ms")) {
    const double ms = json_io::require_number(obj, "stale_threshold_ms", path);
    if (!(ms > 0.0)) {
      throw json_io::FieldError(json_io::join_path(path, "stale_threshold_ms"), "must be > 0");
    }
    r.stale_threshold_us = static_cast<std::uint64_t>(std::llround(ms * 1000.0));
  }
  return r;
}

std::uint64_t ms_to_us(double ms, const std::string & field)
{
  if (!std::isfinite(ms) || ms <= 0.0) {
    throw json_io::FieldError(field, "must be > 0");
  }
  return static_cast<std::uint64_t>(std::llround(ms * 1000.0));
}

}  // namespace

SessionConfig parse_session_config(const Json & doc, const std::filesystem::path & base_dir)
{
  if (!doc.is_object()) {
    throw json_io::FieldError("<root>", "expected an object");
  }
  SessionConfig cfg;
  std::optional<frames::GeoOrigin> origin;
  if (doc.contains("origin")) {
    origin = json_io::parse_origin(doc.at("origin"), "origin");
  }
  if (doc.contains("seed")) {
    cfg.channel_seed = json_io::require_uint(doc, "seed", "");
  }
  if (doc.contains("channel")) {
    const Json & c = doc.at("channel");
    cfg.channel.fixed_delay_ms = json_io::number_or(c, "fixed_delay_ms", 0.0, "channel");
    cfg.channel.jitter_ms = json_io::number_or(c, "jitter_ms", 0.0, "channel");
    cfg.channel.loss_probability = json_io::number_or(c, "loss_probability", 0.0, "channel");
    try {
      harness::validate(cfg.channel);
    } catch (const ConfigError & e) {
      throw json_io::FieldError("channel", e.what());
    }
  }
  if (doc.contains("alerts")) {
    cfg.alerts = json_io::parse_alert_params(doc.at("alerts"), cfg.alerts, "alerts");
  }
  if (doc.contains("stale")) {
    const Json & s = doc.at("stale");
    if (s.contains("vehicle_ms")) {
      cfg.registry.vehicle_stale_us =
        ms_to_us(json_io::require_number(s, "vehicle_ms", "stale"), "stale.vehicle_ms");
    }
    if (s.contains("pedestrian_ms")) {
      cfg.registry.pedestrian_stale_us =
        ms_to_us(json_io::require_number(s, "pedestrian_ms", "stale"), "stale.pedestrian_ms");
    }
  }
  if (doc.contains("map") && doc.contains("map_file")) {
    throw json_io::FieldError("map", "give either map or map_file, not both");
  }
  if (doc.contains("map")) {
    cfg.map = blocks::parse_block_map(doc.at("map"));
  } else if (doc.contains("map_file")) {
    cfg.map = blocks::load_block_map(base_dir / json_io::require_string(doc, "map_file", ""));
  }
  if (doc.contains("transition_policy")) {
    const auto policy = blocks::parse_transition_policy(json_io::require_string(doc, "transition_policy", ""));
    if (!policy) {
      throw json_io::FieldError("transition_policy", "expected \"manual_confirm\" or \"automatic\"");
    }
    cfg.transition_policy = *policy;
  }
  if (doc.contains("transition_cooldown_s")) {
    const double s = json_io::require_number(doc, "transition_cooldown_s", "");
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw json_io::FieldError("transition_cooldown_s", "must be >= 0");
    }
    cfg.transition_cooldown_us = static_cast<std::uint64_t>(std::llround(s * 1e6));
  }
  cfg.router.auto_register = json_io::bool_or(doc, "auto_register", false, "");
  if (doc.contains("actors")) {
    const Json & actors = doc.at("actors");
    if (!actors.is_array()) {
      throw json_io::FieldError("actors", "expected an array");
    }
    std::set<sync::ActorId> seen;
    for (std::size_t i = 0; i < actors.size(); ++i) {
      const std::string path = "actors[" + std::to_string(i) + "]";
      auto reg = parse_registration(actors[i], origin, path);
      if (!seen.insert(reg.actor_id).second) {
        throw json_io::FieldError(path + ".id", "duplicate actor id");
      }
      cfg.actors.push_back(std::move(reg));
    }
  }
  return cfg;
}

std::string_view to_string(EventKind kind)
{
  switch (kind) {
    case EventKind::alert:
      return "alert";
    case EventKind::transition:
      return "transition";
    case EventKind::anchor:
      return "anchor";
    case EventKind::command:
      return "command";
  }
  return "alert";
}

Json to_json(const CommandRecord & record)
{
  return {
    {"seq", record.seq},
    {"timestamp_us", record.timestamp_us},
    {"source", record.source},
    {"request", record.request},
    {"resolved", record.resolved}};
}

CommandRecord parse_command_record(const Json & obj)
{
  CommandRecord r;
  r.seq = json_io::require_uint(obj, "seq", "");
  r.timestamp_us = json_io::require_uint(obj, "timestamp_us", "");
  r.source = json_io::require_string(obj, "source", "");
  r.request = json_io::require_member(obj, "request", "");
  r.resolved = obj.contains("resolved") ? obj.at("resolved") : Json(nullptr);
  return r;
}

Json actor_state_json(const sync::ActorState & actor, const blocks::BlockMap * map)
{
  Json j;
  j["actor_id"] = actor.actor_id;
  j["kind"] = std::string(sync::to_string(actor.kind));
  j["stale"] = actor.stale;
  j["last_update_us"] = actor.last_update_us;
  j["speed_mps"] = actor.speed_mps;
  j["real"] = optional_json(actor.last_geo);
  if (actor.last_geo && actor.anchor) {
    j["local"] = json_io::to_json(frames::geo_to_fr(*actor.last_geo, actor.anchor->origin));
  } else {
    j["local"] = nullptr;
  }
  j["virtual"] = optional_json(actor.last_virtual);
  std::optional<blocks::BlockId> block;
  if (map && actor.last_virtual) {
    block = blocks::locate(*actor.last_virtual, *map);
  }
  j["block"] = block ? Json(*block) : Json(nullptr);
  j["anchor"] = optional_json(actor.anchor);
  j["anchor_generation"] = actor.anchor_generation;
  j["pending_virtual_initial"] = optional_json(actor.pending_virtual_initial);
  return j;
}

Session::Session(SessionConfig config)
: registry_(config.registry),
  router_(registry_, counters_, config.router),
  channel_(config.channel, config.channel_seed),
  alerts_(config.alerts)
{
  vru::validate(config.alerts);
  if (config.map) {
    supervisor_ = std::make_unique<blocks::BlockSupervisor>(
      *config.map, config.transition_policy, config.transition_cooldown_us);
  }
  for (const auto & reg : config.actors) {
    registry_.register_actor(reg);
  }
}

std::vector<sync::AnchorEvent> Session::drain_anchor_events_locked()
{
  std::vector<sync::AnchorEvent> all = registry_.anchor_events();
  std::vector<sync::AnchorEvent> fresh(
    all.begin() + static_cast<std::ptrdiff_t>(std::min(anchor_events_seen_, all.size())), all.end());
  anchor_events_seen_ = all.size();
  return fresh;
}

void Session::record_locked(CommandRecord record, std::vector<SessionEvent> & events)
{
  record.seq = log_.size();
  events.push_back({EventKind::command, record.timestamp_us, to_json(record)});
  log_.push_back(std::move(record));
}

TickResult Session::tick(std::uint64_t now_us)
{
  TickResult result;
  std::vector<SessionEvent> events;
  {
    std::lock_guard lock(apply_mutex_);
    registry_.tick(now_us);
    auto snap = registry_.snapshot();
    if (supervisor_) {
      result.transitions = supervisor_->evaluate(registry_, *snap, now_us);
      for (const auto & t : result.transitions) {
        events.push_back({EventKind::transition, now_us, blocks::to_json(t)});
        if (supervisor_->policy() == blocks::TransitionPolicy::automatic) {
          const auto state = registry_.actor(t.actor_id);
          CommandRecord rec;
          rec.timestamp_us = now_us;
          rec.source = "auto";
          rec.request = commands::to_json(commands::ConfirmTransition{t.actor_id});
          rec.resolved = resolved_anchor_json(*state->anchor, sync::AnchorReason::transition);
          record_locked(std::move(rec), events);
        }
      }
      if (!result.transitions.empty()) {
        snap = registry_.snapshot();
      }
    }
    result.alerts = alerts_.evaluate(*snap, now_us);
    result.anchors = drain_anchor_events_locked();
  }
  for (const auto & a : result.anchors) {
    events.push_back({EventKind::anchor, a.timestamp_us, json_io::to_json(a)});
  }
  for (const auto & a : result.alerts) {
    events.push_back({EventKind::alert, a.timestamp_us, json_io::to_json(a)});
  }
  notify(events);
  return result;
}

Json Session::command(const Json & body, std::uint64_t now_us)
{
  try {
    const commands::Command cmd = commands::parse_command(body);
    return apply(cmd, now_us);
  } catch (const commands::CommandRejected & rejected) {
    return commands::rejection_json(rejected);
  }
}

Json Session::apply(const commands::Command & command, std::uint64_t now_us)
{
  std::vector<SessionEvent> events;
  Json response;
  {
    std::lock_guard lock(apply_mutex_);
    CommandRecord record;
    record.timestamp_us = now_us;
    record.source = "operator";
    record.request = commands::to_json(command);
    record.resolved = nullptr;
    Json result;
    try {
      result = apply_locked(command, now_us, record);
    } catch (const commands::CommandRejected &) {
      throw;
    } catch (const sync::UnknownActorError & e) {
      throw commands::CommandRejected(commands::RejectCode::unknown_actor, {{"actor_id", e.what()}});
    } catch (const sync::SyncStateError & e) {
      throw commands::CommandRejected(commands::RejectCode::conflict, {{"", e.what()}});
    } catch (const json_io::FieldError & e) {
      throw commands::CommandRejected(commands::RejectCode::invalid, {{e.field(), e.reason()}});
    } catch (const ConfigError & e) {
      throw commands::CommandRejected(commands::RejectCode::conflict, {{"", e.what()}});
    } catch (const Error & e) {
      throw commands::CommandRejected(commands::RejectCode::invalid, {{"", e.what()}});
    }
    const std::uint64_t seq = log_.size();
    record_locked(std::move(record), events);
    for (const auto & a : drain_anchor_events_locked()) {
      events.push_back({EventKind::anchor, a.timestamp_us, json_io::to_json(a)});
    }
    response = {{"ok", true}, {"seq", seq}, {"result", result}};
  }
  notify(events);
  return response;
}

Json Session::apply_locked(const commands::Command & command, std::uint64_t now_us, CommandRecord & record)
{
  using namespace commands;
  if (const auto * c = std::get_if<ResetAnchor>(&command)) {
    const auto state = registry_.actor(c->actor_id);
    if (!state) {
      throw sync::UnknownActorError(c->actor_id);
    }
    std::optional<frames::GeoPose> real = c->real ? c->real : state->last_geo;
    if (!real) {
      throw sync::SyncStateError(
        "actor " + std::to_string(c->actor_id) + " has no real pose yet; give one in 'real'");
    }
    const auto anchor = registry_.reset_anchor(c->actor_id, *real, c->virtual_initial, now_us);
    record.resolved = resolved_anchor_json(anchor, sync::AnchorReason::reset);
    return actor_json(c->actor_id);
  }
  if (const auto * c = std::get_if<Teleport>(&command)) {
    const auto anchor = registry_.teleport_virtual(c->actor_id, c->pose, now_us);
    record.resolved = resolved_anchor_json(anchor, sync::AnchorReason::teleport);
    return actor_json(c->actor_id);
  }
  if (const auto * c = std::get_if<SpawnActor>(&command)) {
    if (registry_.contains(c->registration.actor_id)) {
      throw ConfigError("actor " + std::to_string(c->registration.actor_id) + " already exists");
    }
    registry_.register_actor(c->registration);
    if (c->real) {
      const auto anchor = registry_.reset_anchor(
        c->registration.actor_id, *c->real, *c->registration.virtual_initial, now_us);
      record.resolved = resolved_anchor_json(anchor, sync::AnchorReason::reset);
    }
    return actor_json(c->registration.actor_id);
  }
  if (const auto * c = std::get_if<SetChannel>(&command)) {
    const auto model = apply_overlay(*c, channel_.model());
    channel_.set_model(model);
    return channel_model_json(model);
  }
  if (const auto * c = std::get_if<SetThresholds>(&command)) {
    const auto params = json_io::parse_alert_params(c->overlay, alerts_.params(), "");
    alerts_.set_params(params);
    return json_io::to_json(params);
  }
  const auto & c = std::get<ConfirmTransition>(command);
  if (!registry_.contains(c.actor_id)) {
    throw sync::UnknownActorError(c.actor_id);
  }
  if (!supervisor_) {
    throw sync::SyncStateError("session has no block map");
  }
  const auto anchor = supervisor_->confirm(registry_, c.actor_id, now_us);
  record.resolved = resolved_anchor_json(anchor, sync::AnchorReason::transition);
  return actor_json(c.actor_id);
}

Json Session::actor_json(sync::ActorId id) const
{
  const auto state = registry_.actor(id);
  if (!state) {
    return nullptr;
  }
  return actor_state_json(*state, supervisor_ ? &supervisor_->map() : nullptr);
}

Json Session::snapshot_json(std::uint64_t now_us) const
{
  const auto snap = registry_.snapshot();
  const blocks::BlockMap * map = supervisor_ ? &supervisor_->map() : nullptr;

  Json actors = Json::array();
  for (const auto & [id, actor] : snap->actors) {
    actors.push_back(actor_state_json(*actor, map));
  }
  Json alerts = Json::array();
  for (const auto & [pair, state] : alerts_.states()) {
    alerts.push_back(json_io::merge_objects(
      {{"vehicle_id", pair.first}, {"pedestrian_id", pair.second}}, json_io::to_json(state)));
  }
  Json pending = Json::array();
  if (supervisor_) {
    for (const auto & e : supervisor_->pending()) {
      pending.push_back(blocks::to_json(e));
    }
  }
  Json j;
  j["server_time_us"] = now_us;
  j["version"] = snap->version;
  j["actors"] = actors;
  j["alerts"] = alerts;
  j["pending_transitions"] = pending;
  j["channel"] = {{"model", channel_model_json(channel_.model())}, {"stats", json_io::to_json(counters_.snapshot())}};
  j["registry"] = registry_counters_json(snap->counters);
  j["thresholds"] = json_io::to_json(alerts_.params());
  j["transition_policy"] =
    supervisor_ ? Json(std::string(blocks::to_string(supervisor_->policy()))) : Json(nullptr);
  j["map"] = map ? blocks::to_json(*map) : Json(nullptr);
  {
    std::lock_guard lock(apply_mutex_);
    j["commands_applied"] = log_.size();
  }
  return j;
}

std::vector<CommandRecord> Session::command_log() const
{
  std::lock_guard lock(apply_mutex_);
  return log_;
}

std::size_t Session::subscribe(Observer observer)
{
  std::lock_guard lock(observer_mutex_);
  const std::size_t token = next_token_++;
  observers_.emplace(token, std::move(observer));
  return token;
}

void Session::unsubscribe(std::size_t token)
{
  std::lock_guard lock(observer_mutex_);
  observers_.erase(token);
}

void Session::notify(const std::vector<SessionEvent> & events)
{
  if (events.empty()) {
    return;
  }
  std::lock_guard lock(observer_mutex_);
  for (const auto & [token, observer] : observers_) {
    for (const auto & e : events) {
      observer(e);
    }
  }
}

std::vector<sync::AnchorEvent> replay_command_log(
  sync::ActorRegistry & registry, const std::vector<CommandRecord> & log)
{
  const std::size_t before = registry.anchor_events().size();
  for (const CommandRecord & rec : log) {
    const commands::Command cmd = commands::parse_command(rec.request);
    if (const auto * spawn = std::get_if<commands::SpawnActor>(&cmd)) {
      registry.register_actor(spawn->registration);
    }
    if (rec.resolved.is_null()) {
      continue;
    }
    const sync::ActorId id = json_io::parse_actor_id(rec.request, "actor_id", "request");
    const std::string reason_text = json_io::require_string(rec.resolved, "reason", "resolved");
    sync::AnchorReason reason = sync::AnchorReason::reset;
    if (reason_text == "teleport") {
      reason = sync::AnchorReason::teleport;
    } else if (reason_text == "transition") {
      reason = sync::AnchorReason::transition;
    }
    registry.reset_anchor(
      id, json_io::parse_geo_pose(rec.resolved.at("real"), "resolved.real"),
      json_io::parse_pose(rec.resolved.at("virtual"), frames::Frame::Fc, "resolved.virtual"),
      json_io::require_uint(rec.resolved, "reset_timestamp_us", "resolved"), reason);
  }
  const auto all = registry.anchor_events();
  return {all.begin() + static_cast<std::ptrdiff_t>(before), all.end()};
}

}  // namespace vve::session
