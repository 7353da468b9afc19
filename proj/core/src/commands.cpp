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

#include "vve/commands.hpp"

#include <algorithm>
#include <array>
#include <functional>

namespace vve::commands
{
namespace
{

using json_io::Json;

constexpr std::array<std::string_view, 8> kAlertKeys{
  "caution_distance_m", "caution_ttc_s",        "warning_distance_m",    "warning_ttc_s",
  "hysteresis_s",       "min_closing_speed_mps", "suppress_when_parked", "parked_speed_mps"};

std::string join_reasons(const std::vector<Issue> & issues)
{
  std::string out;
  for (const Issue & i : issues) {
    if (!out.empty()) {
      out += "; ";
    }
    out += i.field + ": " + i.reason;
  }
  return out;
}

/// Runs each field reader, collecting failures instead of stopping at the first.
class IssueCollector
{
public:
  template <typename F>
  void field(F && read)
  {
    try {
      std::invoke(std::forward<F>(read));
    } catch (const json_io::FieldError & e) {
      issues_.push_back({e.field(), e.reason()});
    } catch (const ConfigError & e) {
      issues_.push_back({"", e.what()});
    } catch (const DomainError & e) {
      issues_.push_back({"", e.what()});
    }
  }

  void add(std::string field, std::string reason) { issues_.push_back({std::move(field), std::move(reason)}); }

  void reject_unknown_keys(const Json & body, std::initializer_list<std::string_view> allowed)
  {
    for (const auto & [key, value] : body.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        add(key, "unknown field");
      }
    }
  }

  void throw_if_any() const
  {
    if (!issues_.empty()) {
      throw CommandRejected(RejectCode::invalid, issues_);
    }
  }

private:
  std::vector<Issue> issues_;
};

std::optional<double> optional_number(const Json & body, std::string_view key)
{
  if (!body.contains(std::string(key))) {
    return std::nullopt;
  }
  return json_io::require_number(body, key, "");
}

}  // namespace

std::string_view command_name(const Command & command)
{
  struct Visitor
  {
    std::string_view operator()(const ResetAnchor &) const { return "reset_anchor"; }
    std::string_view operator()(const Teleport &) const { return "teleport"; }
    std::string_view operator()(const SpawnActor &) const { return "spawn_actor"; }
    std::string_view operator()(const SetChannel &) const { return "set_channel"; }
    std::string_view operator()(const SetThresholds &) const { return "set_thresholds"; }
    std::string_view operator()(const ConfirmTransition &) const { return "confirm_transition"; }
  };
  return std::visit(Visitor{}, command);
}

std::string_view to_string(RejectCode code)
{
  switch (code) {
    case RejectCode::invalid:
      return "invalid";
    case RejectCode::unknown_actor:
      return "unknown_actor";
    case RejectCode::conflict:
      return "conflict";
  }
  return "invalid";
}

CommandRejected::CommandRejected(RejectCode code, std::vector<Issue> issues)
: Error(join_reasons(issues)), code_(code), issues_(std::move(issues))
{
}

Command parse_command(const Json & body)
{
  IssueCollector c;
  if (!body.is_object()) {
    throw CommandRejected(RejectCode::invalid, {{"", "expected an object"}});
  }
  std::string type;
  c.field([&] { type = json_io::require_string(body, "type", ""); });
  c.throw_if_any();

  if (type == "reset_anchor") {
    ResetAnchor cmd;
    c.reject_unknown_keys(body, {"type", "actor_id", "virtual_initial", "real"});
    c.field([&] { cmd.actor_id = json_io::parse_actor_id(body, "actor_id", ""); });
    c.field([&] {
      cmd.virtual_initial = json_io::parse_pose(
        json_io::require_member(body, "virtual_initial", ""), frames::Frame::Fc, "virtual_initial");
    });
    if (body.contains("real")) {
      c.field([&] { cmd.real = json_io::parse_geo_pose(body.at("real"), "real"); });
    }
    c.throw_if_any();
    return cmd;
  }
  if (type == "teleport") {
    Teleport cmd;
    c.reject_unknown_keys(body, {"type", "actor_id", "pose"});
    c.field([&] { cmd.actor_id = json_io::parse_actor_id(body, "actor_id", ""); });
    c.field([&] {
      cmd.pose = json_io::parse_pose(json_io::require_member(body, "pose", ""), frames::Frame::Fc, "pose");
    });
    c.throw_if_any();
    return cmd;
  }
  if (type == "spawn_actor") {
    SpawnActor cmd;
    c.reject_unknown_keys(
      body, {"type", "actor_id", "kind", "virtual_initial", "origin", "stale_threshold_ms", "real"});
    c.field([&] { cmd.registration.actor_id = json_io::parse_actor_id(body, "actor_id", ""); });
    c.field([&] {
      const std::string kind = json_io::require_string(body, "kind", "");
      const auto parsed = sync::parse_actor_kind(kind);
      if (!parsed) {
        throw json_io::FieldError("kind", "expected \"vehicle\" or \"pedestrian\"");
      }
      cmd.registration.kind = *parsed;
    });
    if (body.contains("virtual_initial")) {
      c.field([&] {
        cmd.registration.virtual_initial =
          json_io::parse_pose(body.at("virtual_initial"), frames::Frame::Fc, "virtual_initial");
      });
    }
    if (body.contains("origin")) {
      c.field([&] { cmd.registration.origin = json_io::parse_origin(body.at("origin"), "origin"); });
    }
    if (body.contains("stale_threshold_ms")) {
      c.field([&] {
        const double ms = json_io::require_number(body, "stale_threshold_ms", "");
        if (!(ms > 0.0) || ms > 3.6e6) {
          throw json_io::FieldError("stale_threshold_ms", "must be in (0, 3600000]");
        }
        cmd.registration.stale_threshold_us = static_cast<std::uint64_t>(ms * 1000.0);
      });
    }
    if (body.contains("real")) {
      c.field([&] { cmd.real = json_io::parse_geo_pose(body.at("real"), "real"); });
      if (!body.contains("virtual_initial")) {
        c.add("virtual_initial", "required when real is given");
      }
    }
    c.throw_if_any();
    return cmd;
  }
  if (type == "set_channel") {
    SetChannel cmd;
    c.reject_unknown_keys(body, {"type", "fixed_delay_ms", "jitter_ms", "loss_probability"});
    c.field([&] { cmd.fixed_delay_ms = optional_number(body, "fixed_delay_ms"); });
    c.field([&] { cmd.jitter_ms = optional_number(body, "jitter_ms"); });
    c.field([&] { cmd.loss_probability = optional_number(body, "loss_probability"); });
    c.throw_if_any();
    c.field([&] {
      try {
        harness::validate(apply_overlay(cmd, {}));
      } catch (const ConfigError & e) {
        throw json_io::FieldError("channel", e.what());
      }
    });
    c.throw_if_any();
    return cmd;
  }
  if (type == "set_thresholds") {
    SetThresholds cmd;
    cmd.overlay = Json::object();
    for (const auto & [key, value] : body.items()) {
      if (key == "type") {
        continue;
      }
      if (std::find(kAlertKeys.begin(), kAlertKeys.end(), key) == kAlertKeys.end()) {
        c.add(key, "unknown field");
        continue;
      }
      const bool ok = key == "suppress_when_parked" ? value.is_boolean() : value.is_number();
      if (!ok) {
        c.add(key, key == "suppress_when_parked" ? "expected a boolean" : "expected a number");
        continue;
      }
      cmd.overlay[key] = value;
    }
    if (cmd.overlay.empty() && body.size() == 1) {
      c.add("", "no threshold given");
    }
    c.throw_if_any();
    return cmd;
  }
  if (type == "confirm_transition") {
    ConfirmTransition cmd;
    c.reject_unknown_keys(body, {"type", "actor_id"});
    c.field([&] { cmd.actor_id = json_io::parse_actor_id(body, "actor_id", ""); });
    c.throw_if_any();
    return cmd;
  }
  throw CommandRejected(RejectCode::invalid, {{"type", "unknown command '" + type + "'"}});
}

Json to_json(const Command & command)
{
  Json j;
  j["type"] = std::string(command_name(command));
  std::visit(
    [&j](const auto & cmd) {
      using T = std::decay_t<decltype(cmd)>;
      if constexpr (std::is_same_v<T, ResetAnchor>) {
        j["actor_id"] = cmd.actor_id;
        j["virtual_initial"] = json_io::to_json(cmd.virtual_initial);
        if (cmd.real) {
          j["real"] = json_io::to_json(*cmd.real);
        }
      } else if constexpr (std::is_same_v<T, Teleport>) {
        j["actor_id"] = cmd.actor_id;
        j["pose"] = json_io::to_json(cmd.pose);
      } else if constexpr (std::is_same_v<T, SpawnActor>) {
        const auto & r = cmd.registration;
        j["actor_id"] = r.actor_id;
        j["kind"] = std::string(sync::to_string(r.kind));
        if (r.virtual_initial) {
          j["virtual_initial"] = json_io::to_json(*r.virtual_initial);
        }
        if (r.origin) {
          j["origin"] = json_io::to_json(*r.origin);
        }
        if (r.stale_threshold_us) {
          j["stale_threshold_ms"] = static_cast<double>(*r.stale_threshold_us) / 1000.0;
        }
        if (cmd.real) {
          j["real"] = json_io::to_json(*cmd.real);
        }
      } else if constexpr (std::is_same_v<T, SetChannel>) {
        if (cmd.fixed_delay_ms) {
          j["fixed_delay_ms"] = *cmd.fixed_delay_ms;
        }
        if (cmd.jitter_ms) {
          j["jitter_ms"] = *cmd.jitter_ms;
        }
        if (cmd.loss_probability) {
          j["loss_probability"] = *cmd.loss_probability;
        }
      } else if constexpr (std::is_same_v<T, SetThresholds>) {
        for (const auto & [key, value] : cmd.overlay.items()) {
          j[key] = value;
        }
      } else {
        j["actor_id"] = cmd.actor_id;
      }
    },
    command);
  return j;
}

Json rejection_json(const CommandRejected & rejected)
{
  Json errors = Json::array();
  for (const Issue & i : rejected.issues()) {
    errors.push_back({{"field", i.field}, {"reason", i.reason}});
  }
  return {{"ok", false}, {"code", std::string(to_string(rejected.code()))}, {"errors", errors}};
}

harness::ChannelModel apply_overlay(const SetChannel & cmd, harness::ChannelModel base)
{
  base.fixed_delay_ms = cmd.fixed_delay_ms.value_or(base.fixed_delay_ms);
  base.jitter_ms = cmd.jitter_ms.value_or(base.jitter_ms);
  base.loss_probability = cmd.loss_probability.value_or(base.loss_probability);
  return base;
}

}  // namespace vve::commands
