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

#ifndef VVE__COMMANDS_HPP_
#define VVE__COMMANDS_HPP_

// Operator commands. The request schema is documented in docs/console_api.md.

#include "vve/channel.hpp"
#include "vve/error.hpp"
#include "vve/frames.hpp"
#include "vve/json_io.hpp"
#include "vve/sync.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vve::commands
{

struct ResetAnchor
{
  sync::ActorId actor_id{0};
  frames::PlanarPose virtual_initial;
  // Real pose paired with virtual_initial; the latest fix when omitted.
  std::optional<frames::GeoPose> real;
};

struct Teleport
{
  sync::ActorId actor_id{0};
  frames::PlanarPose pose;
};

struct SpawnActor
{
  sync::ActorRegistration registration;
  // With `real` the actor is anchored immediately; otherwise at its first fix.
  std::optional<frames::GeoPose> real;
};

/// Only the keys present in the request are changed.
struct SetChannel
{
  std::optional<double> fixed_delay_ms;
  std::optional<double> jitter_ms;
  std::optional<double> loss_probability;
};

struct SetThresholds
{
  json_io::Json overlay;  // subset of the alert parameter keys
};

struct ConfirmTransition
{
  sync::ActorId actor_id{0};
};

using Command = std::variant<ResetAnchor, Teleport, SpawnActor, SetChannel, SetThresholds, ConfirmTransition>;

std::string_view command_name(const Command & command);

struct Issue
{
  std::string field;
  std::string reason;

  friend bool operator==(const Issue &, const Issue &) = default;
};

enum class RejectCode : std::uint8_t { invalid, unknown_actor, conflict };

std::string_view to_string(RejectCode code);

/// Command refused before or during application. Nothing was changed.
class CommandRejected : public Error
{
public:
  CommandRejected(RejectCode code, std::vector<Issue> issues);
  RejectCode code() const { return code_; }
  const std::vector<Issue> & issues() const { return issues_; }

private:
  RejectCode code_;
  std::vector<Issue> issues_;
};

/// Validates a request body. Every bad field is reported, not just the first.
Command parse_command(const json_io::Json & body);

/// Canonical request form; parse_command(to_json(c)) reproduces c.
json_io::Json to_json(const Command & command);

json_io::Json rejection_json(const CommandRejected & rejected);

harness::ChannelModel apply_overlay(const SetChannel & cmd, harness::ChannelModel base);

}  // namespace vve::commands

#endif  // VVE__COMMANDS_HPP_
