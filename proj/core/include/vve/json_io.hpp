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

#ifndef VVE__JSON_IO_HPP_
#define VVE__JSON_IO_HPP_

// JSON mapping for the domain types. Object keys are emitted in a fixed order so logs can be
// compared byte for byte.

#include "vve/error.hpp"
#include "vve/frames.hpp"
#include "vve/sync.hpp"
#include "vve/vru_safety.hpp"
#include "vve/wire.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace vve::json_io
{

using Json = nlohmann::ordered_json;

/// Validation failure attributed to one field, e.g. "pose.psi".
class FieldError : public ConfigError
{
public:
  FieldError(std::string field, std::string reason);
  const std::string & field() const { return field_; }
  const std::string & reason() const { return reason_; }

private:
  std::string field_;
  std::string reason_;
};

std::string join_path(std::string_view parent, std::string_view key);

const Json & require_member(const Json & obj, std::string_view key, std::string_view path);
double require_number(const Json & obj, std::string_view key, std::string_view path);
double number_or(const Json & obj, std::string_view key, double fallback, std::string_view path);
std::uint64_t require_uint(const Json & obj, std::string_view key, std::string_view path);
std::string require_string(const Json & obj, std::string_view key, std::string_view path);
bool bool_or(const Json & obj, std::string_view key, bool fallback, std::string_view path);

/// Reads {"x","y","psi"} and tags it with `frame`. Heading must lie in (-180, 180].
frames::PlanarPose parse_pose(const Json & obj, frames::Frame frame, std::string_view path);
/// Reads {"latitude_deg","longitude_deg","heading_deg"[,"timestamp_us"]}.
frames::GeoPose parse_geo_pose(const Json & obj, std::string_view path);
frames::GeoOrigin parse_origin(const Json & obj, std::string_view path);
sync::ActorId parse_actor_id(const Json & obj, std::string_view key, std::string_view path);
/// Overlays the keys present in obj onto `base`.
vru::AlertParams parse_alert_params(const Json & obj, vru::AlertParams base, std::string_view path);

Json to_json(const frames::PlanarPose & pose);
Json to_json(const frames::GeoPose & pose);
Json to_json(const frames::GeoOrigin & origin);
Json to_json(const sync::SyncAnchor & anchor);
Json to_json(const vru::AlertParams & params);
Json to_json(const vru::AlertState & state);
Json to_json(const vru::AlertTransition & transition);
Json to_json(const wire::ChannelStats & stats);
Json to_json(const sync::AnchorEvent & event);

/// Appends the members of `extra` to `base`; keys already in `base` keep their position.
Json merge_objects(Json base, const Json & extra);

/// Parses a JSON document from disk; errors name the file.
Json load_json_file(const std::filesystem::path & path);

}  // namespace vve::json_io

#endif  // VVE__JSON_IO_HPP_
