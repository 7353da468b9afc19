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

#include "vve/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <utility>

namespace vve::json_io
{

FieldError::FieldError(std::string field, std::string reason)
: ConfigError(field + ": " + reason), field_(std::move(field)), reason_(std::move(reason))
{
}

std::string join_path(std::string_view parent, std::string_view key)
{
  if (parent.empty()) {
    return std::string(key);
  }
  return std::string(parent) + "." + std::string(key);
}

const Json & require_member(const Json & obj, std::string_view key, std::string_view path)
{
  if (!obj.is_object()) {
    throw FieldError(path.empty() ? "<root>" : std::string(path), "expected an object");
  }
  auto it = obj.find(std::string(key));
  if (it == obj.end()) {
    throw FieldError(join_path(path, key), "missing");
  }
  return *it;
}

double require_number(const Json & obj, std::string_view key, std::string_view path)
{
  const Json & v = require_member(obj, key, path);
  if (!v.is_number()) {
    throw FieldError(join_path(path, key), "expected a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw FieldError(join_path(path, key), "must be finite");
  }
  return d;
}

double number_or(const Json & obj, std::string_view key, double fallback, std::string_view path)
{
  if (!obj.is_object() || !obj.contains(std::string(key))) {
    return fallback;
  }
  return require_number(obj, key, path);
}

std::uint64_t require_uint(const Json & obj, std::string_view key, std::string_view path)
{
  const Json & v = require_member(obj, key, path);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw FieldError(join_path(path, key), "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string require_string(const Json & obj, std::string_view key, std::string_view path)
{
  const Json & v = require_member(obj, key, path);
  if (!v.is_string()) {
    throw FieldError(join_path(path, key), "expected a string");
  }
  return v.get<std::string>();
}

bool bool_or(const Json & obj, std::string_view key, bool fallback, std::string_view path)
{
  if (!obj.is_object() || !obj.contains(std::string(key))) {
    return fallback;
  }
  const Json & v = obj.at(std::string(key));
  if (!v.is_boolean()) {
    throw FieldError(join_path(path, key), "expected a boolean");
  }
  return v.get<bool>();
}

frames::PlanarPose parse_pose(const Json & obj, frames::Frame frame, std::string_view path)
{
  frames::PlanarPose pose;
  pose.x = require_number(obj, "x", path);
  pose.y = require_number(obj, "y", path);
  pose.psi = require_number(obj, "psi", path);
  pose.frame = frame;
  if (!(pose.psi > -180.0 && pose.psi <= 180.0)) {
    throw FieldError(join_path(path, "psi"), "heading must be in (-180, 180]");
  }
  return pose;
}

frames::GeoPose parse_geo_pose(const Json & obj, std::string_view path)
{
  frames::GeoPose geo;
  geo.latitude_deg = require_number(obj, "latitude_deg", path);
  geo.longitude_deg = require_number(obj, "longitude_deg", path);
  geo.heading_deg = require_number(obj, "heading_deg", path);
  if (obj.contains("timestamp_us")) {
    geo.timestamp_us = require_uint(obj, "timestamp_us", path);
  }
  if (geo.latitude_deg < -90.0 || geo.latitude_deg > 90.0) {
    throw FieldError(join_path(path, "latitude_deg"), "must be in [-90, 90]");
  }
  if (geo.longitude_deg < -180.0 || geo.longitude_deg > 180.0) {
    throw FieldError(join_path(path, "longitude_deg"), "must be in [-180, 180]");
  }
  if (!(geo.heading_deg > -180.0 && geo.heading_deg <= 180.0)) {
    throw FieldError(join_path(path, "heading_deg"), "must be in (-180, 180]");
  }
  return geo;
}

frames::GeoOrigin parse_origin(const Json & obj, std::string_view path)
{
  const double lat = require_number(obj, "latitude_deg", path);
  const double lon = require_number(obj, "longitude_deg", path);
  try {
    return frames::GeoOrigin(lat, lon);
  } catch (const Error & e) {
    throw FieldError(std::string(path.empty() ? "origin" : path), e.what());
  }
}

sync::ActorId parse_actor_id(const Json & obj, std::string_view key, std::string_view path)
{
  const Json & v = require_member(obj, key, path);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0 ||
      v.get<std::int64_t>() > std::numeric_limits<sync::ActorId>::max()) {
    throw FieldError(join_path(path, key), "expected an integer in [0, 65535]");
  }
  return static_cast<sync::ActorId>(v.get<std::int64_t>());
}

vru::AlertParams parse_alert_params(const Json & obj, vru::AlertParams base, std::string_view path)
{
  if (!obj.is_object()) {
    throw FieldError(path.empty() ? "<root>" : std::string(path), "expected an object");
  }
  base.caution_distance_m = number_or(obj, "caution_distance_m", base.caution_distance_m, path);
  base.caution_ttc_s = number_or(obj, "caution_ttc_s", base.caution_ttc_s, path);
  base.warning_distance_m = number_or(obj, "warning_distance_m", base.warning_distance_m, path);
  base.warning_ttc_s = number_or(obj, "warning_ttc_s", base.warning_ttc_s, path);
  base.hysteresis_s = number_or(obj, "hysteresis_s", base.hysteresis_s, path);
  base.min_closing_speed_mps =
    number_or(obj, "min_closing_speed_mps", base.min_closing_speed_mps, path);
  base.suppress_when_parked = bool_or(obj, "suppress_when_parked", base.suppress_when_parked, path);
  base.parked_speed_mps = number_or(obj, "parked_speed_mps", base.parked_speed_mps, path);
  try {
    vru::validate(base);
  } catch (const ConfigError & e) {
    throw FieldError(path.empty() ? "thresholds" : std::string(path), e.what());
  }
  return base;
}

Json to_json(const frames::PlanarPose & pose)
{
  Json j;
  j["x"] = pose.x;
  j["y"] = pose.y;
  j["psi"] = pose.psi;
  j["frame"] = std::string(frames::to_string(pose.frame));
  return j;
}

Json to_json(const frames::GeoPose & pose)
{
  Json j;
  j["latitude_deg"] = pose.latitude_deg;
  j["longitude_deg"] = pose.longitude_deg;
  j["heading_deg"] = pose.heading_deg;
  j["timestamp_us"] = pose.timestamp_us;
  return j;
}

Json to_json(const frames::GeoOrigin & origin)
{
  Json j;
  j["latitude_deg"] = origin.latitude_deg();
  j["longitude_deg"] = origin.longitude_deg();
  return j;
}

Json to_json(const sync::SyncAnchor & anchor)
{
  Json j;
  j["reset_timestamp_us"] = anchor.reset_timestamp_us;
  j["origin"] = to_json(anchor.origin);
  j["reset_geo"] = to_json(anchor.reset_geo);
  j["virtual_initial"] = to_json(anchor.virtual_initial);
  j["anchor_g0"] = to_json(anchor.anchor_g0);
  j["anchor_v0"] = to_json(anchor.anchor_v0);
  return j;
}

Json to_json(const vru::AlertParams & p)
{
  Json j;
  j["caution_distance_m"] = p.caution_distance_m;
  j["caution_ttc_s"] = p.caution_ttc_s;
  j["warning_distance_m"] = p.warning_distance_m;
  j["warning_ttc_s"] = p.warning_ttc_s;
  j["hysteresis_s"] = p.hysteresis_s;
  j["min_closing_speed_mps"] = p.min_closing_speed_mps;
  j["suppress_when_parked"] = p.suppress_when_parked;
  j["parked_speed_mps"] = p.parked_speed_mps;
  return j;
}

Json to_json(const vru::AlertState & s)
{
  Json j;
  j["level"] = std::string(vru::to_string(s.level));
  j["distance_m"] = s.distance_m;
  j["ttc_s"] = s.ttc_s ? Json(*s.ttc_s) : Json(nullptr);
  j["closing_speed_mps"] = s.closing_speed_mps ? Json(*s.closing_speed_mps) : Json(nullptr);
  j["since_us"] = s.since_us;
  j["stale"] = s.stale;
  return j;
}

Json to_json(const vru::AlertTransition & t)
{
  Json j;
  j["timestamp_us"] = t.timestamp_us;
  j["vehicle_id"] = t.vehicle_id;
  j["pedestrian_id"] = t.pedestrian_id;
  j["from"] = std::string(vru::to_string(t.from));
  j["to"] = std::string(vru::to_string(t.to));
  j["distance_m"] = t.distance_m;
  j["ttc_s"] = t.ttc_s ? Json(*t.ttc_s) : Json(nullptr);
  return j;
}

Json to_json(const wire::ChannelStats & s)
{
  Json j;
  j["received"] = s.received;
  j["accepted"] = s.accepted;
  j["dropped_crc"] = s.dropped_crc;
  j["dropped_malformed"] = s.dropped_malformed;
  j["dropped_stale_order"] = s.dropped_stale_order;
  j["dropped_unknown_actor"] = s.dropped_unknown_actor;
  j["dropped_rejected"] = s.dropped_rejected;
  j["dropped_injected_loss"] = s.dropped_injected_loss;
  j["last_rx_us"] = s.last_rx_us;
  return j;
}

Json to_json(const sync::AnchorEvent & e)
{
  Json j;
  j["timestamp_us"] = e.timestamp_us;
  j["actor_id"] = e.actor_id;
  j["reason"] = std::string(sync::to_string(e.reason));
  j["anchor"] = to_json(e.anchor);
  return j;
}

Json merge_objects(Json base, const Json & extra)
{
  for (auto it = extra.begin(); it != extra.end(); ++it) {
    base[it.key()] = it.value();
  }
  return base;
}

Json load_json_file(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open " + path.string());
  }
  try {
    return Json::parse(in);
  } catch (const Json::parse_error & e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace vve::json_io
