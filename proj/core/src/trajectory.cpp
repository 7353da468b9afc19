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

#include "vve/trajectory.hpp"

#include "vve/channel.hpp"
#include "vve/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace vve::harness
{

using json_io::Json;

namespace
{

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double heading_from_velocity(double v_north, double v_east)
{
  return frames::wrap_heading_half_open(std::atan2(v_east, v_north) * kRadToDeg);
}

LocalPoint along(double heading_deg, double distance)
{
  const auto [s, c] = frames::sincos_deg(heading_deg);
  return {c * distance, s * distance};
}

struct Sample
{
  LocalPoint position;
  double heading_deg;
};

// Constant-speed parametrisation of (sin u, sin 2u) by tabulated arc length.
class FigureEight
{
public:
  explicit FigureEight(double extent) : extent_(extent)
  {
    constexpr int kSegments = 20000;
    u_.resize(kSegments + 1);
    s_.resize(kSegments + 1);
    const double du = 2.0 * std::numbers::pi / kSegments;
    for (int i = 0; i <= kSegments; ++i) {
      u_[i] = i * du;
      if (i > 0) {
        s_[i] = s_[i - 1] + 0.5 * du * (speed_at(u_[i - 1]) + speed_at(u_[i]));
      }
    }
  }

  Sample at_arc_length(double s) const
  {
    const double lap = s_.back();
    s = std::fmod(s, lap);
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    const std::size_t hi = std::min<std::size_t>(it - s_.begin(), s_.size() - 1);
    const std::size_t lo = hi == 0 ? 0 : hi - 1;
    const double span = s_[hi] - s_[lo];
    const double frac = span > 0.0 ? (s - s_[lo]) / span : 0.0;
    const double u = u_[lo] + frac * (u_[hi] - u_[lo]);
    const LocalPoint p{extent_ * std::sin(u), extent_ * std::sin(2.0 * u)};
    const double vn = extent_ * std::cos(u);
    const double ve = 2.0 * extent_ * std::cos(2.0 * u);
    return {p, heading_from_velocity(vn, ve)};
  }

private:
  double speed_at(double u) const
  {
    return extent_ * std::hypot(std::cos(u), 2.0 * std::cos(2.0 * u));
  }

  double extent_;
  std::vector<double> u_;
  std::vector<double> s_;
};

Sample along_polyline(const std::vector<LocalPoint> & pts, double s)
{
  double heading = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dn = pts[i].north_m - pts[i - 1].north_m;
    const double de = pts[i].east_m - pts[i - 1].east_m;
    const double len = std::hypot(dn, de);
    if (len == 0.0) {
      continue;
    }
    heading = heading_from_velocity(dn, de);
    if (s <= len) {
      const double f = s / len;
      return {{pts[i - 1].north_m + f * dn, pts[i - 1].east_m + f * de}, heading};
    }
    s -= len;
  }
  return {pts.back(), heading};
}

LocalPoint parse_local_point(const Json & obj, std::string_view path)
{
  return {json_io::require_number(obj, "north_m", path), json_io::require_number(obj, "east_m", path)};
}

}  // namespace

std::string_view to_string(TrajectoryKind kind)
{
  switch (kind) {
    case TrajectoryKind::straight:
      return "straight";
    case TrajectoryKind::circle:
      return "circle";
    case TrajectoryKind::figure_eight:
      return "figure_eight";
    case TrajectoryKind::waypoint_file:
      return "waypoint_file";
    case TrajectoryKind::stationary:
      return "stationary";
  }
  return "unknown";
}

std::optional<TrajectoryKind> parse_trajectory_kind(std::string_view text)
{
  for (auto k :
       {TrajectoryKind::straight, TrajectoryKind::circle, TrajectoryKind::figure_eight,
        TrajectoryKind::waypoint_file, TrajectoryKind::stationary}) {
    if (to_string(k) == text) {
      return k;
    }
  }
  return std::nullopt;
}

void validate(const TrajectorySpec & spec)
{
  if (!std::isfinite(spec.duration_s) || spec.duration_s < 0.0) {
    throw ConfigError("trajectory duration_s must be >= 0");
  }
  if (!std::isfinite(spec.rate_hz) || spec.rate_hz < 1.0 || spec.rate_hz > 100.0) {
    throw ConfigError("trajectory rate_hz must be in [1, 100]");
  }
  if (spec.kind == TrajectoryKind::stationary) {
    if (spec.speed_mps != 0.0) {
      throw ConfigError("stationary trajectory must have speed_mps = 0");
    }
  } else if (!std::isfinite(spec.speed_mps) || spec.speed_mps <= 0.0) {
    throw ConfigError("trajectory speed_mps must be > 0");
  }
  if (!std::isfinite(spec.heading_deg)) {
    throw ConfigError("trajectory heading_deg must be finite");
  }
  if (spec.kind == TrajectoryKind::circle && !(spec.radius_m > 0.0)) {
    throw ConfigError("circle radius_m must be > 0");
  }
  if (spec.kind == TrajectoryKind::figure_eight && !(spec.extent_m > 0.0)) {
    throw ConfigError("figure_eight extent_m must be > 0");
  }
  if (spec.kind == TrajectoryKind::waypoint_file && spec.waypoints.size() < 2) {
    throw ConfigError("waypoint trajectory needs at least two waypoints");
  }
  if (!std::isfinite(spec.position_jitter_m) || spec.position_jitter_m < 0.0) {
    throw ConfigError("position_jitter_m must be >= 0");
  }
}

std::vector<frames::GeoPose> generate(const TrajectorySpec & spec)
{
  validate(spec);
  const auto count = static_cast<std::size_t>(std::floor(spec.duration_s * spec.rate_hz + 1e-9));
  std::vector<frames::GeoPose> out;
  out.reserve(count);

  std::optional<FigureEight> eight;
  if (spec.kind == TrajectoryKind::figure_eight) {
    eight.emplace(spec.extent_m);
  }
  SeededRng jitter(spec.seed);

  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / spec.rate_hz;
    const double s = spec.speed_mps * t;
    Sample sample{};
    switch (spec.kind) {
      case TrajectoryKind::straight: {
        const LocalPoint d = along(spec.heading_deg, s);
        sample = {{spec.start.north_m + d.north_m, spec.start.east_m + d.east_m},
                  frames::wrap_heading_half_open(spec.heading_deg)};
        break;
      }
      case TrajectoryKind::stationary:
        sample = {spec.start, frames::wrap_heading_half_open(spec.heading_deg)};
        break;
      case TrajectoryKind::circle: {
        const double swept = s / spec.radius_m * kRadToDeg;
        const double sign = spec.clockwise ? 1.0 : -1.0;
        const double heading = spec.heading_deg + sign * swept;
        const LocalPoint to_center = along(spec.heading_deg + sign * 90.0, spec.radius_m);
        const LocalPoint from_center = along(heading - sign * 90.0, spec.radius_m);
        sample = {{spec.start.north_m + to_center.north_m + from_center.north_m,
                   spec.start.east_m + to_center.east_m + from_center.east_m},
                  frames::wrap_heading_half_open(heading)};
        break;
      }
      case TrajectoryKind::figure_eight: {
        sample = eight->at_arc_length(s);
        sample.position.north_m += spec.start.north_m;
        sample.position.east_m += spec.start.east_m;
        break;
      }
      case TrajectoryKind::waypoint_file:
        sample = along_polyline(spec.waypoints, s);
        break;
    }

    if (spec.position_jitter_m > 0.0) {
      sample.position.north_m += jitter.uniform(-spec.position_jitter_m, spec.position_jitter_m);
      sample.position.east_m += jitter.uniform(-spec.position_jitter_m, spec.position_jitter_m);
    }

    const auto ts =
      spec.start_time_us + static_cast<std::uint64_t>(std::llround(static_cast<double>(i) * 1e6 / spec.rate_hz));
    out.push_back(frames::fr_to_geo(
      frames::PlanarPose{sample.position.north_m, sample.position.east_m, sample.heading_deg, frames::Frame::Fr},
      spec.origin, ts));
  }
  return out;
}

std::vector<LocalPoint> load_waypoints(const std::filesystem::path & file)
{
  const Json doc = json_io::load_json_file(file);
  const Json & arr = json_io::require_member(doc, "waypoints", "");
  if (!arr.is_array()) {
    throw json_io::FieldError("waypoints", "expected an array");
  }
  std::vector<LocalPoint> pts;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    pts.push_back(parse_local_point(arr[i], "waypoints[" + std::to_string(i) + "]"));
  }
  return pts;
}

TrajectorySpec parse_trajectory_spec(
  const Json & obj, const frames::GeoOrigin & default_origin, const std::filesystem::path & base_dir,
  std::string_view path)
{
  TrajectorySpec spec;
  const std::string kind_text = json_io::require_string(obj, "kind", path);
  const auto kind = parse_trajectory_kind(kind_text);
  if (!kind) {
    throw json_io::FieldError(json_io::join_path(path, "kind"), "unknown trajectory kind '" + kind_text + "'");
  }
  spec.kind = *kind;
  spec.origin = obj.contains("origin") ? json_io::parse_origin(obj.at("origin"), json_io::join_path(path, "origin"))
                                       : default_origin;
  spec.speed_mps = json_io::number_or(obj, "speed_mps", spec.kind == TrajectoryKind::stationary ? 0.0 : 1.0, path);
  spec.duration_s = json_io::require_number(obj, "duration_s", path);
  spec.rate_hz = json_io::number_or(obj, "rate_hz", 10.0, path);
  if (obj.contains("seed")) {
    spec.seed = json_io::require_uint(obj, "seed", path);
  }
  if (obj.contains("start_time_us")) {
    spec.start_time_us = json_io::require_uint(obj, "start_time_us", path);
  }
  if (obj.contains("start")) {
    spec.start = parse_local_point(obj.at("start"), json_io::join_path(path, "start"));
  }
  spec.heading_deg = json_io::number_or(obj, "heading_deg", 0.0, path);
  spec.radius_m = json_io::number_or(obj, "radius_m", spec.radius_m, path);
  spec.clockwise = json_io::bool_or(obj, "clockwise", true, path);
  spec.extent_m = json_io::number_or(obj, "extent_m", spec.extent_m, path);
  spec.position_jitter_m = json_io::number_or(obj, "position_jitter_m", 0.0, path);

  if (spec.kind == TrajectoryKind::waypoint_file) {
    if (obj.contains("waypoints")) {
      const Json & arr = obj.at("waypoints");
      if (!arr.is_array()) {
        throw json_io::FieldError(json_io::join_path(path, "waypoints"), "expected an array");
      }
      for (std::size_t i = 0; i < arr.size(); ++i) {
        spec.waypoints.push_back(
          parse_local_point(arr[i], json_io::join_path(path, "waypoints[" + std::to_string(i) + "]")));
      }
    } else {
      const std::filesystem::path file = json_io::require_string(obj, "file", path);
      spec.waypoints = load_waypoints(file.is_absolute() ? file : base_dir / file);
    }
  }

  try {
    validate(spec);
  } catch (const ConfigError & e) {
    throw json_io::FieldError(std::string(path), e.what());
  }
  return spec;
}

Json to_json(const TrajectorySpec & spec)
{
  Json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["origin"] = json_io::to_json(spec.origin);
  j["speed_mps"] = spec.speed_mps;
  j["duration_s"] = spec.duration_s;
  j["rate_hz"] = spec.rate_hz;
  j["seed"] = spec.seed;
  j["start_time_us"] = spec.start_time_us;
  j["start"] = Json{{"north_m", spec.start.north_m}, {"east_m", spec.start.east_m}};
  j["heading_deg"] = spec.heading_deg;
  j["radius_m"] = spec.radius_m;
  j["clockwise"] = spec.clockwise;
  j["extent_m"] = spec.extent_m;
  j["position_jitter_m"] = spec.position_jitter_m;
  if (!spec.waypoints.empty()) {
    Json pts = Json::array();
    for (const auto & p : spec.waypoints) {
      pts.push_back(Json{{"north_m", p.north_m}, {"east_m", p.east_m}});
    }
    j["waypoints"] = pts;
  }
  return j;
}

}  // namespace vve::harness
