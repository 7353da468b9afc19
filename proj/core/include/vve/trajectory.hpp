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

#ifndef VVE__TRAJECTORY_HPP_
#define VVE__TRAJECTORY_HPP_

#include "vve/frames.hpp"
#include "vve/json_io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

namespace vve::harness
{

enum class TrajectoryKind : std::uint8_t { straight, circle, figure_eight, waypoint_file, stationary };

std::string_view to_string(TrajectoryKind kind);
std::optional<TrajectoryKind> parse_trajectory_kind(std::string_view text);

/// Point in the local tangent plane, meters north/east of the origin.
struct LocalPoint
{
  double north_m{0.0};
  double east_m{0.0};
};

struct TrajectorySpec
{
  TrajectoryKind kind{TrajectoryKind::straight};
  frames::GeoOrigin origin{0.0, 0.0};
  double speed_mps{1.0};  // 0 only for stationary
  double duration_s{0.0};
  double rate_hz{10.0};  // [1, 100]
  std::uint64_t seed{0};
  std::uint64_t start_time_us{0};

  LocalPoint start;             // straight, circle, stationary, figure_eight offset
  double heading_deg{0.0};      // straight/stationary direction, circle initial heading
  double radius_m{10.0};        // circle
  bool clockwise{true};         // circle, seen from above with north up
  double extent_m{20.0};        // figure_eight amplitude
  std::vector<LocalPoint> waypoints;  // waypoint_file, traversed once then held
  double position_jitter_m{0.0};      // uniform per-axis noise, seeded
};

/// Throws ConfigError when the trajectory parameters are inconsistent.
void validate(const TrajectorySpec & spec);

/// floor(duration * rate) samples at t_i = i / rate. Headings follow the analytic velocity
/// direction, clockwise from north.
std::vector<frames::GeoPose> generate(const TrajectorySpec & spec);

/// Reads {"kind", ...} as documented in docs/scenario.md. `base_dir` resolves waypoint files.
TrajectorySpec parse_trajectory_spec(
  const json_io::Json & obj, const frames::GeoOrigin & default_origin,
  const std::filesystem::path & base_dir, std::string_view path);

/// Waypoint file: {"waypoints": [{"north_m": .., "east_m": ..}, ...]}.
std::vector<LocalPoint> load_waypoints(const std::filesystem::path & file);

json_io::Json to_json(const TrajectorySpec & spec);

}  // namespace vve::harness

#endif  // VVE__TRAJECTORY_HPP_
