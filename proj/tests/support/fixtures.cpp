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

#include "fixtures.hpp"

#include <unistd.h>

namespace vve_test
{

vve::frames::GeoOrigin test_origin() { return {kLat0, kLon0}; }

vve::frames::GeoPose geo_at(double north_m, double east_m, double heading_deg, std::uint64_t t_us)
{
  const Geo g = unproject({north_m, east_m}, heading_deg, kLat0, kLon0);
  return {g.lat, g.lon, g.heading, t_us};
}

Geo to_oracle(const vve::frames::GeoPose & g) { return {g.latitude_deg, g.longitude_deg, g.heading_deg}; }

Pose3 to_oracle(const vve::frames::PlanarPose & p) { return {p.x, p.y, p.psi}; }

std::filesystem::path scenario_path(const std::string & name)
{
  return std::filesystem::path(VVE_SCENARIO_DIR) / name;
}

std::filesystem::path fresh_dir(const std::string & tag)
{
  const auto dir = std::filesystem::temp_directory_path() /
                   ("vve_test_" + tag + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace vve_test
