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

#ifndef VVE_TEST__FIXTURES_HPP_
#define VVE_TEST__FIXTURES_HPP_

#include "oracle.hpp"

#include <vve/frames.hpp>
#include <vve/sync.hpp>

#include <filesystem>
#include <string>

namespace vve_test
{

inline constexpr double kLat0 = 40.0;
inline constexpr double kLon0 = -83.0;

vve::frames::GeoOrigin test_origin();

/// GeoPose at (north, east) meters from the test origin, via the independent projection.
vve::frames::GeoPose geo_at(double north_m, double east_m, double heading_deg, std::uint64_t t_us = 0);

Geo to_oracle(const vve::frames::GeoPose & g);
Pose3 to_oracle(const vve::frames::PlanarPose & p);

std::filesystem::path scenario_path(const std::string & name);

/// Fresh, empty directory under the system temp dir.
std::filesystem::path fresh_dir(const std::string & tag);

}  // namespace vve_test

#endif  // VVE_TEST__FIXTURES_HPP_
