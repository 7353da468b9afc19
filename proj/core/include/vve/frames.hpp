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

#ifndef VVE__FRAMES_HPP_
#define VVE__FRAMES_HPP_

// Planar frame chain between a GPS-equipped real actor and its virtual twin.
//
//   Fr  real frame: X north, Y east, heading clockwise from north in (-180, 180]
//   Fg  Y flipped, heading counterclockwise, psi in (-360, 0]
//   F   displacement since reset, expressed in the actor's reset-heading frame
//   Fv  virtual frame, counterclockwise heading
//   Fc  the simulator's native frame, Fv with Y and heading negated
//
// All angles are degrees at the interface. See docs/frames.md.

#include <cstdint>
#include <string_view>

namespace vve::frames
{

inline constexpr double kEarthRadiusM = 6378137.0;
inline constexpr double kMaxOriginLatitudeDeg = 85.0;
inline constexpr double kMaxProjectionSpanDeg = 1.0;

enum class Frame : std::uint8_t { Fr, Fg, F, Fv, Fc };

std::string_view to_string(Frame frame);

struct GeoPose
{
  double latitude_deg{0.0};
  double longitude_deg{0.0};
  double heading_deg{0.0};  // clockwise from true north, (-180, 180]
  std::uint64_t timestamp_us{0};

  friend bool operator==(const GeoPose &, const GeoPose &) = default;
};

/// Throws DomainError unless every field is finite and within its range.
void validate(const GeoPose & pose);

/// Reference point of the local equirectangular tangent plane.
class GeoOrigin
{
public:
  /// Throws ProjectionError when |latitude| >= 85 deg or inputs are non-finite.
  GeoOrigin(double latitude_deg, double longitude_deg);

  double latitude_deg() const { return latitude_deg_; }
  double longitude_deg() const { return longitude_deg_; }
  double meters_per_deg_lat() const { return meters_per_deg_lat_; }
  double meters_per_deg_lon() const { return meters_per_deg_lon_; }

  friend bool operator==(const GeoOrigin &, const GeoOrigin &) = default;

private:
  double latitude_deg_;
  double longitude_deg_;
  double meters_per_deg_lat_;
  double meters_per_deg_lon_;
};

struct PlanarPose
{
  double x{0.0};
  double y{0.0};
  double psi{0.0};
  Frame frame{Frame::F};

  friend bool operator==(const PlanarPose &, const PlanarPose &) = default;
};

/// Throws DomainError on non-finite components or a heading outside the frame's range.
void validate(const PlanarPose & pose);

/// mod(psi + 360, 360), always in [0, 360).
double normalize_heading_cw(double psi_deg);

/// Wraps any finite angle into (-180, 180]. Values already in range are returned unchanged.
double wrap_heading_half_open(double psi_deg);

/// Smallest signed difference a - b, in (-180, 180].
double heading_difference(double a_deg, double b_deg);

/// sin and cos of an angle in degrees; exact at multiples of 90.
struct SinCos
{
  double sin;
  double cos;
};
SinCos sincos_deg(double angle_deg);

PlanarPose geo_to_fr(const GeoPose & geo, const GeoOrigin & origin);
GeoPose fr_to_geo(const PlanarPose & pose, const GeoOrigin & origin, std::uint64_t timestamp_us = 0);

PlanarPose fr_to_fg(const PlanarPose & pose);
PlanarPose fg_to_fr(const PlanarPose & pose);

/// Real motion since reset, expressed in the reset-heading frame.
PlanarPose fg_to_f(
  const PlanarPose & current, const PlanarPose & anchor_g0, const PlanarPose & base_f0);
PlanarPose f_to_fg(
  const PlanarPose & pose_f, const PlanarPose & anchor_g0, const PlanarPose & base_f0);

/// Applies the F-frame displacement from the virtual initial pose.
PlanarPose f_to_fv(
  const PlanarPose & pose_f, const PlanarPose & base_f0, const PlanarPose & anchor_v0);
PlanarPose fv_to_f(
  const PlanarPose & pose_v, const PlanarPose & base_f0, const PlanarPose & anchor_v0);

/// Fv <-> Fc. An involution; the output frame tag is the other one.
PlanarPose fv_fc_convert(const PlanarPose & pose);

}  // namespace vve::frames

#endif  // VVE__FRAMES_HPP_
