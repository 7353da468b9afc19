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

#include "vve/frames.hpp"

#include "vve/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace vve::frames
{

namespace
{

// 0.0 - v instead of -v so that zero never turns into -0.0 in logs and on the wire.
constexpr double negate(double v) { return 0.0 - v; }

void require_finite(double v, const char * what)
{
  if (!std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be finite");
  }
}

void require_finite(const PlanarPose & pose, const char * what)
{
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.psi)) {
    throw DomainError(std::string(what) + ": non-finite pose component");
  }
}

void require_frame(const PlanarPose & pose, Frame expected, const char * what)
{
  if (pose.frame != expected) {
    throw FrameMismatchError(
      std::string(what) + ": expected frame " + std::string(to_string(expected)) + ", got " +
      std::string(to_string(pose.frame)));
  }
}

}  // namespace

std::string_view to_string(Frame frame)
{
  switch (frame) {
    case Frame::Fr:
      return "Fr";
    case Frame::Fg:
      return "Fg";
    case Frame::F:
      return "F";
    case Frame::Fv:
      return "Fv";
    case Frame::Fc:
      return "Fc";
  }
  return "?";
}

void validate(const GeoPose & pose)
{
  require_finite(pose.latitude_deg, "latitude_deg");
  require_finite(pose.longitude_deg, "longitude_deg");
  require_finite(pose.heading_deg, "heading_deg");
  if (pose.latitude_deg < -90.0 || pose.latitude_deg > 90.0) {
    throw DomainError("latitude_deg out of [-90, 90]");
  }
  if (pose.longitude_deg < -180.0 || pose.longitude_deg > 180.0) {
    throw DomainError("longitude_deg out of [-180, 180]");
  }
  if (!(pose.heading_deg > -180.0 && pose.heading_deg <= 180.0)) {
    throw DomainError("heading_deg out of (-180, 180]");
  }
}

GeoOrigin::GeoOrigin(double latitude_deg, double longitude_deg)
: latitude_deg_(latitude_deg), longitude_deg_(longitude_deg)
{
  if (!std::isfinite(latitude_deg) || !std::isfinite(longitude_deg)) {
    throw ProjectionError("origin must be finite");
  }
  if (std::abs(latitude_deg) >= kMaxOriginLatitudeDeg) {
    throw ProjectionError("origin latitude must satisfy |lat| < 85 deg");
  }
  if (longitude_deg < -180.0 || longitude_deg > 180.0) {
    throw ProjectionError("origin longitude out of [-180, 180]");
  }
  meters_per_deg_lat_ = kEarthRadiusM * std::numbers::pi / 180.0;
  meters_per_deg_lon_ = meters_per_deg_lat_ * sincos_deg(latitude_deg).cos;
}

void validate(const PlanarPose & pose)
{
  require_finite(pose, "pose");
  if (pose.frame == Frame::Fg && !(pose.psi > -360.0 && pose.psi <= 0.0)) {
    throw DomainError("Fg heading out of (-360, 0]");
  }
  if (pose.frame == Frame::Fr && !(pose.psi > -180.0 && pose.psi <= 180.0)) {
    throw DomainError("Fr heading out of (-180, 180]");
  }
}

double normalize_heading_cw(double psi_deg)
{
  require_finite(psi_deg, "heading");
  if (psi_deg >= 0.0 && psi_deg < 360.0) {
    return psi_deg + 0.0;
  }
  double r = std::fmod(psi_deg + 360.0, 360.0);
  if (r < 0.0) {
    r += 360.0;
  }
  // -tiny + 360 rounds to 360
  if (r >= 360.0) {
    r -= 360.0;
  }
  return r + 0.0;
}

double wrap_heading_half_open(double psi_deg)
{
  require_finite(psi_deg, "heading");
  if (psi_deg > -180.0 && psi_deg <= 180.0) {
    return psi_deg;
  }
  double r = std::fmod(psi_deg, 360.0);
  if (r <= -180.0) {
    r += 360.0;
  } else if (r > 180.0) {
    r -= 360.0;
  }
  return r;
}

double heading_difference(double a_deg, double b_deg)
{
  return wrap_heading_half_open(a_deg - b_deg);
}

SinCos sincos_deg(double angle_deg)
{
  // Reduce to [-45, 45] exactly, then rotate by quadrant.
  double r = std::fmod(angle_deg, 360.0);
  const double q = std::round(r / 90.0);
  r -= 90.0 * q;
  const double rad = r * (std::numbers::pi / 180.0);
  const double s = std::sin(rad);
  const double c = std::cos(rad);
  switch (((static_cast<int>(q) % 4) + 4) % 4) {
    case 0:
      return {s + 0.0, c};
    case 1:
      return {c, negate(s)};
    case 2:
      return {negate(s), negate(c)};
    default:
      return {negate(c), s + 0.0};
  }
}

PlanarPose geo_to_fr(const GeoPose & geo, const GeoOrigin & origin)
{
  validate(geo);
  const double dlat = geo.latitude_deg - origin.latitude_deg();
  const double dlon = wrap_heading_half_open(geo.longitude_deg - origin.longitude_deg());
  if (std::abs(dlat) >= kMaxProjectionSpanDeg || std::abs(dlon) >= kMaxProjectionSpanDeg) {
    throw ProjectionError("pose is more than 1 deg from the projection origin");
  }
  return {
    dlat * origin.meters_per_deg_lat(), dlon * origin.meters_per_deg_lon(), geo.heading_deg,
    Frame::Fr};
}

GeoPose fr_to_geo(const PlanarPose & pose, const GeoOrigin & origin, std::uint64_t timestamp_us)
{
  require_frame(pose, Frame::Fr, "fr_to_geo");
  require_finite(pose, "fr_to_geo");
  const double dlat = pose.x / origin.meters_per_deg_lat();
  const double dlon = pose.y / origin.meters_per_deg_lon();
  if (std::abs(dlat) >= kMaxProjectionSpanDeg || std::abs(dlon) >= kMaxProjectionSpanDeg) {
    throw ProjectionError("local pose is more than 1 deg from the projection origin");
  }
  GeoPose geo{
    origin.latitude_deg() + dlat, wrap_heading_half_open(origin.longitude_deg() + dlon),
    wrap_heading_half_open(pose.psi), timestamp_us};
  validate(geo);
  return geo;
}

PlanarPose fr_to_fg(const PlanarPose & pose)
{
  require_frame(pose, Frame::Fr, "fr_to_fg");
  require_finite(pose, "fr_to_fg");
  return {pose.x, negate(pose.y), negate(normalize_heading_cw(pose.psi)), Frame::Fg};
}

PlanarPose fg_to_fr(const PlanarPose & pose)
{
  require_frame(pose, Frame::Fg, "fg_to_fr");
  require_finite(pose, "fg_to_fr");
  return {pose.x, negate(pose.y), wrap_heading_half_open(negate(pose.psi)), Frame::Fr};
}

PlanarPose fg_to_f(
  const PlanarPose & current, const PlanarPose & anchor_g0, const PlanarPose & base_f0)
{
  require_frame(current, Frame::Fg, "fg_to_f current");
  require_frame(anchor_g0, Frame::Fg, "fg_to_f anchor");
  require_frame(base_f0, Frame::F, "fg_to_f base");
  require_finite(current, "fg_to_f current");
  require_finite(anchor_g0, "fg_to_f anchor");
  require_finite(base_f0, "fg_to_f base");

  // R = [[cos, sin], [-sin, cos]] of the reset heading
  const auto [s, c] = sincos_deg(anchor_g0.psi);
  const double dx = current.x - anchor_g0.x;
  const double dy = current.y - anchor_g0.y;
  return {
    base_f0.x + (c * dx + s * dy), base_f0.y + (c * dy - s * dx),
    base_f0.psi + (current.psi - anchor_g0.psi), Frame::F};
}

PlanarPose f_to_fg(
  const PlanarPose & pose_f, const PlanarPose & anchor_g0, const PlanarPose & base_f0)
{
  require_frame(pose_f, Frame::F, "f_to_fg pose");
  require_frame(anchor_g0, Frame::Fg, "f_to_fg anchor");
  require_frame(base_f0, Frame::F, "f_to_fg base");
  require_finite(pose_f, "f_to_fg pose");
  require_finite(anchor_g0, "f_to_fg anchor");
  require_finite(base_f0, "f_to_fg base");

  const auto [s, c] = sincos_deg(anchor_g0.psi);
  const double ex = pose_f.x - base_f0.x;
  const double ey = pose_f.y - base_f0.y;
  return {
    anchor_g0.x + (c * ex - s * ey), anchor_g0.y + (s * ex + c * ey),
    anchor_g0.psi + (pose_f.psi - base_f0.psi), Frame::Fg};
}

PlanarPose f_to_fv(
  const PlanarPose & pose_f, const PlanarPose & base_f0, const PlanarPose & anchor_v0)
{
  require_frame(pose_f, Frame::F, "f_to_fv pose");
  require_frame(base_f0, Frame::F, "f_to_fv base");
  require_frame(anchor_v0, Frame::Fv, "f_to_fv anchor");
  require_finite(pose_f, "f_to_fv pose");
  require_finite(base_f0, "f_to_fv base");
  require_finite(anchor_v0, "f_to_fv anchor");

  // R = [[cos, -sin], [sin, cos]] of the virtual initial heading
  const auto [s, c] = sincos_deg(anchor_v0.psi);
  const double ex = pose_f.x - base_f0.x;
  const double ey = pose_f.y - base_f0.y;
  return {
    anchor_v0.x + (c * ex - s * ey), anchor_v0.y + (s * ex + c * ey),
    anchor_v0.psi + (pose_f.psi - base_f0.psi), Frame::Fv};
}

PlanarPose fv_to_f(
  const PlanarPose & pose_v, const PlanarPose & base_f0, const PlanarPose & anchor_v0)
{
  require_frame(pose_v, Frame::Fv, "fv_to_f pose");
  require_frame(base_f0, Frame::F, "fv_to_f base");
  require_frame(anchor_v0, Frame::Fv, "fv_to_f anchor");
  require_finite(pose_v, "fv_to_f pose");
  require_finite(base_f0, "fv_to_f base");
  require_finite(anchor_v0, "fv_to_f anchor");

  const auto [s, c] = sincos_deg(anchor_v0.psi);
  const double dx = pose_v.x - anchor_v0.x;
  const double dy = pose_v.y - anchor_v0.y;
  return {
    base_f0.x + (c * dx + s * dy), base_f0.y + (c * dy - s * dx),
    base_f0.psi + (pose_v.psi - anchor_v0.psi), Frame::F};
}

PlanarPose fv_fc_convert(const PlanarPose & pose)
{
  if (pose.frame != Frame::Fv && pose.frame != Frame::Fc) {
    throw FrameMismatchError(
      "fv_fc_convert: expected frame Fv or Fc, got " + std::string(to_string(pose.frame)));
  }
  require_finite(pose, "fv_fc_convert");
  return {
    pose.x, negate(pose.y), negate(pose.psi), pose.frame == Frame::Fv ? Frame::Fc : Frame::Fv};
}

}  // namespace vve::frames
