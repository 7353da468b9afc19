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

#include "scenario_oracle.hpp"

#include "oracle.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace vve_test
{

namespace
{

struct ScriptedActor
{
  std::string kind;
  Pose3 virtual_initial;
  double start_n;
  double start_e;
  double heading;
  double speed;
  double rate;
};

Eigen::Vector2d position_at(const ScriptedActor & a, double t)
{
  const double s = a.speed * t;
  return {a.start_n + s * std::cos(deg2rad(a.heading)), a.start_e + s * std::sin(deg2rad(a.heading))};
}

}  // namespace

CrossingOracle evaluate_crossing(const std::filesystem::path & scenario_file)
{
  std::ifstream in(scenario_file);
  const auto doc = nlohmann::json::parse(in);
  const double lat0 = doc.at("origin").at("latitude_deg");
  const double lon0 = doc.at("origin").at("longitude_deg");
  const double duration = doc.at("duration_s");
  const double tick_hz = doc.at("tick_hz");

  std::vector<ScriptedActor> actors;
  for (const auto & a : doc.at("actors")) {
    const auto & tr = a.at("trajectory");
    const std::string kind = tr.at("kind");
    if (kind != "straight" && kind != "stationary") {
      throw std::runtime_error("crossing oracle supports straight and stationary scripts only");
    }
    const auto & vi = a.at("virtual_initial");
    actors.push_back({a.at("kind"),
                      {vi.at("x"), vi.at("y"), vi.at("psi")},
                      tr.value("start", nlohmann::json::object()).value("north_m", 0.0),
                      tr.value("start", nlohmann::json::object()).value("east_m", 0.0),
                      tr.value("heading_deg", 0.0),
                      kind == "stationary" ? 0.0 : tr.at("speed_mps").get<double>(),
                      tr.value("rate_hz", 10.0)});
  }
  if (actors.size() != 2 || actors[0].kind != "vehicle" || actors[1].kind != "pedestrian") {
    throw std::runtime_error("crossing oracle expects [vehicle, pedestrian]");
  }

  CrossingOracle out;
  out.warning_distance_m = doc.at("alerts").value("warning_distance_m", 7.0);
  const double caution = doc.at("alerts").value("caution_distance_m", 15.0);
  out.min_real_distance_m = INFINITY;

  auto chain_anchor = [&](const ScriptedActor & a) {
    const Geo g0 = unproject(position_at(a, 0.0), a.heading, lat0, lon0);
    return ChainAnchor{g0, a.virtual_initial, lat0, lon0};
  };
  const ChainAnchor anchors[2] = {chain_anchor(actors[0]), chain_anchor(actors[1])};

  const auto n_ticks = static_cast<std::uint64_t>(std::floor(duration * tick_hz + 1e-9));
  for (std::uint64_t k = 0; k < n_ticks; ++k) {
    const double t = static_cast<double>(k) / tick_hz;
    Eigen::Vector2d real[2];
    Eigen::Vector2d virt[2];
    for (int i = 0; i < 2; ++i) {
      const auto & a = actors[i];
      const auto n_samples = static_cast<std::uint64_t>(std::floor(duration * a.rate + 1e-9));
      // Latest sample delivered by the tick (sample times are i / rate).
      auto idx = static_cast<std::uint64_t>(std::floor(t * a.rate + 1e-9));
      idx = std::min(idx, n_samples - 1);
      const double ts = static_cast<double>(idx) / a.rate;
      real[i] = position_at(a, ts);
      const Pose3 v = chain_forward(unproject(real[i], a.heading, lat0, lon0), anchors[i]);
      virt[i] = {v.x, v.y};
    }
    const double dv = (virt[1] - virt[0]).norm();
    const double dr = (real[1] - real[0]).norm();
    out.ticks.push_back({k, dv, dr});
    out.min_real_distance_m = std::min(out.min_real_distance_m, dr);
    if (!out.first_below_warning && dv < out.warning_distance_m) {
      out.first_below_warning = k;
    }
    if (!out.first_below_caution && dv < caution) {
      out.first_below_caution = k;
    }
  }
  return out;
}

}  // namespace vve_test
