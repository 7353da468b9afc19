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

#include "vve/blocks.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <utility>

namespace vve::blocks
{

using json_io::Json;

namespace
{

std::string join(const std::vector<std::string> & parts)
{
  std::string out = "invalid block map";
  for (const auto & p : parts) {
    out += "; " + p;
  }
  return out;
}

const Block * find_block(const BlockMap & map, BlockId id)
{
  for (const auto & b : map.blocks) {
    if (b.id == id) {
      return &b;
    }
  }
  return nullptr;
}

Rect parse_rect(const Json & obj, std::string_view path)
{
  return {
    json_io::require_number(obj, "min_x", path), json_io::require_number(obj, "min_y", path),
    json_io::require_number(obj, "max_x", path), json_io::require_number(obj, "max_y", path)};
}

}  // namespace

MapError::MapError(std::vector<std::string> reasons)
: ConfigError(join(reasons)), reasons_(std::move(reasons))
{
}

void validate(const BlockMap & map)
{
  std::vector<std::string> reasons;
  const Rect & bound = map.physical_bound;
  if (!(bound.width() > 0.0) || !(bound.height() > 0.0)) {
    reasons.emplace_back("physical_bound must have positive width and height");
  }
  if (map.blocks.empty()) {
    reasons.emplace_back("map has no blocks");
  }

  std::set<BlockId> ids;
  for (const auto & b : map.blocks) {
    const std::string name = "block " + std::to_string(b.id);
    if (!ids.insert(b.id).second) {
      reasons.push_back(name + ": duplicate id");
    }
    if (!(b.area.width() > 0.0) || !(b.area.height() > 0.0)) {
      reasons.push_back(name + ": must have positive width and height");
    }
    if (b.area.width() > bound.width()) {
      reasons.push_back(
        name + ": width " + std::to_string(b.area.width()) + " m exceeds physical bound " +
        std::to_string(bound.width()) + " m");
    }
    if (b.area.height() > bound.height()) {
      reasons.push_back(
        name + ": height " + std::to_string(b.area.height()) + " m exceeds physical bound " +
        std::to_string(bound.height()) + " m");
    }
  }

  for (std::size_t i = 0; i < map.portals.size(); ++i) {
    const Portal & p = map.portals[i];
    const std::string name = "portal " + std::to_string(i);
    if (!(p.trigger_radius_m > 0.0) || !std::isfinite(p.trigger_radius_m)) {
      reasons.push_back(name + ": trigger_radius_m must be positive");
    }
    if (p.from_block == p.to_block) {
      reasons.push_back(name + ": from and to blocks must differ");
    }
    const Block * from = find_block(map, p.from_block);
    const Block * to = find_block(map, p.to_block);
    if (from == nullptr) {
      reasons.push_back(name + ": unknown from block " + std::to_string(p.from_block));
    } else if (!from->area.contains(p.exit_pose.x, p.exit_pose.y)) {
      reasons.push_back(name + ": exit pose lies outside block " + std::to_string(p.from_block));
    }
    if (to == nullptr) {
      reasons.push_back(name + ": unknown to block " + std::to_string(p.to_block));
    } else if (!to->area.contains(p.entry_pose.x, p.entry_pose.y)) {
      reasons.push_back(name + ": entry pose lies outside block " + std::to_string(p.to_block));
    }
  }

  if (!reasons.empty()) {
    throw MapError(std::move(reasons));
  }
}

BlockMap parse_block_map(const Json & doc)
{
  BlockMap map;
  map.physical_bound = parse_rect(json_io::require_member(doc, "physical_bound", ""), "physical_bound");

  const Json & blocks = json_io::require_member(doc, "blocks", "");
  if (!blocks.is_array()) {
    throw json_io::FieldError("blocks", "expected an array");
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string path = "blocks[" + std::to_string(i) + "]";
    const std::uint64_t id = json_io::require_uint(blocks[i], "id", path);
    map.blocks.push_back({static_cast<BlockId>(id), parse_rect(blocks[i], path)});
  }

  if (doc.contains("portals")) {
    const Json & portals = doc.at("portals");
    if (!portals.is_array()) {
      throw json_io::FieldError("portals", "expected an array");
    }
    for (std::size_t i = 0; i < portals.size(); ++i) {
      const std::string path = "portals[" + std::to_string(i) + "]";
      Portal p;
      p.from_block = static_cast<BlockId>(json_io::require_uint(portals[i], "from", path));
      p.to_block = static_cast<BlockId>(json_io::require_uint(portals[i], "to", path));
      p.exit_pose = json_io::parse_pose(
        json_io::require_member(portals[i], "exit", path), frames::Frame::Fc, path + ".exit");
      p.entry_pose = json_io::parse_pose(
        json_io::require_member(portals[i], "entry", path), frames::Frame::Fc, path + ".entry");
      p.trigger_radius_m = json_io::number_or(portals[i], "trigger_radius_m", 5.0, path);
      map.portals.push_back(p);
    }
  }

  validate(map);
  return map;
}

BlockMap load_block_map(const std::filesystem::path & path)
{
  return parse_block_map(json_io::load_json_file(path));
}

namespace
{

Json rect_json(const Rect & r)
{
  return {{"min_x", r.min_x}, {"min_y", r.min_y}, {"max_x", r.max_x}, {"max_y", r.max_y}};
}

}  // namespace

Json to_json(const BlockMap & map)
{
  Json blocks = Json::array();
  for (const auto & b : map.blocks) {
    blocks.push_back(json_io::merge_objects({{"id", b.id}}, rect_json(b.area)));
  }
  Json portals = Json::array();
  for (const auto & p : map.portals) {
    portals.push_back(
      {{"from", p.from_block},
       {"to", p.to_block},
       {"exit", json_io::to_json(p.exit_pose)},
       {"entry", json_io::to_json(p.entry_pose)},
       {"trigger_radius_m", p.trigger_radius_m}});
  }
  return {{"physical_bound", rect_json(map.physical_bound)}, {"blocks", blocks}, {"portals", portals}};
}

Json to_json(const TransitionEvent & event)
{
  return {
    {"actor_id", event.actor_id},
    {"portal_index", event.portal_index},
    {"from_block", event.from_block},
    {"to_block", event.to_block},
    {"entry_pose", json_io::to_json(event.entry_pose)},
    {"detected_us", event.detected_us}};
}

std::optional<BlockId> locate(const frames::PlanarPose & pose_c, const BlockMap & map)
{
  std::optional<BlockId> best;
  for (const auto & b : map.blocks) {
    if (b.area.contains(pose_c.x, pose_c.y) && (!best || b.id < *best)) {
      best = b.id;
    }
  }
  return best;
}

std::optional<TransitionEvent> check_transition(
  const sync::ActorState & actor, const BlockMap & map, std::uint64_t now_us)
{
  if (!actor.last_virtual) {
    return std::nullopt;
  }
  const frames::PlanarPose & pose = *actor.last_virtual;
  for (std::size_t i = 0; i < map.portals.size(); ++i) {
    const Portal & p = map.portals[i];
    const double d = std::hypot(pose.x - p.exit_pose.x, pose.y - p.exit_pose.y);
    if (d > p.trigger_radius_m) {
      continue;
    }
    if (std::abs(frames::heading_difference(pose.psi, p.exit_pose.psi)) >= 90.0) {
      continue;
    }
    return TransitionEvent{actor.actor_id, i, p.from_block, p.to_block, p.entry_pose, now_us};
  }
  return std::nullopt;
}

sync::SyncAnchor apply_transition(
  sync::ActorRegistry & registry, const TransitionEvent & event, std::uint64_t now_us)
{
  return registry.teleport_virtual(
    event.actor_id, event.entry_pose, now_us, sync::AnchorReason::transition);
}

std::string_view to_string(TransitionPolicy policy)
{
  return policy == TransitionPolicy::automatic ? "automatic" : "manual_confirm";
}

std::optional<TransitionPolicy> parse_transition_policy(std::string_view text)
{
  if (text == "automatic") {
    return TransitionPolicy::automatic;
  }
  if (text == "manual_confirm" || text == "manual") {
    return TransitionPolicy::manual_confirm;
  }
  return std::nullopt;
}

BlockSupervisor::BlockSupervisor(BlockMap map, TransitionPolicy policy, std::uint64_t cooldown_us)
: map_(std::move(map)), policy_(policy), cooldown_us_(cooldown_us)
{
  validate(map_);
}

bool BlockSupervisor::admit(sync::ActorId actor_id, std::size_t portal_index, std::uint64_t now_us)
{
  const auto key = std::make_tuple(actor_id, portal_index);
  auto it = last_fired_us_.find(key);
  if (it != last_fired_us_.end() && now_us >= it->second && now_us - it->second < cooldown_us_) {
    return false;
  }
  last_fired_us_[key] = now_us;
  return true;
}

std::vector<TransitionEvent> BlockSupervisor::evaluate(
  sync::ActorRegistry & registry, const sync::RegistrySnapshot & snapshot, std::uint64_t now_us)
{
  std::vector<TransitionEvent> fired;
  std::lock_guard lock(mutex_);
  for (const auto & [id, actor] : snapshot.actors) {
    if (actor->stale) {
      continue;
    }
    auto event = check_transition(*actor, map_, now_us);
    if (!event || !admit(id, event->portal_index, now_us)) {
      continue;
    }
    fired.push_back(*event);
    if (policy_ == TransitionPolicy::automatic) {
      apply_transition(registry, *event, now_us);
    } else {
      pending_[id] = *event;
    }
  }
  return fired;
}

sync::SyncAnchor BlockSupervisor::confirm(
  sync::ActorRegistry & registry, sync::ActorId actor_id, std::uint64_t now_us)
{
  std::lock_guard lock(mutex_);
  auto it = pending_.find(actor_id);
  if (it == pending_.end()) {
    throw sync::SyncStateError("no pending transition for actor " + std::to_string(actor_id));
  }
  const TransitionEvent event = it->second;
  pending_.erase(it);
  // Cooldown restarts at the moment the operator confirms.
  last_fired_us_[std::make_tuple(actor_id, event.portal_index)] = now_us;
  return apply_transition(registry, event, now_us);
}

std::vector<TransitionEvent> BlockSupervisor::pending() const
{
  std::lock_guard lock(mutex_);
  std::vector<TransitionEvent> out;
  for (const auto & [id, e] : pending_) {
    out.push_back(e);
  }
  return out;
}

}  // namespace vve::blocks
