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

#ifndef VVE__BLOCKS_HPP_
#define VVE__BLOCKS_HPP_

// The virtual world is cut into blocks no larger than the physical test area. Portals pair an
// exit pose in one block with an entry pose in another; crossing one re-anchors the actor so the
// real vehicle can turn around while the virtual one carries on.

#include "vve/error.hpp"
#include "vve/frames.hpp"
#include "vve/json_io.hpp"
#include "vve/sync.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace vve::blocks
{

using BlockId = std::uint32_t;

struct Rect
{
  double min_x{0.0};
  double min_y{0.0};
  double max_x{0.0};
  double max_y{0.0};

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  /// Closed rectangle.
  bool contains(double x, double y) const
  {
    return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
  }
};

struct Block
{
  BlockId id{0};
  Rect area;  // Fc meters
};

struct Portal
{
  BlockId from_block{0};
  BlockId to_block{0};
  frames::PlanarPose exit_pose;   // Fc, inside from_block
  frames::PlanarPose entry_pose;  // Fc, inside to_block
  double trigger_radius_m{5.0};
};

struct BlockMap
{
  std::vector<Block> blocks;
  std::vector<Portal> portals;
  Rect physical_bound;
};

/// All problems found in a map, one line per violation.
class MapError : public ConfigError
{
public:
  explicit MapError(std::vector<std::string> reasons);
  const std::vector<std::string> & reasons() const { return reasons_; }

private:
  std::vector<std::string> reasons_;
};

/// Throws MapError when any block exceeds the physical bound on either axis, ids repeat, or a
/// portal pose lies outside its block.
void validate(const BlockMap & map);

/// Parses and validates the JSON map schema (docs/blocks.md).
BlockMap parse_block_map(const json_io::Json & doc);
BlockMap load_block_map(const std::filesystem::path & path);
json_io::Json to_json(const BlockMap & map);

/// Containing block; ties on shared edges go to the lowest id.
std::optional<BlockId> locate(const frames::PlanarPose & pose_c, const BlockMap & map);

struct TransitionEvent
{
  sync::ActorId actor_id{0};
  std::size_t portal_index{0};
  BlockId from_block{0};
  BlockId to_block{0};
  frames::PlanarPose entry_pose;
  std::uint64_t detected_us{0};

  friend bool operator==(const TransitionEvent &, const TransitionEvent &) = default;
};

/// First portal whose trigger disc contains the actor's virtual position with the heading within
/// 90 deg of the exit heading. Does not know about cooldowns.
json_io::Json to_json(const TransitionEvent & event);

std::optional<TransitionEvent> check_transition(
  const sync::ActorState & actor, const BlockMap & map, std::uint64_t now_us = 0);

/// Teleports the actor to the event's entry pose.
sync::SyncAnchor apply_transition(
  sync::ActorRegistry & registry, const TransitionEvent & event, std::uint64_t now_us);

enum class TransitionPolicy : std::uint8_t { manual_confirm, automatic };

std::string_view to_string(TransitionPolicy policy);
std::optional<TransitionPolicy> parse_transition_policy(std::string_view text);

/// Stateful wrapper: cooldown per (actor, portal), pending advisories in manual mode.
class BlockSupervisor
{
public:
  BlockSupervisor(
    BlockMap map, TransitionPolicy policy = TransitionPolicy::manual_confirm,
    std::uint64_t cooldown_us = 5'000'000);

  const BlockMap & map() const { return map_; }
  TransitionPolicy policy() const { return policy_; }

  /// Checks every actor. Fired events are returned; in automatic mode they are also applied.
  std::vector<TransitionEvent> evaluate(
    sync::ActorRegistry & registry, const sync::RegistrySnapshot & snapshot, std::uint64_t now_us);

  /// Applies the pending advisory for this actor. Throws SyncStateError when there is none.
  sync::SyncAnchor confirm(sync::ActorRegistry & registry, sync::ActorId actor_id, std::uint64_t now_us);

  std::vector<TransitionEvent> pending() const;

private:
  bool admit(sync::ActorId actor_id, std::size_t portal_index, std::uint64_t now_us);

  BlockMap map_;
  TransitionPolicy policy_;
  std::uint64_t cooldown_us_;

  mutable std::mutex mutex_;
  std::map<std::tuple<sync::ActorId, std::size_t>, std::uint64_t> last_fired_us_;
  std::map<sync::ActorId, TransitionEvent> pending_;
};

}  // namespace vve::blocks

#endif  // VVE__BLOCKS_HPP_
