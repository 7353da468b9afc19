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

#ifndef VVE__WIRE_HPP_
#define VVE__WIRE_HPP_

// Fixed 52-byte little-endian datagram shared by the pose and PSM links.
//
//   offset size field
//        0    4 magic "VVE1"
//        4    1 msg_type      0x01 pose, 0x02 PSM
//        5    1 actor_kind    0x01 vehicle, 0x02 pedestrian
//        6    2 actor_id      u16
//        8    8 timestamp_us  u64
//       16    8 latitude_deg  f64
//       24    8 longitude_deg f64
//       32    8 heading_deg   f64, (-180, 180]
//       40    8 speed_mps     f64, >= 0
//       48    4 crc32         IEEE, over bytes 0..47

#include "vve/error.hpp"
#include "vve/frames.hpp"
#include "vve/sync.hpp"

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>

namespace vve::wire
{

inline constexpr std::size_t kDatagramSize = 52;
inline constexpr std::size_t kCrcOffset = 48;
inline constexpr std::array<std::uint8_t, 4> kMagic{'V', 'V', 'E', '1'};

using Frame = std::array<std::uint8_t, kDatagramSize>;

enum class MsgType : std::uint8_t { pose = 0x01, psm = 0x02 };

struct Datagram
{
  MsgType msg_type{MsgType::pose};
  sync::ActorKind actor_kind{sync::ActorKind::vehicle};
  sync::ActorId actor_id{0};
  std::uint64_t timestamp_us{0};
  double latitude_deg{0.0};
  double longitude_deg{0.0};
  double heading_deg{0.0};
  double speed_mps{0.0};

  friend bool operator==(const Datagram &, const Datagram &) = default;
};

class EncodeError : public Error
{
public:
  using Error::Error;
};

enum class DecodeError : std::uint8_t { bad_length, bad_magic, bad_crc, bad_range };

std::string_view to_string(DecodeError error);

using DecodeResult = std::variant<Datagram, DecodeError>;

/// CRC-32/ISO-HDLC (reflected 0xEDB88320, init and xorout 0xFFFFFFFF).
std::uint32_t crc32(std::span<const std::uint8_t> bytes);

/// Throws EncodeError when a field violates the datagram invariants.
Frame encode(const Datagram & datagram);

/// Total over arbitrary input; never throws.
DecodeResult decode(std::span<const std::uint8_t> bytes);

frames::GeoPose to_geo_pose(const Datagram & datagram);

/// Builds a datagram from a pose and actor identity.
Datagram make_datagram(
  MsgType type, sync::ActorKind kind, sync::ActorId id, const frames::GeoPose & pose,
  double speed_mps = 0.0);

/// Plain copy of the per-channel counters.
struct ChannelStats
{
  std::uint64_t received{0};
  std::uint64_t accepted{0};
  std::uint64_t dropped_crc{0};
  std::uint64_t dropped_malformed{0};
  std::uint64_t dropped_stale_order{0};
  std::uint64_t dropped_unknown_actor{0};
  std::uint64_t dropped_rejected{0};  // decoded but refused by the registry (unanchored, invalid)
  std::uint64_t dropped_injected_loss{0};
  std::uint64_t last_rx_us{0};

  friend bool operator==(const ChannelStats &, const ChannelStats &) = default;
};

/// Monotone counters, written by one thread and readable from any.
class ChannelCounters
{
public:
  void count_received(std::uint64_t rx_us);
  void count_decode_error(DecodeError error);
  void count_update(sync::UpdateStatus status);
  void count_injected_loss();

  ChannelStats snapshot() const;

private:
  std::atomic<std::uint64_t> received_{0};
  std::atomic<std::uint64_t> accepted_{0};
  std::atomic<std::uint64_t> dropped_crc_{0};
  std::atomic<std::uint64_t> dropped_malformed_{0};
  std::atomic<std::uint64_t> dropped_stale_order_{0};
  std::atomic<std::uint64_t> dropped_unknown_actor_{0};
  std::atomic<std::uint64_t> dropped_rejected_{0};
  std::atomic<std::uint64_t> dropped_injected_loss_{0};
  std::atomic<std::uint64_t> last_rx_us_{0};
};

}  // namespace vve::wire

#endif  // VVE__WIRE_HPP_
