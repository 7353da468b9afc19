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

#include "vve/wire.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>

namespace vve::wire
{

namespace
{

constexpr std::array<std::uint32_t, 256> make_crc_table()
{
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) {
      c = (c & 1U) ? (0xEDB88320U ^ (c >> 1)) : (c >> 1);
    }
    table[i] = c;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

void put_u16(Frame & out, std::size_t at, std::uint16_t v)
{
  out[at] = static_cast<std::uint8_t>(v);
  out[at + 1] = static_cast<std::uint8_t>(v >> 8);
}

void put_u32(Frame & out, std::size_t at, std::uint32_t v)
{
  for (std::size_t i = 0; i < 4; ++i) {
    out[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
  }
}

void put_u64(Frame & out, std::size_t at, std::uint64_t v)
{
  for (std::size_t i = 0; i < 8; ++i) {
    out[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
  }
}

void put_f64(Frame & out, std::size_t at, double v) { put_u64(out, at, std::bit_cast<std::uint64_t>(v)); }

std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t at)
{
  return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at)
{
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  }
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t at)
{
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(in[at + i]) << (8 * i);
  }
  return v;
}

double get_f64(std::span<const std::uint8_t> in, std::size_t at)
{
  return std::bit_cast<double>(get_u64(in, at));
}

bool valid_msg_type(std::uint8_t v) { return v == 0x01 || v == 0x02; }
bool valid_kind(std::uint8_t v) { return v == 0x01 || v == 0x02; }

// Null when every field is in range, otherwise the offending field name.
const char * range_violation(const Datagram & d)
{
  if (!valid_msg_type(static_cast<std::uint8_t>(d.msg_type))) {
    return "msg_type";
  }
  if (!valid_kind(static_cast<std::uint8_t>(d.actor_kind))) {
    return "actor_kind";
  }
  if (!std::isfinite(d.latitude_deg) || d.latitude_deg < -90.0 || d.latitude_deg > 90.0) {
    return "latitude_deg";
  }
  if (!std::isfinite(d.longitude_deg) || d.longitude_deg < -180.0 || d.longitude_deg > 180.0) {
    return "longitude_deg";
  }
  if (!std::isfinite(d.heading_deg) || !(d.heading_deg > -180.0 && d.heading_deg <= 180.0)) {
    return "heading_deg";
  }
  if (!std::isfinite(d.speed_mps) || d.speed_mps < 0.0) {
    return "speed_mps";
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(DecodeError error)
{
  switch (error) {
    case DecodeError::bad_length:
      return "bad_length";
    case DecodeError::bad_magic:
      return "bad_magic";
    case DecodeError::bad_crc:
      return "bad_crc";
    case DecodeError::bad_range:
      return "bad_range";
  }
  return "unknown";
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes)
{
  std::uint32_t c = 0xFFFFFFFFU;
  for (std::uint8_t b : bytes) {
    c = kCrcTable[(c ^ b) & 0xFFU] ^ (c >> 8);
  }
  return c ^ 0xFFFFFFFFU;
}

Frame encode(const Datagram & datagram)
{
  if (const char * field = range_violation(datagram)) {
    throw EncodeError(std::string("datagram field out of range: ") + field);
  }
  Frame out{};
  std::copy(kMagic.begin(), kMagic.end(), out.begin());
  out[4] = static_cast<std::uint8_t>(datagram.msg_type);
  out[5] = static_cast<std::uint8_t>(datagram.actor_kind);
  put_u16(out, 6, datagram.actor_id);
  put_u64(out, 8, datagram.timestamp_us);
  put_f64(out, 16, datagram.latitude_deg);
  put_f64(out, 24, datagram.longitude_deg);
  put_f64(out, 32, datagram.heading_deg);
  put_f64(out, 40, datagram.speed_mps);
  put_u32(out, kCrcOffset, crc32(std::span<const std::uint8_t>(out.data(), kCrcOffset)));
  return out;
}

DecodeResult decode(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() != kDatagramSize) {
    return DecodeError::bad_length;
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    return DecodeError::bad_magic;
  }
  if (crc32(bytes.first(kCrcOffset)) != get_u32(bytes, kCrcOffset)) {
    return DecodeError::bad_crc;
  }
  if (!valid_msg_type(bytes[4]) || !valid_kind(bytes[5])) {
    return DecodeError::bad_range;
  }
  Datagram d;
  d.msg_type = static_cast<MsgType>(bytes[4]);
  d.actor_kind = static_cast<sync::ActorKind>(bytes[5]);
  d.actor_id = get_u16(bytes, 6);
  d.timestamp_us = get_u64(bytes, 8);
  d.latitude_deg = get_f64(bytes, 16);
  d.longitude_deg = get_f64(bytes, 24);
  d.heading_deg = get_f64(bytes, 32);
  d.speed_mps = get_f64(bytes, 40);
  if (range_violation(d) != nullptr) {
    return DecodeError::bad_range;
  }
  return d;
}

frames::GeoPose to_geo_pose(const Datagram & datagram)
{
  return {datagram.latitude_deg, datagram.longitude_deg, datagram.heading_deg, datagram.timestamp_us};
}

Datagram make_datagram(
  MsgType type, sync::ActorKind kind, sync::ActorId id, const frames::GeoPose & pose,
  double speed_mps)
{
  return {
    type, kind, id, pose.timestamp_us, pose.latitude_deg, pose.longitude_deg, pose.heading_deg,
    speed_mps};
}

void ChannelCounters::count_received(std::uint64_t rx_us)
{
  received_.fetch_add(1, std::memory_order_relaxed);
  // last_rx_us only moves forward
  std::uint64_t prev = last_rx_us_.load(std::memory_order_relaxed);
  while (prev < rx_us && !last_rx_us_.compare_exchange_weak(prev, rx_us)) {
  }
}

void ChannelCounters::count_decode_error(DecodeError error)
{
  if (error == DecodeError::bad_crc) {
    dropped_crc_.fetch_add(1, std::memory_order_relaxed);
  } else {
    dropped_malformed_.fetch_add(1, std::memory_order_relaxed);
  }
}

void ChannelCounters::count_update(sync::UpdateStatus status)
{
  switch (status) {
    case sync::UpdateStatus::accepted:
      accepted_.fetch_add(1, std::memory_order_relaxed);
      break;
    case sync::UpdateStatus::out_of_order:
      dropped_stale_order_.fetch_add(1, std::memory_order_relaxed);
      break;
    case sync::UpdateStatus::unknown_actor:
      dropped_unknown_actor_.fetch_add(1, std::memory_order_relaxed);
      break;
    case sync::UpdateStatus::unanchored:
    case sync::UpdateStatus::invalid:
      dropped_rejected_.fetch_add(1, std::memory_order_relaxed);
      break;
  }
}

void ChannelCounters::count_injected_loss()
{
  dropped_injected_loss_.fetch_add(1, std::memory_order_relaxed);
}

ChannelStats ChannelCounters::snapshot() const
{
  ChannelStats s;
  s.received = received_.load(std::memory_order_relaxed);
  s.accepted = accepted_.load(std::memory_order_relaxed);
  s.dropped_crc = dropped_crc_.load(std::memory_order_relaxed);
  s.dropped_malformed = dropped_malformed_.load(std::memory_order_relaxed);
  s.dropped_stale_order = dropped_stale_order_.load(std::memory_order_relaxed);
  s.dropped_unknown_actor = dropped_unknown_actor_.load(std::memory_order_relaxed);
  s.dropped_rejected = dropped_rejected_.load(std::memory_order_relaxed);
  s.dropped_injected_loss = dropped_injected_loss_.load(std::memory_order_relaxed);
  s.last_rx_us = last_rx_us_.load(std::memory_order_relaxed);
  return s;
}

}  // namespace vve::wire
