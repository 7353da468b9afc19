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
#include "oracle.hpp"

#include <vve/wire.hpp>

#include <gtest/gtest.h>
#include <zlib.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

namespace
{

namespace w = vve::wire;
using vve::sync::ActorKind;

// Computed with an independent script: struct.pack('<4sBBHQdddd') + zlib.crc32.
constexpr const char * kGoldenZero =
  "5656453101010100000000000000000000000000000000000000000000000000"
  "000000000000000000000000000000006cd53c21";
constexpr const char * kGoldenPsm =
  "565645310202020140222018240a0600b29c9b6ecd0f4540ad1c78ba35ff54c0"
  "0000000000f060c0666666666666f63fd2a6a0da";

w::Datagram psm_example()
{
  return {w::MsgType::psm, ActorKind::pedestrian, 0x0102, 1700000000123456ULL, 42.123456789, -83.987654321, -135.5,
          1.4};
}

vve_test::RefClass to_ref(w::DecodeError e)
{
  switch (e) {
    case w::DecodeError::bad_length:
      return vve_test::RefClass::bad_length;
    case w::DecodeError::bad_magic:
      return vve_test::RefClass::bad_magic;
    case w::DecodeError::bad_crc:
      return vve_test::RefClass::bad_crc;
    case w::DecodeError::bad_range:
      return vve_test::RefClass::bad_range;
  }
  return vve_test::RefClass::ok;
}

w::Datagram random_valid(std::mt19937_64 & rng)
{
  std::uniform_real_distribution<double> lat(-90.0, 90.0), lon(-180.0, 180.0), hdg(-179.999, 180.0),
    spd(0.0, 60.0);
  return {rng() % 2 ? w::MsgType::pose : w::MsgType::psm,
          rng() % 2 ? ActorKind::vehicle : ActorKind::pedestrian,
          static_cast<vve::sync::ActorId>(rng()),
          rng(),
          lat(rng),
          lon(rng),
          hdg(rng),
          spd(rng)};
}

}  // namespace

TEST(Crc32, MatchesZlib)
{
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::uint8_t> buf(rng() % 257);
    for (auto & b : buf) {
      b = static_cast<std::uint8_t>(rng());
    }
    EXPECT_EQ(w::crc32(buf), static_cast<std::uint32_t>(::crc32(0L, buf.data(), buf.size())));
  }
  const std::string check = "123456789";
  EXPECT_EQ(w::crc32({reinterpret_cast<const std::uint8_t *>(check.data()), check.size()}), 0xCBF43926u);
}

TEST(Encode, GoldenZeroVector)
{
  const w::Datagram d{w::MsgType::pose, ActorKind::vehicle, 1, 0, 0.0, 0.0, 0.0, 0.0};
  const auto frame = w::encode(d);
  EXPECT_EQ(vve_test::to_hex(frame), kGoldenZero);
  const auto ref = vve_test::encode_reference(1, 1, 1, 0, 0.0, 0.0, 0.0, 0.0);
  EXPECT_EQ(vve_test::to_hex(ref), kGoldenZero);
}

TEST(Encode, GoldenPsmVector)
{
  const auto frame = w::encode(psm_example());
  EXPECT_EQ(vve_test::to_hex(frame), kGoldenPsm);
  const auto d = psm_example();
  EXPECT_EQ(vve_test::to_hex(frame), vve_test::to_hex(vve_test::encode_reference(
                                       2, 2, d.actor_id, d.timestamp_us, d.latitude_deg, d.longitude_deg,
                                       d.heading_deg, d.speed_mps)));
}

TEST(Decode, GoldenVectorsDecode)
{
  const auto bytes = vve_test::from_hex(kGoldenPsm);
  const auto out = w::decode(bytes);
  ASSERT_TRUE(std::holds_alternative<w::Datagram>(out));
  EXPECT_EQ(std::get<w::Datagram>(out), psm_example());
}

TEST(Encode, RejectsOutOfRange)
{
  auto d = psm_example();
  d.heading_deg = 200.0;
  EXPECT_THROW(w::encode(d), w::EncodeError);
  d = psm_example();
  d.heading_deg = -180.0;
  EXPECT_THROW(w::encode(d), w::EncodeError);
  d = psm_example();
  d.speed_mps = -0.1;
  EXPECT_THROW(w::encode(d), w::EncodeError);
  d = psm_example();
  d.latitude_deg = std::nan("");
  EXPECT_THROW(w::encode(d), w::EncodeError);
  d = psm_example();
  d.msg_type = static_cast<w::MsgType>(3);
  EXPECT_THROW(w::encode(d), w::EncodeError);
  d = psm_example();
  d.heading_deg = 180.0;
  EXPECT_NO_THROW(w::encode(d));
}

TEST(Decode, LengthMagicCrc)
{
  const auto frame = w::encode(psm_example());
  std::vector<std::uint8_t> short_frame(frame.begin(), frame.begin() + 51);
  EXPECT_EQ(std::get<w::DecodeError>(w::decode(short_frame)), w::DecodeError::bad_length);
  std::vector<std::uint8_t> long_frame(frame.begin(), frame.end());
  long_frame.push_back(0);
  EXPECT_EQ(std::get<w::DecodeError>(w::decode(long_frame)), w::DecodeError::bad_length);

  auto magic = frame;
  magic[3] = '2';
  EXPECT_EQ(std::get<w::DecodeError>(w::decode(magic)), w::DecodeError::bad_magic);

  for (std::size_t bit = 32; bit < 48 * 8; bit += 7) {
    auto flipped = frame;
    flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    EXPECT_EQ(std::get<w::DecodeError>(w::decode(flipped)), w::DecodeError::bad_crc) << bit;
  }
}

TEST(Decode, RangeCheckedAfterCrc)
{
  auto frame = vve_test::encode_reference(1, 1, 3, 0, 0.0, 0.0, 200.0, 0.0);
  EXPECT_EQ(std::get<w::DecodeError>(w::decode(frame)), w::DecodeError::bad_range);
  frame = vve_test::encode_reference(1, 3, 3, 0, 0.0, 0.0, 0.0, 0.0);
  EXPECT_EQ(std::get<w::DecodeError>(w::decode(frame)), w::DecodeError::bad_range);
  frame = vve_test::encode_reference(1, 1, 3, 0, 0.0, 0.0, 0.0, std::numeric_limits<double>::infinity());
  EXPECT_EQ(std::get<w::DecodeError>(w::decode(frame)), w::DecodeError::bad_range);
}

TEST(Codec, RoundTripRandomValid)
{
  std::mt19937_64 rng(77);
  for (int i = 0; i < 2000; ++i) {
    const auto d = random_valid(rng);
    const auto out = w::decode(w::encode(d));
    ASSERT_TRUE(std::holds_alternative<w::Datagram>(out));
    ASSERT_EQ(std::get<w::Datagram>(out), d);
  }
}

TEST(Codec, FuzzClassifiesLikeReference)
{
  std::mt19937_64 rng(99);
  for (int i = 0; i < 4000; ++i) {
    std::vector<std::uint8_t> bytes;
    switch (i % 4) {
      case 0: {  // arbitrary noise of arbitrary length
        bytes.resize(rng() % 80);
        for (auto & b : bytes) {
          b = static_cast<std::uint8_t>(rng());
        }
        break;
      }
      case 1: {  // valid frame with random byte corruption
        const auto f = w::encode(random_valid(rng));
        bytes.assign(f.begin(), f.end());
        bytes[rng() % bytes.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        break;
      }
      case 2: {  // correct magic and CRC over random payload
        std::array<std::uint8_t, 52> f{};
        for (auto & b : f) {
          b = static_cast<std::uint8_t>(rng());
        }
        std::memcpy(f.data(), "VVE1", 4);
        f[4] = static_cast<std::uint8_t>(rng() % 4);
        f[5] = static_cast<std::uint8_t>(rng() % 4);
        const auto crc = static_cast<std::uint32_t>(::crc32(0L, f.data(), 48));
        std::memcpy(f.data() + 48, &crc, 4);
        bytes.assign(f.begin(), f.end());
        break;
      }
      default: {  // truncated or extended valid frame
        const auto f = w::encode(random_valid(rng));
        bytes.assign(f.begin(), f.end());
        bytes.resize(rng() % 2 ? rng() % 52 : 53 + rng() % 10);
        break;
      }
    }
    const auto out = w::decode(bytes);
    const auto ref = vve_test::classify_reference(bytes);
    if (const auto * err = std::get_if<w::DecodeError>(&out)) {
      ASSERT_EQ(to_ref(*err), ref) << vve_test::to_hex(bytes);
    } else {
      ASSERT_EQ(ref, vve_test::RefClass::ok) << vve_test::to_hex(bytes);
    }
  }
}

TEST(Counters, AccountingAndMonotone)
{
  w::ChannelCounters c;
  c.count_received(10);
  c.count_received(20);
  c.count_received(30);
  c.count_received(40);
  c.count_decode_error(w::DecodeError::bad_crc);
  c.count_decode_error(w::DecodeError::bad_length);
  c.count_update(vve::sync::UpdateStatus::accepted);
  c.count_injected_loss();
  const auto s = c.snapshot();
  EXPECT_EQ(s.received, 4u);
  EXPECT_EQ(s.dropped_crc, 1u);
  EXPECT_EQ(s.dropped_malformed, 1u);
  EXPECT_EQ(s.accepted, 1u);
  EXPECT_EQ(s.dropped_injected_loss, 1u);
  EXPECT_EQ(s.last_rx_us, 40u);
}
