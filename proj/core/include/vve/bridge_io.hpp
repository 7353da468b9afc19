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

#ifndef VVE__BRIDGE_IO_HPP_
#define VVE__BRIDGE_IO_HPP_

// UDP transport for the pose/PSM ingest link and the virtual-GPS feedback link.

#include "vve/channel.hpp"
#include "vve/sync.hpp"
#include "vve/wire.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <netinet/in.h>

namespace vve::wire
{

inline constexpr std::uint16_t kDefaultIngestPort = 47001;
inline constexpr std::uint16_t kDefaultFeedbackPort = 47002;

/// Wall-clock microseconds since the Unix epoch.
std::uint64_t now_us();

struct Endpoint
{
  std::string host{"0.0.0.0"};
  std::uint16_t port{0};

  /// "host:port", ":port" or "port". Throws ConfigError.
  static Endpoint parse(std::string_view text, std::uint16_t default_port = 0);
  std::string to_string() const;
  sockaddr_in to_sockaddr() const;
};

class SocketError : public Error
{
public:
  using Error::Error;
};

/// Owning IPv4 datagram socket.
class UdpSocket
{
public:
  UdpSocket();
  ~UdpSocket();
  UdpSocket(UdpSocket && other) noexcept;
  UdpSocket & operator=(UdpSocket && other) noexcept;
  UdpSocket(const UdpSocket &) = delete;
  UdpSocket & operator=(const UdpSocket &) = delete;

  /// Throws SocketError when the address cannot be bound.
  void bind(const Endpoint & endpoint);
  std::uint16_t local_port() const;

  /// Returns false on a transient send failure.
  bool send_to(std::span<const std::uint8_t> bytes, const Endpoint & to);

  /// Waits up to `timeout` for one datagram; returns its size, or nullopt on timeout.
  std::optional<std::size_t> receive(std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout);

private:
  int fd_{-1};
};

struct RouterConfig
{
  bool auto_register{false};
  frames::PlanarPose auto_register_virtual_initial{0.0, 0.0, 0.0, frames::Frame::Fc};
};

struct RouteResult
{
  std::optional<DecodeError> decode_error;
  std::optional<Datagram> datagram;
  std::optional<sync::UpdateStatus> update;
};

/// Per-frame ingest logic shared by the live listener and the replay harness: decode, count,
/// and hand pose frames to the registry and PSM frames to the VRU path.
class DatagramRouter
{
public:
  DatagramRouter(sync::ActorRegistry & registry, ChannelCounters & counters, RouterConfig config = {});

  RouteResult handle(std::span<const std::uint8_t> bytes, std::uint64_t rx_us);

  ChannelCounters & counters() { return counters_; }

private:
  sync::ActorRegistry & registry_;
  ChannelCounters & counters_;
  RouterConfig config_;
};

/// Receives datagrams on its own thread, passes them through the injected channel model, and
/// routes them. Per-frame failures only touch counters.
class Listener
{
public:
  /// Binds immediately; throws SocketError on failure.
  Listener(const Endpoint & bind_address, DatagramRouter & router, harness::ChannelSimulator & channel);
  ~Listener();
  Listener(const Listener &) = delete;
  Listener & operator=(const Listener &) = delete;

  std::uint16_t port() const { return port_; }
  void start();
  void stop();

private:
  void run(std::stop_token stop);

  UdpSocket socket_;
  std::uint16_t port_;
  DatagramRouter & router_;
  harness::ChannelSimulator & channel_;
  std::jthread thread_;
};

/// Feedback frames for every non-stale anchored actor: the inverse-mapped virtual pose, stamped
/// with the emission time.
std::vector<Datagram> build_feedback(const sync::RegistrySnapshot & snapshot, std::uint64_t emit_us);

/// Emits feedback frames at a fixed rate on its own thread.
class Broadcaster
{
public:
  Broadcaster(
    const Endpoint & destination, const sync::ActorRegistry & registry, double rate_hz,
    std::function<std::uint64_t()> clock = now_us);
  ~Broadcaster();
  Broadcaster(const Broadcaster &) = delete;
  Broadcaster & operator=(const Broadcaster &) = delete;

  void start();
  void stop();

  std::uint64_t frames_sent() const { return sent_.load(); }
  std::uint64_t send_failures() const { return failures_.load(); }

private:
  void run(std::stop_token stop);

  UdpSocket socket_;
  Endpoint destination_;
  const sync::ActorRegistry & registry_;
  double rate_hz_;
  std::function<std::uint64_t()> clock_;
  std::atomic<std::uint64_t> sent_{0};
  std::atomic<std::uint64_t> failures_{0};
  std::jthread thread_;
};

}  // namespace vve::wire

#endif  // VVE__BRIDGE_IO_HPP_
