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

#include "vve/bridge_io.hpp"

#include "vve/vru_safety.hpp"

#include <arpa/inet.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <condition_variable>
#include <cstring>
#include <mutex>
#include <queue>

#include <spdlog/spdlog.h>

namespace vve::wire
{

std::uint64_t now_us()
{
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(
                                      std::chrono::system_clock::now().time_since_epoch())
                                      .count());
}

Endpoint Endpoint::parse(std::string_view text, std::uint16_t default_port)
{
  Endpoint ep;
  ep.port = default_port;
  std::string_view port_text;
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    if (text.find('.') != std::string_view::npos || text == "localhost") {
      ep.host = std::string(text);
    } else {
      port_text = text;
    }
  } else {
    if (colon > 0) {
      ep.host = std::string(text.substr(0, colon));
    }
    port_text = text.substr(colon + 1);
  }
  if (!port_text.empty()) {
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), value);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || value > 65535) {
      throw ConfigError("invalid port in endpoint '" + std::string(text) + "'");
    }
    ep.port = static_cast<std::uint16_t>(value);
  }
  if (ep.host == "localhost") {
    ep.host = "127.0.0.1";
  }
  in_addr probe{};
  if (inet_pton(AF_INET, ep.host.c_str(), &probe) != 1) {
    throw ConfigError("invalid IPv4 host in endpoint '" + std::string(text) + "'");
  }
  return ep;
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

sockaddr_in Endpoint::to_sockaddr() const
{
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  inet_pton(AF_INET, host.c_str(), &addr.sin_addr);
  return addr;
}

UdpSocket::UdpSocket() : fd_(::socket(AF_INET, SOCK_DGRAM, 0))
{
  if (fd_ < 0) {
    throw SocketError(std::string("socket(): ") + std::strerror(errno));
  }
}

UdpSocket::~UdpSocket()
{
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

UdpSocket::UdpSocket(UdpSocket && other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

UdpSocket & UdpSocket::operator=(UdpSocket && other) noexcept
{
  if (this != &other) {
    if (fd_ >= 0) {
      ::close(fd_);
    }
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void UdpSocket::bind(const Endpoint & endpoint)
{
  const sockaddr_in addr = endpoint.to_sockaddr();
  if (::bind(fd_, reinterpret_cast<const sockaddr *>(&addr), sizeof(addr)) != 0) {
    throw SocketError("cannot bind " + endpoint.to_string() + ": " + std::strerror(errno));
  }
}

std::uint16_t UdpSocket::local_port() const
{
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd_, reinterpret_cast<sockaddr *>(&addr), &len) != 0) {
    return 0;
  }
  return ntohs(addr.sin_port);
}

bool UdpSocket::send_to(std::span<const std::uint8_t> bytes, const Endpoint & to)
{
  const sockaddr_in addr = to.to_sockaddr();
  const auto n = ::sendto(
    fd_, bytes.data(), bytes.size(), 0, reinterpret_cast<const sockaddr *>(&addr), sizeof(addr));
  return n == static_cast<ssize_t>(bytes.size());
}

std::optional<std::size_t> UdpSocket::receive(
  std::span<std::uint8_t> buffer, std::chrono::milliseconds timeout)
{
  pollfd pfd{fd_, POLLIN, 0};
  const int ready = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (ready <= 0 || !(pfd.revents & POLLIN)) {
    return std::nullopt;
  }
  const auto n = ::recv(fd_, buffer.data(), buffer.size(), MSG_TRUNC);
  if (n < 0) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(n);
}

DatagramRouter::DatagramRouter(
  sync::ActorRegistry & registry, ChannelCounters & counters, RouterConfig config)
: registry_(registry), counters_(counters), config_(config)
{
}

RouteResult DatagramRouter::handle(std::span<const std::uint8_t> bytes, std::uint64_t rx_us)
{
  RouteResult result;
  counters_.count_received(rx_us);
  DecodeResult decoded = decode(bytes);
  if (auto * err = std::get_if<DecodeError>(&decoded)) {
    counters_.count_decode_error(*err);
    result.decode_error = *err;
    return result;
  }
  const Datagram & d = std::get<Datagram>(decoded);
  result.datagram = d;

  if (config_.auto_register && !registry_.contains(d.actor_id)) {
    try {
      registry_.register_actor(
        {d.actor_id, d.actor_kind, config_.auto_register_virtual_initial, std::nullopt, std::nullopt});
    } catch (const ConfigError &) {
      // lost a race with another registration of the same id
    }
  }

  sync::UpdateOutcome outcome;
  if (d.msg_type == MsgType::psm) {
    outcome = vru::ingest_psm(registry_, {d.actor_id, to_geo_pose(d), d.speed_mps, rx_us}, rx_us);
  } else {
    outcome = registry_.update_actor(d.actor_id, to_geo_pose(d), rx_us, d.speed_mps);
  }
  counters_.count_update(outcome.status);
  result.update = outcome.status;
  return result;
}

Listener::Listener(
  const Endpoint & bind_address, DatagramRouter & router, harness::ChannelSimulator & channel)
: router_(router), channel_(channel)
{
  socket_.bind(bind_address);
  port_ = socket_.local_port();
}

Listener::~Listener() { stop(); }

void Listener::start()
{
  if (!thread_.joinable()) {
    thread_ = std::jthread([this](std::stop_token st) { run(st); });
  }
}

void Listener::stop()
{
  if (thread_.joinable()) {
    thread_.request_stop();
    thread_.join();
  }
}

void Listener::run(std::stop_token stop)
{
  struct Pending
  {
    std::uint64_t due_us;
    std::uint64_t seq;
    std::vector<std::uint8_t> bytes;
    bool operator>(const Pending & o) const
    {
      return due_us != o.due_us ? due_us > o.due_us : seq > o.seq;
    }
  };
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> delayed;
  std::uint64_t seq = 0;
  std::vector<std::uint8_t> buffer(2048);

  while (!stop.stop_requested()) {
    auto timeout = std::chrono::milliseconds(50);
    if (!delayed.empty()) {
      const std::uint64_t now = now_us();
      const std::uint64_t due = delayed.top().due_us;
      timeout = std::chrono::milliseconds(due > now ? std::min<std::uint64_t>((due - now) / 1000 + 1, 50) : 0);
    }

    if (auto n = socket_.receive(buffer, timeout)) {
      const std::size_t size = std::min(*n, buffer.size());
      const std::uint64_t rx = now_us();
      const harness::ChannelVerdict verdict = channel_.next();
      if (verdict.lost) {
        router_.counters().count_received(rx);
        router_.counters().count_injected_loss();
      } else if (verdict.delay_us == 0) {
        // Oversized datagrams keep their true length so they classify as bad_length.
        std::vector<std::uint8_t> frame(buffer.begin(), buffer.begin() + size);
        if (*n > buffer.size()) {
          frame.resize(*n);
        }
        router_.handle(frame, rx);
      } else {
        std::vector<std::uint8_t> frame(buffer.begin(), buffer.begin() + size);
        if (*n > buffer.size()) {
          frame.resize(*n);
        }
        delayed.push({rx + verdict.delay_us, seq++, std::move(frame)});
      }
    }

    const std::uint64_t now = now_us();
    while (!delayed.empty() && delayed.top().due_us <= now) {
      router_.handle(delayed.top().bytes, now);
      delayed.pop();
    }
  }
}

std::vector<Datagram> build_feedback(const sync::RegistrySnapshot & snapshot, std::uint64_t emit_us)
{
  std::vector<Datagram> out;
  for (const auto & [id, actor] : snapshot.actors) {
    if (actor->stale || !actor->anchor || !actor->last_virtual) {
      continue;
    }
    try {
      const frames::GeoPose geo = sync::virtual_to_real(*actor->last_virtual, *actor->anchor, emit_us);
      out.push_back(make_datagram(MsgType::pose, actor->kind, id, geo, actor->speed_mps));
    } catch (const Error & e) {
      spdlog::warn("feedback for actor {} skipped: {}", id, e.what());
    }
  }
  return out;
}

Broadcaster::Broadcaster(
  const Endpoint & destination, const sync::ActorRegistry & registry, double rate_hz,
  std::function<std::uint64_t()> clock)
: destination_(destination), registry_(registry), rate_hz_(rate_hz), clock_(std::move(clock))
{
  if (!(rate_hz_ > 0.0) || rate_hz_ > 1000.0) {
    throw ConfigError("feedback rate must be in (0, 1000] Hz");
  }
}

Broadcaster::~Broadcaster() { stop(); }

void Broadcaster::start()
{
  if (!thread_.joinable()) {
    thread_ = std::jthread([this](std::stop_token st) { run(st); });
  }
}

void Broadcaster::stop()
{
  if (thread_.joinable()) {
    thread_.request_stop();
    thread_.join();
  }
}

void Broadcaster::run(std::stop_token stop)
{
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / rate_hz_));
  std::mutex mutex;
  std::condition_variable_any cv;
  auto next = clock::now();
  while (!stop.stop_requested()) {
    const std::uint64_t emit = clock_();
    for (const Datagram & d : build_feedback(*registry_.snapshot(), emit)) {
      const Frame frame = encode(d);
      if (socket_.send_to(frame, destination_)) {
        sent_.fetch_add(1);
      } else {
        failures_.fetch_add(1);
        spdlog::warn("feedback send to {} failed: {}", destination_.to_string(), std::strerror(errno));
      }
    }
    next += period;
    std::unique_lock lock(mutex);
    cv.wait_until(lock, stop, next, [] { return false; });
  }
}

}  // namespace vve::wire
