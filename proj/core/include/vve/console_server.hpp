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

#ifndef VVE__CONSOLE_SERVER_HPP_
#define VVE__CONSOLE_SERVER_HPP_

// Operator console service. Endpoints and message shapes are documented in
// docs/console_api.md.
//
//   GET  /v1/state    session snapshot
//   POST /v1/command  one command, JSON body
//   GET  /v1/health   liveness
//   GET  /v1/stream   WebSocket: snapshot, then JSON-patch deltas at a fixed rate, events
//                     as they happen; accepts commands
//   GET  /...         static files from the UI directory, when configured

#include "vve/bridge_io.hpp"
#include "vve/session.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace vve::console
{

inline constexpr std::uint16_t kDefaultConsolePort = 47080;

struct ConsoleOptions
{
  std::string bind_host{"0.0.0.0"};
  std::uint16_t port{kDefaultConsolePort};  // 0 picks a free port
  double stream_hz{10.0};
  std::optional<std::filesystem::path> static_dir;
  std::function<std::uint64_t()> clock{wire::now_us};
};

/// HTTP status for a command response body.
unsigned status_for_response(const json_io::Json & response);

class ConsoleServer
{
public:
  ConsoleServer(session::Session & session, ConsoleOptions options = {});
  ~ConsoleServer();
  ConsoleServer(const ConsoleServer &) = delete;
  ConsoleServer & operator=(const ConsoleServer &) = delete;

  /// Binds and starts serving on a background thread. Throws wire::SocketError.
  void start();
  void stop();
  std::uint16_t port() const;

  struct Impl;

private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace vve::console

#endif  // VVE__CONSOLE_SERVER_HPP_
