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

#include "vve/console_server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <chrono>
#include <deque>
#include <fstream>
#include <sstream>
#include <thread>
#include <vector>

namespace vve::console
{
namespace
{

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using json_io::Json;

constexpr std::size_t kMaxBodyBytes = 1 << 20;

std::string_view mime_type(const std::filesystem::path & path)
{
  const std::string ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") {
    return "text/html";
  }
  if (ext == ".js" || ext == ".mjs") {
    return "text/javascript";
  }
  if (ext == ".css") {
    return "text/css";
  }
  if (ext == ".json" || ext == ".map") {
    return "application/json";
  }
  if (ext == ".svg") {
    return "image/svg+xml";
  }
  if (ext == ".png") {
    return "image/png";
  }
  return "application/octet-stream";
}

Json error_body(std::string field, std::string reason)
{
  return {{"ok", false}, {"code", "invalid"}, {"errors", Json::array({{{"field", field}, {"reason", reason}}})}};
}

}  // namespace

unsigned status_for_response(const Json & response)
{
  if (response.value("ok", false)) {
    return 200;
  }
  const std::string code = response.value("code", "invalid");
  if (code == "unknown_actor") {
    return 404;
  }
  if (code == "conflict") {
    return 409;
  }
  return 400;
}

class WsSession;

struct ConsoleServer::Impl
{
  Impl(session::Session & s, ConsoleOptions o) : session(s), options(std::move(o)) {}

  http::response<http::string_body> handle(const http::request<http::string_body> & req);
  void schedule_tick();
  void broadcast(const std::string & message);
  void on_event(const session::SessionEvent & event);
  Json run_command(const std::string & text);

  session::Session & session;
  ConsoleOptions options;
  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  net::steady_timer timer{ioc};
  std::vector<std::weak_ptr<WsSession>> streams;
  std::thread thread;
  std::optional<std::size_t> observer_token;
  std::uint16_t port{0};
  std::uint64_t started_us{0};
  bool running{false};
};

class WsSession : public std::enable_shared_from_this<WsSession>
{
public:
  WsSession(tcp::socket && socket, ConsoleServer::Impl & server) : ws_(std::move(socket)), server_(server) {}

  void accept(http::request<http::string_body> req)
  {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

  /// Io thread only.
  void send(std::string message)
  {
    if (!open_) {
      return;
    }
    queue_.push_back(std::move(message));
    if (queue_.size() == 1) {
      do_write();
    }
  }

  /// Io thread only. The first call sends a full snapshot, later ones a patch against it.
  void push_state(const Json & snapshot)
  {
    if (!open_) {
      return;
    }
    if (last_.is_null()) {
      send(Json{{"type", "snapshot"}, {"data", snapshot}}.dump());
    } else {
      Json patch = Json::diff(last_, snapshot);
      if (patch.empty()) {
        return;
      }
      send(Json{{"type", "delta"}, {"version", snapshot.at("version")}, {"patch", std::move(patch)}}.dump());
    }
    last_ = snapshot;
  }

  bool open() const { return open_; }

private:
  void on_accept(beast::error_code ec)
  {
    if (ec) {
      return;
    }
    open_ = true;
    push_state(server_.session.snapshot_json(server_.options.clock()));
    do_read();
  }

  void do_read()
  {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t)
  {
    if (ec) {
      open_ = false;
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    handle_message(text);
    do_read();
  }

  void handle_message(const std::string & text)
  {
    Json msg = Json::parse(text, nullptr, false);
    if (msg.is_discarded() || !msg.is_object() || !msg.contains("type") || !msg.at("type").is_string()) {
      send(Json{{"type", "error"}, {"reason", "expected a JSON object with a string 'type'"}}.dump());
      return;
    }
    const std::string type = msg.at("type").get<std::string>();
    if (type == "command") {
      Json response = msg.contains("body")
                        ? server_.session.command(msg.at("body"), server_.options.clock())
                        : error_body("body", "missing");
      send(Json{{"type", "command_result"}, {"id", msg.value("id", Json(nullptr))}, {"response", response}}.dump());
    } else if (type == "resync") {
      last_ = nullptr;
      push_state(server_.session.snapshot_json(server_.options.clock()));
    } else {
      send(Json{{"type", "error"}, {"reason", "unknown message type '" + type + "'"}}.dump());
    }
  }

  void do_write()
  {
    ws_.text(true);
    ws_.async_write(
      net::buffer(queue_.front()), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t)
  {
    if (ec) {
      open_ = false;
      queue_.clear();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) {
      do_write();
    }
  }

  websocket::stream<beast::tcp_stream> ws_;
  ConsoleServer::Impl & server_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  Json last_;
  bool open_{false};
};

namespace
{

class HttpSession : public std::enable_shared_from_this<HttpSession>
{
public:
  HttpSession(tcp::socket && socket, ConsoleServer::Impl & server) : stream_(std::move(socket)), server_(server) {}

  void run() { do_read(); }

private:
  void do_read()
  {
    parser_.emplace();
    parser_->body_limit(kMaxBodyBytes);
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, *parser_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t)
  {
    if (ec == http::error::end_of_stream) {
      beast::error_code ignored;
      stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
      return;
    }
    if (ec) {
      return;
    }
    auto req = parser_->release();
    if (websocket::is_upgrade(req)) {
      if (req.target() == "/v1/stream") {
        stream_.expires_never();
        auto ws = std::make_shared<WsSession>(stream_.release_socket(), server_);
        server_.streams.push_back(ws);
        ws->accept(std::move(req));
        return;
      }
    }
    auto res = std::make_shared<http::response<http::string_body>>(server_.handle(req));
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code wec, std::size_t) {
      if (wec) {
        return;
      }
      if (res->need_eof()) {
        beast::error_code ignored;
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        return;
      }
      self->do_read();
    });
  }

  beast::tcp_stream stream_;
  ConsoleServer::Impl & server_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
};

void do_accept(ConsoleServer::Impl & server)
{
  server.acceptor.async_accept(net::make_strand(server.ioc), [&server](beast::error_code ec, tcp::socket socket) {
    if (!server.running) {
      return;
    }
    if (!ec) {
      std::make_shared<HttpSession>(std::move(socket), server)->run();
    }
    do_accept(server);
  });
}

}  // namespace

Json ConsoleServer::Impl::run_command(const std::string & text)
{
  Json body = Json::parse(text, nullptr, false);
  if (body.is_discarded()) {
    return error_body("", "request body is not valid JSON");
  }
  return session.command(body, options.clock());
}

http::response<http::string_body> ConsoleServer::Impl::handle(const http::request<http::string_body> & req)
{
  auto reply = [&req](http::status status, std::string body, std::string_view type = "application/json") {
    http::response<http::string_body> res{status, req.version()};
    res.set(http::field::server, "vve-bridge");
    res.set(http::field::content_type, std::string(type));
    res.set(http::field::cache_control, "no-store");
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  };
  auto json_reply = [&reply](unsigned status, const Json & body) {
    return reply(static_cast<http::status>(status), body.dump());
  };

  std::string target(req.target());
  if (const auto q = target.find('?'); q != std::string::npos) {
    target.resize(q);
  }

  if (target == "/v1/state") {
    if (req.method() != http::verb::get) {
      return json_reply(405, error_body("method", "use GET"));
    }
    return json_reply(200, session.snapshot_json(options.clock()));
  }
  if (target == "/v1/command") {
    if (req.method() != http::verb::post) {
      return json_reply(405, error_body("method", "use POST"));
    }
    const Json response = run_command(req.body());
    return json_reply(status_for_response(response), response);
  }
  if (target == "/v1/health") {
    if (req.method() != http::verb::get) {
      return json_reply(405, error_body("method", "use GET"));
    }
    const std::uint64_t now = options.clock();
    return json_reply(
      200, Json{
             {"status", "ok"},
             {"server_time_us", now},
             {"uptime_s", static_cast<double>(now - std::min(now, started_us)) / 1e6},
             {"actors", session.registry().snapshot()->actors.size()}});
  }
  if (target == "/v1/stream") {
    return json_reply(426, error_body("", "WebSocket upgrade required"));
  }
  if (target.rfind("/v1/", 0) == 0) {
    return json_reply(404, error_body("", "no such endpoint"));
  }

  if (req.method() != http::verb::get && req.method() != http::verb::head) {
    return json_reply(405, error_body("method", "use GET"));
  }
  if (!options.static_dir) {
    if (target == "/") {
      return reply(http::status::ok, "vve-bridge console API at /v1\n", "text/plain");
    }
    return reply(http::status::not_found, "not found\n", "text/plain");
  }
  std::error_code fs_ec;
  const auto root = std::filesystem::weakly_canonical(*options.static_dir, fs_ec);
  auto file = std::filesystem::weakly_canonical(root / target.substr(1), fs_ec);
  if (!fs_ec && std::filesystem::is_directory(file, fs_ec)) {
    file /= "index.html";
  }
  const auto rel = file.lexically_relative(root);
  if (fs_ec || rel.empty() || *rel.begin() == "..") {
    return reply(http::status::not_found, "not found\n", "text/plain");
  }
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    return reply(http::status::not_found, "not found\n", "text/plain");
  }
  std::ostringstream content;
  content << in.rdbuf();
  return reply(http::status::ok, content.str(), mime_type(file));
}

void ConsoleServer::Impl::schedule_tick()
{
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
    std::chrono::duration<double>(1.0 / options.stream_hz));
  timer.expires_after(period);
  timer.async_wait([this](beast::error_code ec) {
    if (ec || !running) {
      return;
    }
    std::erase_if(streams, [](const std::weak_ptr<WsSession> & w) {
      auto s = w.lock();
      return !s;
    });
    if (!streams.empty()) {
      const Json snapshot = session.snapshot_json(options.clock());
      for (const auto & w : streams) {
        if (auto s = w.lock()) {
          s->push_state(snapshot);
        }
      }
    }
    schedule_tick();
  });
}

void ConsoleServer::Impl::broadcast(const std::string & message)
{
  for (const auto & w : streams) {
    if (auto s = w.lock()) {
      s->send(message);
    }
  }
}

void ConsoleServer::Impl::on_event(const session::SessionEvent & event)
{
  std::string message =
    Json{{"type", "event"}, {"kind", std::string(session::to_string(event.kind))}, {"timestamp_us", event.timestamp_us}, {"data", event.payload}}
      .dump();
  net::post(ioc, [this, message = std::move(message)]() mutable { broadcast(message); });
}

ConsoleServer::ConsoleServer(session::Session & session, ConsoleOptions options)
: impl_(std::make_unique<Impl>(session, std::move(options)))
{
  if (!(impl_->options.stream_hz > 0.0) || impl_->options.stream_hz > 100.0) {
    throw ConfigError("stream rate must be in (0, 100] Hz");
  }
}

ConsoleServer::~ConsoleServer() { stop(); }

void ConsoleServer::start()
{
  Impl & s = *impl_;
  if (s.running) {
    return;
  }
  beast::error_code ec;
  const auto address = net::ip::make_address(s.options.bind_host, ec);
  if (ec) {
    throw wire::SocketError("invalid console bind address '" + s.options.bind_host + "'");
  }
  const tcp::endpoint endpoint{address, s.options.port};
  s.acceptor.open(endpoint.protocol(), ec);
  if (!ec) {
    s.acceptor.set_option(net::socket_base::reuse_address(true), ec);
    s.acceptor.bind(endpoint, ec);
  }
  if (!ec) {
    s.acceptor.listen(net::socket_base::max_listen_connections, ec);
  }
  if (ec) {
    throw wire::SocketError("cannot listen on " + s.options.bind_host + ":" + std::to_string(s.options.port) + ": " + ec.message());
  }
  s.port = s.acceptor.local_endpoint().port();
  s.started_us = s.options.clock();
  s.running = true;
  s.observer_token = s.session.subscribe([&s](const session::SessionEvent & e) { s.on_event(e); });
  do_accept(s);
  s.schedule_tick();
  s.thread = std::thread([&s] { s.ioc.run(); });
}

void ConsoleServer::stop()
{
  Impl & s = *impl_;
  if (!s.running) {
    return;
  }
  if (s.observer_token) {
    s.session.unsubscribe(*s.observer_token);
    s.observer_token.reset();
  }
  net::post(s.ioc, [&s] {
    s.running = false;
    beast::error_code ignored;
    s.acceptor.close(ignored);
    s.timer.cancel();
  });
  s.ioc.stop();
  if (s.thread.joinable()) {
    s.thread.join();
  }
  s.running = false;
}

std::uint16_t ConsoleServer::port() const { return impl_->port; }

}  // namespace vve::console
