#include "pairit/service/server.hpp"

#include <spdlog/spdlog.h>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <deque>
#include <regex>

#include "pairit/core/error.hpp"

namespace pairit::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr auto kStepInterval = std::chrono::milliseconds(50);

http::status status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadRequest:
      return http::status::bad_request;
    case ErrorCode::Unauthorized:
      return http::status::unauthorized;
    case ErrorCode::AlreadyAssigned:
    case ErrorCode::AlreadyQueued:
      return http::status::conflict;
    case ErrorCode::NotAssigned:
      return http::status::not_found;
    case ErrorCode::SessionNotActive:
      return http::status::service_unavailable;
    default:
      return http::status::internal_server_error;
  }
}

std::string query_param(std::string_view target, std::string_view key) {
  const auto q = target.find('?');
  if (q == std::string_view::npos) return {};
  std::string_view rest = target.substr(q + 1);
  while (!rest.empty()) {
    const auto amp = rest.find('&');
    const auto part = rest.substr(0, amp);
    const auto eq = part.find('=');
    if (eq != std::string_view::npos && part.substr(0, eq) == key) return std::string(part.substr(eq + 1));
    if (amp == std::string_view::npos) break;
    rest = rest.substr(amp + 1);
  }
  return {};
}

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Experiment& experiment, std::string participant)
      : ws_(std::move(socket)), experiment_(experiment), participant_(std::move(participant)) {}

  void start(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->on_open();
    });
  }

  void close() {
    asio::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->ws_.is_open()) self->ws_.async_close(websocket::close_code::going_away, [](beast::error_code) {});
    });
  }

 private:
  void on_open() {
    std::weak_ptr<WsSession> weak = shared_from_this();
    auto exec = ws_.get_executor();
    try {
      connection_ = experiment_.connect(participant_, [weak, exec](const std::string& frame) {
        asio::post(exec, [weak, frame] {
          if (auto self = weak.lock()) self->send(frame);
        });
      });
    } catch (const Error& e) {
      ws_.async_close(websocket::close_reason(websocket::close_code::policy_error, e.what()),
                      [](beast::error_code) {});
      return;
    }
    read();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->experiment_.disconnect(self->connection_);
        return;
      }
      const auto text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->experiment_.handle_frame(self->connection_, text);
      self->read();
    });
  }

  void send(const std::string& frame) {
    outbox_.push_back(frame);
    if (outbox_.size() == 1) write_next();
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(asio::buffer(outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) return;
      self->outbox_.pop_front();
      if (!self->outbox_.empty()) self->write_next();
    });
  }

  websocket::stream<tcp::socket> ws_;
  Experiment& experiment_;
  std::string participant_;
  std::size_t connection_ = 0;
  beast::flat_buffer buffer_;
  std::deque<std::string> outbox_;
};

}  // namespace

struct Server::Impl {
  Impl(Experiment& e, const std::string& host, unsigned short port)
      : experiment(e), acceptor(io), timer(io), signals(io) {
    beast::error_code ec;
    const auto address = asio::ip::make_address(host, ec);
    if (ec) throw Error(ErrorCode::BindFailure, host + ": " + ec.message());
    const tcp::endpoint ep(address, port);
    acceptor.open(ep.protocol(), ec);
    if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(ep, ec);
    if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
    if (ec) throw Error(ErrorCode::BindFailure, host + ":" + std::to_string(port) + ": " + ec.message());
  }

  void accept() {
    acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      serve_http(std::make_shared<tcp::socket>(std::move(socket)));
      accept();
    });
  }

  void serve_http(std::shared_ptr<tcp::socket> socket) {
    auto buffer = std::make_shared<beast::flat_buffer>();
    auto req = std::make_shared<http::request<http::string_body>>();
    http::async_read(*socket, *buffer, *req, [this, socket, buffer, req](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (websocket::is_upgrade(*req)) {
        upgrade(std::move(*socket), std::move(*req));
        return;
      }
      auto res = std::make_shared<http::response<http::string_body>>(route(*req));
      http::async_write(*socket, *res, [this, socket, buffer, res](beast::error_code wec, std::size_t) {
        if (wec) return;
        if (res->need_eof()) {
          beast::error_code ignored;
          socket->shutdown(tcp::socket::shutdown_send, ignored);
          return;
        }
        serve_http(socket);
      });
    });
  }

  void upgrade(tcp::socket socket, http::request<http::string_body> req) {
    const std::string target(req.target());
    if (target.rfind("/ws", 0) != 0) return;
    const auto participant = query_param(target, "participant");
    auto ws = std::make_shared<WsSession>(std::move(socket), experiment, participant);
    std::erase_if(sockets, [](const auto& w) { return w.expired(); });
    sockets.push_back(ws);
    ws->start(std::move(req));
  }

  http::response<http::string_body> route(const http::request<http::string_body>& req) {
    http::response<http::string_body> res;
    res.version(req.version());
    res.keep_alive(req.keep_alive());
    res.set(http::field::server, "pairit");
    auto json_reply = [&](http::status status, const nlohmann::json& body) {
      res.result(status);
      res.set(http::field::content_type, "application/json");
      res.body() = body.dump();
    };
    static const std::regex log_route("^/sessions/([A-Za-z0-9_.-]+)/log$");
    const std::string target(req.target());
    const std::string path = target.substr(0, target.find('?'));
    std::smatch m;
    try {
      if (req.method() == http::verb::get && path == "/health") {
        json_reply(http::status::ok, experiment.health());
      } else if (req.method() == http::verb::post && path == "/join") {
        const auto body = nlohmann::json::parse(req.body(), nullptr, false);
        if (body.is_discarded()) throw Error(ErrorCode::BadRequest, "body is not JSON");
        const auto r = experiment.join(body);
        json_reply(http::status::ok, {{"participantId", r.participantId}, {"status", r.status}});
      } else if (req.method() == http::verb::get && std::regex_match(path, m, log_route)) {
        if (auto log = experiment.log_jsonl(m[1].str())) {
          res.result(http::status::ok);
          res.set(http::field::content_type, "application/x-ndjson");
          res.body() = std::move(*log);
        } else {
          json_reply(http::status::not_found, {{"error", "unknown session"}});
        }
      } else {
        json_reply(http::status::not_found, {{"error", "no route"}});
      }
    } catch (const Error& e) {
      json_reply(status_for(e.code()), {{"error", to_string(e.code())}, {"message", e.what()}});
    }
    res.prepare_payload();
    return res;
  }

  void schedule_step() {
    timer.expires_after(kStepInterval);
    timer.async_wait([this](beast::error_code ec) {
      if (ec) return;
      experiment.step();
      schedule_step();
    });
  }

  void stop_now() {
    beast::error_code ignored;
    acceptor.close(ignored);
    timer.cancel();
    signals.cancel();
    for (auto& w : sockets) {
      if (auto s = w.lock()) s->close();
    }
    // let close handshakes go out, then end the loop
    auto grace = std::make_shared<asio::steady_timer>(io, std::chrono::milliseconds(100));
    grace->async_wait([this, grace](beast::error_code) { io.stop(); });
  }

  Experiment& experiment;
  asio::io_context io{1};
  tcp::acceptor acceptor;
  asio::steady_timer timer;
  asio::signal_set signals;
  std::vector<std::weak_ptr<WsSession>> sockets;
};

Server::Server(Experiment& experiment, const std::string& host, unsigned short port)
    : impl_(std::make_unique<Impl>(experiment, host, port)) {}

Server::~Server() = default;

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run(bool handleSignals) {
  impl_->accept();
  impl_->schedule_step();
  if (handleSignals) {
    impl_->signals.add(SIGINT);
    impl_->signals.add(SIGTERM);
    impl_->signals.async_wait([this](beast::error_code ec, int sig) {
      if (ec) return;
      spdlog::info("signal {}: shutting down", sig);
      impl_->experiment.shutdown();
      impl_->stop_now();
    });
  }
  spdlog::info("listening on port {}", port());
  impl_->io.run();
}

void Server::stop() {
  asio::post(impl_->io, [this] { impl_->stop_now(); });
}

}  // namespace pairit::service
