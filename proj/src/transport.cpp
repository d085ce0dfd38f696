// Copyright 2026 The Shardhouse Authors
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

#include "shardhouse/transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "shardhouse/errors.h"

namespace shardhouse {

using nlohmann::json;

std::string InProcessTransport::round_trip(const std::string& request) {
  if (down_) throw UnavailableError("store is down");
  int remaining = fail_after_.load();
  if (remaining == 0) {
    down_ = true;
    throw UnavailableError("store is down");
  }
  if (remaining > 0) fail_after_ = remaining - 1;
  FrameTap tap;
  {
    std::lock_guard lock(tap_mu_);
    tap = tap_;
  }
  if (tap) tap("send", request);
  std::string response = store_->handle_frame(request);
  if (tap) tap("recv", response);
  return response;
}

void InProcessTransport::set_tap(FrameTap tap) {
  std::lock_guard lock(tap_mu_);
  tap_ = std::move(tap);
}

namespace {

void write_all(int fd, const char* data, std::size_t len) {
  while (len > 0) {
    ssize_t w = ::send(fd, data, len, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw UnavailableError(std::string("send failed: ") + std::strerror(errno));
    }
    data += w;
    len -= static_cast<std::size_t>(w);
  }
}

// Returns bytes read before EOF.
std::size_t read_all(int fd, char* data, std::size_t len) {
  std::size_t got = 0;
  while (got < len) {
    ssize_t r = ::recv(fd, data + got, len - got, 0);
    if (r < 0) {
      if (errno == EINTR) continue;
      throw UnavailableError(std::string("recv failed: ") + std::strerror(errno));
    }
    if (r == 0) break;
    got += static_cast<std::size_t>(r);
  }
  return got;
}

}  // namespace

void write_frame(int fd, std::string_view body) {
  if (body.size() > kMaxFrameBytes) throw ProtocolError("frame too large");
  const std::uint32_t n = htonl(static_cast<std::uint32_t>(body.size()));
  std::string buf(reinterpret_cast<const char*>(&n), 4);
  buf.append(body);
  write_all(fd, buf.data(), buf.size());
}

std::optional<std::string> read_frame(int fd) {
  char header[4];
  std::size_t got = read_all(fd, header, 4);
  if (got == 0) return std::nullopt;
  if (got < 4) throw ProtocolError("truncated frame header");
  std::uint32_t n;
  std::memcpy(&n, header, 4);
  n = ntohl(n);
  if (n > kMaxFrameBytes) throw ProtocolError("frame length " + std::to_string(n) + " too large");
  std::string body(n, '\0');
  if (read_all(fd, body.data(), n) < n) throw ProtocolError("truncated frame body");
  return body;
}

std::pair<std::string, int> parse_host_port(std::string_view text) {
  if (text.rfind("tcp://", 0) == 0) text.remove_prefix(6);
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) throw ConfigError("expected host:port, got " + std::string(text));
  std::string host(text.substr(0, colon));
  int port = 0;
  try {
    port = std::stoi(std::string(text.substr(colon + 1)));
  } catch (const std::exception&) {
    throw ConfigError("bad port in " + std::string(text));
  }
  if (port < 0 || port > 65535) throw ConfigError("bad port in " + std::string(text));
  if (host.empty()) host = "127.0.0.1";
  return {host, port};
}

TcpTransport::TcpTransport(std::string host, int port, std::chrono::milliseconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {}

TcpTransport::~TcpTransport() {
  std::lock_guard lock(mu_);
  close_locked();
}

void TcpTransport::close_locked() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void TcpTransport::connect_locked() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(port_);
  if (int rc = ::getaddrinfo(host_.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw UnavailableError("cannot resolve " + host_ + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no address";
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      timeval tv{};
      tv.tv_sec = static_cast<time_t>(timeout_.count() / 1000);
      tv.tv_usec = static_cast<suseconds_t>((timeout_.count() % 1000) * 1000);
      ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
      ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
      fd_ = fd;
      ::freeaddrinfo(res);
      return;
    }
    last_error = std::strerror(errno);
    ::close(fd);
  }
  ::freeaddrinfo(res);
  throw UnavailableError("cannot connect to " + host_ + ":" + port + ": " + last_error);
}

std::string TcpTransport::round_trip(const std::string& request) {
  std::lock_guard lock(mu_);
  // One reconnect attempt covers a server that dropped an idle connection.
  for (int attempt = 0;; ++attempt) {
    try {
      if (fd_ < 0) connect_locked();
      write_frame(fd_, request);
      auto body = read_frame(fd_);
      if (!body) throw UnavailableError("connection closed by " + host_);
      return *body;
    } catch (const UnavailableError&) {
      close_locked();
      if (attempt >= 1) throw;
    } catch (const ProtocolError&) {
      close_locked();
      throw;
    }
  }
}

TcpServer::TcpServer(std::shared_ptr<Store> store, std::string host, int port)
    : store_(std::move(store)), host_(std::move(host)), port_(port) {}

TcpServer::~TcpServer() { stop(); }

int TcpServer::start() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(port_);
  if (int rc = ::getaddrinfo(host_.empty() ? nullptr : host_.c_str(), port.c_str(), &hints, &res);
      rc != 0) {
    throw ConfigError("cannot resolve " + host_ + ": " + ::gai_strerror(rc));
  }
  int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (fd < 0 || ::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 64) != 0) {
    std::string err = std::strerror(errno);
    if (fd >= 0) ::close(fd);
    ::freeaddrinfo(res);
    throw ConfigError("cannot listen on " + host_ + ":" + port + ": " + err);
  }
  ::freeaddrinfo(res);
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  if (addr.ss_family == AF_INET) {
    port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
  } else if (addr.ss_family == AF_INET6) {
    port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
  }
  listen_fd_ = fd;
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  return port_;
}

void TcpServer::accept_loop() {
  while (running_) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, 200);
    if (rc <= 0) continue;
    int client = ::accept(listen_fd_, nullptr, nullptr);
    if (client < 0) continue;
    int one = 1;
    ::setsockopt(client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(workers_mu_);
    client_fds_.push_back(client);
    workers_.emplace_back([this, client] { serve(client); });
  }
}

void TcpServer::serve(int fd) {
  try {
    while (running_) {
      auto body = read_frame(fd);
      if (!body) break;
      write_frame(fd, store_->handle_frame(*body));
    }
  } catch (const ProtocolError& e) {
    // The stream is out of sync; answer once and drop the connection.
    try {
      write_frame(fd, json{{"seq", nullptr}, {"status", "error"}, {"code", "bad_request"},
                           {"error", e.what()}}
                          .dump());
    } catch (const Error&) {
    }
  } catch (const Error&) {
  }
  ::shutdown(fd, SHUT_RDWR);
}

void TcpServer::stop() {
  if (!running_.exchange(false)) return;
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(workers_mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.join();
  {
    std::lock_guard lock(workers_mu_);
    for (int fd : client_fds_) ::close(fd);
    client_fds_.clear();
  }
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

void TcpServer::wait() {
  while (running_) std::this_thread::sleep_for(std::chrono::milliseconds(200));
}

json StoreClient::request(const std::string& op, const std::string& table, json payload) {
  const std::int64_t seq = ++seq_;
  json req = {{"seq", seq}, {"op", op}, {"table", table}, {"payload", std::move(payload)}};
  std::string body = transport_->round_trip(req.dump());
  json resp;
  try {
    resp = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError("CSP " + std::to_string(id_) + " sent malformed JSON: " + e.what());
  }
  if (!resp.is_object() || resp.value("seq", json(nullptr)) != json(seq)) {
    throw ProtocolError("CSP " + std::to_string(id_) + " answered out of sequence");
  }
  if (resp.value("status", std::string()) != "ok") {
    throw RemoteError(resp.value("code", std::string("internal")),
                      "CSP " + std::to_string(id_) + ": " + resp.value("error", std::string()));
  }
  return resp;
}

void StoreClient::create(const SharedTableSchema& schema, bool replace) {
  request("CREATE", schema.name, {{"schema", schema_to_json(schema)}, {"replace", replace}});
}

std::size_t StoreClient::insert(const SharedTableSchema& schema, const std::vector<ShareRow>& rows,
                                bool upsert) {
  json jrows = json::array();
  auto attrs = all_attributes(schema);
  for (const auto& r : rows) jrows.push_back(row_to_json(r, schema, attrs));
  json resp = request("INSERT", schema.name, {{"rows", std::move(jrows)}, {"upsert", upsert}});
  return resp.at("count").get<std::size_t>();
}

std::vector<ShareRow> StoreClient::select(const SharedTableSchema& schema,
                                          const std::vector<std::string>& projection,
                                          const Predicate& pred) {
  json resp = request("SELECT", schema.name,
                      {{"projection", projection}, {"predicate", predicate_to_json(pred)}});
  std::vector<std::size_t> attrs;
  if (projection.empty()) {
    attrs = all_attributes(schema);
  } else {
    for (const auto& c : projection) attrs.push_back(schema.index_of(c));
  }
  std::vector<ShareRow> out;
  const json& rows = resp.at("rows");
  out.reserve(rows.size());
  for (const auto& jr : rows) out.push_back(row_from_json(jr, schema, attrs));
  return out;
}

std::vector<AggregateGroup> StoreClient::aggregate(const std::string& table,
                                                   const std::vector<std::string>& group_by,
                                                   const std::vector<std::string>& sums,
                                                   const Predicate& pred) {
  json resp = request("AGGREGATE", table,
                      {{"group_by", group_by}, {"sums", sums}, {"predicate", predicate_to_json(pred)}});
  std::vector<AggregateGroup> out;
  try {
    for (const auto& jg : resp.at("rows")) {
      AggregateGroup g;
      for (const auto& k : jg.at("key")) g.key.push_back(plain_from_json(k));
      g.count = jg.at("count").get<std::int64_t>();
      for (const auto& js : jg.at("sums")) {
        AggregateSum s;
        s.nonnull = js.at("n").get<std::int64_t>();
        for (const auto& e : js.at("e")) s.sums.push_back(from_decimal(e.get<std::string>()));
        g.sums.push_back(std::move(s));
      }
      if (g.key.size() != group_by.size() || g.sums.size() != sums.size()) {
        throw ProtocolError("aggregate row shape mismatch");
      }
      out.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    throw ProtocolError("CSP " + std::to_string(id_) + " sent a malformed aggregate: " + e.what());
  }
  return out;
}

std::vector<CorruptCell> StoreClient::verify(const std::string& table) {
  json resp = request("VERIFY", table);
  std::vector<CorruptCell> out;
  for (const auto& jc : resp.at("rows")) {
    CorruptCell c;
    for (const auto& k : jc.at("key")) c.key.push_back(plain_from_json(k));
    c.attribute = jc.at("column").get<std::string>();
    c.block = jc.at("block").get<std::size_t>();
    out.push_back(std::move(c));
  }
  return out;
}

StoreClient::Snapshot StoreClient::snapshot(const std::string& table, std::size_t offset) {
  json resp = request("SNAPSHOT", table, {{"offset", offset}, {"limit", kSnapshotChunk}});
  Snapshot snap;
  snap.schema = schema_from_json(resp.at("schema"));
  auto attrs = all_attributes(snap.schema);
  for (const auto& jr : resp.at("rows")) snap.rows.push_back(row_from_json(jr, snap.schema, attrs));
  snap.total = resp.at("total").get<std::size_t>();
  if (!resp.at("next").is_null()) snap.next = resp.at("next").get<std::size_t>();
  return snap;
}

std::vector<std::string> StoreClient::health() {
  return request("HEALTH", "").at("rows").get<std::vector<std::string>>();
}

}  // namespace shardhouse
