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

#pragma once

// Client side of the store protocol. Frames are a 4-byte big-endian length
// followed by a UTF-8 JSON body. The in-process transport pushes the same
// text through Store::handle_frame so tests see identical semantics.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"
#include "shardhouse/scheme.h"
#include "shardhouse/store.h"

namespace shardhouse {

/// Upper bound on one frame body.
inline constexpr std::uint32_t kMaxFrameBytes = 512u << 20;

class Transport {
 public:
  virtual ~Transport() = default;
  /// Sends one request body and returns the response body. Throws
  /// UnavailableError when the peer cannot be reached.
  virtual std::string round_trip(const std::string& request) = 0;
};

/// Observes every frame crossing a transport ("send" or "recv").
using FrameTap = std::function<void(std::string_view direction, std::string_view body)>;

class InProcessTransport : public Transport {
 public:
  explicit InProcessTransport(std::shared_ptr<Store> store) : store_(std::move(store)) {}

  std::string round_trip(const std::string& request) override;

  /// A down transport refuses every call, like a dead host.
  void set_down(bool down) { down_ = down; }
  bool down() const { return down_; }
  /// Goes down after `calls` more successful round trips.
  void fail_after(int calls) { fail_after_ = calls; }
  void set_tap(FrameTap tap);
  std::shared_ptr<Store> store() const { return store_; }

 private:
  std::shared_ptr<Store> store_;
  std::atomic<bool> down_{false};
  std::atomic<int> fail_after_{-1};
  std::mutex tap_mu_;
  FrameTap tap_;
};

/// Blocking TCP client; one connection, reopened after failures.
class TcpTransport : public Transport {
 public:
  TcpTransport(std::string host, int port,
               std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~TcpTransport() override;

  std::string round_trip(const std::string& request) override;

 private:
  void connect_locked();
  void close_locked();

  std::string host_;
  int port_;
  std::chrono::milliseconds timeout_;
  std::mutex mu_;
  int fd_ = -1;
};

/// Serves one Store over TCP, one thread per connection.
class TcpServer {
 public:
  TcpServer(std::shared_ptr<Store> store, std::string host, int port);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  /// Binds and starts accepting in the background. Returns the bound port
  /// (useful with port 0).
  int start();
  void stop();
  /// Blocks until stop() is called from another thread or a signal.
  void wait();
  int port() const { return port_; }

 private:
  void accept_loop();
  void serve(int fd);

  std::shared_ptr<Store> store_;
  std::string host_;
  int port_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex workers_mu_;
  std::vector<std::thread> workers_;
  std::vector<int> client_fds_;
};

/// Frame I/O on a connected socket. read_frame returns nullopt on a clean
/// close before the header; anything else malformed throws ProtocolError.
void write_frame(int fd, std::string_view body);
std::optional<std::string> read_frame(int fd);

/// Parses "tcp://host:port" or "host:port".
std::pair<std::string, int> parse_host_port(std::string_view text);

/// Typed requests to one CSP. Sequence numbers increase per client and are
/// checked against each response.
class StoreClient {
 public:
  StoreClient(CspId id, std::shared_ptr<Transport> transport)
      : id_(id), transport_(std::move(transport)) {}

  CspId id() const { return id_; }
  Transport& transport() { return *transport_; }

  /// Raw request; returns the response on status ok. Throws RemoteError on
  /// an error status, UnavailableError when the CSP is unreachable and
  /// ProtocolError on a malformed or mismatched reply.
  nlohmann::json request(const std::string& op, const std::string& table,
                         nlohmann::json payload = nlohmann::json::object());

  void create(const SharedTableSchema& schema, bool replace = false);
  std::size_t insert(const SharedTableSchema& schema, const std::vector<ShareRow>& rows,
                     bool upsert = false);
  /// Rows come back in projection order (all attributes when empty).
  std::vector<ShareRow> select(const SharedTableSchema& schema,
                               const std::vector<std::string>& projection, const Predicate& pred);
  std::vector<AggregateGroup> aggregate(const std::string& table,
                                        const std::vector<std::string>& group_by,
                                        const std::vector<std::string>& sums,
                                        const Predicate& pred);
  std::vector<CorruptCell> verify(const std::string& table);
  struct Snapshot {
    SharedTableSchema schema;
    std::vector<ShareRow> rows;
    std::size_t total = 0;
    std::optional<std::size_t> next;
  };
  Snapshot snapshot(const std::string& table, std::size_t offset);
  /// Table names; throws like request().
  std::vector<std::string> health();

 private:
  CspId id_;
  std::shared_ptr<Transport> transport_;
  std::atomic<std::int64_t> seq_{0};
};

}  // namespace shardhouse
