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

#include <gtest/gtest.h>
#include <sys/socket.h>
#include <unistd.h>

#include "shardhouse/errors.h"

namespace shardhouse {
namespace {

SharedTableSchema kv_schema() {
  SharedTableSchema s;
  s.name = "kv";
  s.p2 = 67;
  s.primary_key = {"k"};
  s.columns = {{"k", ColumnRole::kKey, false, 0, ""}, {"v", ColumnRole::kShared, false, 2, "v_sig"}};
  return s;
}

ShareRow kv(std::int64_t k, std::int64_t a, std::int64_t b) {
  ShareRow r;
  r.cells = {k, SharedCell{{BigInt(a), BigInt(b)}, {a % 67, b % 67}}};
  return r;
}

void exercise(StoreClient& c) {
  c.create(kv_schema());
  EXPECT_EQ(c.insert(kv_schema(), {kv(1, 100, 200), kv(2, 300, 400)}), 2u);
  const auto rows = c.select(kv_schema(), {"v"}, {});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(std::get<SharedCell>(rows[1].cells[0]).shares[1], 400);
  const auto groups = c.aggregate("kv", {}, {"v"}, {});
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].sums[0].sums[0], 400);
  EXPECT_EQ(c.health(), std::vector<std::string>{"kv"});
  const auto snap = c.snapshot("kv", 0);
  EXPECT_EQ(snap.schema, kv_schema());
  EXPECT_EQ(snap.total, 2u);
  EXPECT_TRUE(c.verify("kv").empty());
  try {
    c.create(kv_schema());
    FAIL();
  } catch (const RemoteError& e) {
    EXPECT_EQ(e.code(), "duplicate");
  }
}

TEST(TransportTest, InProcess) {
  auto t = std::make_shared<InProcessTransport>(std::make_shared<Store>());
  StoreClient c(1, t);
  exercise(c);
}

TEST(TransportTest, OverTcp) {
  auto store = std::make_shared<Store>();
  TcpServer server(store, "127.0.0.1", 0);
  const int port = server.start();
  ASSERT_GT(port, 0);
  StoreClient c(1, std::make_shared<TcpTransport>("127.0.0.1", port));
  exercise(c);
  // A second client shares the same store.
  StoreClient d(2, std::make_shared<TcpTransport>("127.0.0.1", port));
  EXPECT_EQ(d.select(kv_schema(), {}, {}).size(), 2u);
  server.stop();
  EXPECT_THROW(c.health(), UnavailableError);
}

TEST(TransportTest, UnreachableIsUnavailable) {
  // Bind then close to get a port with nothing listening.
  auto store = std::make_shared<Store>();
  int port;
  {
    TcpServer s(store, "127.0.0.1", 0);
    port = s.start();
    s.stop();
  }
  StoreClient c(1, std::make_shared<TcpTransport>("127.0.0.1", port, std::chrono::milliseconds(500)));
  EXPECT_THROW(c.health(), UnavailableError);
}

TEST(TransportTest, DownAndFailAfter) {
  auto t = std::make_shared<InProcessTransport>(std::make_shared<Store>());
  StoreClient c(1, t);
  t->set_down(true);
  EXPECT_THROW(c.health(), UnavailableError);
  t->set_down(false);
  t->fail_after(2);
  EXPECT_NO_THROW(c.health());
  EXPECT_NO_THROW(c.health());
  EXPECT_THROW(c.health(), UnavailableError);
  EXPECT_TRUE(t->down());
}

TEST(TransportTest, TapSeesBothDirections) {
  auto t = std::make_shared<InProcessTransport>(std::make_shared<Store>());
  std::vector<std::string> dirs;
  t->set_tap([&](std::string_view d, std::string_view body) {
    dirs.emplace_back(d);
    EXPECT_FALSE(body.empty());
  });
  StoreClient c(1, t);
  c.health();
  EXPECT_EQ(dirs, (std::vector<std::string>{"send", "recv"}));
}

TEST(FrameTest, RoundTripAndErrors) {
  int fds[2];
  ASSERT_EQ(socketpair(AF_UNIX, SOCK_STREAM, 0, fds), 0);
  write_frame(fds[0], R"({"op":"HEALTH"})");
  EXPECT_EQ(read_frame(fds[1]).value(), R"({"op":"HEALTH"})");

  const unsigned char huge[4] = {0xFF, 0xFF, 0xFF, 0xFF};
  ASSERT_EQ(write(fds[0], huge, 4), 4);
  EXPECT_THROW(read_frame(fds[1]), ProtocolError);

  const unsigned char partial[6] = {0, 0, 0, 9, '{', '}'};
  ASSERT_EQ(write(fds[0], partial, 6), 6);
  close(fds[0]);
  EXPECT_THROW(read_frame(fds[1]), ProtocolError);
  close(fds[1]);

  ASSERT_EQ(socketpair(AF_UNIX, SOCK_STREAM, 0, fds), 0);
  close(fds[0]);
  EXPECT_FALSE(read_frame(fds[1]).has_value());
  close(fds[1]);
}

TEST(FrameTest, HostPort) {
  EXPECT_EQ(parse_host_port("tcp://10.0.0.2:7000"), std::make_pair(std::string("10.0.0.2"), 7000));
  EXPECT_EQ(parse_host_port("localhost:1"), std::make_pair(std::string("localhost"), 1));
  EXPECT_ANY_THROW(parse_host_port("nohost"));
  EXPECT_ANY_THROW(parse_host_port("h:99999"));
}

// A transport that answers with a wrong sequence number.
class EchoTransport : public Transport {
 public:
  std::string round_trip(const std::string&) override {
    return R"({"seq": 12345, "status": "ok", "rows": []})";
  }
};

TEST(StoreClientTest, RejectsMismatchedSeq) {
  StoreClient c(1, std::make_shared<EchoTransport>());
  EXPECT_THROW(c.health(), ProtocolError);
}

}  // namespace
}  // namespace shardhouse
