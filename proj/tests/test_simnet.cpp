#include <doctest.h>

#include <sstream>
#include <vector>

#include "stratus/simnet.hpp"
#include "stratus/types.hpp"

using namespace stratus;

namespace {

MicroblockPtr dummy_mb(std::uint32_t payload, std::size_t txs = 1) {
  std::vector<Transaction> v;
  for (std::size_t i = 0; i < txs; ++i) {
    Transaction t;
    t.id = "s" + std::to_string(i);
    t.payload_bytes = payload;
    v.push_back(std::move(t));
  }
  return make_microblock(std::move(v), 0, 0);
}

MessageEnvelope data_env(std::int32_t from, std::int32_t to, std::uint64_t size) {
  MessageEnvelope e;
  e.kind = MsgKind::PabMsg;
  e.from = PeerId::replica_id(from);
  e.to = to;
  e.body = PabMsgBody{dummy_mb(128)};
  e.size_bytes = size;
  e.priority = MsgPriority::Data;
  return e;
}

MessageEnvelope vote_env(std::int32_t from, std::int32_t to) {
  MessageEnvelope e;
  e.kind = MsgKind::CeVote;
  e.from = PeerId::replica_id(from);
  e.to = to;
  e.body = CeVoteBody{};
  e.size_bytes = 144;
  e.priority = MsgPriority::Consensus;
  return e;
}

}  // namespace

TEST_CASE("tiny message on a zero-jitter 100ms link arrives at t+100ms + serialization") {
  LinkModel link;
  link.base_delay = msec(100);
  link.jitter = 0;
  link.bandwidth_bits_per_s = 100e6;
  SimNet net(2, link, 1);

  std::vector<SimTime> arrivals;
  net.attach(1, [&](const MessageEnvelope&) { arrivals.push_back(net.now()); });
  net.attach(0, [](const MessageEnvelope&) {});

  net.send(data_env(0, 1, 100));  // 100 B: 8 us serialization
  net.run(sec(1));
  REQUIRE(arrivals.size() == 1);
  CHECK(arrivals[0] == msec(100) + usec(8));
}

TEST_CASE("a 256 KiB microblock at 100 Mb/s adds ~21 ms of serialization") {
  // Oracle: 256*1024*8 / 100e6 s = 20.97152 ms exactly.
  LinkModel link;
  link.base_delay = 0;
  link.bandwidth_bits_per_s = 100e6;
  SimNet net(2, link, 1);
  net.set_optimizations(false);  // plain FIFO, no token pacing

  SimTime arrival = -1;
  net.attach(1, [&](const MessageEnvelope&) { arrival = net.now(); });
  net.attach(0, [](const MessageEnvelope&) {});
  net.send(data_env(0, 1, 256 * 1024));
  net.run(sec(1));
  CHECK(arrival == 20971520);  // ns
}

TEST_CASE("consensus messages preempt queued microblocks") {
  LinkModel link;
  link.base_delay = msec(10);
  link.bandwidth_bits_per_s = 100e6;
  SimNet net(2, link, 1);

  std::vector<MsgKind> order;
  net.attach(1, [&](const MessageEnvelope& e) { order.push_back(e.kind); });
  net.attach(0, [](const MessageEnvelope&) {});

  for (int i = 0; i < 10; ++i) net.send(data_env(0, 1, 256 * 1024));
  net.send(vote_env(0, 1));  // enqueued last, but consensus priority
  net.run(sec(5));

  REQUIRE(order.size() == 11);
  // The first microblock already occupies the serializer; the vote goes next.
  CHECK(order[0] == MsgKind::PabMsg);
  CHECK(order[1] == MsgKind::CeVote);
}

TEST_CASE("a baseline port without the optimizations keeps plain FIFO order") {
  LinkModel link;
  link.base_delay = msec(10);
  link.bandwidth_bits_per_s = 100e6;
  SimNet net(2, link, 1);
  net.set_optimizations(false);

  std::vector<MsgKind> order;
  net.attach(1, [&](const MessageEnvelope& e) { order.push_back(e.kind); });
  net.attach(0, [](const MessageEnvelope&) {});
  for (int i = 0; i < 3; ++i) net.send(data_env(0, 1, 256 * 1024));
  net.send(vote_env(0, 1));
  net.run(sec(5));
  REQUIRE(order.size() == 4);
  CHECK(order[3] == MsgKind::CeVote);
}

TEST_CASE("fluctuation window draws delays inside the range and reverts after") {
  LinkModel link;
  link.base_delay = msec(50);
  link.jitter = 0;
  link.bandwidth_bits_per_s = 1e12;  // negligible serialization
  SimNet net(2, link, 7);
  net.inject_fluctuation(sec(1), sec(1), msec(100), msec(300));

  std::vector<std::pair<SimTime, SimTime>> sent_arrived;
  net.attach(1, [&](const MessageEnvelope&) {});
  net.attach(0, [](const MessageEnvelope&) {});

  // One message every 400 ms (wider than the max delay, so arrivals keep
  // the send order); measure per-message delay.
  std::vector<SimTime> send_times;
  std::vector<SimTime> arrive_times;
  net.attach(1, [&](const MessageEnvelope&) { arrive_times.push_back(net.now()); });
  for (int i = 0; i < 8; ++i) {
    const SimTime t = i * msec(400);
    net.at(t, [&net, t, &send_times] {
      send_times.push_back(t);
      net.send(data_env(0, 1, 1));
    });
  }
  net.run(sec(5));
  REQUIRE(send_times.size() == arrive_times.size());
  for (std::size_t i = 0; i < send_times.size(); ++i) {
    const Duration d = arrive_times[i] - send_times[i];
    if (send_times[i] >= sec(1) && send_times[i] < sec(2)) {
      CHECK(d >= msec(100));
      CHECK(d <= msec(300));
    } else {
      CHECK(d == msec(50));
    }
  }
}

TEST_CASE("zero-width fluctuation range gives a constant delay") {
  LinkModel link;
  link.base_delay = msec(50);
  link.bandwidth_bits_per_s = 1e12;
  SimNet net(2, link, 7);
  net.inject_fluctuation(0, sec(1), msec(200), msec(200));
  SimTime arrival = -1;
  net.attach(1, [&](const MessageEnvelope&) { arrival = net.now(); });
  net.attach(0, [](const MessageEnvelope&) {});
  net.send(data_env(0, 1, 1));
  net.run(sec(1));
  CHECK(arrival == msec(200));
}

TEST_CASE("fluctuation entirely in the past is rejected") {
  LinkModel link;
  SimNet net(2, link, 7);
  net.run(sec(1));
  CHECK_THROWS_AS(net.inject_fluctuation(msec(500), msec(100), 0, 0), std::invalid_argument);
}

TEST_CASE("identical seeds give identical traces; counts reconcile") {
  auto run_once = [](std::uint64_t seed) {
    LinkModel link;
    link.base_delay = msec(30);
    link.jitter = msec(10);
    link.loss = 0.2;
    SimNet net(3, link, seed);
    std::ostringstream trace;
    net.set_trace(&trace);
    net.attach(0, [](const MessageEnvelope&) {});
    net.attach(1, [](const MessageEnvelope&) {});
    net.attach(2, [](const MessageEnvelope&) {});
    for (int i = 0; i < 200; ++i) {
      net.at(i * msec(5), [&net, i] { net.send(data_env(i % 3, (i + 1) % 3, 100 + i)); });
    }
    net.run(sec(10));
    return std::make_pair(trace.str(), net.counters());
  };
  auto [t1, c1] = run_once(99);
  auto [t2, c2] = run_once(99);
  auto [t3, c3] = run_once(100);
  CHECK(t1 == t2);
  CHECK(t1 != t3);  // different seed, different loss/jitter draws
  CHECK(c1.sent == 200);
  CHECK(c1.sent == c1.delivered + c1.dropped_loss);
}

TEST_CASE("silent nodes have all egress suppressed and accounted") {
  LinkModel link;
  SimNet net(2, link, 1);
  net.set_silent(0, true);
  bool delivered = false;
  net.attach(1, [&](const MessageEnvelope&) { delivered = true; });
  net.attach(0, [](const MessageEnvelope&) {});
  net.send(data_env(0, 1, 100));
  net.run(sec(1));
  CHECK_FALSE(delivered);
  CHECK(net.counters().suppressed_silent == 1);
  CHECK(net.counters().sent == 0);
}

TEST_CASE("event budget guard throws instead of spinning") {
  LinkModel link;
  SimNet net(2, link, 1);
  net.attach(0, [](const MessageEnvelope&) {});
  net.attach(1, [](const MessageEnvelope&) {});
  std::function<void()> loop = [&net, &loop] { net.after(1, loop); };
  net.after(1, loop);
  CHECK_THROWS_AS(net.run(sec(1), 1000), SimBudgetExceeded);
}
