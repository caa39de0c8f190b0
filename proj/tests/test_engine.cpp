#include <doctest.h>

#include <memory>
#include <string>
#include <vector>

#include "hcsim/engine/channel.hpp"
#include "hcsim/engine/core.hpp"
#include "hcsim/engine/join.hpp"
#include "hcsim/engine/machine.hpp"
#include "hcsim/engine/simulator.hpp"
#include "hcsim/error.hpp"

using namespace hcsim;
using namespace hcsim::engine;

namespace {

ThreadRef at(std::uint32_t core, int thread = 0) { return ThreadRef{NodeId{core}, thread}; }

Task<void> sleep_then_log(Simulator& sim, ThreadRef who, std::uint64_t ticks,
                          std::vector<std::string>& log, std::string tag) {
  co_await sim.delay(who, Duration{ticks});
  log.push_back(tag + "@" + std::to_string(sim.now().ns()));
}

Task<int> answer(Simulator& sim, ThreadRef who) {
  co_await sim.delay(who, Duration{3});
  co_return 42;
}

Task<void> await_answer(Simulator& sim, ThreadRef who, int& out) {
  out = co_await answer(sim, who);
}

Task<void> thrower(Simulator& sim, ThreadRef who) {
  co_await sim.delay(who, Duration{1});
  throw DomainError("boom");
}

Task<void> catch_inner(Simulator& sim, ThreadRef who, bool& caught) {
  try {
    co_await thrower(sim, who);
  } catch (const DomainError&) {
    caught = true;
  }
}

Task<void> sender(Channel& ch, std::size_t words, VirtualTime& done, Simulator& sim) {
  Message m{std::vector<Word>(words, 7), false};
  co_await ch.send(Channel::End::A, std::move(m));
  done = sim.now();
}

Task<void> receiver(Channel& ch, std::vector<Word>& got, VirtualTime& done,
                    Simulator& sim, std::uint64_t late_ticks) {
  if (late_ticks) co_await sim.delay(ch.endpoint(Channel::End::B), Duration{late_ticks});
  auto m = co_await ch.recv(Channel::End::B);
  got = m.words;
  done = sim.now();
}

Task<void> hold_thread(Simulator& sim, Core& core, std::uint64_t ticks,
                       std::vector<int>& slots, std::vector<std::uint64_t>& granted) {
  const int slot = co_await core.acquire_thread(sim);
  slots.push_back(slot);
  granted.push_back(sim.now().ticks);
  co_await sim.delay(ThreadRef{core.id(), slot}, Duration{ticks});
  core.release_thread(sim, slot);
}

Task<void> recursive(Simulator& sim, ThreadRef who, int depth, int& leaves) {
  if (depth == 0) {
    ++leaves;
    co_return;
  }
  co_await recursive(sim, who, depth - 1, leaves);
}

Task<void> blocked_forever(Channel& ch) { co_await ch.recv(Channel::End::B); }

Task<void> child(Simulator& sim, ThreadRef who, std::uint64_t ticks) {
  co_await sim.delay(who, Duration{ticks});
}

Task<void> fork_join(Simulator& sim, ThreadRef who, VirtualTime& done) {
  JoinCounter join(sim, who, 2);
  auto arrive = [&join](std::exception_ptr e) { join.arrive(e); };
  sim.spawn(at(0, 1), child(sim, at(0, 1), 100), arrive);
  sim.spawn(at(0, 2), child(sim, at(0, 2), 250), arrive);
  co_await join.wait();
  done = sim.now();
}

}  // namespace

TEST_CASE("virtual time and duration") {
  CHECK(VirtualTime{5}.ns() == 50);
  CHECK(Duration::from_ns(150.0).ticks == 15);
  CHECK(Duration::from_ns(14.0).ticks == 1);
  CHECK(Duration::from_ns(-3.0).ticks == 0);
  CHECK((VirtualTime{10} + Duration{5}).ticks == 15);
}

TEST_CASE("equal-time events dispatch in insertion order") {
  Simulator sim;
  std::vector<int> order;
  for (int i = 0; i < 5; ++i) {
    sim.schedule(VirtualTime{7}, at(0), "e", [&order, i] { order.push_back(i); });
  }
  sim.schedule(VirtualTime{3}, at(0), "e", [&order] { order.push_back(-1); });
  sim.run();
  CHECK(order == std::vector<int>{-1, 0, 1, 2, 3, 4});
  CHECK(sim.now().ticks == 7);
}

TEST_CASE("clock follows the only event; empty run leaves clock at zero") {
  Simulator empty;
  CHECK(empty.run() == 0);
  CHECK(empty.now().ticks == 0);

  Simulator sim;
  sim.schedule(VirtualTime{5}, at(0), "e", [] {});
  sim.run();
  CHECK(sim.now().ticks == 5);
}

TEST_CASE("scheduling in the past is trapped") {
  Simulator sim;
  sim.schedule(VirtualTime{10}, at(0), "e", [] {});
  sim.run();
  CHECK_THROWS_AS(sim.schedule(VirtualTime{9}, at(0), "e", [] {}), SimulationError);
}

TEST_CASE("coroutine processes interleave by virtual time") {
  Simulator sim;
  std::vector<std::string> log;
  sim.spawn(at(0), sleep_then_log(sim, at(0), 20, log, "a"));
  sim.spawn(at(1), sleep_then_log(sim, at(1), 10, log, "b"));
  sim.run();
  CHECK(log == std::vector<std::string>{"b@100", "a@200"});
  CHECK(sim.live_processes() == 0);
}

TEST_CASE("tasks return values and propagate exceptions") {
  Simulator sim;
  int v = 0;
  bool caught = false;
  sim.spawn(at(0), await_answer(sim, at(0), v));
  sim.spawn(at(1), catch_inner(sim, at(1), caught));
  sim.run();
  CHECK(v == 42);
  CHECK(caught);

  Simulator failing;
  failing.spawn(at(0), thrower(failing, at(0)));
  CHECK_THROWS_AS(failing.run(), DomainError);

  Simulator observed;
  std::exception_ptr seen;
  observed.spawn(at(0), thrower(observed, at(0)), [&](std::exception_ptr e) { seen = e; });
  CHECK_NOTHROW(observed.run());
  CHECK(seen);
}

TEST_CASE("deep recursion does not exhaust the native stack") {
  Simulator sim;
  int leaves = 0;
  sim.spawn(at(0), recursive(sim, at(0), 200000, leaves));
  sim.run();
  CHECK(leaves == 1);
}

TEST_CASE("blocked processes are reported as a deadlock") {
  Simulator sim;
  Channel ch(sim, at(0), at(1), 150.0);
  sim.spawn(at(1), blocked_forever(ch));
  CHECK_THROWS_AS(sim.run(), SimulationError);
}

TEST_CASE("channel transfer cost") {
  for (auto [mult, words, expect_ns] :
       {std::tuple{1.0, std::size_t{0}, std::uint64_t{0}},
        std::tuple{1.0, std::size_t{100}, std::uint64_t{15000}},
        std::tuple{0.8, std::size_t{100}, std::uint64_t{12000}}}) {
    Simulator sim;
    Channel ch(sim, at(0), at(1), 150.0 * mult);
    VirtualTime sent, received;
    std::vector<Word> got;
    sim.spawn(at(0), sender(ch, words, sent, sim));
    sim.spawn(at(1), receiver(ch, got, received, sim, 0));
    sim.run();
    CHECK(sent.ns() == expect_ns);
    CHECK(received.ns() == expect_ns);
    CHECK(got.size() == words);
    CHECK(ch.words_transferred() == words);
  }
}

TEST_CASE("channel rendezvous waits for the later party") {
  Simulator sim;
  Channel ch(sim, at(0), at(1), 150.0);
  VirtualTime sent, received;
  std::vector<Word> got;
  sim.spawn(at(0), sender(ch, 10, sent, sim));
  sim.spawn(at(1), receiver(ch, got, received, sim, 100));
  sim.run();
  CHECK(sent.ns() == 1000 + 1500);
  CHECK(received == sent);
}

TEST_CASE("control messages are free and closed channels reject traffic") {
  Simulator sim;
  Channel ch(sim, at(0), at(1), 150.0);
  CHECK(ch.cost(Message{{1, 2, 3}, true}).ticks == 0);
  CHECK(ch.cost(Message{{1, 2, 3}, false}).ns() == 450);
  ch.close();
  VirtualTime sent;
  sim.spawn(at(0), sender(ch, 1, sent, sim));
  CHECK_THROWS_AS(sim.run(), ProtocolError);
}

TEST_CASE("thread allocation: immediate grant, FIFO queue, slot reuse") {
  Simulator sim;
  Core core(NodeId{0});
  std::vector<int> slots;
  std::vector<std::uint64_t> granted;
  for (int i = 0; i < 9; ++i) sim.spawn(at(0, -1), hold_thread(sim, core, 100 + i, slots, granted));
  sim.run();
  REQUIRE(slots.size() == 9);
  for (int i = 0; i < 8; ++i) CHECK(granted[i] == 0);
  CHECK(granted[8] == 100);
  CHECK(slots[8] == slots[0]);
  CHECK(core.peak_threads() == 8);
  CHECK(core.active_threads() == 0);
  CHECK(core.thread_grants() == core.thread_releases());
}

TEST_CASE("waiting requests are served in arrival order") {
  Simulator sim;
  Core core(NodeId{0}, CoreConfig{65536, 1, 16});
  std::vector<int> slots;
  std::vector<std::uint64_t> granted;
  for (int i = 0; i < 4; ++i) sim.spawn(at(0, -1), hold_thread(sim, core, 10, slots, granted));
  sim.run();
  CHECK(granted == std::vector<std::uint64_t>{0, 10, 20, 30});
}

TEST_CASE("memory accounting") {
  Core core(NodeId{0});
  {
    auto zero = core.alloc_mem(0);
    CHECK(core.mem_used() == 0);
    auto b = core.alloc_mem(1000);
    CHECK(core.mem_used() == 1000);
  }
  CHECK(core.mem_used() == 0);
  CHECK_THROWS_AS(core.alloc_mem(65537), OutOfMemory);
  auto all = core.alloc_mem(65536);
  CHECK_THROWS_AS(core.alloc_mem(1), OutOfMemory);
  all.release();
  CHECK(core.mem_used() == 0);
  CHECK(core.mem_peak() == 65536);
}

TEST_CASE("jump table installs stack and restore") {
  Core core(NodeId{0});
  CHECK(core.jump_table_size() == 16);
  CHECK(core.resolve(3) == nullptr);
  auto first = std::make_shared<const std::vector<std::uint8_t>>(std::vector<std::uint8_t>{1});
  auto second = std::make_shared<const std::vector<std::uint8_t>>(std::vector<std::uint8_t>{2});
  auto a = core.install(3, first);
  auto b = core.install(3, second);
  CHECK((*core.resolve(3))[0] == 2);
  core.uninstall(3, b);
  CHECK((*core.resolve(3))[0] == 1);
  core.uninstall(3, a);
  CHECK(core.resolve(3) == nullptr);
  CHECK_THROWS_AS(core.install(16, first), DomainError);
}

TEST_CASE("join counter resumes the owner after the last child") {
  Simulator sim;
  VirtualTime done;
  sim.spawn(at(0, 0), fork_join(sim, at(0, 0), done));
  sim.run();
  CHECK(done.ticks == 250);
}

TEST_CASE("traces are stable and hashed") {
  auto run_once = [] {
    Simulator sim;
    sim.keep_trace(true);
    std::vector<std::string> log;
    sim.spawn(at(0), sleep_then_log(sim, at(0), 20, log, "a"));
    sim.spawn(at(3, 2), sleep_then_log(sim, at(3, 2), 20, log, "b"));
    sim.run();
    return std::pair{sim.trace_lines(), sim.trace_hash()};
  };
  auto [lines, hash] = run_once();
  auto [lines2, hash2] = run_once();
  CHECK(lines == lines2);
  CHECK(hash == hash2);
  REQUIRE_FALSE(lines.empty());
  CHECK(lines.back() == "200,3,2,compute");
  CHECK(format_thread(ThreadRef{NodeId{4}, 1}) == "1");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& l : lines) h = fnv1a("\n", fnv1a(l, h));
  CHECK(h == hash);
  CHECK(format_thread(ThreadRef{NodeId{4}, -1}) == "k");
}

TEST_CASE("machine builds one core per node") {
  Machine m(Hypercube(3));
  CHECK(m.core_count() == 8);
  CHECK(m.core(NodeId{7}).id().label == 7);
  CHECK_THROWS_AS(m.core(NodeId{8}), DomainError);
}
