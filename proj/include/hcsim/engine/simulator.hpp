#pragma once

#include <coroutine>
#include <cstdint>
#include <exception>
#include <functional>
#include <list>
#include <string>
#include <vector>

#include "hcsim/engine/task.hpp"
#include "hcsim/engine/time.hpp"
#include "hcsim/topology.hpp"

namespace hcsim::engine {

/// A simulated hardware thread: (core, thread slot). Slot -1 denotes the
/// core's process-creation kernel before a thread has been allocated.
struct ThreadRef {
  NodeId core;
  int thread = -1;

  friend constexpr bool operator==(ThreadRef, ThreadRef) = default;
};

struct Event {
  VirtualTime time;
  std::uint64_t seq = 0;
  ThreadRef target;
  std::string kind;
  std::function<void()> action;
};

class Simulator;

namespace detail {

struct RootPromise;

struct RootProcess {
  using promise_type = RootPromise;
  std::coroutine_handle<RootPromise> handle;
};

struct RootPromise {
  Simulator* sim = nullptr;
  std::list<std::coroutine_handle<RootPromise>>::iterator self;

  struct FinalAwaiter {
    bool await_ready() noexcept { return false; }
    void await_suspend(std::coroutine_handle<RootPromise> h) noexcept;
    void await_resume() noexcept {}
  };

  RootProcess get_return_object() {
    return {std::coroutine_handle<RootPromise>::from_promise(*this)};
  }
  std::suspend_always initial_suspend() noexcept { return {}; }
  FinalAwaiter final_suspend() noexcept { return {}; }
  void return_void() {}
  void unhandled_exception() noexcept { std::terminate(); }
};

}  // namespace detail

/// Single-threaded discrete-event scheduler over a 10ns-tick virtual clock.
///
/// Events dispatch in (time, seq) order, so ties resolve by insertion order
/// and every run of the same model produces the same trace. Simulated
/// threads are coroutines; they suspend on awaitables (delays, channel
/// rendezvous, thread allocation, joins) that schedule their resumption.
class Simulator {
 public:
  using Completion = std::function<void(std::exception_ptr)>;

  Simulator() = default;
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  VirtualTime now() const { return now_; }

  /// Throws SimulationError when `at` lies in the past.
  void schedule(VirtualTime at, ThreadRef target, std::string kind,
                std::function<void()> action);
  void resume_at(VirtualTime at, ThreadRef target, std::string kind,
                 std::coroutine_handle<> h);

  /// Starts `task` as an independent process at the current time. `done`
  /// receives the task's exception (or null). Without `done`, a failing
  /// process aborts run().
  void spawn(ThreadRef where, Task<void> task, Completion done = {});

  class DelayAwaiter {
   public:
    DelayAwaiter(Simulator& sim, ThreadRef who, Duration d, std::string kind)
        : sim_(sim), who_(who), d_(d), kind_(std::move(kind)) {}
    bool await_ready() const noexcept { return false; }
    void await_suspend(std::coroutine_handle<> h) {
      sim_.resume_at(sim_.now() + d_, who_, std::move(kind_), h);
    }
    void await_resume() const noexcept {}

   private:
    Simulator& sim_;
    ThreadRef who_;
    Duration d_;
    std::string kind_;
  };

  DelayAwaiter delay(ThreadRef who, Duration d, std::string kind = "compute") {
    return DelayAwaiter(*this, who, d, std::move(kind));
  }

  /// Dispatches one event. Returns false when the queue is empty.
  bool step();

  /// Runs to quiescence. Throws the first unobserved process failure, or
  /// SimulationError if processes remain blocked with nothing scheduled.
  std::size_t run();

  std::size_t pending_events() const { return queue_.size(); }
  std::size_t live_processes() const { return roots_.size(); }
  std::uint64_t events_dispatched() const { return dispatched_; }

  /// When enabled, every dispatched event is kept as a
  /// `time_ns,core,thread,kind` line. The hash is always maintained.
  void keep_trace(bool on) { keep_trace_ = on; }
  const std::vector<std::string>& trace_lines() const { return trace_; }
  std::uint64_t trace_hash() const { return trace_hash_; }

 private:
  friend struct detail::RootPromise;

  static bool later(const Event& a, const Event& b);
  void retire(std::coroutine_handle<detail::RootPromise> h);
  void record(const Event& e);

  VirtualTime now_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t dispatched_ = 0;
  std::vector<Event> queue_;
  std::list<std::coroutine_handle<detail::RootPromise>> roots_;
  std::vector<std::exception_ptr> failures_;
  bool keep_trace_ = false;
  std::vector<std::string> trace_;
  std::uint64_t trace_hash_ = 0xcbf29ce484222325ULL;
};

std::string format_thread(ThreadRef t);

/// 64-bit FNV-1a, used for trace fingerprints.
std::uint64_t fnv1a(std::string_view data,
                    std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace hcsim::engine
