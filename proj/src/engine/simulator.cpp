#include "hcsim/engine/simulator.hpp"

#include <algorithm>

#include "hcsim/error.hpp"

namespace hcsim::engine {

namespace detail {

void RootPromise::FinalAwaiter::await_suspend(
    std::coroutine_handle<RootPromise> h) noexcept {
  h.promise().sim->retire(h);
}

namespace {

RootProcess root_body(Task<void> task, Simulator::Completion done,
                      std::vector<std::exception_ptr>* failures) {
  std::exception_ptr err;
  try {
    co_await task;
  } catch (...) {
    err = std::current_exception();
  }
  if (done) {
    done(err);
  } else if (err) {
    failures->push_back(err);
  }
}

}  // namespace
}  // namespace detail

Simulator::~Simulator() {
  queue_.clear();
  while (!roots_.empty()) {
    auto h = roots_.front();
    roots_.pop_front();
    h.destroy();
  }
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_thread(ThreadRef t) {
  return t.thread < 0 ? std::string("k") : std::to_string(t.thread);
}

bool Simulator::later(const Event& a, const Event& b) {
  if (a.time != b.time) return a.time > b.time;
  return a.seq > b.seq;
}

void Simulator::schedule(VirtualTime at, ThreadRef target, std::string kind,
                         std::function<void()> action) {
  if (at < now_) {
    throw SimulationError("event '" + kind + "' scheduled at " +
                          std::to_string(at.ns()) + "ns before clock " +
                          std::to_string(now_.ns()) + "ns");
  }
  queue_.push_back(
      Event{at, next_seq_++, target, std::move(kind), std::move(action)});
  std::push_heap(queue_.begin(), queue_.end(), later);
}

void Simulator::resume_at(VirtualTime at, ThreadRef target, std::string kind,
                          std::coroutine_handle<> h) {
  schedule(at, target, std::move(kind), [h] { h.resume(); });
}

void Simulator::spawn(ThreadRef where, Task<void> task, Completion done) {
  auto proc = detail::root_body(std::move(task), std::move(done), &failures_);
  auto h = proc.handle;
  h.promise().sim = this;
  roots_.push_front(h);
  h.promise().self = roots_.begin();
  resume_at(now_, where, "start", h);
}

void Simulator::retire(std::coroutine_handle<detail::RootPromise> h) {
  roots_.erase(h.promise().self);
  h.destroy();
}

void Simulator::record(const Event& e) {
  std::string line = std::to_string(e.time.ns()) + "," +
                     std::to_string(e.target.core.label) + "," +
                     format_thread(e.target) + "," + e.kind;
  trace_hash_ = fnv1a(line, trace_hash_);
  trace_hash_ = fnv1a("\n", trace_hash_);
  if (keep_trace_) trace_.push_back(std::move(line));
}

bool Simulator::step() {
  if (queue_.empty()) return false;
  std::pop_heap(queue_.begin(), queue_.end(), later);
  Event e = std::move(queue_.back());
  queue_.pop_back();
  now_ = e.time;
  ++dispatched_;
  record(e);
  e.action();
  if (!failures_.empty()) {
    auto err = failures_.front();
    failures_.clear();
    std::rethrow_exception(err);
  }
  return true;
}

std::size_t Simulator::run() {
  std::size_t n = 0;
  while (step()) ++n;
  if (!roots_.empty()) {
    throw SimulationError("deadlock: " + std::to_string(roots_.size()) +
                          " process(es) blocked with no pending events");
  }
  return n;
}

}  // namespace hcsim::engine
