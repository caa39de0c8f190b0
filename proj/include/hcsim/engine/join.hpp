#pragma once

#include <coroutine>
#include <cstddef>
#include <exception>

#include "hcsim/engine/simulator.hpp"

namespace hcsim::engine {

/// Fork-join barrier: the owner waits until `count` children have arrived.
/// The first child failure is rethrown to the owner after the join.
class JoinCounter {
 public:
  JoinCounter(Simulator& sim, ThreadRef owner, std::size_t count)
      : sim_(sim), owner_(owner), remaining_(count) {}

  void arrive(std::exception_ptr err) {
    if (err && !error_) error_ = err;
    if (--remaining_ == 0 && waiter_) {
      sim_.resume_at(sim_.now(), owner_, "join", waiter_);
    }
  }

  std::size_t remaining() const { return remaining_; }

  class Awaiter {
   public:
    explicit Awaiter(JoinCounter& j) : j_(j) {}
    bool await_ready() const noexcept { return j_.remaining_ == 0; }
    void await_suspend(std::coroutine_handle<> h) noexcept { j_.waiter_ = h; }
    void await_resume() const {
      if (j_.error_) std::rethrow_exception(j_.error_);
    }

   private:
    JoinCounter& j_;
  };

  Awaiter wait() { return Awaiter(*this); }

 private:
  Simulator& sim_;
  ThreadRef owner_;
  std::size_t remaining_;
  std::coroutine_handle<> waiter_;
  std::exception_ptr error_;
};

}  // namespace hcsim::engine
