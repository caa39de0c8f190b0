#pragma once

#include <array>
#include <coroutine>
#include <cstdint>
#include <vector>

#include "hcsim/engine/simulator.hpp"

namespace hcsim::engine {

using Word = std::uint32_t;

struct Message {
  std::vector<Word> words;
  // Control tokens are folded into the fixed per-connection overhead and
  // cost no per-word time.
  bool control = false;
};

/// Synchronous point-to-point channel between two simulated threads.
///
/// A transfer happens when a send on one end meets a receive on the other;
/// both parties then advance to `rendezvous + words * ns_per_word`. There is
/// no buffering and no contention.
class Channel {
 public:
  enum class End { A = 0, B = 1 };

  Channel(Simulator& sim, ThreadRef a, ThreadRef b, double ns_per_word);
  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  /// Transfer time for `words` data words on this channel.
  Duration transfer_cost(std::size_t words) const;
  Duration cost(const Message& m) const;

  void set_endpoint(End e, ThreadRef who) { ends_[index(e)] = who; }
  ThreadRef endpoint(End e) const { return ends_[index(e)]; }

  void close() { closed_ = true; }
  bool closed() const { return closed_; }

  std::uint64_t words_transferred() const { return words_; }
  std::uint64_t messages_transferred() const { return messages_; }

  class SendAwaiter {
   public:
    SendAwaiter(Channel& ch, End from, Message m)
        : ch_(ch), from_(from), msg_(std::move(m)) {}
    bool await_ready();
    void await_suspend(std::coroutine_handle<> h);
    void await_resume() const noexcept {}

   private:
    Channel& ch_;
    End from_;
    Message msg_;
  };

  class RecvAwaiter {
   public:
    RecvAwaiter(Channel& ch, End at) : ch_(ch), at_(at) {}
    bool await_ready();
    void await_suspend(std::coroutine_handle<> h);
    Message await_resume() { return std::move(msg_); }

   private:
    Channel& ch_;
    End at_;
    Message msg_;
  };

  /// Throws ProtocolError if the channel is closed.
  SendAwaiter send(End from, Message m) { return {*this, from, std::move(m)}; }
  RecvAwaiter recv(End at) { return {*this, at}; }

 private:
  struct Lane {
    std::coroutine_handle<> sender;
    Message* outgoing = nullptr;
    std::coroutine_handle<> receiver;
    Message* incoming = nullptr;
  };

  static constexpr std::size_t index(End e) { return static_cast<std::size_t>(e); }
  static constexpr End other(End e) { return e == End::A ? End::B : End::A; }
  // Lane k carries messages sent from end k.
  Lane& lane_from(End e) { return lanes_[index(e)]; }
  void complete(Lane& lane, End from);

  Simulator& sim_;
  std::array<ThreadRef, 2> ends_;
  double ns_per_word_;
  std::array<Lane, 2> lanes_;
  bool closed_ = false;
  std::uint64_t words_ = 0;
  std::uint64_t messages_ = 0;
};

}  // namespace hcsim::engine
