#include "hcsim/engine/channel.hpp"

#include "hcsim/error.hpp"

namespace hcsim::engine {

Channel::Channel(Simulator& sim, ThreadRef a, ThreadRef b, double ns_per_word)
    : sim_(sim), ends_{a, b}, ns_per_word_(ns_per_word) {
  if (ns_per_word_ < 0.0) throw ConfigError("negative per-word channel cost");
}

Duration Channel::transfer_cost(std::size_t words) const {
  return Duration::from_ns(static_cast<double>(words) * ns_per_word_);
}

Duration Channel::cost(const Message& m) const {
  return m.control ? Duration{} : transfer_cost(m.words.size());
}

void Channel::complete(Lane& lane, End from) {
  Message& msg = *lane.outgoing;
  const Duration d = cost(msg);
  if (!msg.control) words_ += msg.words.size();
  ++messages_;
  *lane.incoming = std::move(msg);
  const VirtualTime done = sim_.now() + d;
  sim_.resume_at(done, ends_[index(from)], "send", lane.sender);
  sim_.resume_at(done, ends_[index(other(from))], "recv", lane.receiver);
  lane = Lane{};
}

bool Channel::SendAwaiter::await_ready() {
  if (ch_.closed_) throw ProtocolError("send on closed channel");
  return false;
}

void Channel::SendAwaiter::await_suspend(std::coroutine_handle<> h) {
  Lane& lane = ch_.lane_from(from_);
  if (lane.sender) throw ProtocolError("concurrent sends on one channel end");
  lane.sender = h;
  lane.outgoing = &msg_;
  if (lane.receiver) ch_.complete(lane, from_);
}

bool Channel::RecvAwaiter::await_ready() {
  if (ch_.closed_) throw ProtocolError("receive on closed channel");
  return false;
}

void Channel::RecvAwaiter::await_suspend(std::coroutine_handle<> h) {
  const End from = other(at_);
  Lane& lane = ch_.lane_from(from);
  if (lane.receiver) throw ProtocolError("concurrent receives on one channel end");
  lane.receiver = h;
  lane.incoming = &msg_;
  if (lane.sender) ch_.complete(lane, from);
}

}  // namespace hcsim::engine
