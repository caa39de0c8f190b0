#include "hcsim/protocol.hpp"

#include <optional>

#include "hcsim/error.hpp"

namespace hcsim::protocol {

using engine::Channel;
using engine::Message;
using engine::ThreadRef;

std::string to_string(Phase p) {
  switch (p) {
    case Phase::Init:
      return "init";
    case Phase::TransmitClosure:
      return "transmit";
    case Phase::ExecuteWait:
      return "execute";
    case Phase::ResultsTeardown:
      return "teardown";
  }
  return "?";
}

std::vector<std::string> ProtocolLog::lines() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) {
    out.push_back(std::to_string(e.time_ns) + "," +
                  std::to_string(e.guest.label) + "," +
                  std::to_string(e.host.label) + "," + to_string(e.phase));
  }
  return out;
}

namespace {

Message control(Token t) { return Message{{static_cast<Word>(t)}, true}; }

Message control(Token t, Word arg) {
  return Message{{static_cast<Word>(t), arg}, true};
}

bool is_token(const Message& m, Token t) {
  return m.control && !m.words.empty() && m.words[0] == static_cast<Word>(t);
}

std::string describe(FailReason r) {
  switch (r) {
    case FailReason::OutOfMemory:
      return "host out of memory";
    case FailReason::MalformedClosure:
      return "host rejected malformed closure";
    case FailReason::ExecutionFailed:
      return "remote procedure failed";
  }
  return "unknown failure";
}

}  // namespace

engine::Task<SpawnStats> spawn_remote(engine::Machine& machine, SpawnRequest req,
                                      Executor& executor, ProtocolLog* log) {
  auto& sim = machine.sim();
  if (req.host == req.guest.core) {
    throw DomainError("remote spawn onto the guest's own core " +
                      std::to_string(req.host.label));
  }
  machine.core(req.host);  // range check
  const auto words = closure::encode(req.closure);
  const auto sizes = closure::payload_sizes(req.closure);
  std::size_t expected_homes = 0;
  for (const auto& a : req.closure.args) expected_homes += a.written_back();
  if (req.homes.size() != expected_homes) {
    throw ProtocolError("spawn has " + std::to_string(req.homes.size()) +
                        " result homes for " + std::to_string(expected_homes) +
                        " written-back arguments");
  }

  auto note = [&](Phase p) {
    if (log) log->add({sim.now().ns(), req.guest.core, req.host, p});
  };

  SpawnStats stats;
  stats.start = sim.now();
  stats.sizes = sizes;

  auto ch = std::make_shared<Channel>(sim, req.guest, ThreadRef{req.host, -1},
                                      req.cost.word_ns * req.cost.multiplier);
  sim.spawn(ThreadRef{req.host, -1},
            host_serve(machine, ch, req.host, req.cost, executor));

  // Phase 1: connection initialisation.
  note(Phase::Init);
  Message connect = control(Token::Connect, req.guest.core.label);
  co_await ch->send(Channel::End::A, std::move(connect));
  Message ack = co_await ch->recv(Channel::End::A);
  if (!is_token(ack, Token::Ack)) throw ProtocolError("expected ACK from host");
  stats.host_thread = ch->endpoint(Channel::End::B).thread;

  // Phase 2: header, then each argument, then each procedure.
  note(Phase::TransmitClosure);
  for (const auto& seg : closure::segments(req.closure)) {
    Message part;
    part.words.assign(words.begin() + static_cast<std::ptrdiff_t>(seg.offset),
                      words.begin() +
                          static_cast<std::ptrdiff_t>(seg.offset + seg.length));
    part.control = seg.kind == closure::Segment::Kind::Header;
    co_await ch->send(Channel::End::A, std::move(part));
  }

  // Phase 3: wait for the host to report completion.
  note(Phase::ExecuteWait);
  Message status = co_await ch->recv(Channel::End::A);
  if (is_token(status, Token::Failed)) {
    ch->close();
    auto reason = status.words.size() > 1
                      ? static_cast<FailReason>(status.words[1])
                      : FailReason::ExecutionFailed;
    throw SpawnFailed("spawn from core " + std::to_string(req.guest.core.label) +
                      " on core " + std::to_string(req.host.label) + ": " +
                      describe(reason));
  }
  if (!is_token(status, Token::Completed)) {
    throw ProtocolError("expected COMPLETED from host");
  }

  // Phase 4: results back to their original locations, then teardown.
  note(Phase::ResultsTeardown);
  for (auto& home : req.homes) {
    Message result = co_await ch->recv(Channel::End::A);
    if (result.control || result.words.size() != home.size()) {
      throw ProtocolError("result size mismatch");
    }
    home.assign(result.words);
  }
  Message bye = co_await ch->recv(Channel::End::A);
  if (!is_token(bye, Token::Close)) throw ProtocolError("expected CLOSE from host");
  ch->close();
  stats.end = sim.now();
  co_return stats;
}

engine::Task<void> host_serve(engine::Machine& machine,
                              std::shared_ptr<Channel> ch, NodeId host,
                              LinkCost cost, Executor& executor) {
  auto& sim = machine.sim();
  auto& core = machine.core(host);

  Message hello = co_await ch->recv(Channel::End::B);
  if (!is_token(hello, Token::Connect) || hello.words.size() != 2) {
    throw ProtocolError("host expected a connection token and guest identity");
  }

  const int slot = co_await core.acquire_thread(sim);
  const ThreadRef self{host, slot};
  ch->set_endpoint(Channel::End::B, self);
  co_await sim.delay(self,
                     engine::Duration::from_ns(cost.fixed_overhead_ns *
                                               cost.multiplier),
                     "init");
  Message ack = control(Token::Ack);
  co_await ch->send(Channel::End::B, std::move(ack));

  Message header = co_await ch->recv(Channel::End::B);
  std::vector<Word> words = header.words;
  const std::size_t parts =
      header.words.size() == 2 ? std::size_t{header.words[0]} + header.words[1] : 0;
  for (std::size_t i = 0; i < parts; ++i) {
    Message part = co_await ch->recv(Channel::End::B);
    words.insert(words.end(), part.words.begin(), part.words.end());
  }

  std::optional<FailReason> failure;
  closure::Closure received;
  std::vector<engine::MemBlock> images;
  std::vector<std::pair<engine::ProcIndex, engine::Core::InstallId>> installed;
  std::vector<runtime::Value> args;

  try {
    received = closure::decode(words);
  } catch (const MalformedClosure&) {
    failure = FailReason::MalformedClosure;
  }

  if (!failure) {
    try {
      for (const auto& a : received.args) {
        switch (a.tag) {
          case closure::ArgTag::ConstVal:
            args.emplace_back(a.values.front());
            break;
          case closure::ArgTag::SingleVar:
            args.emplace_back(
                runtime::VarRef{runtime::ArraySlice::allocate(core, a.values)});
            break;
          case closure::ArgTag::ArrayRef:
            args.emplace_back(runtime::ArraySlice::allocate(core, a.values));
            break;
        }
      }
      for (const auto& p : received.procs) {
        images.push_back(core.alloc_mem(p.length_bytes()));
        auto image =
            std::make_shared<const std::vector<std::uint8_t>>(p.payload);
        installed.emplace_back(p.index, core.install(p.index, std::move(image)));
      }
    } catch (const OutOfMemory&) {
      failure = FailReason::OutOfMemory;
    }
  }

  if (!failure) {
    try {
      co_await executor.execute(self, sim.now(), received, args);
    } catch (const std::exception&) {
      failure = FailReason::ExecutionFailed;
    }
  }

  if (failure) {
    Message failed = control(Token::Failed, static_cast<Word>(*failure));
    co_await ch->send(Channel::End::B, std::move(failed));
  } else {
    Message completed = control(Token::Completed);
    co_await ch->send(Channel::End::B, std::move(completed));
    for (const auto& v : args) {
      Message result;
      if (const auto* var = std::get_if<runtime::VarRef>(&v)) {
        result.words = var->cell.to_vector();
      } else if (const auto* arr = std::get_if<runtime::ArraySlice>(&v)) {
        result.words = arr->to_vector();
      } else {
        continue;
      }
      co_await ch->send(Channel::End::B, std::move(result));
    }
    Message close = control(Token::Close);
    co_await ch->send(Channel::End::B, std::move(close));
  }

  // Free the closure and yield the thread.
  for (auto [index, id] : installed) core.uninstall(index, id);
  args.clear();
  images.clear();
  core.release_thread(sim, slot);
}

}  // namespace hcsim::protocol
