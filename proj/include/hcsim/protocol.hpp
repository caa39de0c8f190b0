#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hcsim/closure.hpp"
#include "hcsim/engine/channel.hpp"
#include "hcsim/engine/machine.hpp"
#include "hcsim/engine/task.hpp"
#include "hcsim/values.hpp"

namespace hcsim::protocol {

using Word = closure::Word;

/// Control token values. The first word of every control message.
enum class Token : Word {
  Connect = 0x01,
  Ack = 0x02,
  Completed = 0x03,
  Close = 0x04,
  Failed = 0x05,
};

/// Reason word following a Failed token.
enum class FailReason : Word {
  OutOfMemory = 1,
  MalformedClosure = 2,
  ExecutionFailed = 3,
};

enum class Phase { Init, TransmitClosure, ExecuteWait, ResultsTeardown };

std::string to_string(Phase p);

/// Per-connection cost parameters.
struct LinkCost {
  double fixed_overhead_ns = 0.0;  // initialisation and termination
  double word_ns = 150.0;          // per data word transferred
  double multiplier = 1.0;         // path latency factor
};

/// `time_ns,guest,host,phase` records, in the order phases were entered.
class ProtocolLog {
 public:
  struct Entry {
    std::uint64_t time_ns;
    NodeId guest;
    NodeId host;
    Phase phase;
  };

  void add(Entry e) { entries_.push_back(e); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<std::string> lines() const;

 private:
  std::vector<Entry> entries_;
};

/// Runs the entry procedure of a received closure on a host thread.
class Executor {
 public:
  virtual ~Executor() = default;

  /// `args` are host-side copies of the closure arguments, in order; the
  /// entry procedure is `c.procs.front()`. `arrival` is when the process
  /// started on the host.
  virtual engine::Task<void> execute(engine::ThreadRef host,
                                     engine::VirtualTime arrival,
                                     const closure::Closure& c,
                                     std::vector<runtime::Value>& args) = 0;
};

struct SpawnRequest {
  engine::ThreadRef guest;
  NodeId host;
  closure::Closure closure;
  /// Guest locations receiving results, one per written-back argument, in
  /// argument order.
  std::vector<runtime::ArraySlice> homes;
  LinkCost cost;
};

struct SpawnStats {
  engine::VirtualTime start;
  engine::VirtualTime end;
  closure::PayloadSizes sizes;
  int host_thread = -1;
};

/// Guest side of the four-phase process-creation protocol. Blocks the
/// calling simulated thread until results are written back to `homes`.
///
/// Charged time, excluding execution on the host:
///   (fixed_overhead + word_ns * (n + m + o)) * multiplier
/// where (n, m, o) = payload_sizes(closure).
///
/// Throws SpawnFailed when the host runs out of memory, rejects the closure
/// or the remote procedure fails; InvalidClosure when the closure violates
/// its invariants; DomainError for a spawn onto the guest's own core.
engine::Task<SpawnStats> spawn_remote(engine::Machine& machine, SpawnRequest req,
                                      Executor& executor,
                                      ProtocolLog* log = nullptr);

/// Host side of one connection: allocates a thread (waiting FIFO if all are
/// busy), installs the closure, runs it and tears the connection down.
/// Started by spawn_remote on the host's kernel.
engine::Task<void> host_serve(engine::Machine& machine,
                              std::shared_ptr<engine::Channel> ch, NodeId host,
                              LinkCost cost, Executor& executor);

}  // namespace hcsim::protocol
