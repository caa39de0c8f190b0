#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hcsim/closure.hpp"
#include "hcsim/costmodel.hpp"
#include "hcsim/engine/machine.hpp"
#include "hcsim/engine/task.hpp"
#include "hcsim/protocol.hpp"
#include "hcsim/values.hpp"

namespace hcsim::runtime {

using engine::ProcIndex;

class Runtime;

/// Execution context of a simulated thread.
struct Env {
  Runtime* rt = nullptr;
  engine::ThreadRef self;
  /// When the running process arrived on this core.
  engine::VirtualTime arrival;

  NodeId core() const { return self.core; }
};

using ProcBody = engine::Task<void> (*)(Env, std::vector<Value>);

/// Which calibrated initialisation constant a procedure's spawns absorb.
enum class InitConstant { Spawn, Distribute };

struct Procedure {
  ProcIndex index = 0;
  std::string name;
  std::size_t image_bytes = 4;
  std::vector<ProcIndex> callees;
  ProcBody body = nullptr;
  InitConstant init = InitConstant::Spawn;
};

/// Procedures of a program keyed by jump-table index. Indices are the same
/// on every core.
class ProcedureRegistry {
 public:
  void add(Procedure p);
  const Procedure& at(ProcIndex index) const;
  bool contains(ProcIndex index) const { return procs_.count(index) != 0; }
  std::vector<ProcIndex> indices() const;

  /// `entry` followed by its transitive static callees in ascending index
  /// order: the procedures a closure for `entry` must carry.
  std::vector<ProcIndex> closure_set(ProcIndex entry) const;

  /// Deterministic stand-in for the procedure's instructions.
  static std::vector<std::uint8_t> image_payload(const Procedure& p);

 private:
  std::map<ProcIndex, Procedure> procs_;
};

struct RuntimeConfig {
  unsigned dimension = 6;
  /// Dimensions whose links are on-chip; the two most significant ones when
  /// unset.
  std::optional<std::vector<unsigned>> chip_dims;
  double on_chip_multiplier = Hypercube::kDefaultOnChipMultiplier;
  engine::CoreConfig core;
  /// Memory taken by the process-creation kernel on every core.
  std::size_t kernel_bytes = 2048;
  costmodel::CostConstants constants;
  costmodel::SeqCostMode seq_cost = costmodel::SeqCostMode::ClosedForm;
  double recurrence_base_ns = 0.0;
  /// Sub-arrays longer than this are sorted with a remote branch.
  std::size_t sort_threshold = 1;
  /// Replace every remote spawn by a local call.
  bool local_only = false;
  bool keep_trace = false;

  Hypercube make_topology() const;
};

/// A measurement emitted by a running program.
struct Sample {
  std::string kind;
  NodeId node;
  std::uint64_t size = 0;
  std::uint64_t value_ns = 0;
};

struct SpawnRecord {
  NodeId guest;
  NodeId host;
  ProcIndex proc = 0;
  unsigned hops = 0;
  std::uint64_t start_ns = 0;
  std::uint64_t end_ns = 0;
  closure::PayloadSizes sizes;
  double fixed_overhead_ns = 0.0;
  double multiplier = 1.0;
};

using Block = std::function<engine::Task<void>(Env)>;

/// Owns a simulated machine with a program loaded on node 0 and provides
/// the composition primitives procedures are written against: sequential
/// calls, fork-join `par`, and remote `on`.
class Runtime final : private protocol::Executor {
 public:
  Runtime(RuntimeConfig config, ProcedureRegistry registry);

  engine::Machine& machine() { return machine_; }
  const engine::Machine& machine() const { return machine_; }
  engine::Simulator& sim() { return machine_.sim(); }
  const Hypercube& topology() const { return machine_.topology(); }
  const RuntimeConfig& config() const { return config_; }
  const ProcedureRegistry& registry() const { return registry_; }
  const costmodel::Model& model() const { return model_; }

  /// An array in `core`'s memory.
  ArraySlice make_array(NodeId core, std::vector<Word> data);

  /// Calls a procedure on the current thread. The procedure must be
  /// resident in the executing core's jump table.
  engine::Task<void> call(Env env, ProcIndex proc, std::vector<Value> args);

  /// Runs `proc` on `target` and waits for it; results are written back to
  /// the caller's variables and arrays. Local call when target is the
  /// current core or the runtime is local-only.
  engine::Task<void> on(Env env, NodeId target, ProcIndex proc,
                        std::vector<Value> args);

  /// Starts all blocks at once and completes when the last one halts. The
  /// first block runs on the calling thread, the others on freshly
  /// allocated threads of the same core. Two or more blocks cost one
  /// level overhead.
  engine::Task<void> par(Env env, std::vector<Block> blocks);

  /// Advances the calling thread by a modelled cost.
  engine::Task<void> compute(Env env, double ns, std::string kind = "compute");

  /// Starts `entry` on a thread of `where` and runs the simulation to
  /// completion. Returns the time the entry procedure finished.
  engine::VirtualTime run(NodeId where, ProcIndex entry, std::vector<Value> args);

  /// Fixed per-spawn overhead for a closure: the procedure's calibrated
  /// initialisation constant less the word cost of the closure's structure
  /// (headers and procedure images), floored at zero. A spawn of `proc` then
  /// costs init + 2 C_w o over one off-chip hop.
  double fixed_overhead_ns(ProcIndex proc, const closure::Closure& c) const;
  closure::Closure build_closure(NodeId guest, ProcIndex proc,
                                 const std::vector<Value>& args,
                                 std::vector<ArraySlice>* homes) const;

  void record(Sample s) { samples_.push_back(std::move(s)); }
  const std::vector<Sample>& samples() const { return samples_; }
  const std::vector<SpawnRecord>& spawns() const { return spawns_; }
  const protocol::ProtocolLog& protocol_log() const { return log_; }

  /// Every core touched by the run (executed a procedure).
  const std::set<std::uint32_t>& cores_used() const { return cores_used_; }

  std::size_t baseline_memory(NodeId core) const { return baseline_[core.label]; }

  struct Conservation {
    bool memory = true;
    bool threads = true;
    std::string detail;
    bool ok() const { return memory && threads; }
  };
  /// Memory back at its post-load baseline (plus `extra` bytes on cores
  /// holding caller-owned arrays) and no thread allocated or queued.
  Conservation check_conservation(
      const std::map<std::uint32_t, std::size_t>& extra = {}) const;

 private:
  engine::Task<void> execute(engine::ThreadRef host, engine::VirtualTime arrival,
                             const closure::Closure& c,
                             std::vector<Value>& args) override;
  engine::Task<void> forked(Env parent, Block block);
  void load_program();

  RuntimeConfig config_;
  ProcedureRegistry registry_;
  costmodel::Model model_;
  engine::Machine machine_;
  std::vector<engine::MemBlock> resident_;
  std::vector<std::size_t> baseline_;
  std::vector<Sample> samples_;
  std::vector<SpawnRecord> spawns_;
  protocol::ProtocolLog log_;
  std::set<std::uint32_t> cores_used_;
};

}  // namespace hcsim::runtime
