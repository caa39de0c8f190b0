#include "hcsim/runtime.hpp"

#include <algorithm>

#include "hcsim/engine/join.hpp"
#include "hcsim/error.hpp"

namespace hcsim::runtime {

void ProcedureRegistry::add(Procedure p) {
  if (!p.body) throw ConfigError("procedure '" + p.name + "' has no body");
  if (p.image_bytes < closure::kBytesPerWord) {
    throw ConfigError("procedure '" + p.name + "' image smaller than one instruction");
  }
  if (!procs_.emplace(p.index, p).second) {
    throw ConfigError("duplicate procedure index " + std::to_string(p.index));
  }
}

const Procedure& ProcedureRegistry::at(ProcIndex index) const {
  auto it = procs_.find(index);
  if (it == procs_.end()) {
    throw DomainError("no procedure registered at index " + std::to_string(index));
  }
  return it->second;
}

std::vector<ProcIndex> ProcedureRegistry::indices() const {
  std::vector<ProcIndex> out;
  for (const auto& [index, p] : procs_) out.push_back(index);
  return out;
}

std::vector<ProcIndex> ProcedureRegistry::closure_set(ProcIndex entry) const {
  std::set<ProcIndex> seen{entry};
  std::vector<ProcIndex> stack{entry};
  while (!stack.empty()) {
    ProcIndex i = stack.back();
    stack.pop_back();
    for (ProcIndex c : at(i).callees) {
      if (seen.insert(c).second) stack.push_back(c);
    }
  }
  std::vector<ProcIndex> out{entry};
  for (ProcIndex i : seen) {
    if (i != entry) out.push_back(i);
  }
  return out;
}

std::vector<std::uint8_t> ProcedureRegistry::image_payload(const Procedure& p) {
  std::vector<std::uint8_t> bytes(p.image_bytes);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    bytes[i] = static_cast<std::uint8_t>((p.index * 37u + i * 11u + 1u) & 0xffu);
  }
  return bytes;
}

Hypercube RuntimeConfig::make_topology() const {
  return Hypercube(dimension,
                   chip_dims ? *chip_dims : Hypercube::default_chip_dims(dimension),
                   on_chip_multiplier);
}

Runtime::Runtime(RuntimeConfig config, ProcedureRegistry registry)
    : config_(std::move(config)),
      registry_(std::move(registry)),
      model_(config_.constants, config_.seq_cost, config_.recurrence_base_ns),
      machine_(config_.make_topology(), config_.core) {
  machine_.sim().keep_trace(config_.keep_trace);
  load_program();
}

void Runtime::load_program() {
  const auto n = machine_.core_count();
  for (std::uint32_t i = 0; i < n; ++i) {
    resident_.push_back(machine_.core(NodeId{i}).alloc_mem(config_.kernel_bytes));
  }
  // The complete program lives on node 0; other cores only have the kernel.
  auto& root = machine_.core(NodeId{0});
  for (ProcIndex idx : registry_.indices()) {
    const auto& p = registry_.at(idx);
    resident_.push_back(root.alloc_mem(p.image_bytes));
    root.install(idx, std::make_shared<const std::vector<std::uint8_t>>(
                          ProcedureRegistry::image_payload(p)));
  }
  baseline_.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    baseline_[i] = machine_.core(NodeId{i}).mem_used();
  }
}

ArraySlice Runtime::make_array(NodeId core, std::vector<Word> data) {
  return ArraySlice::allocate(machine_.core(core), std::move(data));
}

engine::Task<void> Runtime::call(Env env, ProcIndex proc, std::vector<Value> args) {
  const auto& p = registry_.at(proc);
  if (!machine_.core(env.core()).resolve(proc)) {
    throw ProtocolError("procedure '" + p.name + "' not resident on core " +
                        std::to_string(env.core().label));
  }
  cores_used_.insert(env.core().label);
  co_await p.body(env, std::move(args));
}

closure::Closure Runtime::build_closure(NodeId guest, ProcIndex proc,
                                        const std::vector<Value>& args,
                                        std::vector<ArraySlice>* homes) const {
  closure::Closure c;
  for (const auto& v : args) {
    if (const auto* w = std::get_if<Word>(&v)) {
      c.args.push_back(closure::Argument::const_val(*w));
    } else if (const auto* var = std::get_if<VarRef>(&v)) {
      if (var->cell.size() != 1) throw DomainError("variable reference must be one word");
      c.args.push_back(closure::Argument::single_var(var->cell[0]));
      if (homes) homes->push_back(var->cell);
    } else {
      const auto& arr = std::get<ArraySlice>(v);
      c.args.push_back(closure::Argument::array_ref(arr.to_vector()));
      if (homes) homes->push_back(arr);
    }
  }
  const auto& core = machine_.core(guest);
  for (ProcIndex i : registry_.closure_set(proc)) {
    const auto* image = core.resolve(i);
    if (!image) {
      throw ProtocolError("procedure '" + registry_.at(i).name +
                          "' not resident on guest core " +
                          std::to_string(guest.label));
    }
    c.procs.push_back(closure::ProcedureImage{i, *image});
  }
  return c;
}

double Runtime::fixed_overhead_ns(ProcIndex proc, const closure::Closure& c) const {
  const auto& k = config_.constants;
  const double init = registry_.at(proc).init == InitConstant::Distribute
                          ? k.distribute_init_ns
                          : k.spawn_init_ns;
  const auto s = closure::payload_sizes(c);
  const double structure = static_cast<double>(s.args - s.results + s.procs);
  return std::max(0.0, init - k.word_ns * structure);
}

engine::Task<void> Runtime::on(Env env, NodeId target, ProcIndex proc,
                               std::vector<Value> args) {
  if (target == env.core() || config_.local_only) {
    co_await call(env, proc, std::move(args));
    co_return;
  }
  protocol::SpawnRequest req;
  req.guest = env.self;
  req.host = target;
  req.closure = build_closure(env.core(), proc, args, &req.homes);
  const double mult = topology().path_multiplier(env.core(), target) *
                      config_.constants.path_factor;
  req.cost = protocol::LinkCost{fixed_overhead_ns(proc, req.closure),
                                config_.constants.word_ns, mult};

  SpawnRecord rec;
  rec.guest = env.core();
  rec.host = target;
  rec.proc = proc;
  rec.hops = topology().hop_distance(env.core(), target);
  rec.fixed_overhead_ns = req.cost.fixed_overhead_ns;
  rec.multiplier = mult;

  auto stats = co_await protocol::spawn_remote(machine_, std::move(req), *this, &log_);
  rec.start_ns = stats.start.ns();
  rec.end_ns = stats.end.ns();
  rec.sizes = stats.sizes;
  spawns_.push_back(rec);
}

engine::Task<void> Runtime::execute(engine::ThreadRef host,
                                    engine::VirtualTime arrival,
                                    const closure::Closure& c,
                                    std::vector<Value>& args) {
  Env env{this, host, arrival};
  co_await call(env, c.procs.front().index, args);
}

engine::Task<void> Runtime::compute(Env env, double ns, std::string kind) {
  co_await sim().delay(env.self, engine::Duration::from_ns(ns), std::move(kind));
}

engine::Task<void> Runtime::forked(Env parent, Block block) {
  auto& core = machine_.core(parent.core());
  const int slot = co_await core.acquire_thread(sim());
  Env child{this, engine::ThreadRef{parent.core(), slot}, parent.arrival};
  std::exception_ptr err;
  try {
    co_await block(child);
  } catch (...) {
    err = std::current_exception();
  }
  core.release_thread(sim(), slot);
  if (err) std::rethrow_exception(err);
}

engine::Task<void> Runtime::par(Env env, std::vector<Block> blocks) {
  if (blocks.empty()) co_return;
  if (blocks.size() == 1) {
    co_await blocks.front()(env);
    co_return;
  }
  co_await compute(env, config_.constants.level_overhead_ns, "fork");
  engine::JoinCounter join(sim(), env.self, blocks.size());
  auto arrive = [&join](std::exception_ptr e) { join.arrive(e); };
  sim().spawn(env.self, blocks.front()(env), arrive);
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    sim().spawn(engine::ThreadRef{env.core(), -1}, forked(env, blocks[i]), arrive);
  }
  co_await join.wait();
}

engine::VirtualTime Runtime::run(NodeId where, ProcIndex entry,
                                 std::vector<Value> args) {
  auto& sim = machine_.sim();
  auto& core = machine_.core(where);
  auto slot = core.try_acquire_thread(sim.now());
  if (!slot) throw SimulationError("no free thread to start the program");
  Env env{this, engine::ThreadRef{where, *slot}, sim.now()};
  std::exception_ptr err;
  engine::VirtualTime finished;
  sim.spawn(env.self, call(env, entry, std::move(args)),
            [&](std::exception_ptr e) {
              err = e;
              finished = sim.now();
            });
  sim.run();
  core.release_thread(sim, *slot);
  if (err) std::rethrow_exception(err);
  return finished;
}

Runtime::Conservation Runtime::check_conservation(
    const std::map<std::uint32_t, std::size_t>& extra) const {
  Conservation c;
  for (std::uint32_t i = 0; i < machine_.core_count(); ++i) {
    const auto& core = machine_.core(NodeId{i});
    std::size_t expect = baseline_[i];
    if (auto it = extra.find(i); it != extra.end()) expect += it->second;
    if (core.mem_used() != expect) {
      c.memory = false;
      c.detail += "core " + std::to_string(i) + " memory " +
                  std::to_string(core.mem_used()) + " != " + std::to_string(expect) + "; ";
    }
    if (core.active_threads() != 0 || core.queued_thread_requests() != 0 ||
        core.thread_grants() != core.thread_releases()) {
      c.threads = false;
      c.detail += "core " + std::to_string(i) + " threads not released; ";
    }
  }
  return c;
}

}  // namespace hcsim::runtime
