#include "hcsim/engine/core.hpp"

#include <algorithm>

#include "hcsim/error.hpp"

namespace hcsim::engine {

Core::Core(NodeId id, CoreConfig config)
    : id_(id),
      config_(config),
      memory_(std::make_shared<MemoryAccount>(config.mem_capacity)),
      busy_(config.threads, false),
      granted_at_(config.threads),
      jump_table_(config.jump_table_size) {
  if (config_.threads == 0) throw ConfigError("core needs at least one thread");
}

MemBlock Core::alloc_mem(std::size_t bytes) {
  auto& m = *memory_;
  if (bytes > m.capacity_ - m.used_) {
    throw OutOfMemory("core " + std::to_string(id_.label) + ": cannot allocate " +
                      std::to_string(bytes) + " bytes (" +
                      std::to_string(m.used_) + "/" +
                      std::to_string(m.capacity_) + " in use)");
  }
  m.used_ += bytes;
  m.peak_ = std::max(m.peak_, m.used_);
  return MemBlock(memory_, bytes);
}

int Core::claim(VirtualTime now) {
  auto it = std::find(busy_.begin(), busy_.end(), false);
  auto slot = static_cast<int>(it - busy_.begin());
  busy_[slot] = true;
  granted_at_[slot] = now;
  ++active_;
  ++grants_;
  peak_active_ = std::max(peak_active_, active_);
  return slot;
}

std::optional<int> Core::try_acquire_thread(VirtualTime now) {
  if (active_ >= config_.threads || !waiters_.empty()) return std::nullopt;
  return claim(now);
}

bool Core::ThreadAwaiter::await_ready() {
  if (auto s = core_.try_acquire_thread(sim_.now())) {
    slot_ = *s;
    return true;
  }
  return false;
}

void Core::ThreadAwaiter::await_suspend(std::coroutine_handle<> h) {
  core_.waiters_.push_back(Waiter{h, &slot_});
}

void Core::release_thread(Simulator& sim, int slot) {
  if (slot < 0 || slot >= static_cast<int>(busy_.size()) || !busy_[slot]) {
    throw SimulationError("core " + std::to_string(id_.label) +
                          ": release of idle thread slot " +
                          std::to_string(slot));
  }
  busy_[slot] = false;
  --active_;
  ++releases_;
  busy_ticks_ += (sim.now() - granted_at_[slot]).ticks;
  if (!waiters_.empty()) {
    Waiter w = waiters_.front();
    waiters_.pop_front();
    *w.slot = claim(sim.now());
    sim.resume_at(sim.now(), ThreadRef{id_, *w.slot}, "thread", w.handle);
  }
}

void Core::check_index(ProcIndex index) const {
  if (index >= jump_table_.size()) {
    throw DomainError("procedure index " + std::to_string(index) +
                      " exceeds jump table size " +
                      std::to_string(jump_table_.size()));
  }
}

Core::InstallId Core::install(ProcIndex index, ImageBytes image) {
  check_index(index);
  InstallId id = next_install_++;
  jump_table_[index].push_back(JumpEntry{id, std::move(image)});
  return id;
}

void Core::uninstall(ProcIndex index, InstallId id) {
  check_index(index);
  auto& stack = jump_table_[index];
  auto it = std::find_if(stack.begin(), stack.end(),
                         [id](const JumpEntry& e) { return e.id == id; });
  if (it != stack.end()) stack.erase(it);
}

const std::vector<std::uint8_t>* Core::resolve(ProcIndex index) const {
  if (index >= jump_table_.size() || jump_table_[index].empty()) return nullptr;
  return jump_table_[index].back().image.get();
}

}  // namespace hcsim::engine
