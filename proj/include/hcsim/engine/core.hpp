#pragma once

#include <coroutine>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "hcsim/engine/simulator.hpp"

namespace hcsim::engine {

using ProcIndex = std::uint32_t;

struct CoreConfig {
  std::size_t mem_capacity = 65536;
  unsigned threads = 8;
  std::size_t jump_table_size = 16;
};

/// Byte accounting for one core's private memory. Shared with outstanding
/// MemBlocks so a block may safely outlive the core that issued it.
class MemoryAccount {
 public:
  explicit MemoryAccount(std::size_t capacity) : capacity_(capacity) {}

  std::size_t capacity() const { return capacity_; }
  std::size_t used() const { return used_; }
  std::size_t peak() const { return peak_; }

 private:
  friend class MemBlock;
  friend class Core;

  std::size_t capacity_;
  std::size_t used_ = 0;
  std::size_t peak_ = 0;
};

/// RAII handle on an allocation in a core's memory.
class MemBlock {
 public:
  MemBlock() = default;
  MemBlock(std::shared_ptr<MemoryAccount> account, std::size_t bytes)
      : account_(std::move(account)), bytes_(bytes) {}
  MemBlock(MemBlock&& other) noexcept
      : account_(std::move(other.account_)),
        bytes_(std::exchange(other.bytes_, 0)) {}
  MemBlock& operator=(MemBlock&& other) noexcept {
    if (this != &other) {
      release();
      account_ = std::move(other.account_);
      bytes_ = std::exchange(other.bytes_, 0);
    }
    return *this;
  }
  MemBlock(const MemBlock&) = delete;
  MemBlock& operator=(const MemBlock&) = delete;
  ~MemBlock() { release(); }

  std::size_t bytes() const { return bytes_; }
  void release() {
    if (account_) account_->used_ -= bytes_;
    account_.reset();
    bytes_ = 0;
  }

 private:
  std::shared_ptr<MemoryAccount> account_;
  std::size_t bytes_ = 0;
};

/// Procedure image resident in a core's jump table.
using ImageBytes = std::shared_ptr<const std::vector<std::uint8_t>>;

/// A simulated processor core: private memory, a fixed pool of hardware
/// threads with FIFO waiting, and a fixed-size jump table.
class Core {
 public:
  Core(NodeId id, CoreConfig config = {});

  NodeId id() const { return id_; }
  const CoreConfig& config() const { return config_; }

  // Memory.
  /// Throws OutOfMemory when the request does not fit.
  MemBlock alloc_mem(std::size_t bytes);
  std::size_t mem_used() const { return memory_->used(); }
  std::size_t mem_capacity() const { return memory_->capacity(); }
  std::size_t mem_peak() const { return memory_->peak(); }

  // Threads.
  std::optional<int> try_acquire_thread(VirtualTime now);

  class ThreadAwaiter {
   public:
    ThreadAwaiter(Core& core, Simulator& sim) : core_(core), sim_(sim) {}
    bool await_ready();
    void await_suspend(std::coroutine_handle<> h);
    int await_resume() const { return slot_; }

   private:
    Core& core_;
    Simulator& sim_;
    int slot_ = -1;
  };

  /// Claims a free slot, or waits FIFO for one to be released.
  ThreadAwaiter acquire_thread(Simulator& sim) { return {*this, sim}; }
  void release_thread(Simulator& sim, int slot);

  unsigned active_threads() const { return active_; }
  unsigned peak_threads() const { return peak_active_; }
  std::size_t queued_thread_requests() const { return waiters_.size(); }
  std::uint64_t thread_grants() const { return grants_; }
  std::uint64_t thread_releases() const { return releases_; }
  /// Sum over released grants of (release time - grant time), in ticks.
  std::uint64_t busy_ticks() const { return busy_ticks_; }

  // Jump table.
  using InstallId = std::uint64_t;
  std::size_t jump_table_size() const { return jump_table_.size(); }
  /// Points jump[index] at `image`; the previous entry is restored by the
  /// matching uninstall.
  InstallId install(ProcIndex index, ImageBytes image);
  void uninstall(ProcIndex index, InstallId id);
  /// Null when the procedure is not resident.
  const std::vector<std::uint8_t>* resolve(ProcIndex index) const;

 private:
  struct Waiter {
    std::coroutine_handle<> handle;
    int* slot;
  };
  struct JumpEntry {
    InstallId id;
    ImageBytes image;
  };

  int claim(VirtualTime now);
  void check_index(ProcIndex index) const;

  NodeId id_;
  CoreConfig config_;
  std::shared_ptr<MemoryAccount> memory_;
  std::vector<bool> busy_;
  std::vector<VirtualTime> granted_at_;
  std::deque<Waiter> waiters_;
  unsigned active_ = 0;
  unsigned peak_active_ = 0;
  std::uint64_t grants_ = 0;
  std::uint64_t releases_ = 0;
  std::uint64_t busy_ticks_ = 0;
  std::vector<std::vector<JumpEntry>> jump_table_;
  InstallId next_install_ = 1;
};

}  // namespace hcsim::engine
