#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "hcsim/engine/core.hpp"

namespace hcsim::runtime {

using Word = std::uint32_t;

/// Backing storage for an array living in one core's memory.
struct Buffer {
  std::vector<Word> words;
  engine::MemBlock mem;
};

/// A view onto a contiguous range of an array. Copies share storage, so a
/// write through any alias is visible through the parent and every other
/// alias of the same range.
class ArraySlice {
 public:
  ArraySlice() = default;

  /// Places `data` in `core`'s memory (4 bytes per word). Throws OutOfMemory.
  static ArraySlice allocate(engine::Core& core, std::vector<Word> data);
  /// Storage outside any simulated core.
  static ArraySlice detached(std::vector<Word> data);

  bool valid() const { return static_cast<bool>(buf_); }
  std::size_t size() const { return length_; }
  bool empty() const { return length_ == 0; }

  std::span<Word> view() const;
  Word& operator[](std::size_t i) const { return view()[i]; }
  std::vector<Word> to_vector() const;
  void assign(std::span<const Word> data) const;

  /// Sub-range [begin, end) relative to this slice. Throws DomainError when
  /// the range is not within bounds.
  ArraySlice alias(std::size_t begin, std::size_t end) const;

  std::size_t offset() const { return offset_; }
  bool shares_storage_with(const ArraySlice& other) const {
    return buf_ == other.buf_;
  }

 private:
  ArraySlice(std::shared_ptr<Buffer> buf, std::size_t offset, std::size_t length)
      : buf_(std::move(buf)), offset_(offset), length_(length) {}

  std::shared_ptr<Buffer> buf_;
  std::size_t offset_ = 0;
  std::size_t length_ = 0;
};

/// Free function form of ArraySlice::alias.
inline ArraySlice alias(const ArraySlice& parent, std::size_t begin,
                        std::size_t end) {
  return parent.alias(begin, end);
}

/// A single-word variable passed by reference.
struct VarRef {
  ArraySlice cell;
};

/// A procedure argument: constant word, variable reference or array.
using Value = std::variant<Word, VarRef, ArraySlice>;

}  // namespace hcsim::runtime
