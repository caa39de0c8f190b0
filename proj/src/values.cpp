#include "hcsim/values.hpp"

#include <algorithm>
#include <string>

#include "hcsim/closure.hpp"
#include "hcsim/error.hpp"

namespace hcsim::runtime {

ArraySlice ArraySlice::allocate(engine::Core& core, std::vector<Word> data) {
  auto mem = core.alloc_mem(data.size() * closure::kBytesPerWord);
  auto buf = std::make_shared<Buffer>(Buffer{std::move(data), std::move(mem)});
  const auto n = buf->words.size();
  return ArraySlice(std::move(buf), 0, n);
}

ArraySlice ArraySlice::detached(std::vector<Word> data) {
  auto buf = std::make_shared<Buffer>(Buffer{std::move(data), {}});
  const auto n = buf->words.size();
  return ArraySlice(std::move(buf), 0, n);
}

std::span<Word> ArraySlice::view() const {
  if (!buf_) return {};
  return std::span<Word>(buf_->words).subspan(offset_, length_);
}

std::vector<Word> ArraySlice::to_vector() const {
  auto v = view();
  return {v.begin(), v.end()};
}

void ArraySlice::assign(std::span<const Word> data) const {
  if (data.size() != length_) {
    throw DomainError("assigning " + std::to_string(data.size()) +
                      " words to a slice of " + std::to_string(length_));
  }
  std::copy(data.begin(), data.end(), view().begin());
}

ArraySlice ArraySlice::alias(std::size_t begin, std::size_t end) const {
  if (begin > end || end > length_) {
    throw DomainError("alias range [" + std::to_string(begin) + ", " +
                      std::to_string(end) + ") outside slice of length " +
                      std::to_string(length_));
  }
  return ArraySlice(buf_, offset_ + begin, end - begin);
}

}  // namespace hcsim::runtime
