#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace hcsim::closure {

using Word = std::uint32_t;
using ProcIndex = std::uint32_t;

inline constexpr std::size_t kBytesPerWord = 4;

enum class ArgTag : Word { SingleVar = 1, ArrayRef = 2, ConstVal = 3 };

/// One element of a closure's argument set.
///
/// SingleVar and ConstVal carry exactly one word; ArrayRef carries the
/// referenced array's contents. SingleVar and ArrayRef are results: the host
/// sends them back when the procedure halts.
struct Argument {
  ArgTag tag = ArgTag::ConstVal;
  std::vector<Word> values;

  static Argument single_var(Word v) { return {ArgTag::SingleVar, {v}}; }
  static Argument const_val(Word v) { return {ArgTag::ConstVal, {v}}; }
  static Argument array_ref(std::vector<Word> data) {
    return {ArgTag::ArrayRef, std::move(data)};
  }

  bool written_back() const { return tag != ArgTag::ConstVal; }

  friend bool operator==(const Argument&, const Argument&) = default;
};

/// A procedure's instruction image, addressed by its jump-table index.
struct ProcedureImage {
  ProcIndex index = 0;
  std::vector<std::uint8_t> payload;

  std::size_t length_bytes() const { return payload.size(); }
  std::size_t padded_words() const {
    return (payload.size() + kBytesPerWord - 1) / kBytesPerWord;
  }

  friend bool operator==(const ProcedureImage&, const ProcedureImage&) = default;
};

/// Everything a remote core needs to execute a process: its arguments and
/// the images of every procedure it may call.
struct Closure {
  std::vector<Argument> args;
  std::vector<ProcedureImage> procs;

  friend bool operator==(const Closure&, const Closure&) = default;
};

/// Word counts that enter the process-creation cost.
struct PayloadSizes {
  std::size_t args = 0;     // argument words, headers and array contents
  std::size_t procs = 0;    // procedure headers plus padded images
  std::size_t results = 0;  // words written back to the guest

  friend bool operator==(const PayloadSizes&, const PayloadSizes&) = default;
};

/// Throws InvalidClosure when the closure has no procedures, an image is
/// shorter than one instruction, or a scalar argument does not hold exactly
/// one word.
void validate(const Closure& c);

/// Wire layout:
///   [|A|, |Q|]
///   per argument: [tag] ++ ArrayRef: [len, data...] | SingleVar/ConstVal: [value]
///   per procedure: [index, length_bytes, payload packed little-endian and
///                   zero-padded to whole words]
std::vector<Word> encode(const Closure& c);

/// Inverse of encode. Throws MalformedClosure on truncation, trailing words,
/// unknown tags, zero procedures or non-zero padding.
Closure decode(std::span<const Word> words);

PayloadSizes payload_sizes(const Closure& c);

/// Boundaries of the three transmission parts within an encoded closure.
struct Segment {
  enum class Kind { Header, Argument, Procedure };
  Kind kind;
  std::size_t offset;
  std::size_t length;
};
std::vector<Segment> segments(const Closure& c);

/// Fixture format: one word per line as 0x-prefixed 8-digit hex. Blank
/// lines and '#' comments are ignored on read.
void write_hex_words(std::ostream& out, std::span<const Word> words);
std::vector<Word> read_hex_words(std::istream& in);

}  // namespace hcsim::closure
