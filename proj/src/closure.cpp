#include "hcsim/closure.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <string>

#include "hcsim/error.hpp"

namespace hcsim::closure {

namespace {

std::size_t arg_words(const Argument& a) {
  return a.tag == ArgTag::ArrayRef ? 2 + a.values.size() : 2;
}

std::size_t proc_words(const ProcedureImage& p) { return 2 + p.padded_words(); }

class Reader {
 public:
  explicit Reader(std::span<const Word> w) : words_(w) {}

  Word next(const char* what) {
    if (pos_ >= words_.size()) {
      throw MalformedClosure(std::string("truncated closure: missing ") + what +
                             " at word " + std::to_string(pos_));
    }
    return words_[pos_++];
  }

  std::span<const Word> take(std::size_t n, const char* what) {
    if (n > words_.size() - pos_) {
      throw MalformedClosure(std::string("truncated closure: ") + what +
                             " needs " + std::to_string(n) + " words, " +
                             std::to_string(words_.size() - pos_) + " left");
    }
    auto out = words_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  bool done() const { return pos_ == words_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const Word> words_;
  std::size_t pos_ = 0;
};

}  // namespace

void validate(const Closure& c) {
  if (c.procs.empty()) throw InvalidClosure("closure has no procedures");
  for (const auto& a : c.args) {
    if (a.tag != ArgTag::ArrayRef && a.values.size() != 1) {
      throw InvalidClosure("scalar argument must hold exactly one word");
    }
  }
  for (const auto& p : c.procs) {
    if (p.length_bytes() < kBytesPerWord) {
      throw InvalidClosure("procedure " + std::to_string(p.index) +
                           " image shorter than one instruction");
    }
  }
}

std::vector<Word> encode(const Closure& c) {
  validate(c);
  std::vector<Word> out;
  auto sizes = payload_sizes(c);
  out.reserve(2 + sizes.args + sizes.procs);
  out.push_back(static_cast<Word>(c.args.size()));
  out.push_back(static_cast<Word>(c.procs.size()));
  for (const auto& a : c.args) {
    out.push_back(static_cast<Word>(a.tag));
    if (a.tag == ArgTag::ArrayRef) out.push_back(static_cast<Word>(a.values.size()));
    out.insert(out.end(), a.values.begin(), a.values.end());
  }
  for (const auto& p : c.procs) {
    out.push_back(p.index);
    out.push_back(static_cast<Word>(p.length_bytes()));
    for (std::size_t i = 0; i < p.padded_words(); ++i) {
      Word w = 0;
      for (std::size_t b = 0; b < kBytesPerWord; ++b) {
        std::size_t at = i * kBytesPerWord + b;
        if (at < p.payload.size()) w |= Word{p.payload[at]} << (8 * b);
      }
      out.push_back(w);
    }
  }
  return out;
}

Closure decode(std::span<const Word> words) {
  Reader r(words);
  Closure c;
  const Word nargs = r.next("argument count");
  const Word nprocs = r.next("procedure count");
  if (nprocs == 0) throw MalformedClosure("closure declares zero procedures");
  // Each argument needs at least two words and each procedure at least three.
  if (nargs > words.size() || nprocs > words.size()) {
    throw MalformedClosure("declared counts exceed closure length");
  }
  c.args.reserve(nargs);
  for (Word i = 0; i < nargs; ++i) {
    const Word tag = r.next("argument tag");
    switch (static_cast<ArgTag>(tag)) {
      case ArgTag::SingleVar:
        c.args.push_back(Argument::single_var(r.next("variable value")));
        break;
      case ArgTag::ConstVal:
        c.args.push_back(Argument::const_val(r.next("constant value")));
        break;
      case ArgTag::ArrayRef: {
        const Word len = r.next("array length");
        auto data = r.take(len, "array data");
        c.args.push_back(Argument::array_ref({data.begin(), data.end()}));
        break;
      }
      default:
        throw MalformedClosure("unknown argument tag " + std::to_string(tag) +
                               " at word " + std::to_string(r.pos() - 1));
    }
  }
  c.procs.reserve(nprocs);
  for (Word i = 0; i < nprocs; ++i) {
    ProcedureImage p;
    p.index = r.next("procedure index");
    const Word len = r.next("procedure length");
    if (len < kBytesPerWord) {
      throw MalformedClosure("procedure " + std::to_string(p.index) +
                             " has length " + std::to_string(len) + " bytes");
    }
    const std::size_t nwords = (len + kBytesPerWord - 1) / kBytesPerWord;
    auto body = r.take(nwords, "procedure image");
    p.payload.resize(len);
    for (std::size_t at = 0; at < nwords * kBytesPerWord; ++at) {
      auto byte = static_cast<std::uint8_t>(body[at / kBytesPerWord] >>
                                            (8 * (at % kBytesPerWord)));
      if (at < len) {
        p.payload[at] = byte;
      } else if (byte != 0) {
        throw MalformedClosure("non-zero padding in procedure " +
                               std::to_string(p.index));
      }
    }
    c.procs.push_back(std::move(p));
  }
  if (!r.done()) {
    throw MalformedClosure(std::to_string(words.size() - r.pos()) +
                           " trailing words after closure");
  }
  return c;
}

PayloadSizes payload_sizes(const Closure& c) {
  PayloadSizes s;
  for (const auto& a : c.args) {
    s.args += arg_words(a);
    if (a.written_back()) s.results += a.values.size();
  }
  for (const auto& p : c.procs) s.procs += proc_words(p);
  return s;
}

std::vector<Segment> segments(const Closure& c) {
  std::vector<Segment> out;
  out.push_back({Segment::Kind::Header, 0, 2});
  std::size_t at = 2;
  for (const auto& a : c.args) {
    out.push_back({Segment::Kind::Argument, at, arg_words(a)});
    at += arg_words(a);
  }
  for (const auto& p : c.procs) {
    out.push_back({Segment::Kind::Procedure, at, proc_words(p)});
    at += proc_words(p);
  }
  return out;
}

void write_hex_words(std::ostream& out, std::span<const Word> words) {
  char buf[16];
  for (Word w : words) {
    std::snprintf(buf, sizeof buf, "0x%08x\n", static_cast<unsigned>(w));
    out << buf;
  }
}

std::vector<Word> read_hex_words(std::istream& in) {
  std::vector<Word> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    std::string tok = line.substr(first, last - first + 1);
    try {
      std::size_t used = 0;
      unsigned long v = std::stoul(tok, &used, 16);
      if (used != tok.size() || v > 0xffffffffUL) throw std::out_of_range(tok);
      out.push_back(static_cast<Word>(v));
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineno) + ": bad hex word '" +
                       tok + "'");
    }
  }
  return out;
}

}  // namespace hcsim::closure
