#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "hcsim/runtime.hpp"

namespace hcsim::programs {

using runtime::Word;

/// Jump-table indices of the demonstration procedures.
enum Proc : runtime::ProcIndex {
  kNode = 1,
  kDistribute = 2,
  kMerge = 3,
  kSeqMsort = 4,
  kParMsort = 5,
};

/// Instruction image sizes in bytes. They only affect memory use: spawn
/// time is calibrated per program.
struct ImageSizes {
  std::size_t node = 32;
  std::size_t distribute = 64;
  std::size_t merge = 160;
  std::size_t seq_msort = 96;
  std::size_t par_msort = 192;
};

runtime::ProcedureRegistry make_registry(const ImageSizes& sizes = {});

/// Stable two-way merge of sorted `a` and `b` into `out` (|out| = |a|+|b|);
/// on equal keys the element of `a` comes first. `out` may overlap the
/// inputs only through `scratch`, which must hold |out| words.
void merge_into(std::span<Word> out, std::span<const Word> a,
                std::span<const Word> b, std::span<Word> scratch);

/// Top-down mergesort splitting at |A|/2.
void merge_sort(std::span<Word> data);

/// Threshold 2^k / p for an input of n words on p processors.
std::size_t auto_threshold(std::size_t n, std::size_t p);

/// Depth of distribute's tree at which node t is first reached; node 0 is
/// level 0.
unsigned creation_level(std::uint32_t t, unsigned log2_p);

struct Arrival {
  std::uint32_t node = 0;
  unsigned level = 0;
  std::uint64_t arrival_ns = 0;
};

struct LevelTime {
  unsigned level = 0;
  std::uint64_t max_arrival_ns = 0;
  std::uint64_t delta_ns = 0;
};

/// Per-level time: difference between the latest arrival at each level and
/// at the previous level.
std::vector<LevelTime> level_times(std::span<const Arrival> arrivals, unsigned log2_p);

struct RunChecks {
  bool single_hop = true;   // every spawn between neighbours
  bool conservation = true; // memory and threads back to baseline
  std::uint64_t trace_hash = 0;
  std::size_t events = 0;
  std::string detail;
};

struct DistributeResult {
  unsigned p = 1;
  std::vector<Arrival> arrivals;  // sorted by node
  std::vector<LevelTime> levels;
  std::uint64_t populate_ns = 0;   // latest arrival
  std::uint64_t completion_ns = 0; // root distribute returns
  std::vector<runtime::SpawnRecord> spawns;
  RunChecks checks;
  std::vector<std::string> trace;
  std::vector<std::string> protocol_trace;
};

/// Measurement log: `level,node,arrival_ns`, one line per node.
void write_arrivals(std::ostream& out, std::span<const Arrival> arrivals);

/// Runs distribute(0, p) from node 0.
DistributeResult run_distribute(const runtime::RuntimeConfig& config, unsigned p);

struct SortResult {
  std::vector<Word> output;
  std::uint64_t time_ns = 0;
  unsigned p = 1;
  unsigned cores_used = 1;
  bool sorted = false;
  bool permutation = false;
  std::vector<runtime::SpawnRecord> spawns;
  /// (merge size, charged ns) for every merge call.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> merges;
  RunChecks checks;
  std::vector<std::string> trace;
};

/// Runs par-msort(0, p, A) from node 0 with the configured threshold.
SortResult run_par_msort(const runtime::RuntimeConfig& config,
                         std::vector<Word> input, unsigned p);
SortResult run_seq_msort(const runtime::RuntimeConfig& config,
                         std::vector<Word> input);

/// Time charged to one merge of two sorted halves totalling n words.
std::uint64_t time_merge(const runtime::RuntimeConfig& config, std::size_t n);

}  // namespace hcsim::programs
