#include "hcsim/programs.hpp"

#include <algorithm>
#include <bit>
#include <ostream>

#include "hcsim/error.hpp"

namespace hcsim::programs {

using engine::Task;
using runtime::ArraySlice;
using runtime::Block;
using runtime::Env;
using runtime::Value;

namespace {

Task<void> sequential_sort(Env env, ArraySlice a);

Task<void> node_body(Env env, std::vector<Value> args) {
  const Word t = std::get<Word>(args.at(0));
  env.rt->record({"arrival", NodeId{t}, 0, env.arrival.ns()});
  co_return;
}

Task<void> distribute_body(Env env, std::vector<Value> args) {
  const Word t = std::get<Word>(args.at(0));
  const Word n = std::get<Word>(args.at(1));
  runtime::Runtime* rt = env.rt;
  if (n <= 1) {
    std::vector<Value> leaf{Value{t}};
    co_await rt->call(env, kNode, std::move(leaf));
    co_return;
  }
  std::vector<Block> blocks;
  blocks.emplace_back([rt, t, n](Env e) {
    return rt->call(e, kDistribute, {Value{t}, Value{n / 2}});
  });
  blocks.emplace_back([rt, t, n](Env e) {
    return rt->on(e, NodeId{t + n / 2}, kDistribute,
                  {Value{t + n / 2}, Value{n / 2}});
  });
  co_await rt->par(env, std::move(blocks));
}

Task<void> merge_body(Env env, std::vector<Value> args) {
  auto r = std::get<ArraySlice>(args.at(0));
  auto a = std::get<ArraySlice>(args.at(1));
  auto b = std::get<ArraySlice>(args.at(2));
  if (r.size() != a.size() + b.size()) {
    throw DomainError("merge: |R| = " + std::to_string(r.size()) + " but |A|+|B| = " +
                      std::to_string(a.size() + b.size()));
  }
  runtime::Runtime* rt = env.rt;
  {
    auto scratch = rt->make_array(env.core(), std::vector<Word>(r.size()));
    merge_into(r.view(), a.view(), b.view(), scratch.view());
  }
  const auto cost = rt->model().merge_time(static_cast<double>(r.size()));
  rt->record({"merge", env.core(), r.size(), engine::Duration::from_ns(cost).ns()});
  co_await rt->compute(env, cost, "merge");
}

Task<void> sequential_sort(Env env, ArraySlice a) {
  runtime::Runtime* rt = env.rt;
  const auto& model = rt->model();
  if (model.mode() == costmodel::SeqCostMode::ClosedForm) {
    merge_sort(a.view());
    co_await rt->compute(env, model.sequential_sort_closed(static_cast<double>(a.size())),
                         "sort");
    co_return;
  }
  // Recurrence mode: split, sort halves, merge; leaves cost the base.
  if (a.size() <= 1) {
    if (a.size() == 1 && model.recurrence_base_ns() > 0.0) {
      co_await rt->compute(env, model.recurrence_base_ns(), "sort");
    }
    co_return;
  }
  const auto half = a.size() / 2;
  auto lo = a.alias(0, half);
  auto hi = a.alias(half, a.size());
  co_await sequential_sort(env, lo);
  co_await sequential_sort(env, hi);
  std::vector<Value> parts{Value{a}, Value{lo}, Value{hi}};
  co_await rt->call(env, kMerge, std::move(parts));
}

Task<void> seq_msort_body(Env env, std::vector<Value> args) {
  co_await sequential_sort(env, std::get<ArraySlice>(args.at(0)));
}

Task<void> par_msort_body(Env env, std::vector<Value> args) {
  const Word t = std::get<Word>(args.at(0));
  const Word n = std::get<Word>(args.at(1));
  auto a = std::get<ArraySlice>(args.at(2));
  runtime::Runtime* rt = env.rt;
  const std::size_t threshold = std::max<std::size_t>(rt->config().sort_threshold, 1);
  // With no processors left to split over, or a sub-array at or below the
  // threshold, the remaining recursion is seq-msort.
  if (a.size() <= threshold || n <= 1) {
    co_await sequential_sort(env, a);
    co_return;
  }
  const auto half = a.size() / 2;
  auto lo = a.alias(0, half);
  auto hi = a.alias(half, a.size());
  std::vector<Block> blocks;
  blocks.emplace_back([rt, t, n, lo](Env e) {
    return rt->call(e, kParMsort, {Value{t}, Value{n / 2}, Value{lo}});
  });
  blocks.emplace_back([rt, t, n, hi](Env e) {
    return rt->on(e, NodeId{t + n / 2}, kParMsort,
                  {Value{t + n / 2}, Value{n / 2}, Value{hi}});
  });
  co_await rt->par(env, std::move(blocks));
  std::vector<Value> parts{Value{a}, Value{lo}, Value{hi}};
  co_await rt->call(env, kMerge, std::move(parts));
}

void merge_sort_rec(std::span<Word> data, std::span<Word> scratch) {
  if (data.size() <= 1) return;
  const auto half = data.size() / 2;
  merge_sort_rec(data.first(half), scratch);
  merge_sort_rec(data.subspan(half), scratch);
  merge_into(data, data.first(half), data.subspan(half),
             scratch.first(data.size()));
}

void require_processors(const runtime::RuntimeConfig& config, unsigned p) {
  if (!std::has_single_bit(p)) {
    throw DomainError("p = " + std::to_string(p) + " is not a power of two");
  }
  if (p > (1u << config.dimension)) {
    throw DomainError("p = " + std::to_string(p) + " exceeds the " +
                      std::to_string(1u << config.dimension) + " cores of d=" +
                      std::to_string(config.dimension));
  }
}

RunChecks collect_checks(const runtime::Runtime& rt,
                         const std::map<std::uint32_t, std::size_t>& extra) {
  RunChecks c;
  for (const auto& s : rt.spawns()) {
    if (s.hops != 1) {
      c.single_hop = false;
      c.detail += "spawn " + std::to_string(s.guest.label) + "->" +
                  std::to_string(s.host.label) + " spans " + std::to_string(s.hops) +
                  " hops; ";
    }
  }
  auto cons = rt.check_conservation(extra);
  c.conservation = cons.ok();
  c.detail += cons.detail;
  c.trace_hash = rt.machine().sim().trace_hash();
  c.events = rt.machine().sim().events_dispatched();
  return c;
}

SortResult finish_sort(runtime::Runtime& rt, const ArraySlice& data,
                       std::vector<Word> input, std::uint64_t time_ns, unsigned p) {
  SortResult r;
  r.output = data.to_vector();
  r.time_ns = time_ns;
  r.p = p;
  r.cores_used = static_cast<unsigned>(rt.cores_used().size());
  r.sorted = std::is_sorted(r.output.begin(), r.output.end());
  std::sort(input.begin(), input.end());
  auto out_sorted = r.output;
  std::sort(out_sorted.begin(), out_sorted.end());
  r.permutation = out_sorted == input;
  r.spawns = rt.spawns();
  for (const auto& s : rt.samples()) {
    if (s.kind == "merge") r.merges.emplace_back(s.size, s.value_ns);
  }
  r.checks = collect_checks(rt, {{0u, data.size() * closure::kBytesPerWord}});
  r.trace = rt.machine().sim().trace_lines();
  return r;
}

}  // namespace

runtime::ProcedureRegistry make_registry(const ImageSizes& sizes) {
  runtime::ProcedureRegistry reg;
  reg.add({kNode, "node", sizes.node, {}, node_body, runtime::InitConstant::Spawn});
  reg.add({kDistribute, "distribute", sizes.distribute, {kNode, kDistribute},
           distribute_body, runtime::InitConstant::Distribute});
  reg.add({kMerge, "merge", sizes.merge, {}, merge_body, runtime::InitConstant::Spawn});
  reg.add({kSeqMsort, "seq-msort", sizes.seq_msort, {kSeqMsort, kMerge}, seq_msort_body,
           runtime::InitConstant::Spawn});
  reg.add({kParMsort, "par-msort", sizes.par_msort, {kParMsort, kMerge}, par_msort_body,
           runtime::InitConstant::Spawn});
  return reg;
}

void merge_into(std::span<Word> out, std::span<const Word> a,
                std::span<const Word> b, std::span<Word> scratch) {
  if (out.size() != a.size() + b.size() || scratch.size() < out.size()) {
    throw DomainError("merge: size mismatch");
  }
  std::size_t i = 0, j = 0, k = 0;
  while (i < a.size() && j < b.size()) {
    scratch[k++] = a[i] <= b[j] ? a[i++] : b[j++];
  }
  while (i < a.size()) scratch[k++] = a[i++];
  while (j < b.size()) scratch[k++] = b[j++];
  std::copy_n(scratch.begin(), out.size(), out.begin());
}

void merge_sort(std::span<Word> data) {
  std::vector<Word> scratch(data.size());
  merge_sort_rec(data, scratch);
}

std::size_t auto_threshold(std::size_t n, std::size_t p) {
  if (p == 0) throw DomainError("auto_threshold: p must be positive");
  return n / p;
}

unsigned creation_level(std::uint32_t t, unsigned log2_p) {
  if (t == 0) return 0;
  return log2_p - static_cast<unsigned>(std::countr_zero(t));
}

std::vector<LevelTime> level_times(std::span<const Arrival> arrivals, unsigned log2_p) {
  std::vector<std::uint64_t> latest(log2_p + 1, 0);
  for (const auto& a : arrivals) {
    if (a.level <= log2_p) latest[a.level] = std::max(latest[a.level], a.arrival_ns);
  }
  std::vector<LevelTime> out;
  std::uint64_t prev = latest[0];
  for (unsigned lvl = 1; lvl <= log2_p; ++lvl) {
    const auto cur = std::max(prev, latest[lvl]);
    out.push_back({lvl, cur, cur - prev});
    prev = cur;
  }
  return out;
}

void write_arrivals(std::ostream& out, std::span<const Arrival> arrivals) {
  out << "level,node,arrival_ns\n";
  for (const auto& a : arrivals) {
    out << a.level << "," << a.node << "," << a.arrival_ns << "\n";
  }
}

DistributeResult run_distribute(const runtime::RuntimeConfig& config, unsigned p) {
  require_processors(config, p);
  runtime::Runtime rt(config, make_registry());
  const auto done = rt.run(NodeId{0}, kDistribute, {Value{Word{0}}, Value{Word{p}}});

  DistributeResult r;
  r.p = p;
  const auto log2_p = static_cast<unsigned>(std::countr_zero(p));
  for (const auto& s : rt.samples()) {
    if (s.kind != "arrival") continue;
    r.arrivals.push_back({s.node.label, creation_level(s.node.label, log2_p), s.value_ns});
  }
  std::sort(r.arrivals.begin(), r.arrivals.end(),
            [](const Arrival& x, const Arrival& y) { return x.node < y.node; });
  r.levels = level_times(r.arrivals, log2_p);
  for (const auto& a : r.arrivals) r.populate_ns = std::max(r.populate_ns, a.arrival_ns);
  r.completion_ns = done.ns();
  r.spawns = rt.spawns();
  r.checks = collect_checks(rt, {});
  r.trace = rt.machine().sim().trace_lines();
  r.protocol_trace = rt.protocol_log().lines();
  return r;
}

SortResult run_par_msort(const runtime::RuntimeConfig& config, std::vector<Word> input,
                         unsigned p) {
  require_processors(config, p);
  if (input.size() < p) {
    throw DomainError("par-msort needs n >= p (n = " + std::to_string(input.size()) +
                      ", p = " + std::to_string(p) + ")");
  }
  runtime::Runtime rt(config, make_registry());
  auto data = rt.make_array(NodeId{0}, input);
  const auto done =
      rt.run(NodeId{0}, kParMsort, {Value{Word{0}}, Value{Word{p}}, Value{data}});
  return finish_sort(rt, data, std::move(input), done.ns(), p);
}

SortResult run_seq_msort(const runtime::RuntimeConfig& config, std::vector<Word> input) {
  runtime::Runtime rt(config, make_registry());
  auto data = rt.make_array(NodeId{0}, input);
  const auto done = rt.run(NodeId{0}, kSeqMsort, {Value{data}});
  return finish_sort(rt, data, std::move(input), done.ns(), 1);
}

std::uint64_t time_merge(const runtime::RuntimeConfig& config, std::size_t n) {
  runtime::Runtime rt(config, make_registry());
  std::vector<Word> words(n);
  const auto half = n / 2;
  for (std::size_t i = 0; i < half; ++i) words[i] = static_cast<Word>(2 * i);
  for (std::size_t i = half; i < n; ++i) words[i] = static_cast<Word>(2 * (i - half) + 1);
  auto r = rt.make_array(NodeId{0}, words);
  const auto done = rt.run(NodeId{0}, kMerge,
                           {Value{r}, Value{r.alias(0, half)}, Value{r.alias(half, n)}});
  return done.ns();
}

}  // namespace hcsim::programs
