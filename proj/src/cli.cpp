#include "hcsim/cli.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hcsim/costmodel.hpp"
#include "hcsim/error.hpp"
#include "hcsim/programs.hpp"

namespace hcsim::cli {

namespace {

using Row = nlohmann::ordered_json;
using costmodel::Measurement;
using runtime::RuntimeConfig;

struct Table {
  std::vector<std::string> columns;
  std::vector<Row> rows;
};

struct Options {
  unsigned d = 6;
  std::string constants_file;
  std::string seq_cost = "closed";
  double recurrence_base_ns = 0.0;
  std::string chip_dims = "auto";
  std::string format = "csv";
  std::string out_file;
  std::string gnuplot_file;
  bool trace = false;
  std::uint64_t seed = 1;

  std::string program = "distribute";
  std::string p;
  std::string n = "64";
  std::string threshold = "auto";
  std::string formula = "t_snp";
  std::string measurements;
  std::string arrivals_file;
  unsigned trials = 40;
};

std::uint64_t parse_count(const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("'" + text + "' is not a non-negative integer");
  }
  return v;
}

std::vector<std::uint64_t> parse_count_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = parse_count(text.substr(0, dots));
    const auto hi = parse_count(text.substr(dots + 2));
    if (lo > hi) throw ConfigError("empty range '" + text + "'");
    for (std::uint64_t v = std::bit_ceil(std::max<std::uint64_t>(lo, 1)); v <= hi; v *= 2) {
      out.push_back(v);
    }
    if (lo == 0) out.insert(out.begin(), 0);
    if (out.empty()) throw ConfigError("no power of two in '" + text + "'");
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_count(item));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::optional<std::vector<unsigned>> parse_chip_dims(const std::string& text) {
  if (text == "auto") return std::nullopt;
  if (text == "none" || text.empty()) return std::vector<unsigned>{};
  std::vector<unsigned> dims;
  for (auto v : parse_count_list(text)) dims.push_back(static_cast<unsigned>(v));
  return dims;
}

RuntimeConfig make_config(const Options& o) {
  RuntimeConfig c;
  c.dimension = o.d;
  c.chip_dims = parse_chip_dims(o.chip_dims);
  if (!o.constants_file.empty()) {
    std::ifstream in(o.constants_file);
    if (!in) throw ConfigError("cannot open constants file '" + o.constants_file + "'");
    c.constants = costmodel::read_constants(in);
  }
  c.constants.validate();
  c.seq_cost = costmodel::parse_seq_cost_mode(o.seq_cost);
  c.recurrence_base_ns = o.recurrence_base_ns;
  c.keep_trace = o.trace;
  c.make_topology();
  return c;
}

costmodel::Model make_model(const RuntimeConfig& c) {
  return costmodel::Model(c.constants, c.seq_cost, c.recurrence_base_ns);
}

std::uint64_t ns(double t) { return static_cast<std::uint64_t>(std::llround(t)); }

std::string micros(double t_ns) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2fus", t_ns / 1000.0);
  return buf;
}

std::vector<programs::Word> random_input(std::size_t n, std::uint64_t seed) {
  std::mt19937 gen(static_cast<std::mt19937::result_type>(seed));
  std::vector<programs::Word> v(n);
  for (auto& w : v) w = static_cast<programs::Word>(gen() >> 1);
  return v;
}

std::size_t resolve_threshold(const std::string& text, std::size_t n, unsigned p) {
  if (text == "auto") return programs::auto_threshold(n, p);
  return static_cast<std::size_t>(parse_count(text));
}

void require_power_of_two(std::uint64_t p) {
  if (!std::has_single_bit(p)) {
    throw DomainError("p = " + std::to_string(p) + " is not a power of two");
  }
}

std::string csv_cell(const Row& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

void emit(const Table& t, const std::string& format, std::ostream& out) {
  if (format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : t.rows) arr.push_back(r);
    out << arr.dump(2) << "\n";
    return;
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    out << (i ? "," : "") << t.columns[i];
  }
  out << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      out << (i ? "," : "") << csv_cell(r.contains(t.columns[i]) ? r[t.columns[i]] : Row());
    }
    out << "\n";
  }
}

/// Writes the table to --out or `out`.
void write_table(const Table& t, const Options& o, std::ostream& out) {
  if (o.out_file.empty()) {
    emit(t, o.format, out);
    return;
  }
  std::ofstream f(o.out_file);
  if (!f) throw ConfigError("cannot write '" + o.out_file + "'");
  emit(t, o.format, f);
}

void write_gnuplot(const Options& o, const std::string& x,
                   const std::vector<std::pair<std::string, std::string>>& series) {
  if (o.gnuplot_file.empty()) return;
  std::ofstream f(o.gnuplot_file);
  if (!f) throw ConfigError("cannot write '" + o.gnuplot_file + "'");
  const std::string data = o.out_file.empty() ? "data.csv" : o.out_file;
  f << "set datafile separator ','\n"
    << "set xlabel '" << x << "'\n"
    << "set ylabel 'time (us)'\n"
    << "set logscale x 2\n"
    << "set key top left\n"
    << "plot ";
  for (std::size_t i = 0; i < series.size(); ++i) {
    f << (i ? ", \\\n     " : "") << "'" << data << "' using (column('" << x
      << "')):(column('" << series[i].first << "')/1000.0) with linespoints title '"
      << series[i].second << "'";
  }
  f << "\n";
}

void write_trace(const Options& o, const std::vector<std::string>& lines,
                 std::uint64_t hash, std::ostream& err) {
  if (!o.trace) return;
  std::ostringstream h;
  h << "trace_hash=0x" << std::hex << std::setw(16) << std::setfill('0') << hash;
  if (o.out_file.empty()) {
    for (const auto& l : lines) err << l << "\n";
  } else {
    std::ofstream f(o.out_file + ".trace");
    if (!f) throw ConfigError("cannot write '" + o.out_file + ".trace'");
    for (const auto& l : lines) f << l << "\n";
    f << h.str() << "\n";
  }
  err << h.str() << "\n";
}

Row blank() { return Row(nullptr); }

// ---------------------------------------------------------------- sim

int cmd_sim(const Options& o, std::ostream& out, std::ostream& err) {
  auto cfg = make_config(o);
  const auto model = make_model(cfg);
  Table t{{"record", "program", "n", "p", "level", "time_ns", "spawns", "sorted"}, {}};

  if (o.program == "distribute") {
    const std::uint64_t p = o.p.empty() ? (1ull << o.d) : parse_count(o.p);
    require_power_of_two(p);
    auto r = programs::run_distribute(cfg, static_cast<unsigned>(p));
    const auto log2_p = static_cast<unsigned>(std::countr_zero(p));
    for (const auto& lvl : r.levels) {
      std::size_t spawned = 0;
      for (const auto& s : r.spawns) {
        if (programs::creation_level(s.host.label, log2_p) == lvl.level) ++spawned;
      }
      t.rows.push_back({{"record", "level"}, {"program", "distribute"}, {"n", 0},
                        {"p", p}, {"level", lvl.level}, {"time_ns", lvl.delta_ns},
                        {"spawns", spawned}, {"sorted", blank()}});
    }
    t.rows.push_back({{"record", "total"}, {"program", "distribute"}, {"n", 0}, {"p", p},
                      {"level", log2_p}, {"time_ns", r.populate_ns},
                      {"spawns", r.spawns.size()}, {"sorted", blank()}});
    const double predicted = model.distribute_time(static_cast<double>(p));
    t.rows.push_back({{"record", "model"}, {"program", "distribute"}, {"n", 0}, {"p", p},
                      {"level", log2_p}, {"time_ns", ns(predicted)}, {"spawns", blank()},
                      {"sorted", blank()}});
    write_table(t, o, out);
    if (!o.arrivals_file.empty()) {
      std::ofstream f(o.arrivals_file);
      if (!f) throw ConfigError("cannot write '" + o.arrivals_file + "'");
      programs::write_arrivals(f, r.arrivals);
    }
    err << "distribute p=" << p << ": " << micros(static_cast<double>(r.populate_ns))
        << " (model " << micros(predicted) << ")\n";
    write_trace(o, r.trace, r.checks.trace_hash, err);
    return kOk;
  }
  if (o.program != "msort") throw ConfigError("unknown program '" + o.program + "'");

  const auto n = static_cast<std::size_t>(parse_count(o.n));
  const std::uint64_t p = o.p.empty() ? 1 : parse_count(o.p);
  require_power_of_two(p);
  cfg.sort_threshold = resolve_threshold(o.threshold, n, static_cast<unsigned>(p));
  auto r = programs::run_par_msort(cfg, random_input(n, o.seed), static_cast<unsigned>(p));
  const bool ok = r.sorted && r.permutation;
  t.rows.push_back({{"record", "total"}, {"program", "msort"}, {"n", n},
                    {"p", r.cores_used}, {"level", blank()}, {"time_ns", r.time_ns},
                    {"spawns", r.spawns.size()}, {"sorted", ok}});
  if (o.threshold == "auto") {
    t.rows.push_back({{"record", "model"}, {"program", "msort"}, {"n", n}, {"p", p},
                      {"level", blank()},
                      {"time_ns", ns(model.parallel_sort_time(static_cast<double>(n),
                                                              static_cast<double>(p)))},
                      {"spawns", blank()}, {"sorted", blank()}});
  }
  write_table(t, o, out);
  err << "msort n=" << n << " p=" << p << ": " << micros(static_cast<double>(r.time_ns))
      << (ok ? ", sorted" : ", NOT SORTED") << "\n";
  write_trace(o, r.trace, r.checks.trace_hash, err);
  return ok ? kOk : kPropertyFailure;
}

// -------------------------------------------------------------- sweep

std::vector<Measurement> simulate_measurements(const RuntimeConfig& cfg,
                                               std::uint64_t max_n, unsigned max_p,
                                               std::uint64_t seed) {
  std::vector<Measurement> rows;
  for (std::uint64_t n = 2; n <= max_n; n *= 2) {
    rows.push_back({Measurement::Kind::Merge, static_cast<double>(n), 1,
                    static_cast<double>(programs::time_merge(cfg, n))});
  }
  for (std::uint64_t n = 2; n <= max_n; n *= 2) {
    auto r = programs::run_seq_msort(cfg, random_input(n, seed + n));
    rows.push_back({Measurement::Kind::SequentialSort, static_cast<double>(n), 1,
                    static_cast<double>(r.time_ns)});
  }
  for (unsigned p = 2; p <= max_p; p *= 2) {
    auto r = programs::run_distribute(cfg, p);
    rows.push_back({Measurement::Kind::Distribute, 0, static_cast<double>(p),
                    static_cast<double>(r.populate_ns)});
  }
  return rows;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
  auto cfg = make_config(o);
  const auto model = make_model(cfg);
  const unsigned cores = 1u << o.d;
  Table t;

  if (o.program == "distribute") {
    const auto ps = parse_processor_list(o.p.empty() ? "1.." + std::to_string(cores) : o.p);
    t.columns = {"program", "p", "sim_time_ns", "t_d_ns", "spawns"};
    for (unsigned p : ps) {
      auto r = programs::run_distribute(cfg, p);
      t.rows.push_back({{"program", "distribute"}, {"p", p}, {"sim_time_ns", r.populate_ns},
                        {"t_d_ns", ns(model.distribute_time(p))},
                        {"spawns", r.spawns.size()}});
    }
    write_table(t, o, out);
    write_gnuplot(o, "p", {{"sim_time_ns", "simulated"}, {"t_d_ns", "model"}});
  } else if (o.program == "msort") {
    const auto n = static_cast<std::size_t>(parse_count(o.n));
    std::vector<unsigned> ps;
    if (o.p.empty()) {
      ps = parse_processor_list("1.." + std::to_string(std::min<std::uint64_t>(n, cores)));
    } else {
      ps = parse_processor_list(o.p);
    }
    for (unsigned p : ps) {
      if (p > n) {
        throw DomainError("sweep needs n >= p (n = " + std::to_string(n) +
                          ", p = " + std::to_string(p) + ")");
      }
    }
    const auto input = random_input(n, o.seed);
    t.columns = {"program", "n", "p", "threshold", "sim_time_ns", "t_snp_ns",
                 "t_min_ns", "t_min_nodata_ns", "spawns", "sorted"};
    std::uint64_t best_time = 0;
    unsigned best_p = 0;
    bool all_ok = true;
    for (unsigned p : ps) {
      auto run_cfg = cfg;
      run_cfg.sort_threshold = resolve_threshold(o.threshold, n, p);
      auto r = programs::run_par_msort(run_cfg, input, p);
      const bool ok = r.sorted && r.permutation;
      all_ok = all_ok && ok;
      const double dn = static_cast<double>(n);
      t.rows.push_back({{"program", "msort"}, {"n", n}, {"p", p},
                        {"threshold", run_cfg.sort_threshold}, {"sim_time_ns", r.time_ns},
                        {"t_snp_ns", ns(model.parallel_sort_time(dn, p))},
                        {"t_min_ns", ns(model.lower_bound(dn, p))},
                        {"t_min_nodata_ns", ns(model.lower_bound(0, p))},
                        {"spawns", r.spawns.size()}, {"sorted", ok}});
      if (best_p == 0 || r.time_ns < best_time) {
        best_time = r.time_ns;
        best_p = p;
      }
    }
    write_table(t, o, out);
    write_gnuplot(o, "p",
                  {{"sim_time_ns", "simulated"}, {"t_snp_ns", "model"}, {"t_min_ns", "T_min"}});
    err << "minimum at p=" << best_p << " (" << micros(static_cast<double>(best_time))
        << ")\n";
    if (!all_ok) {
      err << "property failed: sortedness\n";
      return kPropertyFailure;
    }
  } else {
    throw ConfigError("unknown program '" + o.program + "'");
  }

  if (!o.measurements.empty()) {
    const auto n = o.program == "msort" ? parse_count(o.n) : 64;
    std::ofstream f(o.measurements);
    if (!f) throw ConfigError("cannot write '" + o.measurements + "'");
    auto rows = simulate_measurements(cfg, n, cores, o.seed);
    costmodel::write_measurements(f, rows);
  }
  return kOk;
}

// ------------------------------------------------------------ predict

int cmd_predict(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = make_config(o);
  const auto model = make_model(cfg);
  static const std::vector<std::string> formulas{"t_d", "t_snp", "t_min", "t_min_nodata",
                                                 "t_s"};
  if (std::find(formulas.begin(), formulas.end(), o.formula) == formulas.end()) {
    throw ConfigError("unknown formula '" + o.formula +
                      "' (t_d, t_snp, t_min, t_min_nodata, t_s)");
  }
  const auto ns_list = parse_count_list(o.n);
  const auto ps = o.formula == "t_s" ? std::vector<unsigned>{1}
                                     : parse_processor_list(o.p.empty() ? "1" : o.p);
  Table t{{"n", "p", "formula", "time_ns"}, {}};
  for (auto n : ns_list) {
    const double dn = static_cast<double>(n);
    for (unsigned p : ps) {
      double v = 0;
      if (o.formula == "t_d") {
        v = model.distribute_time(p);
      } else if (o.formula == "t_snp") {
        v = model.parallel_sort_time(dn, p);
        const double share = model.lower_bound(dn, p) / v;
        err << "n=" << n << " p=" << p << ": " << micros(v) << ", t_min share "
            << std::fixed << std::setprecision(1) << 100.0 * share << "%\n"
            << std::defaultfloat;
      } else if (o.formula == "t_min") {
        v = model.lower_bound(dn, p);
      } else if (o.formula == "t_min_nodata") {
        v = model.lower_bound(0, p);
      } else {
        v = model.sequential_sort_time(dn);
      }
      t.rows.push_back({{"n", n}, {"p", p}, {"formula", o.formula}, {"time_ns", ns(v)}});
    }
  }
  write_table(t, o, out);
  write_gnuplot(o, "p", {{"time_ns", o.formula}});
  return kOk;
}

// ---------------------------------------------------------- calibrate

int cmd_calibrate(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.measurements.empty()) throw ConfigError("calibrate needs a measurements file");
  std::ifstream in(o.measurements);
  if (!in) throw ConfigError("cannot open '" + o.measurements + "'");
  const auto rows = costmodel::read_measurements(in);
  if (rows.empty()) throw ConfigError("'" + o.measurements + "' holds no measurements");
  costmodel::CostConstants base;
  if (!o.constants_file.empty()) {
    std::ifstream cf(o.constants_file);
    if (!cf) throw ConfigError("cannot open constants file '" + o.constants_file + "'");
    base = costmodel::read_constants(cf);
  }
  const auto cal = costmodel::calibrate(rows, base);
  if (cal.has_merge) {
    err << "t_m: C_a=" << cal.constants.merge_word_ns << " C_b=" << cal.constants.merge_call_ns
        << " residual=" << cal.merge.residual_norm << " (" << cal.merge.points << " points)\n";
  }
  if (cal.has_distribute) {
    err << "t_d: C_j=" << cal.constants.distribute_init_ns
        << " residual=" << cal.distribute.residual_norm << " (" << cal.distribute.points
        << " points)\n";
  }
  if (cal.has_sort) {
    err << "t_s1: C_c=" << cal.constants.sort_nlogn_ns << " C_d=" << cal.constants.sort_word_ns
        << " residual=" << cal.sort.residual_norm << " (" << cal.sort.points << " points)\n";
  }
  if (o.out_file.empty()) {
    costmodel::write_constants(out, cal.constants);
  } else {
    std::ofstream f(o.out_file);
    if (!f) throw ConfigError("cannot write '" + o.out_file + "'");
    costmodel::write_constants(f, cal.constants);
  }
  return kOk;
}

// ------------------------------------------------------------- verify

struct Property {
  std::string name;
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

int cmd_verify(const Options& o, std::ostream& out, std::ostream&) {
  auto cfg = make_config(o);
  const auto model = make_model(cfg);
  std::vector<unsigned> ps;
  if (!o.p.empty()) {
    for (auto p : parse_count_list(o.p)) {
      require_power_of_two(p);
      if (p > (1ull << o.d)) throw DomainError("p = " + std::to_string(p) + " exceeds 2^d");
      ps.push_back(static_cast<unsigned>(p));
    }
  } else {
    for (unsigned d = 0; d <= o.d; ++d) ps.push_back(1u << d);
  }

  Property hop{"single-hop spawns", true, ""}, reduction{"p=1 reduction", true, ""},
      sorted{"sortedness", true, ""}, determinism{"determinism", true, ""},
      conservation{"conservation", true, ""};
  std::mt19937_64 gen(o.seed);
  std::size_t spawns = 0;

  auto note_checks = [&](const programs::RunChecks& c, const std::string& what) {
    if (!c.single_hop) hop.fail(what + ": " + c.detail);
    if (!c.conservation) conservation.fail(what + ": " + c.detail);
  };

  for (unsigned p : ps) {
    auto a = programs::run_distribute(cfg, p);
    auto b = programs::run_distribute(cfg, p);
    spawns += a.spawns.size();
    note_checks(a.checks, "distribute p=" + std::to_string(p));
    if (a.checks.trace_hash != b.checks.trace_hash || a.populate_ns != b.populate_ns) {
      determinism.fail("distribute p=" + std::to_string(p) + " differs between runs");
    }
    if (a.arrivals.size() != p) {
      hop.fail("distribute p=" + std::to_string(p) + " reached " +
               std::to_string(a.arrivals.size()) + " nodes");
    }
  }

  for (unsigned trial = 0; trial < o.trials; ++trial) {
    const unsigned p = ps[trial % ps.size()];
    const std::size_t n = p + gen() % (4 * p + 60);
    const auto input = random_input(n, gen());
    auto scfg = cfg;
    const std::size_t choices[] = {programs::auto_threshold(n, p), 1, n};
    scfg.sort_threshold = choices[trial % 3];
    auto r = programs::run_par_msort(scfg, input, p);
    spawns += r.spawns.size();
    const std::string what = "par-msort n=" + std::to_string(n) + " p=" + std::to_string(p);
    note_checks(r.checks, what);
    if (!r.sorted || !r.permutation) sorted.fail(what);
    if (trial % 8 == 0) {
      auto again = programs::run_par_msort(scfg, input, p);
      if (again.checks.trace_hash != r.checks.trace_hash || again.output != r.output ||
          again.time_ns != r.time_ns) {
        determinism.fail(what + " differs between runs");
      }
    }
    if (p == 1) {
      auto seq = programs::run_seq_msort(scfg, input);
      if (seq.time_ns != r.time_ns || seq.output != r.output) {
        reduction.fail(what + ": par " + std::to_string(r.time_ns) + "ns vs seq " +
                       std::to_string(seq.time_ns) + "ns");
      }
    }
  }
  for (std::uint64_t n = 1; n <= (1u << 16); n = n * 3 + 1) {
    const double dn = static_cast<double>(n);
    if (model.parallel_sort_time(dn, 1) != model.sequential_sort_time(dn)) {
      reduction.fail("model n=" + std::to_string(n));
    }
  }

  bool all = true;
  for (const auto* prop : {&hop, &reduction, &sorted, &determinism, &conservation}) {
    out << (prop->ok ? "PASS " : "FAIL ") << prop->name;
    if (!prop->ok) out << ": " << prop->detail;
    out << "\n";
    all = all && prop->ok;
  }
  out << spawns << " spawns checked\n";
  return all ? kOk : kPropertyFailure;
}

void add_common(CLI::App* app, Options& o) {
  app->add_option("--d", o.d, "hypercube dimension")->check(CLI::Range(0u, 20u));
  app->add_option("--constants", o.constants_file, "constants file (key=value)");
  app->add_option("--seq-cost", o.seq_cost, "sequential cost mode")
      ->check(CLI::IsMember({"closed", "recurrence"}));
  app->add_option("--recurrence-base", o.recurrence_base_ns,
                  "leaf cost of the recurrence mode in ns");
  app->add_option("--chip-dims", o.chip_dims,
                  "on-chip link dimensions: auto, none or a list such as 4,5");
  app->add_option("--format", o.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--out", o.out_file, "write the table to FILE");
  app->add_option("--seed", o.seed, "seed for generated inputs");
}

}  // namespace

std::vector<unsigned> parse_processor_list(const std::string& text) {
  std::vector<unsigned> out;
  for (auto v : parse_count_list(text)) {
    require_power_of_two(v);
    out.push_back(static_cast<unsigned>(v));
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete-event simulator of process creation on a hypercube", "hcsim"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("sim", "run one simulation");
  add_common(sim, o);
  sim->add_option("--program", o.program)->check(CLI::IsMember({"distribute", "msort"}));
  sim->add_option("--p", o.p, "processor count (distribute: 2^d by default)");
  sim->add_option("--n", o.n, "input words for msort");
  sim->add_option("--threshold", o.threshold, "auto (n/p) or a word count");
  sim->add_flag("--trace", o.trace, "dump the event trace and its hash");
  sim->add_option("--arrivals", o.arrivals_file,
                  "write distribute's level,node,arrival_ns log to FILE");

  auto* sweep = app.add_subcommand("sweep", "simulate over a range of processor counts");
  add_common(sweep, o);
  sweep->add_option("--program", o.program)->check(CLI::IsMember({"distribute", "msort"}));
  sweep->add_option("--p", o.p, "processor list or range such as 1..64");
  sweep->add_option("--n", o.n, "input words for msort");
  sweep->add_option("--threshold", o.threshold, "auto (n/p) or a word count");
  sweep->add_option("--measurements", o.measurements,
                    "also write t_m, t_s1 and t_d calibration samples to FILE");
  sweep->add_option("--gnuplot", o.gnuplot_file, "also write a gnuplot script to FILE");

  auto* predict = app.add_subcommand("predict", "evaluate the cost model");
  add_common(predict, o);
  predict->add_option("--formula", o.formula, "t_d, t_snp, t_min, t_min_nodata or t_s");
  predict->add_option("--n", o.n, "input words: a list or range");
  predict->add_option("--p", o.p, "processor list or range");
  predict->add_option("--gnuplot", o.gnuplot_file, "also write a gnuplot script to FILE");

  auto* calibrate = app.add_subcommand("calibrate", "fit constants to measurements");
  calibrate->add_option("--measurements", o.measurements, "CSV with kind,n,p,time_ns");
  calibrate->add_option("--constants", o.constants_file, "constants for unfitted models");
  calibrate->add_option("--out", o.out_file, "write the constants to FILE");

  auto* verify = app.add_subcommand("verify", "run the property suites");
  add_common(verify, o);
  verify->add_option("--p", o.p, "restrict to these processor counts");
  verify->add_option("--trials", o.trials, "random par-msort runs");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*sim) return cmd_sim(o, out, err);
    if (*sweep) return cmd_sweep(o, out, err);
    if (*predict) return cmd_predict(o, out, err);
    if (*calibrate) return cmd_calibrate(o, out, err);
    return cmd_verify(o, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
  } catch (const SingularFit& e) {
    err << "insufficient data: " << e.what() << "\n";
  } catch (const NoRoot& e) {
    err << "no root: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kPropertyFailure;
  }
  return kUsageError;
}

}  // namespace hcsim::cli
