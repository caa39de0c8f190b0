#include "hcsim/costmodel.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "hcsim/error.hpp"

namespace hcsim::costmodel {

namespace {

// log2 that is exact for powers of two regardless of libm quality.
double log2_of(double x) {
  int exp = 0;
  double mant = std::frexp(x, &exp);
  if (mant == 0.5) return static_cast<double>(exp - 1);
  return std::log2(x);
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_number(const std::string& text, std::size_t line) {
  const std::string t = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ParseError("line " + std::to_string(line) + ": bad number '" + t + "'");
  }
  return v;
}

struct KeyBinding {
  const char* key;
  double CostConstants::*field;
};

constexpr KeyBinding kKeys[] = {
    {"C_i_ns", &CostConstants::spawn_init_ns},
    {"C_j_ns", &CostConstants::distribute_init_ns},
    {"C_o_ns", &CostConstants::level_overhead_ns},
    {"C_w_ns", &CostConstants::word_ns},
    {"C_l", &CostConstants::path_factor},
    {"C_a_ns", &CostConstants::merge_word_ns},
    {"C_b_ns", &CostConstants::merge_call_ns},
    {"C_c_ns", &CostConstants::sort_nlogn_ns},
    {"C_d_ns", &CostConstants::sort_word_ns},
};

}  // namespace

void CostConstants::validate() const {
  for (const auto& k : kKeys) {
    const double v = this->*k.field;
    const bool zero_ok = k.field == &CostConstants::level_overhead_ns;
    if (!std::isfinite(v) || v < 0.0 || (v == 0.0 && !zero_ok)) {
      throw ConfigError(std::string("constant ") + k.key + " = " +
                        format_double(v) + " must be positive");
    }
  }
}

std::string to_string(SeqCostMode m) {
  return m == SeqCostMode::ClosedForm ? "closed" : "recurrence";
}

SeqCostMode parse_seq_cost_mode(const std::string& s) {
  if (s == "closed") return SeqCostMode::ClosedForm;
  if (s == "recurrence") return SeqCostMode::Recurrence;
  throw ConfigError("unknown sequential cost mode '" + s +
                    "' (expected closed or recurrence)");
}

CostConstants read_constants(std::istream& in, const CostConstants& base) {
  CostConstants c = base;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const KeyBinding* match = nullptr;
    for (const auto& k : kKeys) {
      if (key == k.key) match = &k;
    }
    if (!match) {
      throw ParseError("line " + std::to_string(lineno) + ": unknown key '" +
                       key + "'");
    }
    c.*(match->field) = parse_number(line.substr(eq + 1), lineno);
  }
  return c;
}

void write_constants(std::ostream& out, const CostConstants& c) {
  for (const auto& k : kKeys) {
    out << k.key << "=" << format_double(c.*k.field) << "\n";
  }
}

bool is_power_of_two(double p) {
  if (!(p >= 1.0) || p != std::floor(p)) return false;
  int exp = 0;
  return std::frexp(p, &exp) == 0.5;
}

Model::Model(CostConstants c, SeqCostMode mode, double recurrence_base_ns)
    : c_(c), mode_(mode), base_ns_(recurrence_base_ns) {
  c_.validate();
  if (!(base_ns_ >= 0.0)) throw ConfigError("recurrence base must be >= 0");
}

void Model::require_power_of_two(double p, const char* what) const {
  if (!is_power_of_two(p)) {
    throw DomainError(std::string(what) + ": p = " + format_double(p) +
                      " is not a positive power of two");
  }
}

double Model::spawn_time(double n, double m, double o, double path_factor) const {
  return (c_.spawn_init_ns + c_.word_ns * n + c_.word_ns * m + c_.word_ns * o) *
         path_factor;
}

double Model::sort_spawn_time(double n) const {
  return c_.spawn_init_ns + 2.0 * c_.word_ns * n;
}

double Model::distribute_time(double p) const {
  require_power_of_two(p, "distribute_time");
  return (c_.distribute_init_ns + c_.level_overhead_ns) * log2_of(p);
}

double Model::merge_time(double n) const {
  return c_.merge_word_ns * n + c_.merge_call_ns;
}

double Model::sequential_sort_closed(double n) const {
  if (n <= 0.0) return 0.0;
  return n * (c_.sort_nlogn_ns * log2_of(n) + c_.sort_word_ns);
}

double Model::sequential_sort_recurrence_closed(double n, double base_ns) const {
  if (n <= 0.0) return 0.0;
  return c_.merge_word_ns * n * log2_of(n) + c_.merge_call_ns * (n - 1.0) +
         base_ns * n;
}

double Model::sequential_sort_time(double n) const {
  return mode_ == SeqCostMode::ClosedForm
             ? sequential_sort_closed(n)
             : sequential_sort_recurrence_closed(n, base_ns_);
}

double Model::parallel_sort_time(double n, double p) const {
  require_power_of_two(p, "parallel_sort_time");
  if (n < p) {
    throw DomainError("parallel_sort_time: n = " + format_double(n) +
                      " smaller than p = " + format_double(p));
  }
  const double per_leaf = n / p;
  return 2.0 * per_leaf * (p - 1.0) * (c_.word_ns + c_.merge_word_ns) +
         (c_.spawn_init_ns + c_.merge_call_ns) * log2_of(p) +
         sequential_sort_time(per_leaf);
}

double Model::lower_bound(double n, double p) const {
  require_power_of_two(p, "lower_bound");
  if (n < 0.0) throw DomainError("lower_bound: negative n");
  return c_.spawn_init_ns * log2_of(p) + c_.word_ns * (2.0 * n / p) * (p - 1.0);
}

double Model::inflection_point(double tolerance) const {
  auto excess = [this](double n) {
    return n * (c_.sort_nlogn_ns * std::log2(n) + c_.sort_word_ns) -
           sort_spawn_time(n);
  };
  double lo = 1.0;
  if (excess(lo) >= 0.0) return lo;
  double hi = 2.0;
  constexpr double kLimit = 4611686018427387904.0;  // 2^62
  while (excess(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > kLimit) {
      throw NoRoot("no crossing between spawn and sequential cost below 2^62 words");
    }
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

unsigned long long Model::best_processor_count(unsigned long long n) const {
  if (n == 0) throw DomainError("best_processor_count: n must be >= 1");
  unsigned long long best = 1;
  double best_time = parallel_sort_time(static_cast<double>(n), 1.0);
  for (unsigned long long p = 2; p <= n; p *= 2) {
    const double t = parallel_sort_time(static_cast<double>(n), static_cast<double>(p));
    if (t < best_time) {
      best_time = t;
      best = p;
    }
    if (p > (~0ULL >> 1)) break;
  }
  return best;
}

double sequential_sort_recurrence(const Model& m, unsigned long long n,
                                  double base_ns) {
  std::map<unsigned long long, double> memo;
  auto eval = [&](auto&& self, unsigned long long k) -> double {
    if (k == 0) return 0.0;
    if (k == 1) return base_ns;
    if (auto it = memo.find(k); it != memo.end()) return it->second;
    const double v = self(self, k / 2) + self(self, k - k / 2) +
                     m.merge_time(static_cast<double>(k));
    memo.emplace(k, v);
    return v;
  };
  return eval(eval, n);
}

LinearFit fit_linear(std::span<const Point> points) {
  if (points.size() < 2) throw SingularFit("linear fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    sxx += (p.x - mx) * (p.x - mx);
    sxy += (p.x - mx) * (p.y - my);
  }
  if (sxx == 0.0) throw SingularFit("linear fit needs at least two distinct x");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = points.size();
  double ss = 0.0;
  for (const auto& p : points) {
    const double r = p.y - (f.slope * p.x + f.intercept);
    ss += r * r;
  }
  f.residual_norm = std::sqrt(ss);
  return f;
}

LinearFit fit_proportional(std::span<const Point> points) {
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    sxx += p.x * p.x;
    sxy += p.x * p.y;
  }
  if (sxx == 0.0) throw SingularFit("proportional fit needs a non-zero x");
  LinearFit f;
  f.slope = sxy / sxx;
  f.points = points.size();
  double ss = 0.0;
  for (const auto& p : points) {
    const double r = p.y - f.slope * p.x;
    ss += r * r;
  }
  f.residual_norm = std::sqrt(ss);
  return f;
}

std::string to_string(Measurement::Kind k) {
  switch (k) {
    case Measurement::Kind::Merge:
      return "t_m";
    case Measurement::Kind::Distribute:
      return "t_d";
    case Measurement::Kind::SequentialSort:
      return "t_s1";
  }
  return "?";
}

std::vector<Measurement> read_measurements(std::istream& in) {
  std::vector<Measurement> rows;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(trim(col));
    if (!header_seen) {
      header_seen = true;
      if (cols == std::vector<std::string>{"kind", "n", "p", "time_ns"}) continue;
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected header kind,n,p,time_ns");
    }
    if (cols.size() != 4) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 4 columns, got " +
                       std::to_string(cols.size()));
    }
    Measurement m{};
    if (cols[0] == "t_m") {
      m.kind = Measurement::Kind::Merge;
    } else if (cols[0] == "t_d") {
      m.kind = Measurement::Kind::Distribute;
    } else if (cols[0] == "t_s1") {
      m.kind = Measurement::Kind::SequentialSort;
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown kind '" +
                       cols[0] + "'");
    }
    m.n = parse_number(cols[1], lineno);
    m.p = parse_number(cols[2], lineno);
    m.time_ns = parse_number(cols[3], lineno);
    rows.push_back(m);
  }
  if (!header_seen) throw ParseError("empty measurements file");
  return rows;
}

void write_measurements(std::ostream& out, std::span<const Measurement> rows) {
  out << "kind,n,p,time_ns\n";
  for (const auto& m : rows) {
    out << to_string(m.kind) << "," << format_double(m.n) << ","
        << format_double(m.p) << "," << format_double(m.time_ns) << "\n";
  }
}

Calibration calibrate(std::span<const Measurement> rows, const CostConstants& base) {
  if (rows.empty()) throw Error("no measurements to calibrate from");
  std::vector<Point> merge, dist, sort;
  for (const auto& m : rows) {
    switch (m.kind) {
      case Measurement::Kind::Merge:
        merge.push_back({m.n, m.time_ns});
        break;
      case Measurement::Kind::Distribute:
        dist.push_back({log2_of(m.p), m.time_ns});
        break;
      case Measurement::Kind::SequentialSort:
        if (m.n < 1.0) throw DomainError("t_s1 sample with n < 1");
        sort.push_back({log2_of(m.n), m.time_ns / m.n});
        break;
    }
  }
  Calibration cal;
  cal.constants = base;
  if (!merge.empty()) {
    cal.merge = fit_linear(merge);
    cal.constants.merge_word_ns = cal.merge.slope;
    cal.constants.merge_call_ns = cal.merge.intercept;
    cal.has_merge = true;
  }
  if (!dist.empty()) {
    if (dist.size() < 2) throw SingularFit("t_d needs at least two samples");
    cal.distribute = fit_proportional(dist);
    cal.constants.distribute_init_ns = cal.distribute.slope - base.level_overhead_ns;
    cal.has_distribute = true;
  }
  if (!sort.empty()) {
    cal.sort = fit_linear(sort);
    cal.constants.sort_nlogn_ns = cal.sort.slope;
    cal.constants.sort_word_ns = cal.sort.intercept;
    cal.has_sort = true;
  }
  return cal;
}

}  // namespace hcsim::costmodel
