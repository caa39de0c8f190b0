#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hcsim::costmodel {

/// Measured platform constants, in nanoseconds unless noted.
///
///   key in constants file   meaning
///   C_i_ns   spawn_init_ns      per-spawn initialisation (par-msort closure)
///   C_j_ns   distribute_init_ns per-spawn initialisation (distribute closure)
///   C_o_ns   level_overhead_ns  sequential overhead per recursion level
///   C_w_ns   word_ns            per word transferred
///   C_l      path_factor        path latency factor (1 = one off-chip hop)
///   C_a_ns   merge_word_ns      merge cost per word
///   C_b_ns   merge_call_ns      merge cost per call
///   C_c_ns   sort_nlogn_ns      sequential sort cost per word per log2 word
///   C_d_ns   sort_word_ns       sequential sort cost per word
struct CostConstants {
  double spawn_init_ns = 28000.0;
  double distribute_init_ns = 18400.0;
  double level_overhead_ns = 60.0;
  double word_ns = 150.0;
  double path_factor = 1.0;
  double merge_word_ns = 90.0;
  double merge_call_ns = 830.0;
  double sort_nlogn_ns = 200.0;
  double sort_word_ns = 1200.0;

  /// Throws ConfigError unless every constant is positive (level overhead
  /// may be zero).
  void validate() const;

  friend bool operator==(const CostConstants&, const CostConstants&) = default;
};

/// How the cost of a sequential sort of n words is evaluated.
enum class SeqCostMode {
  /// n (C_c log2 n + C_d)
  ClosedForm,
  /// Solution of T(n) = 2 T(n/2) + T_m(n), T(1) = base:
  ///   C_a n log2 n + C_b (n - 1) + base n
  Recurrence,
};

std::string to_string(SeqCostMode m);
SeqCostMode parse_seq_cost_mode(const std::string& s);

/// Reads `key=value` lines; '#' starts a comment; unknown keys and
/// malformed lines raise ParseError with the line number. Keys not present
/// keep the values from `base`.
CostConstants read_constants(std::istream& in, const CostConstants& base = {});
void write_constants(std::ostream& out, const CostConstants& c);

bool is_power_of_two(double p);

/// Analytic performance model of process creation, distribute and
/// par-msort.
class Model {
 public:
  explicit Model(CostConstants c = {},
                 SeqCostMode mode = SeqCostMode::ClosedForm,
                 double recurrence_base_ns = 0.0);

  const CostConstants& constants() const { return c_; }
  SeqCostMode mode() const { return mode_; }
  double recurrence_base_ns() const { return base_ns_; }

  /// Process creation with n argument words, m procedure words and o result
  /// words over a path with latency factor `path_factor`.
  double spawn_time(double n, double m, double o, double path_factor) const;
  /// par-msort's spawn of a sub-array of n words: C_i + 2 C_w n.
  double sort_spawn_time(double n) const;

  /// Time for distribute to populate p processors. p must be a power of two.
  double distribute_time(double p) const;

  double merge_time(double n) const;

  /// Closed form n (C_c log2 n + C_d); zero for n = 0.
  double sequential_sort_closed(double n) const;
  /// Closed solution of the merge recurrence with leaf cost `base_ns`.
  double sequential_sort_recurrence_closed(double n, double base_ns) const;
  /// Sequential sort cost in the configured mode.
  double sequential_sort_time(double n) const;

  /// Parallel mergesort of n words on p processors (n >= p >= 1, p a power
  /// of two). Uses the configured sequential mode for the leaf sorts.
  double parallel_sort_time(double n, double p) const;

  /// Lower bound: creation plus input data movement only.
  double lower_bound(double n, double p) const;

  /// Size in words where spawning half the work costs as much as sorting
  /// it locally: C_i + 2 C_w n = n (C_c log2 n + C_d). Bisection to within
  /// `tolerance` words. Returns 1 when spawning pays off at any size; throws
  /// NoRoot when no crossing exists below 2^62 words.
  double inflection_point(double tolerance = 0.01) const;

  /// Power of two p <= n minimising parallel_sort_time(n, p); ties keep the
  /// smaller p.
  unsigned long long best_processor_count(unsigned long long n) const;

 private:
  void require_power_of_two(double p, const char* what) const;

  CostConstants c_;
  SeqCostMode mode_;
  double base_ns_;
};

/// Direct evaluation of T(n) = T(floor(n/2)) + T(ceil(n/2)) + T_m(n),
/// T(1) = base, T(0) = 0, memoised on the O(log n) distinct sizes. Test
/// oracle for the recurrence closed form.
double sequential_sort_recurrence(const Model& m, unsigned long long n,
                                  double base_ns);

struct Point {
  double x;
  double y;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_norm = 0.0;  // sqrt of the sum of squared residuals
  std::size_t points = 0;
};

/// Ordinary least squares y = slope x + intercept. Throws SingularFit with
/// fewer than two distinct x.
LinearFit fit_linear(std::span<const Point> points);
/// Least squares through the origin, y = slope x. Throws SingularFit when
/// every x is zero.
LinearFit fit_proportional(std::span<const Point> points);

/// One timing sample used for calibration.
struct Measurement {
  enum class Kind { Merge, Distribute, SequentialSort };
  Kind kind;
  double n = 0;
  double p = 1;
  double time_ns = 0;
};

std::string to_string(Measurement::Kind k);

/// CSV with header `kind,n,p,time_ns` where kind is t_m, t_d or t_s1.
/// Throws ParseError naming the offending line.
std::vector<Measurement> read_measurements(std::istream& in);
void write_measurements(std::ostream& out, std::span<const Measurement> rows);

struct Calibration {
  CostConstants constants;
  LinearFit merge;       // t_m = C_a n + C_b
  LinearFit distribute;  // t_d = (C_j + C_o) log2 p
  LinearFit sort;        // t_s1 / n = C_c log2 n + C_d
  bool has_merge = false;
  bool has_distribute = false;
  bool has_sort = false;
};

/// Fits every model that has samples; constants without samples keep their
/// `base` values. C_j is recovered as the fitted per-level slope minus
/// base.level_overhead_ns. Throws SingularFit when a model has samples but
/// too few to fit, and Error when no samples are given.
Calibration calibrate(std::span<const Measurement> rows,
                      const CostConstants& base = {});

}  // namespace hcsim::costmodel
