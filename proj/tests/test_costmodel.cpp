#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hcsim/costmodel.hpp"
#include "hcsim/error.hpp"

using namespace hcsim;
using namespace hcsim::costmodel;

namespace {

std::string error_text(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("process creation cost") {
  const Model m;
  CHECK(m.spawn_time(0, 0, 0, 1.0) == 28000.0);
  CHECK(m.spawn_time(100, 0, 100, 1.0) == 58000.0);
  CHECK(m.spawn_time(100, 0, 100, 2.0) == 116000.0);
  CHECK(m.spawn_time(3, 5, 7, 1.0) == 28000.0 + 150.0 * 15);
  CHECK(m.sort_spawn_time(0) == 28000.0);
  CHECK(m.sort_spawn_time(32) == 28000.0 + 9600.0);
}

TEST_CASE("distribute time") {
  const Model m;
  CHECK(m.distribute_time(1) == 0.0);
  CHECK(m.distribute_time(2) == 18460.0);
  CHECK(m.distribute_time(64) == 110760.0);
  CHECK(m.distribute_time(1024) == 184600.0);
  CHECK_THROWS_AS(m.distribute_time(3), DomainError);
  CHECK_THROWS_AS(m.distribute_time(0), DomainError);
  CHECK_THROWS_AS(m.distribute_time(2.5), DomainError);
}

TEST_CASE("merge time") {
  const Model m;
  CHECK(m.merge_time(0) == 830.0);
  CHECK(m.merge_time(1024) == 92990.0);
}

TEST_CASE("sequential sort closed form") {
  const Model m;
  CHECK(m.sequential_sort_closed(0) == 0.0);
  CHECK(m.sequential_sort_closed(1) == 1200.0);
  CHECK(m.sequential_sort_closed(64) == 153600.0);
  CHECK(m.sequential_sort_closed(8192) == doctest::Approx(31.13e6).epsilon(1e-4));
  CHECK(m.sequential_sort_time(64) == 153600.0);
}

TEST_CASE("sequential sort recurrence") {
  const Model m(CostConstants{}, SeqCostMode::Recurrence, 0.0);
  CHECK(m.sequential_sort_time(4) == 3210.0);
  CHECK(sequential_sort_recurrence(m, 4, 0.0) == 3210.0);
  CHECK(sequential_sort_recurrence(m, 1, 500.0) == 500.0);
  CHECK(sequential_sort_recurrence(m, 0, 500.0) == 0.0);

  for (unsigned k = 0; k <= 20; ++k) {
    const auto n = 1ULL << k;
    CHECK(m.sequential_sort_recurrence_closed(static_cast<double>(n), 70.0) ==
          doctest::Approx(sequential_sort_recurrence(m, n, 70.0)).epsilon(1e-12));
  }
  // Away from powers of two the closed form stays within 2% of the recurrence.
  for (unsigned long long n : {3ULL, 100ULL, 1000ULL, 2621440ULL}) {
    const double direct = sequential_sort_recurrence(m, n, 0.0);
    const double closed = m.sequential_sort_recurrence_closed(static_cast<double>(n), 0.0);
    CHECK(std::abs(direct - closed) / direct < 0.02);
  }

  const double t = m.sequential_sort_time(2621440);
  CHECK(t > 6.5e9);
  CHECK(t < 7.5e9);
  const double big = m.sequential_sort_time(std::ldexp(1.0, 28));
  CHECK(big > 850e9);
  CHECK(big < 950e9);
}

TEST_CASE("parallel sort time") {
  const Model m;
  CHECK(m.parallel_sort_time(64, 4) == 112700.0);
  CHECK(m.parallel_sort_time(128, 8) == 172250.0);
  for (double n : {1.0, 2.0, 100.0, 4096.0, 65536.0}) {
    CHECK(m.parallel_sort_time(n, 1) == m.sequential_sort_time(n));
  }
  CHECK_THROWS_AS(m.parallel_sort_time(64, 6), DomainError);
  CHECK_THROWS_AS(m.parallel_sort_time(2, 4), DomainError);

  const Model rec(CostConstants{}, SeqCostMode::Recurrence, 0.0);
  CHECK(rec.parallel_sort_time(64, 1) == rec.sequential_sort_time(64));
}

TEST_CASE("lower bound") {
  const Model m;
  CHECK(m.lower_bound(0, 64) == 168000.0);
  CHECK(m.lower_bound(1000, 1) == 0.0);
  CHECK(m.lower_bound(64, 4) == 70400.0);
  for (double n = 4; n <= 65536; n *= 2) {
    for (double p = 1; p <= n && p <= 1024; p *= 2) {
      CHECK(m.parallel_sort_time(n, p) >= m.lower_bound(n, p));
    }
  }
}

TEST_CASE("inflection point") {
  const Model m;
  const double x = m.inflection_point();
  CHECK(x == doctest::Approx(16.2).epsilon(0.5 / 16.2));
  const double lhs = 28000 + 300 * x;
  const double rhs = x * (200 * std::log2(x) + 1200);
  CHECK(std::abs(lhs - rhs) < 50.0);

  CostConstants slower;
  slower.spawn_init_ns = 56000;
  CHECK(Model(slower).inflection_point() > x);

  CostConstants cheap;
  cheap.spawn_init_ns = 100;
  CHECK(Model(cheap).inflection_point() == 1.0);

  CostConstants never;
  never.word_ns = 1e6;
  never.sort_nlogn_ns = 1e-3;
  never.sort_word_ns = 1;
  CHECK_THROWS_AS(Model(never).inflection_point(), NoRoot);
}

TEST_CASE("best processor count") {
  const Model m;
  CHECK(m.best_processor_count(64) == 4);
  CHECK(m.best_processor_count(128) == 8);
  CHECK(m.best_processor_count(1) == 1);
  for (unsigned long long n : {16ULL, 1000ULL, 1ULL << 16}) {
    const auto best = m.best_processor_count(n);
    const double t = m.parallel_sort_time(static_cast<double>(n), static_cast<double>(best));
    for (unsigned long long p = 1; p <= n; p *= 2) {
      CHECK(t <= m.parallel_sort_time(static_cast<double>(n), static_cast<double>(p)));
    }
  }
  CHECK_THROWS_AS(m.best_processor_count(0), DomainError);
}

TEST_CASE("least squares fits") {
  const std::vector<Point> line{{0, 1}, {1, 3}, {2, 5}, {3, 7}};
  const auto f = fit_linear(line);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.residual_norm == doctest::Approx(0.0));
  CHECK(f.points == 4);

  const std::vector<Point> noisy{{0, 0}, {1, 1}, {2, 0}, {3, 1}};
  const auto g = fit_linear(noisy);
  CHECK(g.slope == doctest::Approx(0.2));
  CHECK(g.intercept == doctest::Approx(0.2));
  CHECK(g.residual_norm == doctest::Approx(std::sqrt(0.8)));

  const std::vector<Point> one{{1, 1}};
  const std::vector<Point> same_x{{2, 1}, {2, 3}};
  CHECK_THROWS_AS(fit_linear(one), SingularFit);
  CHECK_THROWS_AS(fit_linear(same_x), SingularFit);

  const std::vector<Point> through{{1, 3}, {2, 6}, {4, 12}};
  CHECK(fit_proportional(through).slope == doctest::Approx(3.0));
  const std::vector<Point> zeros{{0, 1}, {0, 2}};
  CHECK_THROWS_AS(fit_proportional(zeros), SingularFit);
}

TEST_CASE("calibration recovers the constants that generated the samples") {
  CostConstants truth;
  truth.merge_word_ns = 77;
  truth.merge_call_ns = 1234;
  truth.distribute_init_ns = 20000;
  truth.sort_nlogn_ns = 180;
  truth.sort_word_ns = 990;
  const Model m(truth);
  std::vector<Measurement> rows;
  for (double n = 2; n <= 4096; n *= 2) {
    rows.push_back({Measurement::Kind::Merge, n, 1, m.merge_time(n)});
    rows.push_back({Measurement::Kind::SequentialSort, n, 1, m.sequential_sort_closed(n)});
  }
  for (double p = 2; p <= 64; p *= 2) {
    rows.push_back({Measurement::Kind::Distribute, 0, p, m.distribute_time(p)});
  }
  const auto cal = calibrate(rows);
  CHECK(cal.has_merge);
  CHECK(cal.has_distribute);
  CHECK(cal.has_sort);
  CHECK(cal.constants.merge_word_ns == doctest::Approx(77));
  CHECK(cal.constants.merge_call_ns == doctest::Approx(1234));
  CHECK(cal.constants.distribute_init_ns == doctest::Approx(20000));
  CHECK(cal.constants.sort_nlogn_ns == doctest::Approx(180));
  CHECK(cal.constants.sort_word_ns == doctest::Approx(990));
  CHECK(cal.constants.spawn_init_ns == truth.spawn_init_ns);
}

TEST_CASE("calibration with partial or degenerate samples") {
  const std::vector<Measurement> merges{{Measurement::Kind::Merge, 10, 1, 1730},
                                        {Measurement::Kind::Merge, 20, 1, 2630}};
  const auto cal = calibrate(merges);
  CHECK(cal.has_merge);
  CHECK_FALSE(cal.has_sort);
  CHECK(cal.constants.merge_word_ns == doctest::Approx(90));
  CHECK(cal.constants.sort_word_ns == CostConstants{}.sort_word_ns);

  const std::vector<Measurement> one_dist{{Measurement::Kind::Distribute, 0, 4, 36920}};
  CHECK_THROWS_AS(calibrate(one_dist), SingularFit);
  const std::vector<Measurement> one_merge{{Measurement::Kind::Merge, 10, 1, 1730}};
  CHECK_THROWS_AS(calibrate(one_merge), SingularFit);
  CHECK_THROWS_AS(calibrate({}), Error);
}

TEST_CASE("constants file") {
  CostConstants c;
  c.spawn_init_ns = 30000.5;
  c.path_factor = 0.8;
  std::ostringstream out;
  write_constants(out, c);
  std::istringstream in(out.str());
  CHECK(read_constants(in) == c);

  std::istringstream partial("# comment\n\nC_w_ns = 100  # per word\n");
  const auto p = read_constants(partial);
  CHECK(p.word_ns == 100);
  CHECK(p.spawn_init_ns == 28000);

  std::istringstream unknown("C_w_ns=1\nC_x=2\n");
  CHECK(error_text([&] { read_constants(unknown); }).find("line 2") != std::string::npos);
  std::istringstream no_eq("C_w_ns 1\n");
  CHECK_THROWS_AS(read_constants(no_eq), ParseError);
  std::istringstream bad_number("\n\nC_a_ns=abc\n");
  CHECK(error_text([&] { read_constants(bad_number); }).find("line 3") != std::string::npos);

  CostConstants neg;
  neg.word_ns = -1;
  CHECK_THROWS_AS(neg.validate(), ConfigError);
  CHECK_THROWS_AS(Model{neg}, ConfigError);
  CostConstants zero_overhead;
  zero_overhead.level_overhead_ns = 0;
  CHECK_NOTHROW(zero_overhead.validate());
  CHECK_THROWS_AS(Model(CostConstants{}, SeqCostMode::Recurrence, -1), ConfigError);
}

TEST_CASE("measurements file") {
  const std::vector<Measurement> rows{{Measurement::Kind::Merge, 8, 1, 1550},
                                      {Measurement::Kind::Distribute, 0, 4, 36920},
                                      {Measurement::Kind::SequentialSort, 16, 1, 32000}};
  std::ostringstream out;
  write_measurements(out, rows);
  CHECK(out.str() == "kind,n,p,time_ns\nt_m,8,1,1550\nt_d,0,4,36920\nt_s1,16,1,32000\n");
  std::istringstream in(out.str());
  const auto back = read_measurements(in);
  REQUIRE(back.size() == 3);
  CHECK(back[1].kind == Measurement::Kind::Distribute);
  CHECK(back[1].p == 4);
  CHECK(back[2].time_ns == 32000);

  std::istringstream bad_header("n,p\n");
  CHECK_THROWS_AS(read_measurements(bad_header), ParseError);
  std::istringstream bad_kind("kind,n,p,time_ns\nt_m,1,1,1\nt_q,1,1,1\n");
  CHECK(error_text([&] { read_measurements(bad_kind); }).find("line 3") != std::string::npos);
  std::istringstream short_row("kind,n,p,time_ns\nt_m,1,1\n");
  CHECK_THROWS_AS(read_measurements(short_row), ParseError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_measurements(empty), ParseError);
}

TEST_CASE("sequential cost mode names") {
  CHECK(parse_seq_cost_mode("closed") == SeqCostMode::ClosedForm);
  CHECK(parse_seq_cost_mode("recurrence") == SeqCostMode::Recurrence);
  CHECK(to_string(SeqCostMode::Recurrence) == "recurrence");
  CHECK_THROWS_AS(parse_seq_cost_mode("fast"), ConfigError);
}

TEST_CASE("power of two test") {
  CHECK(is_power_of_two(1));
  CHECK(is_power_of_two(1024));
  CHECK_FALSE(is_power_of_two(0));
  CHECK_FALSE(is_power_of_two(6));
  CHECK_FALSE(is_power_of_two(0.5));
  CHECK_FALSE(is_power_of_two(std::nan("")));
}
