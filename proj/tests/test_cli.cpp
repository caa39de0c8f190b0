#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hcsim/cli.hpp"
#include "hcsim/error.hpp"

namespace fs = std::filesystem;
using hcsim::cli::Exit;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = hcsim::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::string col;
    std::istringstream ls(line);
    while (std::getline(ls, col, ',')) cols.push_back(col);
    if (!line.empty() && line.back() == ',') cols.emplace_back();
    rows.push_back(cols);
  }
  return rows;
}

fs::path scratch_dir() {
  auto dir = fs::temp_directory_path() / "hcsim_test_cli";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("processor lists") {
  using hcsim::cli::parse_processor_list;
  CHECK(parse_processor_list("4") == std::vector<unsigned>{4});
  CHECK(parse_processor_list("1,2,8") == std::vector<unsigned>{1, 2, 8});
  CHECK(parse_processor_list("1..16") == std::vector<unsigned>{1, 2, 4, 8, 16});
  CHECK_THROWS_AS(parse_processor_list("3"), hcsim::DomainError);
  CHECK_THROWS(parse_processor_list("x"));
}

TEST_CASE("sim distribute reports one row per level, a total and the model") {
  const auto r = run({"sim", "--program", "distribute"});
  REQUIRE(r.code == Exit::kOk);
  const auto rows = csv(r.out);
  REQUIRE(rows.size() == 1 + 6 + 2);
  CHECK(rows[0] == std::vector<std::string>{"record", "program", "n", "p", "level",
                                            "time_ns", "spawns", "sorted"});
  for (int i = 1; i <= 6; ++i) {
    CHECK(rows[i][0] == "level");
    CHECK(rows[i][4] == std::to_string(i));
    CHECK(rows[i][6] == std::to_string(1 << (i - 1)));
  }
  CHECK(rows[7][0] == "total");
  CHECK(rows[7][5] == "103400");
  CHECK(rows[7][6] == "63");
  CHECK(rows[8][0] == "model");
  CHECK(rows[8][5] == "110760");
  CHECK(r.err.find("103.40us") != std::string::npos);
}

TEST_CASE("sim distribute with uniform links matches the model") {
  const auto r = run({"sim", "--chip-dims", "none", "--p", "64"});
  REQUIRE(r.code == Exit::kOk);
  const auto rows = csv(r.out);
  CHECK(rows[7][5] == "110760");
  CHECK(rows[8][5] == "110760");
}

TEST_CASE("sim distribute writes the arrival log") {
  const auto file = scratch_dir() / "arrivals.csv";
  const auto r = run({"sim", "--p", "4", "--chip-dims", "none", "--arrivals", file.string()});
  REQUIRE(r.code == Exit::kOk);
  CHECK(slurp(file) == "level,node,arrival_ns\n0,0,0\n2,1,18520\n1,2,18460\n2,3,36920\n");
}

TEST_CASE("sim msort") {
  const auto r = run({"sim", "--program", "msort", "--n", "64", "--p", "4"});
  REQUIRE(r.code == Exit::kOk);
  const auto rows = csv(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][0] == "total");
  CHECK(rows[1][3] == "4");
  CHECK(rows[1][5] == "112820");
  CHECK(rows[1][6] == "3");
  CHECK(rows[1][7] == "true");
  CHECK(rows[2][5] == "112700");

  const auto whole = run({"sim", "--program", "msort", "--n", "64", "--p", "8", "--threshold", "64"});
  REQUIRE(whole.code == Exit::kOk);
  const auto w = csv(whole.out);
  CHECK(w[1][3] == "1");
  CHECK(w[1][5] == "153600");
  CHECK(w[1][6] == "0");
}

TEST_CASE("sweep msort finds the minimum") {
  for (auto [n, best] : {std::pair{"64", 4u}, std::pair{"128", 8u}}) {
    const auto r = run({"sweep", "--program", "msort", "--n", n, "--p", "1..64"});
    REQUIRE(r.code == Exit::kOk);
    const auto rows = csv(r.out);
    REQUIRE(rows.size() == 8);
    CHECK(rows[0][4] == "sim_time_ns");
    unsigned arg = 0;
    long long lowest = -1;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const long long sim = std::stoll(rows[i][4]);
      CHECK(sim >= std::stoll(rows[i][6]));
      CHECK(rows[i][9] == "true");
      if (lowest < 0 || sim < lowest) {
        lowest = sim;
        arg = static_cast<unsigned>(std::stoul(rows[i][2]));
      }
    }
    CHECK(arg == best);
    CHECK(r.err.find("minimum at p=" + std::to_string(best)) != std::string::npos);
  }
}

TEST_CASE("sweep distribute and json output") {
  const auto r = run({"sweep", "--program", "distribute", "--p", "1..8", "--format", "json"});
  REQUIRE(r.code == Exit::kOk);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.size() == 4);
  CHECK(j[0]["p"] == 1);
  CHECK(j[0]["sim_time_ns"] == 0);
  CHECK(j[3]["t_d_ns"] == 55380);
  CHECK(j[3]["spawns"] == 7);
}

TEST_CASE("sweep writes measurements and a plot script") {
  const auto dir = scratch_dir();
  const auto m = dir / "m.csv";
  const auto g = dir / "plot.gp";
  const auto r = run({"sweep", "--program", "distribute", "--chip-dims", "none",
                      "--measurements", m.string(), "--gnuplot", g.string()});
  REQUIRE(r.code == Exit::kOk);
  const auto text = slurp(m);
  CHECK(text.rfind("kind,n,p,time_ns\n", 0) == 0);
  CHECK(text.find("t_d,0,64,110760") != std::string::npos);
  CHECK(text.find("t_m,") != std::string::npos);
  CHECK(text.find("t_s1,") != std::string::npos);
  CHECK_FALSE(slurp(g).empty());

  const auto c = dir / "c.txt";
  const auto cal = run({"calibrate", "--measurements", m.string(), "--out", c.string()});
  REQUIRE(cal.code == Exit::kOk);
  const auto constants = slurp(c);
  CHECK(constants.find("C_a_ns=90\n") != std::string::npos);
  CHECK(constants.find("C_j_ns=18400\n") != std::string::npos);
  CHECK(constants.find("C_d_ns=1200\n") != std::string::npos);
}

TEST_CASE("predict") {
  auto r = run({"predict", "--formula", "t_snp", "--n", "64", "--p", "4"});
  REQUIRE(r.code == Exit::kOk);
  CHECK(r.out == "n,p,formula,time_ns\n64,4,t_snp,112700\n");
  r = run({"predict", "--formula", "t_d", "--p", "1024"});
  CHECK(r.out == "n,p,formula,time_ns\n64,1024,t_d,184600\n");
  r = run({"predict", "--formula", "t_min", "--n", "64", "--p", "4"});
  CHECK(r.out.find("64,4,t_min,70400") != std::string::npos);
  r = run({"predict", "--formula", "t_min_nodata", "--p", "64"});
  CHECK(r.out.find(",64,t_min_nodata,168000") != std::string::npos);
  r = run({"predict", "--formula", "t_s", "--seq-cost", "recurrence", "--n", "4"});
  CHECK(r.out.find("4,1,t_s,3210") != std::string::npos);
  r = run({"predict", "--formula", "t_snp", "--n", "64", "--p", "1,2"});
  CHECK(csv(r.out).size() == 3);
  CHECK(run({"predict", "--formula", "t_x"}).code == Exit::kUsageError);
  CHECK(run({"predict", "--formula", "t_snp", "--n", "2", "--p", "4"}).code == Exit::kUsageError);
}

TEST_CASE("calibrate reports malformed input with its line") {
  const auto dir = scratch_dir();
  const auto bad = dir / "bad.csv";
  std::ofstream(bad) << "kind,n,p,time_ns\nt_m,1,1,1010\nt_m,2\n";
  auto r = run({"calibrate", "--measurements", bad.string()});
  CHECK(r.code == Exit::kUsageError);
  CHECK(r.err.find("line 3") != std::string::npos);

  const auto empty = dir / "empty.csv";
  std::ofstream(empty) << "";
  CHECK(run({"calibrate", "--measurements", empty.string()}).code == Exit::kUsageError);
  CHECK(run({"calibrate", "--measurements", (dir / "missing.csv").string()}).code ==
        Exit::kUsageError);
}

TEST_CASE("output is byte-identical across runs") {
  const std::vector<std::string> sim{"sim", "--program", "msort", "--n", "256", "--p", "16",
                                     "--seed", "7", "--trace"};
  const auto a = run(sim);
  const auto b = run(sim);
  REQUIRE(a.code == Exit::kOk);
  CHECK(a.out == b.out);
  CHECK(a.err == b.err);
  CHECK(a.err.find("trace_hash=0x") != std::string::npos);

  const auto c = run({"sim", "--program", "msort", "--n", "512", "--p", "16", "--seed", "7",
                      "--trace"});
  CHECK(c.err != a.err);

  const std::vector<std::string> sweep{"sweep", "--program", "msort", "--n", "128"};
  CHECK(run(sweep).out == run(sweep).out);
}

TEST_CASE("trace written next to the output file") {
  const auto out = scratch_dir() / "t.csv";
  const auto r = run({"sim", "--program", "msort", "--n", "16", "--p", "2", "--trace",
                      "--out", out.string()});
  REQUIRE(r.code == Exit::kOk);
  CHECK(slurp(out).rfind("record,", 0) == 0);
  const auto trace = slurp(out.string() + ".trace");
  CHECK(trace.find("trace_hash=0x") != std::string::npos);
  CHECK(trace.find("merge") != std::string::npos);
}

TEST_CASE("verify") {
  const auto r = run({"verify", "--trials", "10"});
  CHECK(r.code == Exit::kOk);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS single-hop spawns") != std::string::npos);
  CHECK(r.out.find("PASS p=1 reduction") != std::string::npos);
  CHECK(r.out.find("spawns checked") != std::string::npos);

  const auto some = run({"verify", "--p", "1,4", "--trials", "3"});
  CHECK(some.code == Exit::kOk);
}

TEST_CASE("usage errors exit with status 2") {
  CHECK(run({}).code == Exit::kUsageError);
  CHECK(run({"bogus"}).code == Exit::kUsageError);
  CHECK(run({"verify", "--p", "3"}).code == Exit::kUsageError);
  CHECK(run({"sim", "--chip-dims", "7"}).code == Exit::kUsageError);
  CHECK(run({"sim", "--d", "40"}).code == Exit::kUsageError);
  CHECK(run({"sim", "--seq-cost", "fast"}).code == Exit::kUsageError);
  CHECK(run({"sim", "--constants", "/nonexistent/constants"}).code == Exit::kUsageError);
  CHECK(run({"sim", "--program", "msort", "--n", "2", "--p", "4"}).code == Exit::kUsageError);
  CHECK(run({"sim", "--format", "xml"}).code == Exit::kUsageError);
  CHECK(run({"--help"}).code == Exit::kOk);
}
