#include <doctest.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "irtbench/csv.hpp"
#include "irtbench/ingest.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

std::string cli_path() {
  const char* path = std::getenv("IRTBENCH_CLI");
  REQUIRE_MESSAGE(path != nullptr, "IRTBENCH_CLI must point at the irtbench binary");
  return path;
}

std::string data_dir() {
  const char* path = std::getenv("IRTBENCH_DATA");
  REQUIRE_MESSAGE(path != nullptr, "IRTBENCH_DATA must point at tests/data");
  return path;
}

CommandResult run_cli(const std::string& args) {
  CommandResult result;
  const std::string cmd = cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 512> buf;
  while (fgets(buf.data(), buf.size(), pipe)) result.output += buf.data();
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "missing file: " << path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("irtbench_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write_small_params(const std::string& path) {
  std::ofstream out(path);
  out << "parameter,value\n";
  out << "a[1],1.5\na[2],0.8\na[3],2.2\n";
  out << "b[1],-0.5\nb[2],0.7\nb[3],0.0\n";
  out << "theta[1],0.4\ntheta[2],-1.0\ntheta[3],1.2\ntheta[4],0.0\n";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("convert reproduces the hand-counted fixture") {
  TempDir tmp;
  const auto res = run_cli("convert --runs " + data_dir() + "/runs_fixture.csv --dimension 5 "
                           "--target-precision 1e-8 --output " + (tmp / "matrix.json"));
  REQUIRE_MESSAGE(res.exit_code == 0, res.output);
  const auto got = irtbench::ResponseMatrix::from_json(slurp(tmp.path / "matrix.json"));
  const auto expected =
      irtbench::ResponseMatrix::from_json(slurp(fs::path(data_dir()) / "expected_matrix.json"));
  CHECK(got.items == expected.items);
  CHECK(got.persons == expected.persons);
  CHECK(got.attempts == expected.attempts);
  CHECK(got.successes == expected.successes);
}

TEST_CASE("convert exits 2 on a missing column") {
  TempDir tmp;
  {
    std::ofstream bad(tmp / "bad.csv");
    bad << "suite,function_id,algorithm,run_id,success\nseu,f1,A,0,1\n";
  }
  const auto res = run_cli("convert --runs " + (tmp / "bad.csv") + " --dimension 5 --output " +
                           (tmp / "out.json"));
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("dimension") != std::string::npos);
}

TEST_CASE("convert exits 2 when the dimension filter matches nothing") {
  TempDir tmp;
  const auto res = run_cli("convert --runs " + data_dir() + "/runs_fixture.csv --dimension 7 "
                           "--target-precision 1e-8 --output " + (tmp / "out.json"));
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("no records at dimension") != std::string::npos);
}

TEST_CASE("convert requires a target precision for precision data") {
  TempDir tmp;
  const auto res = run_cli("convert --runs " + data_dir() + "/runs_fixture.csv --dimension 5 "
                           "--output " + (tmp / "out.json"));
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("target-precision") != std::string::npos);
}

TEST_CASE("simulate is seed deterministic and honors zero attempts") {
  TempDir tmp;
  write_small_params(tmp / "params.csv");
  const auto r1 = run_cli("simulate --params " + (tmp / "params.csv") + " --attempts 10 --seed 9 "
                          "--output " + (tmp / "m1.json"));
  REQUIRE_MESSAGE(r1.exit_code == 0, r1.output);
  const auto r2 = run_cli("simulate --params " + (tmp / "params.csv") + " --attempts 10 --seed 9 "
                          "--output " + (tmp / "m2.json"));
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(tmp.path / "m1.json") == slurp(tmp.path / "m2.json"));

  const auto r0 = run_cli("simulate --params " + (tmp / "params.csv") + " --attempts 0 --seed 9 "
                          "--output " + (tmp / "m0.json"));
  REQUIRE(r0.exit_code == 0);
  const auto m0 = irtbench::ResponseMatrix::from_json(slurp(tmp.path / "m0.json"));
  for (long y : m0.successes) CHECK(y == 0);
}

TEST_CASE("simulate requires a seed") {
  TempDir tmp;
  write_small_params(tmp / "params.csv");
  const auto res = run_cli("simulate --params " + (tmp / "params.csv") + " --attempts 10 "
                           "--output " + (tmp / "m.json"));
  CHECK(res.exit_code == 2);
}

TEST_CASE("fit produces identical artifacts across identical runs") {
  TempDir tmp;
  write_small_params(tmp / "params.csv");
  REQUIRE(run_cli("simulate --params " + (tmp / "params.csv") + " --attempts 20 --seed 3 "
                  "--output " + (tmp / "m.json")).exit_code == 0);
  const std::string fit_flags = " --chains 2 --draws 150 --warmup 150 --seed 21";
  const auto f1 = run_cli("fit --matrix " + (tmp / "m.json") + fit_flags + " --output-prefix " +
                          (tmp / "one"));
  REQUIRE_MESSAGE(f1.exit_code == 0, f1.output);
  const auto f2 = run_cli("fit --matrix " + (tmp / "m.json") + fit_flags + " --output-prefix " +
                          (tmp / "two"));
  REQUIRE(f2.exit_code == 0);
  for (const char* suffix : {"_draws.csv", "_summary.csv", "_convergence.html", "_difficulty.svg",
                             "_discrimination.svg", "_ability.svg", "_legend.csv"}) {
    CHECK(slurp(tmp.path / (std::string("one") + suffix)) ==
          slurp(tmp.path / (std::string("two") + suffix)));
  }
}

TEST_CASE("fit smoke run on the 20x15 fixture stays fast") {
  TempDir tmp;
  REQUIRE(run_cli("simulate --params " + data_dir() + "/true_params_fixture.csv --attempts 25 "
                  "--seed 7 --output " + (tmp / "m.json")).exit_code == 0);
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run_cli("fit --matrix " + (tmp / "m.json") +
                           " --chains 1 --draws 200 --warmup 200 --seed 8 --output-prefix " +
                           (tmp / "smoke"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE_MESSAGE(res.exit_code == 0, res.output);
  CHECK(secs < 60.0);
  CHECK(fs::exists(tmp.path / "smoke_summary.csv"));
  const auto rows = irtbench::read_csv_file(tmp / "smoke_draws.csv");
  CHECK(rows.size() == 201);  // header + 1 chain x 200 draws
}

TEST_CASE("fit rejects malformed json with exit 2 and requires a seed") {
  TempDir tmp;
  {
    std::ofstream bad(tmp / "bad.json");
    bad << "{ not json";
  }
  const auto res = run_cli("fit --matrix " + (tmp / "bad.json") + " --seed 1 --output-prefix " +
                           (tmp / "x"));
  CHECK(res.exit_code == 2);

  write_small_params(tmp / "params.csv");
  REQUIRE(run_cli("simulate --params " + (tmp / "params.csv") + " --attempts 5 --seed 3 "
                  "--output " + (tmp / "m.json")).exit_code == 0);
  const auto noseed = run_cli("fit --matrix " + (tmp / "m.json") + " --output-prefix " + (tmp / "x"));
  CHECK(noseed.exit_code == 2);
}

TEST_CASE("curves from a summary respects the grid flags") {
  TempDir tmp;
  {
    std::ofstream summary(tmp / "summary.csv");
    summary << "parameter,median,ci50_lo,ci50_hi,ci90_lo,ci90_hi,rhat,ess_bulk\n";
    summary << "a[1],2.0,1.9,2.1,1.8,2.2,1.0,1000\n";
    summary << "b[1],0.5,0.4,0.6,0.3,0.7,1.0,1000\n";
    summary << "theta[1],0.1,0,0.2,-0.1,0.3,1.0,1000\n";
  }
  const auto res = run_cli("curves --summary " + (tmp / "summary.csv") +
                           " --grid-lo -2 --grid-hi 2 --grid-step 0.5 --output-prefix " +
                           (tmp / "c"));
  REQUIRE_MESSAGE(res.exit_code == 0, res.output);
  const auto rows = irtbench::read_csv_file(tmp / "c_test_info.csv");
  CHECK(rows.size() == 10);  // header + 9 grid points
  CHECK(fs::exists(tmp.path / "c_item_info_01.csv"));
  CHECK(fs::exists(tmp.path / "c_icc_01.csv"));
  CHECK(fs::exists(tmp.path / "c_sem.csv"));
  CHECK(fs::exists(tmp.path / "c_item_info.svg"));
  CHECK(fs::exists(tmp.path / "c_test_info.svg"));
  // peak of the single item information sits at the grid point nearest b
  const auto info = irtbench::read_csv_file(tmp / "c_item_info_01.csv");
  double best_theta = 0, best = -1;
  for (std::size_t r = 1; r < info.size(); ++r) {
    const double v = std::stod(info[r][1]);
    if (v > best) {
      best = v;
      best_theta = std::stod(info[r][0]);
    }
  }
  CHECK(std::abs(best_theta - 0.5) <= 0.25 + 1e-12);
}

TEST_CASE("curves from draws computes median curves and the envelope") {
  TempDir tmp;
  write_small_params(tmp / "params.csv");
  REQUIRE(run_cli("simulate --params " + (tmp / "params.csv") + " --attempts 20 --seed 3 "
                  "--output " + (tmp / "m.json")).exit_code == 0);
  REQUIRE(run_cli("fit --matrix " + (tmp / "m.json") +
                  " --chains 2 --draws 120 --warmup 120 --seed 77 --output-prefix " +
                  (tmp / "fit")).exit_code == 0);
  const auto res = run_cli("curves --draws " + (tmp / "fit_draws.csv") +
                           " --envelope --grid-lo -4 --grid-hi 4 --grid-step 0.5 "
                           "--output-prefix " + (tmp / "c"));
  REQUIRE_MESSAGE(res.exit_code == 0, res.output);
  CHECK(fs::exists(tmp.path / "c_test_info_envelope.csv"));
  const auto env = irtbench::read_csv_file(tmp / "c_test_info_envelope.csv");
  REQUIRE(env.size() == 18);  // header + 17 grid points
  const auto total = irtbench::read_csv_file(tmp / "c_test_info.csv");
  for (std::size_t r = 1; r < env.size(); ++r) {
    CHECK(std::stod(env[r][1]) <= std::stod(env[r][2]));
    CHECK(std::stod(env[r][1]) <= std::stod(total[r][1]) + 1e-9);
    CHECK(std::stod(total[r][1]) <= std::stod(env[r][2]) + 1e-9);
  }
}

TEST_CASE("curves exits 2 without exactly one input") {
  TempDir tmp;
  const auto res = run_cli("curves --output-prefix " + (tmp / "c"));
  CHECK(res.exit_code == 2);
  const auto missing = run_cli("curves --summary " + (tmp / "nope.csv") + " --output-prefix " +
                               (tmp / "c"));
  CHECK(missing.exit_code == 2);
}

TEST_CASE("cat batch emits one row per replication and is reproducible") {
  TempDir tmp;
  {
    std::ofstream summary(tmp / "summary.csv");
    summary << "parameter,median,ci50_lo,ci50_hi,ci90_lo,ci90_hi,rhat,ess_bulk\n";
    for (int i = 1; i <= 12; ++i) {
      summary << "a[" << i << "],2.0,1.9,2.1,1.8,2.2,1.0,1000\n";
      summary << "b[" << i << "]," << -3.0 + 6.0 * (i - 1) / 11.0 << ",0,0,0,0,1.0,1000\n";
    }
  }
  const auto r1 = run_cli("cat --summary " + (tmp / "summary.csv") +
                          " --seed 5 --replications 40 --output-prefix " + (tmp / "one"));
  REQUIRE_MESSAGE(r1.exit_code == 0, r1.output);
  const auto rows = irtbench::read_csv_file(tmp / "one_batch.csv");
  CHECK(rows.size() == 41);
  const auto r2 = run_cli("cat --summary " + (tmp / "summary.csv") +
                          " --seed 5 --replications 40 --output-prefix " + (tmp / "two"));
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(tmp.path / "one_batch.csv") == slurp(tmp.path / "two_batch.csv"));

  const auto single = run_cli("cat --summary " + (tmp / "summary.csv") +
                              " --seed 6 --true-theta 0.7 --output-prefix " + (tmp / "s"));
  REQUIRE(single.exit_code == 0);
  CHECK(fs::exists(tmp.path / "s_session.csv"));
}

TEST_CASE("cat rejects a non-positive sem stop with exit 2") {
  TempDir tmp;
  {
    std::ofstream summary(tmp / "summary.csv");
    summary << "parameter,median,ci50_lo,ci50_hi,ci90_lo,ci90_hi,rhat,ess_bulk\n";
    summary << "a[1],2.0,0,0,0,0,1.0,1000\nb[1],0.0,0,0,0,0,1.0,1000\n";
  }
  const auto res = run_cli("cat --summary " + (tmp / "summary.csv") +
                           " --seed 5 --replications 5 --sem-stop 0 --output-prefix " + (tmp / "x"));
  CHECK(res.exit_code == 2);
}

TEST_CASE("check passes on a healthy model and fails via the corruption hook") {
  TempDir tmp;
  write_small_params(tmp / "params.csv");
  REQUIRE(run_cli("simulate --params " + (tmp / "params.csv") + " --attempts 12 --seed 3 "
                  "--output " + (tmp / "m.json")).exit_code == 0);
  const auto good = run_cli("check --matrix " + (tmp / "m.json") + " --seed 17");
  REQUIRE_MESSAGE(good.exit_code == 0, good.output);
  CHECK(good.output.find("PASS") != std::string::npos);

  const auto bad = run_cli("check --matrix " + (tmp / "m.json") + " --seed 17 --corrupt-gradient");
  CHECK(bad.exit_code == 3);
  CHECK(bad.output.find("FAIL") != std::string::npos);
}

TEST_CASE("check rejects a single-person matrix with exit 2") {
  TempDir tmp;
  {
    std::ofstream m(tmp / "thin.json");
    m << R"({"items":["i1","i2"],"persons":["p1"],"attempts":[[3],[3]],"successes":[[1],[2]]})";
  }
  const auto res = run_cli("check --matrix " + (tmp / "thin.json") + " --seed 1");
  CHECK(res.exit_code == 2);
}

TEST_CASE("json config supplies defaults and flags override it") {
  TempDir tmp;
  write_small_params(tmp / "params.csv");
  {
    std::ofstream cfg(tmp / "config.json");
    cfg << R"({"simulate": {"attempts": 7, "seed": 123}})";
  }
  const auto from_cfg = run_cli("--config " + (tmp / "config.json") + " simulate --params " +
                                (tmp / "params.csv") + " --output " + (tmp / "m1.json"));
  REQUIRE_MESSAGE(from_cfg.exit_code == 0, from_cfg.output);
  const auto m1 = irtbench::ResponseMatrix::from_json(slurp(tmp.path / "m1.json"));
  CHECK(m1.attempts[0] == 7);

  const auto overridden = run_cli("--config " + (tmp / "config.json") + " simulate --params " +
                                  (tmp / "params.csv") + " --attempts 4 --output " +
                                  (tmp / "m2.json"));
  REQUIRE_MESSAGE(overridden.exit_code == 0, overridden.output);
  const auto m2 = irtbench::ResponseMatrix::from_json(slurp(tmp.path / "m2.json"));
  CHECK(m2.attempts[0] == 4);
}

TEST_CASE("unknown subcommand exits 2") {
  const auto res = run_cli("frobnicate");
  CHECK(res.exit_code == 2);
}

}  // TEST_SUITE
