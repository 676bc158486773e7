#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "poa/cli.hpp"
#include "poa/json_io.hpp"

namespace fs = std::filesystem;
using namespace poa;

namespace {

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "poa_lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / ("poa_lab_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

double first_number(const std::string& text) { return std::stod(text.substr(0, text.find('\n'))); }

}  // namespace

TEST_CASE("cost, rule and grid argument parsing") {
  CHECK(cli::parse_cost_spec("poly:2", 3)(3) == 9.0);
  CHECK_THROWS_AS(cli::parse_cost_spec("cubic", 3), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_cost_spec("poly:abc", 3), cli::UsageError);
  CHECK_THROWS_AS(cli::check_rule_spec("banana"), cli::UsageError);
  CHECK_NOTHROW(cli::check_rule_spec("file:x.json"));

  const auto grid = cli::parse_d_grid("1.0:0.05:2.0");
  CHECK(grid.size() == 21);
  CHECK(grid.front() == 1.0);
  CHECK(grid.back() == 2.0);
  CHECK(grid[4] == 1.2);
  CHECK(cli::parse_d_grid("1,1.5,2") == std::vector<double>{1, 1.5, 2});
  CHECK(cli::parse_d_grid("1") == std::vector<double>{1});
  CHECK_THROWS_AS(cli::parse_d_grid("2:0.1:1"), cli::UsageError);
  CHECK_THROWS_AS(cli::parse_d_grid("1:0:2"), cli::UsageError);
  CHECK(cli::format_number(1.0 / 3.0) == "0.333333333");
}

TEST_CASE("poa command") {
  auto r = run_cli({"poa", "--cost", "poly:1.2", "--rule", "sv", "--n", "20", "--method", "dual"});
  CHECK(r.status == cli::kExitOk);
  CHECK(std::abs(first_number(r.out) - 1.160712) <= 1e-3);

  r = run_cli({"poa", "--cost", "poly:1", "--rule", "mc", "--n", "20"});
  CHECK(r.status == cli::kExitOk);
  CHECK(r.out == "1.000000\n");

  r = run_cli({"poa", "--cost", "poly:2", "--rule", "mc", "--n", "20", "--method", "reduced"});
  CHECK(std::abs(first_number(r.out) - 3.0) <= 2e-3);
}

TEST_CASE("poa with files and all methods") {
  const auto dir = scratch_dir();
  io::write_json_file((dir / "c.json").string(), io::to_json(make_cost_from_values({1, 4, 9}, false)));
  io::write_json_file((dir / "f.json").string(), io::to_json(shapley_rule(3)));
  const auto r = run_cli({"poa", "--cost", "file:" + (dir / "c.json").string(), "--rule",
                          "file:" + (dir / "f.json").string(), "--n", "3", "--method", "all", "--output",
                          (dir / "report.json").string(), "--dump-lp", (dir / "dual.lp").string()});
  CHECK(r.status == cli::kExitOk);
  CHECK(r.out.find("verdict:") != std::string::npos);
  const auto report = io::read_json_file((dir / "report.json").string());
  CHECK(report.at("lp_methods_agree") == true);
  for (const auto& m : report.at("methods")) {
    CHECK(m.contains("method"));
    CHECK(m.contains("value"));
    CHECK(m.contains("status"));
    CHECK(m.contains("certificate"));
  }
  CHECK(slurp(dir / "dual.lp").find("Maximize") != std::string::npos);
}

TEST_CASE("design command writes a reusable rule") {
  const auto dir = scratch_dir();
  auto r = run_cli({"design", "--cost", "poly:1.2", "--n", "20", "--rule-output", (dir / "fstar.json").string(),
                    "--output", (dir / "design.json").string()});
  CHECK(r.status == cli::kExitOk);
  CHECK(std::abs(first_number(r.out) - 1.127281) <= 1e-3);
  CHECK(r.out.find("f*(2) = 0.48") != std::string::npos);

  r = run_cli({"poa", "--cost", "poly:1.2", "--rule", "file:" + (dir / "fstar.json").string(), "--n", "20"});
  CHECK(r.status == cli::kExitOk);
  CHECK(std::abs(first_number(r.out) - 1.127281) <= 1e-3);

  r = run_cli({"design", "--cost", "poly:1", "--n", "5"});
  CHECK(r.out.rfind("1.000000\n", 0) == 0);
  r = run_cli({"design", "--cost", "poly:2", "--n", "20"});
  CHECK(std::abs(first_number(r.out) - 2.012072) <= 1e-3);
}

TEST_CASE("sweep command") {
  const auto dir = scratch_dir();
  auto r = run_cli({"sweep", "--n", "20", "--d-grid", "1", "--rules", "sv,mc,optimal"});
  CHECK(r.status == cli::kExitOk);
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "d,rule,poa,mu_star,lambda_star,method,status");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) {
    ++rows;
    CHECK(line.find(",1,") != std::string::npos);
  }
  CHECK(rows == 3);

  const auto a = (dir / "a.csv").string(), b = (dir / "b.csv").string(), ratio = (dir / "ratio.csv").string();
  r = run_cli({"sweep", "--d-grid", "1,1.5,2", "--csv", a, "--ratio-csv", ratio, "--jobs", "1"});
  CHECK(r.status == cli::kExitOk);
  r = run_cli({"sweep", "--d-grid", "1,1.5,2", "--csv", b, "--jobs", "3"});
  CHECK(r.status == cli::kExitOk);
  CHECK(slurp(a) == slurp(b));
  const auto ratios = slurp(ratio);
  CHECK(ratios.rfind("d,rule,ratio\n", 0) == 0);
  CHECK(ratios.find("2,sv,1.24") != std::string::npos);
  CHECK(ratios.find("2,mc,1.49") != std::string::npos);

  r = run_cli({"sweep", "--d-grid", "1", "--rules", "sv", "--ratio-csv", ratio});
  CHECK(r.status == cli::kExitUsage);
}

TEST_CASE("default sweep reproduces the three curves") {
  const auto rows = cli::run_sweep({.n = 20, .d_grid = cli::parse_d_grid("1.0:0.05:2.0"), .jobs = 2});
  REQUIRE(rows.size() == 63);
  CHECK(rows[0].rule == "sv");
  CHECK(rows[1].rule == "mc");
  CHECK(rows[2].rule == "optimal");
  for (const auto& r : rows) CHECK(r.status == "ok");
  CHECK(std::abs(*rows.back().poa - 2.012072) <= 1e-3);
  CHECK(std::abs(*rows[rows.size() - 3].poa - 2.5) <= 1e-3);
}

TEST_CASE("sweep rows carry failures") {
  const auto rows = cli::run_sweep({.n = 4, .d_grid = {1.5}, .rules = {"sv", "file:/nonexistent/rule.json"}});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].status == "ok");
  CHECK(rows[1].status != "ok");
  CHECK_FALSE(rows[1].poa.has_value());
  CHECK(run_cli({"sweep", "--n", "4", "--d-grid", "1.5", "--rules", "sv,file:/nonexistent/rule.json"}).status ==
        cli::kExitFailure);
}

TEST_CASE("worstcase command and stored certificates") {
  const auto dir = scratch_dir();
  const auto cert = (dir / "cert.json").string();
  auto r = run_cli({"worstcase", "--cost", "poly:2", "--rule", "sv", "--n", "3", "--output", cert, "--report",
                    (dir / "report.json").string()});
  CHECK(r.status == cli::kExitOk);
  CHECK(r.out.find("certificate verified") != std::string::npos);

  r = run_cli({"worstcase", "--verify-only", "file:" + cert});
  CHECK(r.status == cli::kExitOk);

  auto j = io::read_json_file(cert);
  j["certificate"]["claimed_poa"] = j["certificate"]["claimed_poa"].get<double>() * 1.05;
  const auto tampered = (dir / "tampered.json").string();
  io::write_json_file(tampered, j);
  r = run_cli({"worstcase", "--verify-only", "file:" + tampered});
  CHECK(r.status == cli::kExitFailure);
  CHECK(r.out.find("ratio") != std::string::npos);
  CHECK(r.out.find("FAIL") != std::string::npos);

  r = run_cli({"worstcase", "--cost", "poly:2", "--n", "13"});
  CHECK(r.status == cli::kExitUsage);
}

TEST_CASE("usage errors") {
  CHECK(run_cli({}).status == cli::kExitUsage);
  CHECK(run_cli({"poa"}).status == cli::kExitUsage);
  CHECK(run_cli({"poa", "--cost", "poly:2", "--rule", "nope"}).status == cli::kExitUsage);
  CHECK(run_cli({"poa", "--cost", "poly:2", "--method", "nope"}).status == cli::kExitUsage);
  CHECK(run_cli({"poa", "--cost", "file:/nonexistent.json"}).status == cli::kExitUsage);
  CHECK(run_cli({"frobnicate"}).status == cli::kExitUsage);
  CHECK(run_cli({"--help"}).status == cli::kExitOk);
}

TEST_CASE("binary exit codes and determinism") {
  const char* bin = std::getenv("POA_LAB_BIN");
  if (bin == nullptr) {
    MESSAGE("POA_LAB_BIN not set; skipping process-level checks");
    return;
  }
  const auto dir = scratch_dir();
  auto sh = [&](const std::string& args) {
    const int raw = std::system((std::string(bin) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(sh("poa --cost poly:1.5 --rule sv --n 6") == 0);
  CHECK(sh("poa --cost bogus") == 1);
  CHECK(sh("sweep --d-grid 1.5 --rules sv,file:/nonexistent.json --n 4") == 2);

  const auto a = (dir / "run1.json").string(), b = (dir / "run2.json").string();
  CHECK(sh("poa --cost poly:1.7 --rule mc --n 8 --method all --output " + a) == 0);
  CHECK(sh("poa --cost poly:1.7 --rule mc --n 8 --method all --output " + b) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(::setenv("POA_LAB_JOBS", "2", 1) == 0);
  const auto c1 = (dir / "s1.csv").string(), c2 = (dir / "s2.csv").string();
  CHECK(sh("sweep --d-grid 1:0.25:2 --csv " + c1) == 0);
  CHECK(sh("sweep --d-grid 1:0.25:2 --jobs 1 --csv " + c2) == 0);
  CHECK(slurp(c1) == slurp(c2));
}
