#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "doctest.h"
#include "stp/cli.hpp"

using namespace stp;
using namespace stp::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_text(const std::string& command, const std::string& text, bool sequential = false,
                const std::string& path = "") {
  RunOptions o;
  o.command = command;
  o.sequential = sequential;
  o.config_path = path;
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(o, parse_config(text), out, err);
  return {code, out.str(), err.str()};
}

// Data rows after the header, split on commas.
std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

std::string header(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') return line;
  return {};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "stp_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parsing reports positions") {
  const ConfigDocument doc = parse_config("# c\n[system]\nkind = doubling\n\n[run]\n  depth =  3\n");
  REQUIRE(doc.sections.size() == 2);
  const ConfigEntry* d = doc.find("run")->find("depth");
  REQUIRE(d);
  CHECK(d->value == "3");
  CHECK(d->line == 6);
  CHECK(d->key_column == 3);
  CHECK(d->value_column == 12);

  auto error_at = [](const std::string& text, int line, int col) {
    try {
      (void)parse_config(text);
      FAIL("expected a config error");
    } catch (const ConfigError& e) {
      CHECK(e.line() == line);
      CHECK(e.column() == col);
    }
  };
  error_at("[system\n", 1, 1);
  error_at("kind = doubling\n", 1, 1);
  error_at("[system]\nkind doubling\n", 2, 1);
  error_at("[system]\nkind = a\nkind = b\n", 3, 1);
  error_at("[systems]\n", 1, 1);
  error_at("[run]\n  bad-key = 1\n", 2, 6);
  error_at("[run]\nx =\n", 2, 4);
}

TEST_CASE("potential expressions") {
  CHECK(parse_potential("psi").to_string() == "psi");
  CHECK(parse_potential("scale 2 sum psi const 0.5").to_string() == "scale 2 sum psi const 0.5");
  CHECK(parse_potential("branch 0:0.5,1:1").to_string() == "branch 0:0.5,1:1");
  try {
    (void)parse_potential("sum psi cnst 1", 4, 8);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 4);
    CHECK(e.column() == 16);
  }
  CHECK_THROWS_AS(parse_potential("sum psi"), ConfigError);
  CHECK_THROWS_AS(parse_potential("psi psi"), ConfigError);
  CHECK_THROWS_AS(parse_potential("const -1"), ConfigError);
  CHECK_THROWS_AS(parse_potential("branch 1:0"), ConfigError);
}

TEST_CASE("pressure of the constant zero potential is log 8") {
  const Result r = run_text("pressure", "[system]\nkind = doubling\n[potential]\nexpr = const 0\n[run]\ndepth = 3\n");
  REQUIRE(r.code == ok);
  CHECK(header(r.out) == "n,log_z_sup,log_z_inf,lower,upper,diverged");
  const auto t = rows(r.out);
  REQUIRE(t.size() == 1);
  CHECK(std::stod(t[0][1]) == std::log(8.0));
  CHECK(std::stod(t[0][2]) == std::log(8.0));
}

TEST_CASE("spectrum rows follow the closed form") {
  const Result r = run_text("spectrum", "[system]\nkind = doubling\n[run]\nalphas = 0.5, 1, 2\ntol = 1e-9\n");
  REQUIRE(r.code == ok);
  CHECK(header(r.out) == "alpha,value,lo,hi,certified");
  const auto t = rows(r.out);
  REQUIRE(t.size() == 3);
  for (const auto& row : t) {
    const double a = std::stod(row[0]);
    CHECK(std::abs(std::stod(row[1]) - std::log(2.0) / (std::log(2.0) + a)) <= 1e-9);
    CHECK(row[4] == "true");
  }
  CHECK(r.out.find("# config: alphas = 0.5, 1, 2") != std::string::npos);
  CHECK(r.out.find("# certified: true") != std::string::npos);
}

TEST_CASE("sequential runs are byte-identical") {
  const std::string text =
      "[system]\nkind = gauss\ntruncation = 10\n[potential]\nexpr = scale 0.6 psi\n[run]\ndepth = 4\n";
  const Result a = run_text("pressure", text, true);
  const Result b = run_text("pressure", text, true);
  REQUIRE(a.code == ok);
  CHECK(a.out == b.out);
}

TEST_CASE("unused keys and sections are rejected") {
  const Result a = run_text("spectrum", "[system]\nkind = doubling\n[run]\nalphas = 1\ncolour = red\n", false, "x.ini");
  CHECK(a.code == config_error);
  CHECK(a.err.rfind("x.ini:5:1: key 'colour'", 0) == 0);
  const Result b = run_text("spectrum", "[system]\nkind = doubling\n[target]\ny = 0\n[run]\nalphas = 1\n");
  CHECK(b.code == config_error);
  CHECK(b.err.find("[target]") != std::string::npos);
  const Result c = run_text("spectrum", "[system]\nkind = doubling\n[run]\nalphas = 1, x\n", false, "c.ini");
  CHECK(c.code == config_error);
  CHECK(c.err.rfind("c.ini:4:13:", 0) == 0);
}

TEST_CASE("exit codes") {
  const std::string text = "[system]\nkind = doubling\n[potential]\nexpr = psi\n[run]\ndepth = 12\nbudget = 100\n";
  const Result budget = run_text("pressure", text);
  CHECK(budget.code == budget_exceeded);
  CHECK(budget.err.find("budget") != std::string::npos);
  // Invalid systems are reported at the offending value.
  const Result sys =
      run_text("spectrum", "[system]\nkind = affine\nratios = 0.7, 0.7\n[run]\nalphas = 1\n", false, "a.ini");
  CHECK(sys.code == config_error);
  CHECK(sys.err.rfind("a.ini:3:10:", 0) == 0);
  const Result domain = run_text("spectrum", "[system]\nkind = doubling\n[run]\nalphas = -1\n");
  CHECK(domain.code == domain_error);
  const Result wrong = run_text("pressure", "[system]\nkind = doubling\n[run]\ncommand = spectrum\n");
  CHECK(wrong.code == config_error);
}

TEST_CASE("cover, density and hits commands") {
  const Result cover = run_text(
      "cover", "[system]\nkind = doubling\n[target]\ny = 0\nalpha = 0.6931471805599453\n[run]\ns = 1\nm = 3\nn_max = 10\n");
  REQUIRE(cover.code == ok);
  CHECK(header(cover.out) == "n,words,sum,log_sum");
  const auto c = rows(cover.out);
  REQUIRE(c.size() == 8);
  CHECK(std::stod(c[0][2]) == doctest::Approx(0.125).epsilon(1e-12));

  const Result density = run_text("density", "[system]\nkind = doubling\n[target]\ny = 0\n[run]\nn = 3\nr = 0.25\n");
  REQUIRE(density.code == ok);
  CHECK(std::stod(rows(density.out)[0][3]) == 0.5);

  const Result hits =
      run_text("hits", "[system]\nkind = doubling\n[target]\ny = 0\nalpha = 1\n[run]\ncode = 2\nhorizon = 5\n");
  REQUIRE(hits.code == ok);
  for (const auto& row : rows(hits.out)) CHECK(row[1] == "miss");
}

TEST_CASE("counterexample round trip") {
  const Result built = run_text("counterexample-build", "[system]\nkind = counterexample\nbeta = 0.5\nphi = reciprocal\n");
  REQUIRE(built.code == ok);
  const CounterexampleSystem direct = build_counterexample(0.5, ShrinkFn::reciprocal());
  CHECK(built.out == serialize_counterexample(direct));

  const Result verified = run_text("counterexample-verify", built.out);
  REQUIRE(verified.code == ok);
  const auto t = rows(verified.out);
  REQUIRE(t.size() == 1);
  CHECK(t[0][2] == "3");
  CHECK(std::stod(t[0][5]) <= 1e-10);

  const ConfigDocument doc = parse_config(built.out);
  const ConfigSection* s = doc.find("system");
  const double r1 = std::strtod(s->find("r1")->value.c_str(), nullptr);
  CHECK(r1 == direct.r1);

  // A relative file reference resolves against the config's directory.
  write(scratch("ce.ini"), built.out);
  write(scratch("verify.ini"), "[system]\nkind = counterexample\nfile = ce.ini\n");
  RunOptions o;
  o.command = "counterexample-verify";
  o.config_path = scratch("verify.ini").string();
  std::ostringstream out;
  std::ostringstream err;
  CHECK(run_file(o, out, err) == ok);
  CHECK(out.str().find(",3,") != std::string::npos);
}

TEST_CASE("run_file writes the output file and reports parse errors") {
  write(scratch("spectrum.ini"), "[system]\nkind = doubling\n[run]\nalphas = 1\n");
  RunOptions o;
  o.command = "spectrum";
  o.config_path = scratch("spectrum.ini").string();
  o.out_path = scratch("spectrum.csv").string();
  std::ostringstream out;
  std::ostringstream err;
  REQUIRE(run_file(o, out, err) == ok);
  CHECK(out.str().empty());
  CHECK(header(slurp(scratch("spectrum.csv"))) == "alpha,value,lo,hi,certified");

  write(scratch("bad.ini"), "[system]\nkind = doubling\n[potential]\nexpr = sum psi cnst 1\n[run]\ndepth = 2\n");
  o.command = "pressure";
  o.config_path = scratch("bad.ini").string();
  o.out_path.reset();
  std::ostringstream err2;
  CHECK(run_file(o, out, err2) == config_error);
  CHECK(err2.str() == o.config_path + ":4:16: potential: unknown node 'cnst'\n");
}

#ifdef STP_BINARY
TEST_CASE("stp executable") {
  write(scratch("exe.ini"), "[system]\nkind = doubling\n[potential]\nexpr = const 0\n[run]\ndepth = 3\n");
  const std::string csv = scratch("exe.csv").string();
  const std::string cmd = std::string(STP_BINARY) + " pressure --config " + scratch("exe.ini").string() +
                          " --out " + csv + " --seq";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(slurp(csv).find("# reduction: sequential") != std::string::npos);
  const std::string missing = std::string(STP_BINARY) + " pressure --config /nonexistent.ini 2>/dev/null";
  const int status = std::system(missing.c_str());
  CHECK(WEXITSTATUS(status) == 2);
  const std::string budget = std::string(STP_BINARY) + " pressure --config " + scratch("exe.ini").string() +
                             " --budget 4 2>/dev/null >/dev/null";
  CHECK(WEXITSTATUS(std::system(budget.c_str())) == 3);
}
#endif
