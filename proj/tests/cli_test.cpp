#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "golden_cases.hpp"
#include "kktscope/cli.hpp"
#include "kktscope/errors.hpp"
#include "kktscope/problem_file.hpp"

using namespace kktscope;

namespace {

const std::string kGoldenDir = KKTSCOPE_GOLDEN_DIR;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("kktscope_test_" + name)).string();
}

std::string run_golden(const GoldenCase& c) {
  const std::string csv = scratch(std::string(c.name) + ".csv");
  std::filesystem::remove(csv);
  const Run r = run(expand_golden_args(c, kGoldenDir, csv));
  const std::string data = std::filesystem::exists(csv) ? read_text(csv) : "";
  std::filesystem::remove(csv);
  return golden_record(r.code, r.out, r.err, data);
}

const char* kCase1 = R"(version = 1
kind = "kkt"
sense = "maximize"
objectives = ["z"]

[[variables]]
name = "z"
lower = 0
upper = 1

[[constraints]]
expr = "z"
direction = ">=0"
)";

}  // namespace

TEST_SUITE("problem_file") {

TEST_CASE("valid kkt file") {
  const ProblemFile f = parse_problem(kCase1);
  REQUIRE(f.kkt.has_value());
  CHECK(classify_case(*f.kkt) == CaseTag::kCase1);
  CHECK_FALSE(f.point.has_value());
}

TEST_CASE("schema errors carry a field path") {
  auto schema_field = [](const std::string& text) -> std::string {
    try {
      parse_problem(text);
    } catch (const SchemaError& e) {
      return e.field();
    }
    return "<no error>";
  };
  std::string missing_bound = kCase1;
  missing_bound.replace(missing_bound.find("\">=0\""), 5, "\"<=W\"");
  CHECK(schema_field(missing_bound) == "constraints[0].bound");

  std::string version = kCase1;
  version.replace(version.find("version = 1"), 11, "version = 2");
  CHECK(schema_field(version) == "version");

  std::string bounds = kCase1;
  bounds.replace(bounds.find("upper = 1"), 9, "upper = -1");
  CHECK(schema_field(bounds) == "variables[0].upper");

  CHECK(schema_field(std::string(kCase1) + "colour = 3\n") != "<no error>");
  CHECK(schema_field("seed = 3\n" + std::string(kCase1)) == "seed");

  std::string undeclared = kCase1;
  undeclared.replace(undeclared.find("[\"z\"]"), 5, "[\"w\"]");
  CHECK(schema_field(undeclared) == "objectives[0]");
}

TEST_CASE("expression errors carry an offset") {
  std::string bad = kCase1;
  bad.replace(bad.find("[\"z\"]"), 5, "[\"2*+z\"]");
  try {
    parse_problem(bad);
    FAIL("expected an expression error");
  } catch (const ExpressionError& e) {
    CHECK(e.offset() == 2);
    CHECK(e.field() == "objectives[0]");
  }
}

TEST_CASE("malformed text") {
  CHECK_THROWS_AS(parse_problem("version = \n"), SchemaError);
  CHECK_THROWS_AS(parse_problem("version = 1\nkind = \"kkt\"\nkind = \"kkt\"\n"), SchemaError);
  CHECK_THROWS_AS(parse_problem("[[variables]\n"), SchemaError);
  CHECK_THROWS_AS(load_problem("/nonexistent/problem.toml"), Error);
}

}  // TEST_SUITE

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"--help"}).code == kExitOk);
  CHECK(run({"validate", "/nonexistent.toml"}).code == kExitInput);
  CHECK(run({"validate", kGoldenDir + "/bad.toml"}).code == kExitInput);
  CHECK(run({"kkt", "analyze", kGoldenDir + "/case1.toml", "--point", "11"}).code == kExitUsage);
  CHECK(run({"kkt", "analyze", kGoldenDir + "/case1.toml", "--strict"}).code == kExitPremise);
  CHECK(run({"kkt", "analyze", kGoldenDir + "/quad.toml"}).code == kExitInput);
  CHECK(run({"scalarize", "curvature", kGoldenDir + "/quad.toml", "--trials", "0"}).code ==
        kExitUsage);
  CHECK(run({"scalarize", "degenerate", kGoldenDir + "/quad.toml"}).code == kExitPremise);
}

TEST_CASE("errors are a single machine-readable first line") {
  const Run r = run({"validate", kGoldenDir + "/bad.toml"});
  CHECK(r.out.empty());
  CHECK(r.err.rfind("ERROR schema: constraints[0].bound", 0) == 0);
  const Run usage = run({"kkt"});
  CHECK(usage.err.rfind("ERROR usage: ", 0) == 0);
}

TEST_CASE("case3 report") {
  const Run r = run({"kkt", "analyze", kGoldenDir + "/case3max.toml", "--point", "5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("mu_1 = 1") != std::string::npos);
  CHECK(r.out.find("cone: inside") != std::string::npos);
}

TEST_CASE("curve CSV") {
  const std::string csv = scratch("curve.csv");
  const Run r = run({"scalarize", "curve", kGoldenDir + "/quad.toml", "--beta-grid", "4", "--out", csv});
  CHECK(r.code == 0);
  const std::string text = read_text(csv);
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);
  CHECK(text.rfind("beta_1,r_1,e_star,residual\n", 0) == 0);
  std::filesystem::remove(csv);
}

TEST_CASE("format_real") {
  CHECK(format_real(1.0) == "1");
  CHECK(format_real(-0.0) == "0");
  CHECK(format_real(0.1) == "0.10000000000000001");
}

TEST_CASE("golden files") {
  const bool update = std::getenv("KKTSCOPE_UPDATE_GOLDEN") != nullptr;
  for (const GoldenCase& c : golden_cases()) {
    CAPTURE(c.name);
    const std::string got = run_golden(c);
    const auto path = std::filesystem::path(kGoldenDir) / (std::string(c.name) + ".expected");
    if (update) {
      std::ofstream(path, std::ios::binary) << got;
      continue;
    }
    CHECK(got == read_text(path));
  }
}

TEST_CASE("golden output does not depend on the thread count") {
  for (const char* threads : {"1", "3"}) {
    ::setenv("KKT_SCOPE_THREADS", threads, 1);
    for (const GoldenCase& c : golden_cases()) {
      CAPTURE(c.name);
      CAPTURE(threads);
      CHECK(run_golden(c) ==
            read_text(std::filesystem::path(kGoldenDir) / (std::string(c.name) + ".expected")));
    }
  }
  ::unsetenv("KKT_SCOPE_THREADS");
}

}  // TEST_SUITE
