#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

// CLI golden tests. "@" in an argument expands to the golden directory and
// "%" to a scratch CSV path. Expected results live in golden/<name>.expected.
struct GoldenCase {
  const char* name;
  std::vector<std::string> args;
};

inline const std::vector<GoldenCase>& golden_cases() {
  static const std::vector<GoldenCase> cases = {
      {"validate_case1", {"validate", "@/case1.toml"}},
      {"validate_bad", {"validate", "@/bad.toml"}},
      {"analyze_case1", {"kkt", "analyze", "@/case1.toml"}},
      {"analyze_case2", {"kkt", "analyze", "@/case2.toml"}},
      {"analyze_case3max", {"kkt", "analyze", "@/case3max.toml", "--point", "5"}},
      {"analyze_case3min", {"kkt", "analyze", "@/case3min.toml"}},
      {"analyze_mixedmax", {"kkt", "analyze", "@/mixedmax.toml"}},
      {"analyze_mixedmin", {"kkt", "analyze", "@/mixedmin.toml"}},
      {"analyze_strict", {"kkt", "analyze", "@/case1.toml", "--strict"}},
      {"plot_mixedmin", {"kkt", "plot", "@/mixedmin.toml", "--out", "%"}},
      {"scalarize_curve", {"scalarize", "curve", "@/quad.toml", "--beta-grid", "4", "--out", "%"}},
      {"scalarize_maximize", {"scalarize", "maximize", "@/quad.toml", "--out", "%"}},
      {"scalarize_curvature",
       {"scalarize", "curvature", "@/quad.toml", "--trials", "25", "--seed", "11", "--out", "%"}},
      {"scalarize_degenerate", {"scalarize", "degenerate", "@/degenerate.toml", "--out", "%"}},
  };
  return cases;
}

inline std::vector<std::string> expand_golden_args(const GoldenCase& c, const std::string& dir,
                                                   const std::string& csv) {
  std::vector<std::string> out;
  for (std::string a : c.args) {
    if (a == "%") {
      a = csv;
    } else if (!a.empty() && a[0] == '@') {
      a = dir + a.substr(1);
    }
    out.push_back(a);
  }
  return out;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// The serialized outcome of one run, compared byte for byte.
inline std::string golden_record(int exit_code, const std::string& out, const std::string& err,
                                 const std::string& csv) {
  std::string r = "exit: " + std::to_string(exit_code) + "\n--- stdout\n" + out + "--- stderr\n" + err;
  if (!csv.empty()) r += "--- csv\n" + csv;
  return r;
}
