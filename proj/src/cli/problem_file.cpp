#include "kktscope/problem_file.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "kktscope/errors.hpp"

namespace kktscope {
namespace {

// ---------------------------------------------------------------------------
// A small TOML subset: `key = value` lines, `[[table]]` array headers,
// `#` comments. Values are strings, numbers, booleans or single-line arrays.

struct Value {
  enum class Type { kNumber, kString, kBool, kArray };
  Type type = Type::kNumber;
  double number = 0.0;
  bool integer = false;
  bool boolean = false;
  std::string text;
  std::vector<Value> items;
};

using Table = std::map<std::string, Value>;

struct Document {
  Table root;
  std::map<std::string, std::vector<Table>> arrays;
};

class LineReader {
 public:
  LineReader(std::string_view line, int line_no) : s_(line), line_no_(line_no) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError(fmt::format("line {}", line_no_), what);
  }

  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool at_end_or_comment() {
    skip_space();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }

  std::string key() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                s_[pos_] == '_' || s_[pos_] == '-')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  void expect(char c) {
    skip_space();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(fmt::format("expected '{}'", c));
    ++pos_;
  }

  Value value() {
    skip_space();
    if (pos_ >= s_.size()) fail("expected a value");
    const char c = s_[pos_];
    if (c == '"') return string_value();
    if (c == '[') return array_value();
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      Value v;
      v.type = Value::Type::kBool;
      v.boolean = true;
      return v;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      Value v;
      v.type = Value::Type::kBool;
      return v;
    }
    return number_value();
  }

 private:
  Value string_value() {
    ++pos_;
    Value v;
    v.type = Value::Type::kString;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        const char e = s_[pos_++];
        switch (e) {
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          default: fail(fmt::format("unknown escape '\\{}'", e));
        }
      }
      v.text += c;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return v;
  }

  Value array_value() {
    ++pos_;
    Value v;
    v.type = Value::Type::kArray;
    for (;;) {
      skip_space();
      if (pos_ < s_.size() && s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      v.items.push_back(value());
      skip_space();
      if (pos_ < s_.size() && s_[pos_] == ',') {
        ++pos_;
        continue;
      }
      expect(']');
      return v;
    }
  }

  Value number_value() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                s_[pos_] == '.' || s_[pos_] == '+' || s_[pos_] == '-' ||
                                s_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view token = s_.substr(start, pos_ - start);
    if (token.empty()) fail("expected a value");
    std::string_view digits = token;
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
    Value v;
    double number = 0.0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), number);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || !std::isfinite(number)) {
      fail(fmt::format("invalid value '{}'", token));
    }
    v.number = number;
    v.integer = token.find_first_of(".eE") == std::string_view::npos;
    return v;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int line_no_;
};

Document read_document(std::string_view text) {
  Document doc;
  Table* current = &doc.root;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    start = end + 1;

    LineReader reader(line, line_no);
    if (reader.at_end_or_comment()) continue;
    reader.skip_space();
    if (line.find("[[") != std::string_view::npos && line.find_first_not_of(" \t") == line.find("[[")) {
      reader.expect('[');
      reader.expect('[');
      const std::string name = reader.key();
      reader.expect(']');
      reader.expect(']');
      if (!reader.at_end_or_comment()) reader.fail("unexpected text after table header");
      if (doc.root.count(name)) reader.fail("'" + name + "' defined both as key and table array");
      doc.arrays[name].emplace_back();
      current = &doc.arrays[name].back();
      continue;
    }
    if (line.find_first_not_of(" \t") == line.find('[')) {
      reader.fail("only [[array]] table headers are supported");
    }
    const std::string key = reader.key();
    reader.expect('=');
    Value value = reader.value();
    if (!reader.at_end_or_comment()) reader.fail("unexpected text after value");
    if (current == &doc.root && doc.arrays.count(key)) {
      reader.fail("'" + key + "' defined both as key and table array");
    }
    if (!current->emplace(key, std::move(value)).second) reader.fail("duplicate key '" + key + "'");
  }
  return doc;
}

// ---------------------------------------------------------------------------
// typed field access

class Fields {
 public:
  Fields(const Table& table, std::string prefix) : table_(table), prefix_(std::move(prefix)) {}

  std::string path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

  bool has(const std::string& key) const { return table_.count(key) > 0; }

  const Value& require(const std::string& key) const {
    const auto it = table_.find(key);
    if (it == table_.end()) throw SchemaError(path(key), "missing required field");
    used_.insert(key);
    return it->second;
  }

  const Value* find(const std::string& key) const {
    const auto it = table_.find(key);
    if (it == table_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  std::string string(const std::string& key) const { return as_string(require(key), path(key)); }

  double number(const std::string& key) const { return as_number(require(key), path(key)); }

  std::optional<double> optional_number(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    return as_number(*v, path(key));
  }

  std::optional<std::uint64_t> optional_count(const std::string& key, std::uint64_t min) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (v->type != Value::Type::kNumber || !v->integer || v->number < static_cast<double>(min) ||
        v->number > 9.007199254740992e15) {
      throw SchemaError(path(key), fmt::format("expected an integer >= {}", min));
    }
    return static_cast<std::uint64_t>(v->number);
  }

  std::vector<std::string> strings(const std::string& key) const {
    const Value& v = require(key);
    if (v.type != Value::Type::kArray) throw SchemaError(path(key), "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.items.size(); ++i) {
      out.push_back(as_string(v.items[i], fmt::format("{}[{}]", path(key), i)));
    }
    return out;
  }

  std::optional<std::vector<double>> optional_numbers(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (v->type != Value::Type::kArray) throw SchemaError(path(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->items.size(); ++i) {
      out.push_back(as_number(v->items[i], fmt::format("{}[{}]", path(key), i)));
    }
    return out;
  }

  std::optional<bool> optional_bool(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (v->type != Value::Type::kBool) throw SchemaError(path(key), "expected true or false");
    return v->boolean;
  }

  void reject_unused() const {
    for (const auto& [key, value] : table_) {
      if (!used_.count(key)) throw SchemaError(path(key), "unknown or misplaced field");
    }
  }

 private:
  static std::string as_string(const Value& v, const std::string& where) {
    if (v.type != Value::Type::kString) throw SchemaError(where, "expected a string");
    return v.text;
  }

  static double as_number(const Value& v, const std::string& where) {
    if (v.type != Value::Type::kNumber) throw SchemaError(where, "expected a number");
    return v.number;
  }

  const Table& table_;
  std::string prefix_;
  mutable std::set<std::string> used_;
};

Expr parse_field(const std::string& text, const std::string& field) {
  if (text.empty()) throw ExpressionError(field, 0, "empty expression");
  try {
    return parse_expression(text);
  } catch (const SyntaxError& e) {
    throw ExpressionError(field, e.offset(), e.what());
  } catch (const NonConstantExponent& e) {
    throw ExpressionError(field, e.offset(), e.what());
  } catch (const NumericDomainError& e) {
    throw ExpressionError(field, 0, e.what());
  }
}

void read_variables(const Document& doc, std::vector<std::string>& names,
                    std::vector<Interval>& domain) {
  const auto it = doc.arrays.find("variables");
  if (it == doc.arrays.end() || it->second.empty()) {
    throw SchemaError("variables", "at least one [[variables]] entry required");
  }
  for (std::size_t i = 0; i < it->second.size(); ++i) {
    const Fields f(it->second[i], fmt::format("variables[{}]", i));
    std::string name = f.string("name");
    if (!is_identifier(name)) throw SchemaError(f.path("name"), "invalid identifier '" + name + "'");
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      throw SchemaError(f.path("name"), "duplicate variable '" + name + "'");
    }
    const double lower = f.number("lower");
    const double upper = f.number("upper");
    if (lower > upper) throw SchemaError(f.path("upper"), "upper must be >= lower");
    f.reject_unused();
    names.push_back(std::move(name));
    domain.push_back({lower, upper});
  }
}

void check_declared(const Expr& e, const std::vector<std::string>& vars, const std::string& field) {
  for (const auto& v : variables_of(e)) {
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) {
      throw SchemaError(field, "undeclared variable '" + v + "'");
    }
  }
}

std::vector<Expr> read_objectives(const Fields& root, const std::vector<std::string>& vars) {
  std::vector<Expr> out;
  const auto texts = root.strings("objectives");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const std::string field = fmt::format("objectives[{}]", i);
    out.push_back(parse_field(texts[i], field));
    check_declared(out.back(), vars, field);
  }
  return out;
}

}  // namespace

ProblemFile parse_problem(std::string_view text) {
  const Document doc = read_document(text);
  const Fields root(doc.root, "");
  ProblemFile file;

  const Value& version = root.require("version");
  if (version.type != Value::Type::kNumber || !version.integer || version.number != 1.0) {
    throw SchemaError("version", "unsupported version (expected 1)");
  }
  const std::string kind = root.string("kind");
  if (kind == "kkt") {
    file.kind = ProblemKind::kKkt;
  } else if (kind == "scalarize") {
    file.kind = ProblemKind::kScalarize;
  } else {
    throw SchemaError("kind", "expected \"kkt\" or \"scalarize\", got \"" + kind + "\"");
  }

  std::vector<std::string> vars;
  std::vector<Interval> domain;
  read_variables(doc, vars, domain);
  std::vector<Expr> objectives = read_objectives(root, vars);
  if (objectives.empty()) throw SchemaError("objectives", "at least one objective required");

  for (const auto& [name, tables] : doc.arrays) {
    if (name != "variables" && name != "constraints") {
      throw SchemaError(name, "unknown table array");
    }
  }

  if (file.kind == ProblemKind::kKkt) {
    Problem p;
    const std::string sense = root.string("sense");
    if (sense == "maximize") {
      p.sense = Sense::kMaximize;
    } else if (sense == "minimize") {
      p.sense = Sense::kMinimize;
    } else {
      throw SchemaError("sense", "expected \"maximize\" or \"minimize\"");
    }
    const auto it = doc.arrays.find("constraints");
    if (it == doc.arrays.end() || it->second.empty()) {
      throw SchemaError("constraints", "at least one [[constraints]] entry required");
    }
    for (std::size_t y = 0; y < it->second.size(); ++y) {
      const Fields f(it->second[y], fmt::format("constraints[{}]", y));
      Constraint c{parse_field(f.string("expr"), f.path("expr"))};
      check_declared(c.body, vars, f.path("expr"));
      const std::string direction = f.string("direction");
      if (direction == ">=0") {
        c.direction = Direction::kGeqZero;
        if (f.has("bound")) throw SchemaError(f.path("bound"), "bound only applies to \"<=W\"");
      } else if (direction == "<=W") {
        c.direction = Direction::kLeqBound;
        c.bound = f.number("bound");
      } else {
        throw SchemaError(f.path("direction"), "expected \">=0\" or \"<=W\"");
      }
      f.reject_unused();
      p.constraints.push_back(std::move(c));
    }
    p.objectives = std::move(objectives);
    p.variables = vars;
    p.domain = domain;
    file.warnings = validate(p);

    file.point = root.optional_numbers("point");
    if (file.point && file.point->size() != vars.size()) {
      throw SchemaError("point", fmt::format("expected {} coordinates", vars.size()));
    }
    file.tol = root.optional_number("tol");
    if (file.tol && !(*file.tol > 0.0)) throw SchemaError("tol", "must be > 0");
    if (auto g = root.optional_count("plot_grid", 1)) file.plot_grid = static_cast<std::size_t>(*g);
    file.kkt = std::move(p);
  } else {
    if (doc.arrays.count("constraints")) {
      throw SchemaError("constraints", "not allowed for kind \"scalarize\"");
    }
    ScalarizationProblem p;
    p.objectives = std::move(objectives);
    p.variables = vars;
    p.domain = domain;
    if (auto positive = root.optional_bool("positive")) p.expect_positive = *positive;
    validate(p);
    file.seed = root.optional_count("seed", 0);
    if (auto g = root.optional_count("beta_grid", 2)) file.beta_grid = static_cast<std::size_t>(*g);
    if (auto g = root.optional_count("inner_grid", 2)) file.inner_grid = static_cast<std::size_t>(*g);
    if (auto t = root.optional_count("trials", 1)) file.trials = static_cast<std::size_t>(*t);
    file.scalarize = std::move(p);
  }
  root.reject_unused();
  return file;
}

ProblemFile load_problem(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::kIo, "error while reading '" + path.string() + "'");
  return parse_problem(buffer.str());
}

}  // namespace kktscope
