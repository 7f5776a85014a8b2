#include "beliefclt/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace beliefclt {

namespace {

// ---------------------------------------------------------------------------
// Line tokenizer

enum class Tok { kIdent, kNumber, kString, kPunct, kEnd };

struct Token {
  Tok kind;
  std::string text;
  std::size_t column;  // 1-based
};

bool is_punct(char c) { return c == '[' || c == ']' || c == '{' || c == '}' || c == ',' || c == '='; }

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_no, const std::string& source)
      : line_no_(line_no), source_(source) {
    tokenize(line);
  }

  [[noreturn]] void fail(const Token& at, const std::string& what) const {
    throw ParseError(source_, line_no_, at.column, what);
  }

  const Token& peek() const { return tokens_[pos_]; }
  bool at_end() const { return peek().kind == Tok::kEnd; }

  Token next() {
    Token t = tokens_[pos_];
    if (t.kind != Tok::kEnd) ++pos_;
    return t;
  }

  void expect(char punct) {
    const Token t = next();
    if (t.kind != Tok::kPunct || t.text[0] != punct) fail(t, std::string("expected '") + punct + "'");
  }

  bool accept(char punct) {
    if (peek().kind == Tok::kPunct && peek().text[0] == punct) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string ident() {
    const Token t = next();
    if (t.kind != Tok::kIdent) fail(t, "expected a key");
    return t.text;
  }

  std::string string_value() {
    const Token t = next();
    if (t.kind != Tok::kString) fail(t, "expected a quoted string");
    return t.text;
  }

  double number() {
    const Token t = next();
    if (t.kind != Tok::kNumber && t.kind != Tok::kIdent) fail(t, "expected a number");
    std::string_view s = t.text;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || end != s.data() + s.size() || std::isnan(value)) fail(t, "malformed number '" + t.text + "'");
    return value;
  }

  std::int64_t integer() {
    const Token& at = peek();
    const double v = number();
    if (!(std::abs(v) < 0x1.0p62) || std::trunc(v) != v) fail(at, "expected an integer");
    return static_cast<std::int64_t>(v);
  }

  std::uint64_t unsigned_integer() {
    const Token t = next();
    std::uint64_t value = 0;
    const auto [end, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (t.kind != Tok::kNumber || ec != std::errc() || end != t.text.data() + t.text.size()) {
      fail(t, "expected an unsigned 64-bit integer");
    }
    return value;
  }

  std::vector<double> number_list() {
    std::vector<double> out;
    expect('[');
    if (accept(']')) return out;
    do {
      out.push_back(number());
    } while (accept(','));
    expect(']');
    return out;
  }

  std::vector<std::int64_t> integer_list() {
    std::vector<std::int64_t> out;
    expect('[');
    if (accept(']')) return out;
    do {
      out.push_back(integer());
    } while (accept(','));
    expect(']');
    return out;
  }

  std::pair<double, double> number_pair() {
    expect('[');
    const double a = number();
    expect(',');
    const double b = number();
    expect(']');
    return {a, b};
  }

  std::vector<std::pair<double, double>> pair_list() {
    std::vector<std::pair<double, double>> out;
    expect('[');
    if (accept(']')) return out;
    do {
      out.push_back(number_pair());
    } while (accept(','));
    expect(']');
    return out;
  }

  void finish() {
    if (!at_end()) fail(peek(), "unexpected '" + peek().text + "'");
  }

 private:
  void tokenize(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      if (c == '#') break;
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      const std::size_t col = i + 1;
      if (is_punct(c)) {
        tokens_.push_back({Tok::kPunct, std::string(1, c), col});
        ++i;
      } else if (c == '"') {
        std::string text;
        ++i;
        bool closed = false;
        while (i < line.size()) {
          if (line[i] == '\\' && i + 1 < line.size()) {
            text += line[i + 1];
            i += 2;
          } else if (line[i] == '"') {
            closed = true;
            ++i;
            break;
          } else {
            text += line[i++];
          }
        }
        if (!closed) throw ParseError(source_, line_no_, col, "unterminated string");
        tokens_.push_back({Tok::kString, std::move(text), col});
      } else {
        std::size_t j = i;
        while (j < line.size() && !is_punct(line[j]) && line[j] != '#' && line[j] != '"' &&
               !std::isspace(static_cast<unsigned char>(line[j]))) {
          ++j;
        }
        std::string text(line.substr(i, j - i));
        const bool numeric = std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
        tokens_.push_back({numeric ? Tok::kNumber : Tok::kIdent, std::move(text), col});
        i = j;
      }
    }
    tokens_.push_back({Tok::kEnd, "end of line", line.size() + 1});
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t line_no_;
  const std::string& source_;
};

// Splits on LF, dropping a trailing CR.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find('\n', start);
    std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return lines;
}

// Model entries shared by model and plan files.
struct ModelBuilder {
  std::optional<double> bound;
  std::vector<FocalMass> focal;
  std::size_t first_line = 0;

  bool handles(const std::string& key) const { return key == "M" || key == "focal"; }

  void parse(const std::string& key, LineParser& p, std::size_t line_no) {
    if (first_line == 0) first_line = line_no;
    if (key == "M") {
      if (bound) p.fail(p.peek(), "duplicate key 'M'");
      bound = p.number();
      return;
    }
    p.expect('{');
    std::optional<std::vector<ClosedInterval>> parts;
    std::optional<double> mass;
    do {
      const Token at = p.peek();
      const std::string field = p.ident();
      p.expect('=');
      if (field == "parts") {
        if (parts) p.fail(at, "duplicate field 'parts'");
        parts.emplace();
        for (const auto& [lo, hi] : p.pair_list()) parts->push_back({lo, hi});
      } else if (field == "mass") {
        if (mass) p.fail(at, "duplicate field 'mass'");
        mass = p.number();
      } else {
        p.fail(at, "unknown focal field '" + field + "'");
      }
    } while (p.accept(','));
    const Token close = p.peek();
    p.expect('}');
    if (!parts) p.fail(close, "focal element needs 'parts'");
    if (!mass) p.fail(close, "focal element needs 'mass'");
    if (parts->empty()) p.fail(close, "focal element has no parts");
    for (const auto& part : *parts) {
      if (!(part.lo <= part.hi)) p.fail(close, "interval [" + format_double(part.lo) + ", " + format_double(part.hi) + "] is inverted");
    }
    // Overlapping or touching parts of one focal element are merged.
    focal.push_back({FocalElement::canonical(std::move(*parts)), *mass});
  }

  BeliefModel build(const std::string& source) const {
    if (!bound) throw ParseError(source, std::max<std::size_t>(first_line, 1), 1, "missing 'M'");
    return BeliefModel::validated(*bound, focal);
  }
};

std::string format_interval_list(std::span<const ClosedInterval> parts) {
  std::string out = "[";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += ", ";
    out += "[" + format_double(parts[i].lo) + ", " + format_double(parts[i].hi) + "]";
  }
  return out + "]";
}

template <typename T, typename F>
std::string format_list(const std::vector<T>& xs, F&& f) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ", ";
    out += f(xs[i]);
  }
  return out + "]";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return buf.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Numbers

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  if (std::trunc(x) == x && std::abs(x) < 0x1.0p53) {
    std::snprintf(buf, sizeof buf, "%.0f", x);
    if (x == 0.0 && std::signbit(x)) return "-0";
  } else {
    std::snprintf(buf, sizeof buf, "%.17g", x);
  }
  return buf;
}

// ---------------------------------------------------------------------------
// Models

BeliefModel parse_model(std::string_view text, const std::string& source) {
  ModelBuilder builder;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    LineParser p(lines[i], i + 1, source);
    if (p.at_end()) continue;
    const Token at = p.peek();
    const std::string key = p.ident();
    if (!builder.handles(key)) p.fail(at, "unknown key '" + key + "'");
    p.expect('=');
    builder.parse(key, p, i + 1);
    p.finish();
  }
  return builder.build(source);
}

BeliefModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path), path.string()); }

std::string format_model(const BeliefModel& model) {
  std::string out = "M = " + format_double(model.bound()) + "\n";
  for (const auto& f : model.focal()) {
    out += "focal = { parts = " + format_interval_list(f.element.parts()) + ", mass = " + format_double(f.mass) + " }\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plans

SimPlan parse_plan(std::string_view text, const std::filesystem::path& base_dir, const std::string& source) {
  ModelBuilder inline_model;
  std::optional<std::filesystem::path> model_path;
  std::size_t model_path_line = 0;
  std::set<std::string> seen;
  SimPlan plan;
  bool have_n = false, have_alpha = false, have_pairs = false;

  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    LineParser p(lines[i], i + 1, source);
    if (p.at_end()) continue;
    const Token at = p.peek();
    const std::string key = p.ident();
    p.expect('=');
    if (inline_model.handles(key)) {
      inline_model.parse(key, p, i + 1);
      p.finish();
      continue;
    }
    if (!seen.insert(key).second) p.fail(at, "duplicate key '" + key + "'");

    if (key == "model") {
      model_path = base_dir / p.string_value();
      model_path_line = i + 1;
    } else if (key == "n_values") {
      plan.n_values = p.integer_list();
      have_n = true;
    } else if (key == "reps") {
      plan.reps = p.integer();
    } else if (key == "seed") {
      plan.seed = p.unsigned_integer();
    } else if (key == "slack") {
      plan.slack = p.number();
    } else if (key == "alpha_one_sided") {
      plan.alpha_one_sided = p.number_list();
      have_alpha = true;
    } else if (key == "alpha_pairs") {
      for (const auto& [a, b] : p.pair_list()) plan.alpha_pairs.push_back({a, b});
      have_pairs = true;
    } else if (key.starts_with("alpha_pairs@")) {
      const std::string_view digits = std::string_view(key).substr(12);
      std::int64_t n = 0;
      const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
      if (digits.empty() || ec != std::errc() || end != digits.data() + digits.size()) {
        p.fail(at, "expected alpha_pairs@<n>");
      }
      auto& pairs = plan.alpha_pairs_by_n[n];
      for (const auto& [a, b] : p.pair_list()) pairs.push_back({a, b});
    } else {
      p.fail(at, "unknown key '" + key + "'");
    }
    p.finish();
  }

  const bool have_inline = inline_model.bound.has_value() || !inline_model.focal.empty();
  if (model_path && have_inline) {
    throw ParseError(source, model_path_line, 1, "plan has both 'model' and inline M/focal entries");
  }
  if (model_path) {
    plan.model = load_model(*model_path);
  } else if (have_inline) {
    plan.model = inline_model.build(source);
  } else {
    throw ParseError(source, lines.size(), 1, "plan has no model");
  }
  if (!have_n) plan.n_values = default_n_schedule();
  if (!have_alpha) plan.alpha_one_sided = default_alpha_grid();
  if (!have_pairs) plan.alpha_pairs = default_alpha_pairs(default_alpha_grid());
  try {
    validate_plan(plan);
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, 1, 1, e.what());
  }
  return plan;
}

SimPlan load_plan(const std::filesystem::path& path) {
  return parse_plan(read_file(path), path.parent_path(), path.string());
}

std::string format_plan(const SimPlan& plan) {
  auto num = [](double x) { return format_double(x); };
  auto pair = [](const AlphaPair& p) { return "[" + format_double(p.lower) + ", " + format_double(p.upper) + "]"; };
  std::string out = format_model(plan.model);
  out += "n_values = " + format_list(plan.n_values, [](std::int64_t n) { return std::to_string(n); }) + "\n";
  out += "reps = " + std::to_string(plan.reps) + "\n";
  out += "seed = " + std::to_string(plan.seed) + "\n";
  out += "slack = " + format_double(plan.slack) + "\n";
  out += "alpha_one_sided = " + format_list(plan.alpha_one_sided, num) + "\n";
  out += "alpha_pairs = " + format_list(plan.alpha_pairs, pair) + "\n";
  for (const auto& [n, pairs] : plan.alpha_pairs_by_n) {
    out += "alpha_pairs@" + std::to_string(n) + " = " + format_list(pairs, pair) + "\n";
  }
  return out;
}

std::string plan_run_id(const SimPlan& plan) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const unsigned char c : format_plan(plan)) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string cell_text(const CsvCell& cell) {
  struct Visitor {
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(std::uint64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(const std::string& v) const { return v; }
  };
  return std::visit(Visitor{}, cell);
}

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_csv(const CsvTable& table) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += quoted(cells[i]);
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw std::invalid_argument("CSV row width does not match the header");
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (const auto& c : row) cells.push_back(cell_text(c));
    line(cells);
  }
  return out;
}

void emit_csv(const CsvTable& table, const std::filesystem::path& path) {
  const std::string text = to_csv(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("error writing " + path.string());
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text, const std::string& source) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  std::size_t line = 1, col = 1;
  bool in_quotes = false, row_started = false;
  for (std::size_t i = 0; i < text.size(); ++i, ++col) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') {
          ++line;
          col = 0;
        }
        cell += c;
      }
      continue;
    }
    row_started = true;
    if (c == '"') {
      if (!cell.empty()) throw ParseError(source, line, col, "quote inside an unquoted field");
      in_quotes = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(cell));
      cell.clear();
      rows.push_back(std::move(row));
      row.clear();
      row_started = false;
      ++line;
      col = 0;
    } else {
      cell += c;
    }
  }
  if (in_quotes) throw ParseError(source, line, col, "unterminated quoted field");
  if (row_started) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::string> simulation_schema() {
  return {"run_id", "n", "event_kind", "alpha1", "alpha2", "frequency", "reps", "se", "seed"};
}

std::vector<std::string> report_schema() {
  return {"experiment", "n", "alpha1", "alpha2", "theory", "empirical", "deviation", "se", "pass"};
}

CsvTable simulation_table(const SimResult& result, const std::string& run_id) {
  CsvTable table{simulation_schema(), {}};
  for (const auto& e : result.events) {
    table.rows.push_back({run_id, e.n, to_string(e.kind), e.alpha1, e.alpha2, e.frequency(), e.reps,
                          e.standard_error(), result.seed});
  }
  return table;
}

CsvTable report_table(const VerificationReport& report) {
  CsvTable table{report_schema(), {}};
  for (const auto& r : report.rows) {
    table.rows.push_back({r.experiment, r.n, r.alpha1, r.alpha2, r.theory, r.empirical, r.deviation, r.se,
                          std::string(r.pass ? "true" : "false")});
  }
  return table;
}

VerificationReport parse_report_csv(std::string_view text, const std::string& source) {
  const auto rows = parse_csv(text, source);
  if (rows.empty() || rows.front() != report_schema()) throw ParseError(source, 1, 1, "missing or unexpected report header");
  auto number = [&](const std::string& s, std::size_t line, std::size_t field) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) {
      throw ParseError(source, line, field + 1, "malformed number '" + s + "'");
    }
    return v;
  };
  VerificationReport report;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() != report_schema().size()) throw ParseError(source, i + 1, 1, "wrong number of fields");
    ReportRow row;
    row.experiment = r[0];
    row.n = static_cast<std::int64_t>(number(r[1], i + 1, 1));
    row.alpha1 = number(r[2], i + 1, 2);
    row.alpha2 = number(r[3], i + 1, 3);
    row.theory = number(r[4], i + 1, 4);
    row.empirical = number(r[5], i + 1, 5);
    row.deviation = number(r[6], i + 1, 6);
    row.se = number(r[7], i + 1, 7);
    if (r[8] != "true" && r[8] != "false") throw ParseError(source, i + 1, 9, "pass must be true or false");
    row.pass = r[8] == "true";
    report.rows.push_back(std::move(row));
  }
  report.rate = fit_rate(report);
  return report;
}

}  // namespace beliefclt
