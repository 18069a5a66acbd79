#include "numreason/program.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <utility>

#include "numreason/text.hpp"

namespace numreason {
namespace {

constexpr std::array<std::string_view, kOpCount> kOpNames = {
    "add",       "subtract",      "multiply",  "divide",   "exp",
    "greater",   "table_sum",     "table_average", "table_max", "table_min",
};

struct NamedConst {
  std::string_view name;
  double value;
};

constexpr std::array<NamedConst, 18> kConstants = {{
    {"const_1", 1.0},
    {"const_2", 2.0},
    {"const_3", 3.0},
    {"const_4", 4.0},
    {"const_5", 5.0},
    {"const_6", 6.0},
    {"const_7", 7.0},
    {"const_8", 8.0},
    {"const_9", 9.0},
    {"const_10", 10.0},
    {"const_12", 12.0},
    {"const_100", 100.0},
    {"const_1000", 1000.0},
    {"const_10000", 10000.0},
    {"const_100000", 100000.0},
    {"const_1000000", 1000000.0},
    {"const_1000000000", 1000000000.0},
    {"const_m1", -1.0},
}};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::optional<double> parse_literal(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Program parse() {
    Program program;
    skip_ws();
    if (pos_ == text_.size()) fail(ProgramError::Kind::syntax, pos_, "empty program");
    while (true) {
      program.steps.push_back(parse_step(program.steps.size()));
      skip_ws();
      if (pos_ == text_.size()) break;
      if (text_[pos_] != ',') fail(ProgramError::Kind::syntax, pos_, "expected ',' between steps");
      ++pos_;
      skip_ws();
    }
    return program;
  }

private:
  struct RawArg {
    std::string_view text;
    std::size_t position;
  };

  [[noreturn]] void fail(ProgramError::Kind kind, std::size_t at, const std::string& what) const {
    throw ProgramError(kind, at, what + " at offset " + std::to_string(at));
  }

  void skip_ws() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  Step parse_step(std::size_t index) {
    const std::size_t op_start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ',' && text_[pos_] != ')') ++pos_;
    std::string_view token = text::trim(text_.substr(op_start, pos_ - op_start));
    if (token.empty()) fail(ProgramError::Kind::syntax, op_start, "expected an operation name");
    if (pos_ == text_.size() || text_[pos_] != '(')
      fail(ProgramError::Kind::syntax, pos_, "expected '(' after '" + std::string(token) + "'");
    auto op = op_from_name(token);
    if (!op) fail(ProgramError::Kind::unknown_operator, op_start, "unknown operator '" + std::string(token) + "'");
    ++pos_;

    std::vector<RawArg> raw;
    while (true) {
      skip_ws();
      const std::size_t start = pos_;
      int depth = 0;
      while (pos_ < text_.size()) {
        char c = text_[pos_];
        if (c == '(') {
          ++depth;
        } else if (c == ')') {
          if (depth == 0) break;
          --depth;
        } else if (c == ',' && depth == 0) {
          break;
        }
        ++pos_;
      }
      if (pos_ == text_.size()) fail(ProgramError::Kind::syntax, start, "unterminated argument list");
      std::string_view arg = text::trim(text_.substr(start, pos_ - start));
      if (arg.empty()) fail(ProgramError::Kind::syntax, start, "empty argument");
      raw.push_back({arg, start});
      if (text_[pos_] == ')') {
        ++pos_;
        break;
      }
      ++pos_;  // ','
    }
    return build_step(*op, std::move(raw), index, op_start);
  }

  Step build_step(OpCode op, std::vector<RawArg> raw, std::size_t index, std::size_t op_start) const {
    Step step{op, {}};
    if (is_table_op(op)) {
      if (raw.size() == 2 && text::to_lower(raw[1].text) == "none") raw.pop_back();
      if (raw.size() != 1)
        fail(ProgramError::Kind::arity, op_start,
             std::string(op_name(op)) + " takes 1 argument, got " + std::to_string(raw.size()));
      step.args.emplace_back(RowName{text::space_parentheses(raw[0].text)});
      return step;
    }
    if (raw.size() != 2)
      fail(ProgramError::Kind::arity, op_start,
           std::string(op_name(op)) + " takes 2 arguments, got " + std::to_string(raw.size()));
    for (const auto& [arg, at] : raw) step.args.push_back(classify(arg, at, index));
    return step;
  }

  Arg classify(std::string_view arg, std::size_t at, std::size_t index) const {
    if (arg.front() == '#') {
      std::size_t ref = 0;
      auto digits = arg.substr(1);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), ref);
      if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size())
        fail(ProgramError::Kind::syntax, at, "malformed step reference '" + std::string(arg) + "'");
      if (ref >= index)
        fail(ProgramError::Kind::reference, at,
             "step " + std::to_string(index) + " refers to #" + std::to_string(ref));
      return StepRef{ref};
    }
    std::string lowered = text::to_lower(arg);
    if (lowered.starts_with("const_")) {
      if (!is_registered_const(lowered))
        fail(ProgramError::Kind::unknown_constant, at, "unknown constant '" + std::string(arg) + "'");
      return Const{std::move(lowered)};
    }
    if (auto value = parse_literal(arg)) return Number{*value};
    if (arg.find('(') != std::string_view::npos)
      fail(ProgramError::Kind::syntax, at, "nested calls are not supported");
    fail(ProgramError::Kind::syntax, at,
         "expected a number, constant or step reference, got '" + std::string(arg) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double numeric_operand(const Arg& arg, const std::vector<Value>& values, std::size_t step) {
  if (const auto* n = std::get_if<Number>(&arg)) return n->value;
  if (const auto* c = std::get_if<Const>(&arg)) return resolve_const(c->name);
  if (const auto* r = std::get_if<StepRef>(&arg)) {
    const Value& v = values.at(r->index);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    throw ExecError(ExecError::Kind::type_error, step,
                    "step " + std::to_string(step) + " uses the yes/no result of #" + std::to_string(r->index) +
                        " as a number");
  }
  throw ExecError(ExecError::Kind::type_error, step, "row name used as a number");
}

double checked(double value, std::size_t step) {
  if (!std::isfinite(value))
    throw ExecError(ExecError::Kind::non_finite, step, "step " + std::to_string(step) + " is not finite");
  return value;
}

Value aggregate(OpCode op, const RowName& row_name, const Table& table, std::size_t step,
                std::vector<std::string>& warnings) {
  std::size_t matches = 0;
  auto row = find_table_row(table, row_name.text, &matches);
  if (!row)
    throw ExecError(ExecError::Kind::row_not_found, step, "no table row named '" + row_name.text + "'");
  if (matches > 1) {
    warnings.push_back("step " + std::to_string(step) + ": row name '" + row_name.text + "' matches " +
                       std::to_string(matches) + " rows; using row " + std::to_string(*row));
  }
  const auto& cells = table[*row];
  std::vector<double> numbers;
  for (std::size_t c = 1; c < cells.size(); ++c)
    if (auto v = text::normalize_number(cells[c])) numbers.push_back(*v);
  if (numbers.empty())
    throw ExecError(ExecError::Kind::empty_aggregation, step, "row '" + row_name.text + "' has no numeric cells");

  double sum = 0.0;
  for (double v : numbers) sum += v;
  switch (op) {
    case OpCode::table_sum:
      return checked(sum, step);
    case OpCode::table_average:
      return checked(sum / static_cast<double>(numbers.size()), step);
    case OpCode::table_max:
      return *std::max_element(numbers.begin(), numbers.end());
    case OpCode::table_min:
      return *std::min_element(numbers.begin(), numbers.end());
    default:
      break;
  }
  throw ExecError(ExecError::Kind::type_error, step, "not a table operation");
}

bool args_match(const Arg& a, const Arg& b) {
  if (a.index() != b.index()) return false;
  if (const auto* n = std::get_if<Number>(&a)) return std::fabs(n->value - std::get<Number>(b).value) <= 1e-9;
  if (const auto* c = std::get_if<Const>(&a)) return c->name == std::get<Const>(b).name;
  if (const auto* r = std::get_if<StepRef>(&a)) return r->index == std::get<StepRef>(b).index;
  return text::to_lower(text::collapse_whitespace(std::get<RowName>(a).text)) ==
         text::to_lower(text::collapse_whitespace(std::get<RowName>(b).text));
}

}  // namespace

std::string_view op_name(OpCode op) { return kOpNames[static_cast<std::size_t>(op)]; }

std::optional<OpCode> op_from_name(std::string_view token) {
  std::string norm = text::to_lower(text::trim(token));
  std::replace(norm.begin(), norm.end(), '-', '_');
  for (std::size_t i = 0; i < kOpNames.size(); ++i)
    if (kOpNames[i] == norm) return static_cast<OpCode>(i);
  return std::nullopt;
}

bool is_table_op(OpCode op) {
  return op == OpCode::table_sum || op == OpCode::table_average || op == OpCode::table_max ||
         op == OpCode::table_min;
}

std::size_t op_arity(OpCode op) { return is_table_op(op) ? 1 : 2; }

std::span<const std::string_view> op_vocabulary() { return kOpNames; }

std::string format_value(const Value& value) {
  if (const auto* d = std::get_if<double>(&value)) return text::format_number(*d);
  return std::get<YesNo>(value) == YesNo::yes ? "yes" : "no";
}

std::optional<Value> answer_value(const AnswerLiteral& literal) {
  if (const auto* d = std::get_if<double>(&literal)) {
    if (!std::isfinite(*d)) return std::nullopt;
    return Value{*d};
  }
  const auto& s = std::get<std::string>(literal);
  if (s == "yes") return Value{YesNo::yes};
  if (s == "no") return Value{YesNo::no};
  return std::nullopt;
}

ProgramError::ProgramError(Kind kind, std::size_t position, const std::string& message)
    : Error(message), kind_(kind), position_(position) {}

ExecError::ExecError(Kind kind, std::size_t step, const std::string& message)
    : Error(message), kind_(kind), step_(step) {}

std::string_view to_string(ProgramError::Kind kind) {
  switch (kind) {
    case ProgramError::Kind::syntax: return "SyntaxError";
    case ProgramError::Kind::unknown_operator: return "UnknownOperator";
    case ProgramError::Kind::arity: return "ArityError";
    case ProgramError::Kind::reference: return "ReferenceError";
    case ProgramError::Kind::unknown_constant: return "UnknownConstant";
  }
  return "ProgramError";
}

std::string_view to_string(ExecError::Kind kind) {
  switch (kind) {
    case ExecError::Kind::div_zero: return "DivZero";
    case ExecError::Kind::row_not_found: return "RowNotFound";
    case ExecError::Kind::empty_aggregation: return "EmptyAggregation";
    case ExecError::Kind::type_error: return "TypeError";
    case ExecError::Kind::non_finite: return "NonFinite";
  }
  return "ExecError";
}

Program parse_program(std::string_view text) { return Parser(text).parse(); }

std::string serialize_program(const Program& program) {
  std::string out;
  for (std::size_t s = 0; s < program.steps.size(); ++s) {
    const Step& step = program.steps[s];
    if (s > 0) out += ", ";
    out += op_name(step.op);
    out += '(';
    for (std::size_t a = 0; a < step.args.size(); ++a) {
      if (a > 0) out += ", ";
      std::visit(
          [&](const auto& arg) {
            using T = std::decay_t<decltype(arg)>;
            if constexpr (std::is_same_v<T, Number>) {
              out += text::format_number(arg.value);
            } else if constexpr (std::is_same_v<T, Const>) {
              out += arg.name;
            } else if constexpr (std::is_same_v<T, StepRef>) {
              out += '#';
              out += std::to_string(arg.index);
            } else {
              out += arg.text;
            }
          },
          step.args[a]);
    }
    out += ')';
  }
  return out;
}

std::string canonicalize_program(std::string_view text) { return serialize_program(parse_program(text)); }

void validate_program(const Program& program) {
  using K = ProgramError::Kind;
  if (program.steps.empty()) throw ProgramError(K::syntax, 0, "empty program");
  for (std::size_t j = 0; j < program.steps.size(); ++j) {
    const Step& step = program.steps[j];
    const std::string where = "step " + std::to_string(j);
    if (step.args.size() != op_arity(step.op))
      throw ProgramError(K::arity, 0, where + ": " + std::string(op_name(step.op)) + " takes " +
                                          std::to_string(op_arity(step.op)) + " argument(s)");
    for (const Arg& arg : step.args) {
      const bool row = std::holds_alternative<RowName>(arg);
      if (row != is_table_op(step.op))
        throw ProgramError(K::syntax, 0, where + ": argument kind does not fit " + std::string(op_name(step.op)));
      if (const auto* r = std::get_if<StepRef>(&arg); r && r->index >= j)
        throw ProgramError(K::reference, 0, where + " refers to #" + std::to_string(r->index));
      if (const auto* c = std::get_if<Const>(&arg); c && !is_registered_const(c->name))
        throw ProgramError(K::unknown_constant, 0, where + ": unknown constant '" + c->name + "'");
    }
  }
}

bool is_registered_const(std::string_view name) {
  std::string lowered = text::to_lower(name);
  return std::any_of(kConstants.begin(), kConstants.end(), [&](const NamedConst& c) { return c.name == lowered; });
}

double resolve_const(std::string_view name) {
  std::string lowered = text::to_lower(name);
  for (const auto& c : kConstants)
    if (c.name == lowered) return c.value;
  throw ProgramError(ProgramError::Kind::unknown_constant, 0, "unknown constant '" + std::string(name) + "'");
}

std::string normalize_row_name(std::string_view name) {
  std::string s = text::to_lower(text::space_parentheses(name));
  while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back())) && s.back() != ')' && s.back() != '%')
    s.pop_back();
  while (!s.empty() && s.back() == ' ') s.pop_back();
  if (auto number = text::normalize_number(s)) return "#" + text::format_number(*number);
  return s;
}

std::optional<std::size_t> find_table_row(const Table& table, std::string_view row_name, std::size_t* matches) {
  const std::string key = normalize_row_name(row_name);
  std::optional<std::size_t> first;
  std::size_t count = 0;
  for (std::size_t r = 1; r < table.size(); ++r) {
    if (table[r].empty()) continue;
    if (normalize_row_name(table[r][0]) == key) {
      if (!first) first = r;
      ++count;
    }
  }
  if (matches) *matches = count;
  return first;
}

Execution execute_traced(const Program& program, const Table& table) {
  validate_program(program);
  Execution result{Value{0.0}, {}};
  std::vector<Value> values;
  values.reserve(program.steps.size());
  for (std::size_t j = 0; j < program.steps.size(); ++j) {
    const Step& step = program.steps[j];
    if (is_table_op(step.op)) {
      values.push_back(aggregate(step.op, std::get<RowName>(step.args[0]), table, j, result.warnings));
      continue;
    }
    const double a = numeric_operand(step.args[0], values, j);
    const double b = numeric_operand(step.args[1], values, j);
    switch (step.op) {
      case OpCode::add: values.emplace_back(checked(a + b, j)); break;
      case OpCode::subtract: values.emplace_back(checked(a - b, j)); break;
      case OpCode::multiply: values.emplace_back(checked(a * b, j)); break;
      case OpCode::divide:
        if (b == 0.0)
          throw ExecError(ExecError::Kind::div_zero, j, "step " + std::to_string(j) + " divides by zero");
        values.emplace_back(checked(a / b, j));
        break;
      case OpCode::exp: values.emplace_back(checked(std::pow(a, b), j)); break;
      case OpCode::greater: values.emplace_back(a > b ? YesNo::yes : YesNo::no); break;
      default: break;
    }
  }
  result.value = values.back();
  return result;
}

Value execute(const Program& program, const Table& table) { return execute_traced(program, table).value; }

bool programs_match(const Program& pred, const Program& gold) {
  if (pred.steps.size() != gold.steps.size()) return false;
  for (std::size_t j = 0; j < pred.steps.size(); ++j) {
    const Step& a = pred.steps[j];
    const Step& b = gold.steps[j];
    if (a.op != b.op || a.args.size() != b.args.size()) return false;
    for (std::size_t k = 0; k < a.args.size(); ++k)
      if (!args_match(a.args[k], b.args[k])) return false;
  }
  return true;
}

bool programs_match(std::string_view pred, std::string_view gold) {
  try {
    return programs_match(parse_program(pred), parse_program(gold));
  } catch (const ProgramError&) {
    return false;
  }
}

bool answers_match(const Value& got, const Value& gold, double tol) {
  if (got.index() != gold.index()) return false;
  if (const auto* g = std::get_if<YesNo>(&got)) return *g == std::get<YesNo>(gold);
  const double a = std::get<double>(got);
  const double b = std::get<double>(gold);
  return std::fabs(a - b) <= std::max(tol, tol * std::fabs(b));
}

}  // namespace numreason
