#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "numreason/document.hpp"
#include "numreason/error.hpp"

namespace numreason {

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

enum class OpCode {
  add,
  subtract,
  multiply,
  divide,
  exp,
  greater,
  table_sum,
  table_average,
  table_max,
  table_min,
};

inline constexpr std::size_t kOpCount = 10;

/// Canonical lowercase, underscore spelling ("table_sum").
std::string_view op_name(OpCode op);

/// Accepts any case and hyphen or underscore spellings ("Table-Sum").
std::optional<OpCode> op_from_name(std::string_view token);

bool is_table_op(OpCode op);
std::size_t op_arity(OpCode op);

/// Canonical names of all ten operations, in OpCode order.
std::span<const std::string_view> op_vocabulary();

struct Number {
  double value = 0.0;
  bool operator==(const Number&) const = default;
};

/// Named constant such as const_100; see resolve_const().
struct Const {
  std::string name;
  bool operator==(const Const&) const = default;
};

/// "#i": the value produced by step i.
struct StepRef {
  std::size_t index = 0;
  bool operator==(const StepRef&) const = default;
};

/// Argument of a table aggregation: the row-name cell to look up.
struct RowName {
  std::string text;
  bool operator==(const RowName&) const = default;
};

using Arg = std::variant<Number, Const, StepRef, RowName>;

struct Step {
  OpCode op = OpCode::add;
  std::vector<Arg> args;
  bool operator==(const Step&) const = default;
};

struct Program {
  std::vector<Step> steps;
  bool operator==(const Program&) const = default;
};

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

enum class YesNo { no, yes };

/// Result of a step: a finite number, or the yes/no answer of greater().
using Value = std::variant<double, YesNo>;

std::string format_value(const Value& value);

/// Converts a gold answer literal; nullopt when it is neither a finite number
/// nor "yes"/"no".
std::optional<Value> answer_value(const AnswerLiteral& literal);

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class ProgramError : public Error {
public:
  enum class Kind { syntax, unknown_operator, arity, reference, unknown_constant };

  ProgramError(Kind kind, std::size_t position, const std::string& message);

  Kind kind() const { return kind_; }
  /// Byte offset into the program text (0 when not tied to text).
  std::size_t position() const { return position_; }

private:
  Kind kind_;
  std::size_t position_;
};

class ExecError : public Error {
public:
  enum class Kind { div_zero, row_not_found, empty_aggregation, type_error, non_finite };

  ExecError(Kind kind, std::size_t step, const std::string& message);

  Kind kind() const { return kind_; }
  std::size_t step() const { return step_; }

private:
  Kind kind_;
  std::size_t step_;
};

std::string_view to_string(ProgramError::Kind kind);
std::string_view to_string(ExecError::Kind kind);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Parses "op(arg, arg), op(#0, arg), ...". Table aggregations take one row
/// name; a trailing literal "none" argument is tolerated and dropped.
/// Nested calls are rejected. Throws ProgramError.
Program parse_program(std::string_view text);

/// Canonical text: lowercase ops, ", " between arguments and steps, numbers
/// in shortest round-trip form.
std::string serialize_program(const Program& program);

/// serialize_program(parse_program(text)).
std::string canonicalize_program(std::string_view text);

/// Structural checks parse_program() enforces, for programs built in code.
void validate_program(const Program& program);

/// Throws ProgramError(unknown_constant) for unregistered names.
double resolve_const(std::string_view name);
bool is_registered_const(std::string_view name);

struct Execution {
  Value value;
  std::vector<std::string> warnings;  // ambiguous row lookups
};

/// Evaluates the steps in order; the last step's value is the answer.
/// Table aggregations look rows up in `table` (an empty table has no rows).
/// exp(a, b) is a raised to the power b. Throws ExecError.
Execution execute_traced(const Program& program, const Table& table = {});
Value execute(const Program& program, const Table& table = {});

/// Row lookup shared by the executor and the labeler: compares normalized
/// row-name cells (case-folded, whitespace collapsed, trailing punctuation
/// stripped, numerals compared by value) of data rows 1..n-1. The first
/// match wins; `matches` receives the total match count.
std::optional<std::size_t> find_table_row(const Table& table, std::string_view row_name,
                                          std::size_t* matches = nullptr);

/// Normal form used by find_table_row().
std::string normalize_row_name(std::string_view name);

/// Exact step-by-step match after normalization: same ops, numbers equal
/// within 1e-9, constants by name, row names after case-fold and whitespace
/// collapse. No commutativity.
bool programs_match(const Program& pred, const Program& gold);
/// String overload: false if either side fails to parse.
bool programs_match(std::string_view pred, std::string_view gold);

inline constexpr double kDefaultAnswerTolerance = 1e-4;

/// Yes/no compared exactly; numbers by |got - gold| <= max(tol, tol * |gold|).
bool answers_match(const Value& got, const Value& gold, double tol = kDefaultAnswerTolerance);

}  // namespace numreason
