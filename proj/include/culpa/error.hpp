#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace culpa {

enum class ErrorCode {
  SyntaxError,
  TypeError,
  UnknownVariable,
  ValueNotInRange,
  DuplicateVariable,
  InvalidSignature,
  CyclicModel,
  RangeViolation,
  InvalidEpistemicState,
  PreconditionViolated,
  InvalidCostModel,
  InvalidN,
  InvalidM,
  NotAConjunction,
  EmptyReferenceSet,
  LimitExceeded,
};

inline const char* code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::SyntaxError: return "syntax-error";
    case ErrorCode::TypeError: return "type-error";
    case ErrorCode::UnknownVariable: return "unknown-variable";
    case ErrorCode::ValueNotInRange: return "value-not-in-range";
    case ErrorCode::DuplicateVariable: return "duplicate-variable";
    case ErrorCode::InvalidSignature: return "invalid-signature";
    case ErrorCode::CyclicModel: return "cyclic-model";
    case ErrorCode::RangeViolation: return "range-violation";
    case ErrorCode::InvalidEpistemicState: return "invalid-epistemic-state";
    case ErrorCode::PreconditionViolated: return "precondition-violated";
    case ErrorCode::InvalidCostModel: return "invalid-cost-model";
    case ErrorCode::InvalidN: return "invalid-N";
    case ErrorCode::InvalidM: return "invalid-M";
    case ErrorCode::NotAConjunction: return "not-a-conjunction";
    case ErrorCode::EmptyReferenceSet: return "empty-reference-set";
    case ErrorCode::LimitExceeded: return "limit-exceeded";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Position is a 0-based character offset into the parsed text.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t position)
      : Error(ErrorCode::SyntaxError, message + " at offset " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class CyclicModelError : public Error {
 public:
  explicit CyclicModelError(std::vector<std::string> cycle)
      : Error(ErrorCode::CyclicModel, describe(cycle)), cycle_(std::move(cycle)) {}
  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  static std::string describe(const std::vector<std::string>& cycle) {
    std::string s = "cyclic model: ";
    for (const auto& v : cycle) s += v + " -> ";
    if (!cycle.empty()) s += cycle.front();
    return s;
  }
  std::vector<std::string> cycle_;
};

class RangeViolationError : public Error {
 public:
  RangeViolationError(std::string variable, std::string parent_assignment, std::string value)
      : Error(ErrorCode::RangeViolation, "equation for " + variable + " yields " + value +
                                             " (outside its range) at " +
                                             (parent_assignment.empty() ? "{}" : parent_assignment)),
        variable_(std::move(variable)),
        parent_assignment_(std::move(parent_assignment)),
        value_(std::move(value)) {}
  const std::string& variable() const noexcept { return variable_; }
  const std::string& parent_assignment() const noexcept { return parent_assignment_; }
  const std::string& value() const noexcept { return value_; }

 private:
  std::string variable_;
  std::string parent_assignment_;
  std::string value_;
};

}  // namespace culpa
