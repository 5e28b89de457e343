#pragma once

#include "culpa/error.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace culpa {

enum class VarKind { Exogenous, Endogenous };

struct VarRef {
  VarKind kind;
  std::size_t index;
  bool operator==(const VarRef&) const = default;
};

inline bool parse_int64(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  std::size_t i = 0;
  bool neg = false;
  if (s[0] == '-') {
    neg = true;
    i = 1;
  }
  if (i == s.size()) return false;
  std::int64_t v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    if (v > (INT64_MAX - 9) / 10) return false;
    v = v * 10 + (s[i] - '0');
  }
  out = neg ? -v : v;
  return true;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!head(s[0])) return false;
  for (char c : s)
    if (!head(c) && !(c >= '0' && c <= '9')) return false;
  return true;
}

// A variable and its finite ordered range. Integer-typed iff every value is a
// base-10 integer.
class Variable {
 public:
  Variable(std::string name, std::vector<std::string> range) : name_(std::move(name)), range_(std::move(range)) {
    if (!is_identifier(name_)) throw Error(ErrorCode::InvalidSignature, "invalid variable name '" + name_ + "'");
    if (range_.empty()) throw Error(ErrorCode::InvalidSignature, "variable " + name_ + " has an empty range");
    integer_ = true;
    for (std::size_t i = 0; i < range_.size(); ++i) {
      const auto& v = range_[i];
      if (v.empty()) throw Error(ErrorCode::InvalidSignature, "variable " + name_ + " has an empty value");
      if (!index_.emplace(v, static_cast<int>(i)).second)
        throw Error(ErrorCode::InvalidSignature, "variable " + name_ + " lists value '" + v + "' twice");
      std::int64_t n = 0;
      if (parse_int64(v, n)) {
        ints_.push_back(n);
      } else {
        integer_ = false;
      }
    }
    if (!integer_) {
      ints_.clear();
    } else {
      // "01" and "1" would be the same integer under two names.
      std::unordered_set<std::int64_t> seen(ints_.begin(), ints_.end());
      if (seen.size() != ints_.size())
        throw Error(ErrorCode::InvalidSignature, "variable " + name_ + " lists the same integer twice");
    }
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& range() const noexcept { return range_; }
  std::size_t size() const noexcept { return range_.size(); }
  bool is_integer() const noexcept { return integer_; }
  std::int64_t int_value(int idx) const { return ints_[static_cast<std::size_t>(idx)]; }
  const std::string& value(int idx) const { return range_[static_cast<std::size_t>(idx)]; }

  std::optional<int> find(std::string_view value) const {
    auto it = index_.find(std::string(value));
    if (it != index_.end()) return it->second;
    if (integer_) {
      std::int64_t n = 0;
      if (parse_int64(value, n))
        for (std::size_t i = 0; i < ints_.size(); ++i)
          if (ints_[i] == n) return static_cast<int>(i);
    }
    return std::nullopt;
  }

  std::optional<int> find_int(std::int64_t n) const {
    if (!integer_) return std::nullopt;
    for (std::size_t i = 0; i < ints_.size(); ++i)
      if (ints_[i] == n) return static_cast<int>(i);
    return std::nullopt;
  }

  int value_index(std::string_view value) const {
    if (auto i = find(value)) return *i;
    throw Error(ErrorCode::ValueNotInRange, "value '" + std::string(value) + "' is not in the range of " + name_);
  }

  bool operator==(const Variable& o) const { return name_ == o.name_ && range_ == o.range_; }

 private:
  std::string name_;
  std::vector<std::string> range_;
  bool integer_ = false;
  std::vector<std::int64_t> ints_;
  std::unordered_map<std::string, int> index_;
};

class Signature {
 public:
  Signature(std::vector<Variable> exogenous, std::vector<Variable> endogenous, std::string action_variable)
      : exo_(std::move(exogenous)), endo_(std::move(endogenous)), action_name_(std::move(action_variable)) {
    for (std::size_t i = 0; i < exo_.size(); ++i) add(exo_[i].name(), {VarKind::Exogenous, i});
    for (std::size_t i = 0; i < endo_.size(); ++i) add(endo_[i].name(), {VarKind::Endogenous, i});
    auto a = find(action_name_);
    if (!a || a->kind != VarKind::Endogenous)
      throw Error(ErrorCode::InvalidSignature,
                  "action variable '" + action_name_ + "' must be an endogenous variable");
    action_ = a->index;
  }

  const std::vector<Variable>& exogenous() const noexcept { return exo_; }
  const std::vector<Variable>& endogenous() const noexcept { return endo_; }
  const Variable& exo(std::size_t i) const { return exo_[i]; }
  const Variable& endo(std::size_t i) const { return endo_[i]; }
  const Variable& var(VarRef r) const { return r.kind == VarKind::Exogenous ? exo_[r.index] : endo_[r.index]; }

  std::size_t action_index() const noexcept { return action_; }
  const Variable& action() const { return endo_[action_]; }
  const std::string& action_name() const noexcept { return action_name_; }

  std::optional<VarRef> find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t endo_index(std::string_view name) const {
    auto r = find(name);
    if (!r) throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(name) + "'");
    if (r->kind != VarKind::Endogenous)
      throw Error(ErrorCode::UnknownVariable, "'" + std::string(name) + "' is exogenous, expected an endogenous variable");
    return r->index;
  }

  bool operator==(const Signature& o) const {
    return exo_ == o.exo_ && endo_ == o.endo_ && action_name_ == o.action_name_;
  }

 private:
  void add(const std::string& name, VarRef ref) {
    if (!by_name_.emplace(name, ref).second)
      throw Error(ErrorCode::DuplicateVariable, "variable '" + name + "' declared twice");
  }

  std::vector<Variable> exo_;
  std::vector<Variable> endo_;
  std::string action_name_;
  std::size_t action_ = 0;
  std::unordered_map<std::string, VarRef> by_name_;
};

}  // namespace culpa
