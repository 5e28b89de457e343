#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace culpa {

struct SourcePos {
  std::size_t line = 1;
  std::size_t col = 1;
  bool operator==(const SourcePos&) const = default;
};

// JSON pointer -> position of the value's first character.
class SourceMap {
 public:
  void add(std::string ptr, SourcePos pos) { map_.emplace(std::move(ptr), pos); }

  // Falls back to the nearest recorded ancestor.
  SourcePos find(std::string ptr) const {
    while (true) {
      auto it = map_.find(ptr);
      if (it != map_.end()) return it->second;
      if (ptr.empty()) return {};
      ptr.erase(ptr.rfind('/'));
    }
  }
  bool empty() const { return map_.empty(); }

 private:
  std::map<std::string, SourcePos> map_;
};

inline std::string pointer_escape(std::string_view key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

namespace detail {

// Line/column bookkeeping for byte offsets. Columns count bytes.
class LineIndex {
 public:
  explicit LineIndex(std::string_view s) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] == '\n') starts_.push_back(i + 1);
  }
  SourcePos at(std::size_t offset) const {
    std::size_t lo = 0, hi = starts_.size();
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      if (starts_[mid] <= offset)
        lo = mid;
      else
        hi = mid;
    }
    return {lo + 1, offset - starts_[lo] + 1};
  }

 private:
  std::vector<std::size_t> starts_;
};

// Walks text that nlohmann already accepted and records where each value
// starts. Tolerant: stops quietly on anything unexpected.
class JsonLocator {
 public:
  explicit JsonLocator(std::string_view s) : s_(s), lines_(s) {}

  SourceMap run() {
    value("", 0);
    return std::move(out_);
  }

 private:
  static constexpr int kMaxDepth = 256;

  void ws() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\n' || s_[i_] == '\r')) ++i_;
  }
  bool at(char c) const { return i_ < s_.size() && s_[i_] == c; }

  std::string string_lit() {
    std::string out;
    if (!at('"')) return out;
    ++i_;
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
        const char e = s_[++i_];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case 'b': out += '\b'; break;
          case 'f': out += '\f'; break;
          case 'u': out += "\\u"; break;  // rare in keys; kept verbatim
          default: out += e;
        }
        ++i_;
      } else {
        out += s_[i_++];
      }
    }
    ++i_;
    return out;
  }

  void value(const std::string& ptr, int depth) {
    ws();
    if (i_ >= s_.size() || depth > kMaxDepth) return;
    out_.add(ptr, lines_.at(i_));
    if (at('{')) {
      ++i_;
      ws();
      if (at('}')) {
        ++i_;
        return;
      }
      while (i_ < s_.size()) {
        ws();
        const std::string key = string_lit();
        ws();
        if (!at(':')) return;
        ++i_;
        value(ptr + "/" + pointer_escape(key), depth + 1);
        ws();
        if (at(',')) {
          ++i_;
          continue;
        }
        if (at('}')) ++i_;
        return;
      }
    } else if (at('[')) {
      ++i_;
      ws();
      if (at(']')) {
        ++i_;
        return;
      }
      for (std::size_t k = 0; i_ < s_.size(); ++k) {
        value(ptr + "/" + std::to_string(k), depth + 1);
        ws();
        if (at(',')) {
          ++i_;
          continue;
        }
        if (at(']')) ++i_;
        return;
      }
    } else if (at('"')) {
      string_lit();
    } else {
      while (i_ < s_.size() && std::string_view(",]} \t\r\n").find(s_[i_]) == std::string_view::npos) ++i_;
    }
  }

  std::string_view s_;
  LineIndex lines_;
  std::size_t i_ = 0;
  SourceMap out_;
};

}  // namespace detail

inline SourceMap locate_json_values(std::string_view text) { return detail::JsonLocator(text).run(); }

}  // namespace culpa
