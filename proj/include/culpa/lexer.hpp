#pragma once

#include "culpa/error.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace culpa::detail {

enum class Tok { Int, Ident, Quoted, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

// Shared tokenizer for equation bodies and causal formulas.
inline std::vector<Token> tokenize(std::string_view src) {
  static constexpr std::string_view two_char[] = {"<-", "==", "!=", "<=", ">=", "&&", "||"};
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_digit(c)) {
      while (i < src.size() && is_digit(src[i])) ++i;
      if (i < src.size() && is_alpha(src[i])) throw SyntaxError("malformed number", start);
      out.push_back({Tok::Int, std::string(src.substr(start, i - start)), start});
    } else if (is_alpha(c)) {
      while (i < src.size() && (is_alpha(src[i]) || is_digit(src[i]))) ++i;
      out.push_back({Tok::Ident, std::string(src.substr(start, i - start)), start});
    } else if (c == '\'') {
      ++i;
      while (i < src.size() && src[i] != '\'') ++i;
      if (i >= src.size()) throw SyntaxError("unterminated quoted value", start);
      out.push_back({Tok::Quoted, std::string(src.substr(start + 1, i - start - 1)), start});
      ++i;
    } else {
      bool matched = false;
      for (auto op : two_char) {
        if (src.substr(i, 2) == op) {
          out.push_back({Tok::Punct, std::string(op), start});
          i += 2;
          matched = true;
          break;
        }
      }
      if (matched) continue;
      static constexpr std::string_view singles = "()[]+-*/=<>!&|,";
      if (singles.find(c) == std::string_view::npos)
        throw SyntaxError(std::string("unexpected character '") + c + "'", start);
      out.push_back({Tok::Punct, std::string(1, c), start});
      ++i;
    }
  }
  out.push_back({Tok::End, "", src.size()});
  return out;
}

class TokenStream {
 public:
  explicit TokenStream(std::string_view src) : toks_(tokenize(src)) {}

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }
  bool at_word(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }
  bool accept(std::string_view p) {
    if (at_punct(p) || at_word(p)) {
      next();
      return true;
    }
    return false;
  }
  void expect(std::string_view p) {
    if (!accept(p)) fail("expected '" + std::string(p) + "'");
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const auto& t = peek();
    throw SyntaxError(msg + (t.kind == Tok::End ? " but reached end of input" : ", found '" + t.text + "'"), t.pos);
  }
  bool done() const { return peek().kind == Tok::End; }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace culpa::detail
