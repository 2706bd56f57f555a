#pragma once

// Tokenizer shared by the line-oriented document parsers.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "idg/error.hpp"

namespace idg::detail {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

// Calls fn(line_number, tokens) for every non-blank line, comments stripped.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::vector<Token> toks;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      toks.push_back(Token{line.substr(i, j - i), i + 1});
      i = j;
    }
    if (!toks.empty()) fn(line_no, toks);
    if (end == text.size()) break;
    pos = end + 1;
  }
}

inline void expect_arity(const std::vector<Token>& toks, std::size_t n, std::size_t line) {
  if (toks.size() != n) {
    // Too many: the first extra token. Too few: just past the last one.
    const std::size_t col =
        toks.size() > n ? toks[n].column : toks.back().column + toks.back().text.size() + 1;
    throw ParseError(line, col,
                     "'" + std::string(toks[0].text) + "' expects " + std::to_string(n - 1) +
                         " argument(s), got " + std::to_string(toks.size() - 1));
  }
}

// Non-negative decimal integer.
inline long long parse_int(const Token& tok, std::size_t line, bool allow_negative = false) {
  std::string_view s = tok.text;
  bool neg = false;
  if (allow_negative && !s.empty() && s[0] == '-') {
    neg = true;
    s.remove_prefix(1);
  }
  if (s.empty() || s.size() > 12) {
    throw ParseError(line, tok.column, "expected an integer, got '" + std::string(tok.text) + "'");
  }
  long long v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') {
      throw ParseError(line, tok.column,
                       "expected an integer, got '" + std::string(tok.text) + "'");
    }
    v = v * 10 + (c - '0');
  }
  return neg ? -v : v;
}

}  // namespace idg::detail
