#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "bqldb/bql/ast.hpp"

namespace bqldb::bql {

struct Token {
  enum class Kind { ident, number, string, dstring, symbol, end };
  Kind kind = Kind::end;
  std::string text;   // ident/symbol verbatim; string contents unquoted
  double num = 0.0;
  SourcePos pos;
  std::size_t offset = 0;  // byte offset of first character
  std::size_t length = 0;

  std::size_t end_offset() const { return offset + length; }
};

inline bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Keywords are case-insensitive and recognized contextually by the parser,
// so the lexer only distinguishes identifiers, numbers, quoted strings and
// punctuation.
inline std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.pos = {line, col};
    t.offset = i;
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < text.size() && ident_char(text[j])) ++j;
      t.kind = Token::Kind::ident;
      t.text = std::string(text.substr(i, j - i));
      t.length = j - i;
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < text.size() &&
                std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.'))
        ++j;
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          ++k;
          while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
          j = k;
        }
      }
      t.kind = Token::Kind::number;
      t.text = std::string(text.substr(i, j - i));
      auto d = parse_double(t.text);
      if (!d) throw ParseError(t.pos, "malformed number '" + t.text + "'");
      t.num = *d;
      t.length = j - i;
      advance(j - i);
    } else if (c == '\'' || c == '"') {
      char quote = c;
      std::size_t j = i + 1;
      std::string contents;
      bool closed = false;
      while (j < text.size()) {
        if (text[j] == quote) {
          if (j + 1 < text.size() && text[j + 1] == quote) {
            contents.push_back(quote);
            j += 2;
            continue;
          }
          closed = true;
          ++j;
          break;
        }
        contents.push_back(text[j]);
        ++j;
      }
      if (!closed) throw ParseError(t.pos, "unterminated string literal");
      t.kind = quote == '\'' ? Token::Kind::string : Token::Kind::dstring;
      t.text = std::move(contents);
      t.length = j - i;
      advance(j - i);
    } else {
      static const std::string two_char[] = {"<=", ">=", "!=", "<>"};
      std::string sym(1, c);
      for (const auto& tc : two_char)
        if (text.substr(i, 2) == tc) {
          sym = tc;
          break;
        }
      t.kind = Token::Kind::symbol;
      t.text = sym;
      t.length = sym.size();
      advance(sym.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.kind = Token::Kind::end;
  end.pos = {line, col};
  end.offset = text.size();
  out.push_back(std::move(end));
  return out;
}

}  // namespace bqldb::bql
