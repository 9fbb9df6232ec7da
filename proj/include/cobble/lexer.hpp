#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cobble {

struct Token {
  enum class Kind : uint8_t {
    Eof, Ident, Number, CharLit, StringLit, Punct, Directive,
  };
  Kind kind = Kind::Eof;
  std::string text;  // lexeme; Directive holds the whole '#...' line
  int line = 1;
  size_t start = 0;  // byte offset of first char
  size_t end = 0;    // one past last char

  bool is(std::string_view s) const {
    return (kind == Kind::Punct || kind == Kind::Ident) && text == s;
  }
};

struct LexResult {
  std::vector<Token> tokens;  // terminated by Eof
  bool ok = true;
  int error_line = 0;
  std::string error;
};

LexResult lex(std::string_view src);

}  // namespace cobble
