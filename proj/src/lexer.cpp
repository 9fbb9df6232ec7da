#include "cobble/lexer.hpp"

#include <cctype>
#include <cstring>

namespace cobble {

namespace {

bool ident_start(char c) { return isalpha((unsigned char)c) || c == '_'; }
bool ident_char(char c) { return isalnum((unsigned char)c) || c == '_'; }

// Multi-char punctuators, longest first within each first-char group.
const char* kPuncts[] = {
    "<<=", ">>=", "...",
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "^=", "|=",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "&", "^", "|", "~",
    "?", ":", ";", ",", ".", "(", ")", "[", "]", "{", "}",
};

}  // namespace

LexResult lex(std::string_view src) {
  LexResult out;
  size_t i = 0;
  int line = 1;
  const size_t n = src.size();

  auto fail = [&](const std::string& msg) {
    out.ok = false;
    out.error_line = line;
    out.error = msg;
  };

  while (i < n) {
    char c = src[i];
    if (c == '\n') {
      line++;
      i++;
      continue;
    }
    if (isspace((unsigned char)c)) {
      i++;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') i++;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      size_t j = i + 2;
      int start_line = line;
      while (j + 1 < n && !(src[j] == '*' && src[j + 1] == '/')) {
        if (src[j] == '\n') line++;
        j++;
      }
      if (j + 1 >= n) {
        line = start_line;
        fail("unterminated block comment");
        return out;
      }
      i = j + 2;
      continue;
    }
    if (c == '#') {
      // Preprocessor directives are captured as whole lines; the parser
      // decides which ones the subset admits.
      size_t start = i;
      while (i < n && src[i] != '\n') i++;
      Token t;
      t.kind = Token::Kind::Directive;
      t.text = std::string(src.substr(start, i - start));
      t.line = line;
      t.start = start;
      t.end = i;
      out.tokens.push_back(std::move(t));
      continue;
    }
    if (ident_start(c)) {
      size_t start = i;
      while (i < n && ident_char(src[i])) i++;
      Token t;
      t.kind = Token::Kind::Ident;
      t.text = std::string(src.substr(start, i - start));
      t.line = line;
      t.start = start;
      t.end = i;
      out.tokens.push_back(std::move(t));
      continue;
    }
    if (isdigit((unsigned char)c) ||
        (c == '.' && i + 1 < n && isdigit((unsigned char)src[i + 1]))) {
      size_t start = i;
      bool hex = c == '0' && i + 1 < n && (src[i + 1] == 'x' || src[i + 1] == 'X');
      if (hex) i += 2;
      while (i < n) {
        char d = src[i];
        if (isalnum((unsigned char)d) || d == '.') {
          i++;
        } else if ((d == '+' || d == '-') && i > start) {
          // Exponent sign: 1e+3, 0x1p-2
          char prev = src[i - 1];
          bool exp = hex ? (prev == 'p' || prev == 'P')
                         : (prev == 'e' || prev == 'E');
          if (!exp) break;
          i++;
        } else {
          break;
        }
      }
      Token t;
      t.kind = Token::Kind::Number;
      t.text = std::string(src.substr(start, i - start));
      t.line = line;
      t.start = start;
      t.end = i;
      out.tokens.push_back(std::move(t));
      continue;
    }
    if (c == '\'' || c == '"') {
      size_t start = i;
      char quote = c;
      i++;
      while (i < n && src[i] != quote) {
        if (src[i] == '\\' && i + 1 < n) i++;
        if (src[i] == '\n') {
          fail("unterminated literal");
          return out;
        }
        i++;
      }
      if (i >= n) {
        fail("unterminated literal");
        return out;
      }
      i++;
      Token t;
      t.kind = quote == '\'' ? Token::Kind::CharLit : Token::Kind::StringLit;
      t.text = std::string(src.substr(start, i - start));
      t.line = line;
      t.start = start;
      t.end = i;
      out.tokens.push_back(std::move(t));
      continue;
    }
    bool matched = false;
    for (const char* p : kPuncts) {
      size_t len = strlen(p);
      if (src.substr(i, len) == p) {
        Token t;
        t.kind = Token::Kind::Punct;
        t.text = p;
        t.line = line;
        t.start = i;
        t.end = i + len;
        out.tokens.push_back(std::move(t));
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) {
      fail(std::string("stray character '") + c + "'");
      return out;
    }
  }

  Token eof;
  eof.kind = Token::Kind::Eof;
  eof.line = line;
  eof.start = n;
  eof.end = n;
  out.tokens.push_back(std::move(eof));
  return out;
}

}  // namespace cobble
