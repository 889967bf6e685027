// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#include "dstl/lexer.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace dstl {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool is_ident_shaped(const std::string& s) {
  if (s.empty() || !ident_start(s[0])) return false;
  return std::all_of(s.begin(), s.end(), ident_char);
}

}  // namespace

LexSpec build_lexer(const Grammar& g) {
  LexSpec spec;
  std::set<std::string> syms;
  std::function<void(const RhsExpr&)> walk = [&](const RhsExpr& e) {
    if (e.kind == RhsExpr::Kind::Terminal || e.kind == RhsExpr::Kind::OptionalKeyword) {
      if (is_ident_shaped(e.text))
        spec.keywords.insert(e.text);
      else
        syms.insert(e.text);
    }
    for (const auto& c : e.children) walk(c);
  };
  for (const auto& p : g.productions)
    if (p.body) walk(*p.body);
  spec.symbols.assign(syms.begin(), syms.end());
  std::stable_sort(spec.symbols.begin(), spec.symbols.end(),
                   [](const std::string& a, const std::string& b) {
                     return a.size() > b.size();
                   });
  return spec;
}

std::vector<Token> lex(const LexSpec& spec, std::string_view text) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    int off = static_cast<int>(i);
    if (ident_start(c)) {
      size_t j = i + 1;
      while (j < text.size() && ident_char(text[j])) ++j;
      std::string word(text.substr(i, j - i));
      Token t;
      t.kind = spec.keywords.count(word) ? Token::Kind::Keyword : Token::Kind::Name;
      t.text = std::move(word);
      t.span = {off, static_cast<int>(j)};
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    if (c == '$') {
      size_t j = i + 1;
      if (j < text.size() && ident_start(text[j])) {
        ++j;
        while (j < text.size() && ident_char(text[j])) ++j;
      } else {
        throw LexError(at(text, off, "expected variable name after '$'"), {off, off + 1});
      }
      Token t;
      t.kind = Token::Kind::SchemaVar;
      t.text = std::string(text.substr(i, j - i));
      t.span = {off, static_cast<int>(j)};
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    if (c == '"') {
      std::string value;
      size_t j = i + 1;
      for (;;) {
        if (j >= text.size())
          throw LexError(at(text, off, "unterminated string literal"), {off, off + 1});
        char d = text[j];
        if (d == '"') break;
        if (d == '\\') {
          if (j + 1 >= text.size() || (text[j + 1] != '"' && text[j + 1] != '\\'))
            throw LexError(at(text, static_cast<int>(j), "unknown escape sequence"),
                           {static_cast<int>(j), static_cast<int>(j) + 2});
          value.push_back(text[j + 1]);
          j += 2;
          continue;
        }
        value.push_back(d);
        ++j;
      }
      Token t;
      t.kind = Token::Kind::String;
      t.text = std::move(value);
      t.span = {off, static_cast<int>(j) + 1};
      out.push_back(std::move(t));
      i = j + 1;
      continue;
    }
    // longest symbol literal wins
    const std::string* hit = nullptr;
    for (const auto& s : spec.symbols) {
      if (text.substr(i, s.size()) == s) {
        hit = &s;
        break;
      }
    }
    if (!hit)
      throw LexError(at(text, off, std::string("unexpected character '") + c + "'"),
                     {off, off + 1});
    Token t;
    t.kind = Token::Kind::Symbol;
    t.text = *hit;
    t.span = {off, off + static_cast<int>(hit->size())};
    out.push_back(std::move(t));
    i += hit->size();
  }
  return out;
}

bool token_equivalent(const LexSpec& spec, std::string_view a, std::string_view b) {
  return lex(spec, a) == lex(spec, b);
}

}  // namespace dstl
