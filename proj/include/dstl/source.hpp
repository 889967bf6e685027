// Copyright (c) the dstlgen contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dstl {

/// Half-open byte range into a source text.
struct Span {
  int begin = 0;
  int end = 0;
};

struct LineCol {
  int line = 1;
  int col = 1;
};

/// 1-based line/column of a byte offset.
LineCol line_col_at(std::string_view text, int offset);

/// Formats "line:col: msg" for error reporting.
std::string at(std::string_view text, int offset, const std::string& msg);

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg, Span span = {})
      : std::runtime_error(msg), span_(span) {}
  Span span() const { return span_; }

private:
  Span span_;
};

class GrammarError : public Error {
public:
  using Error::Error;
};

class LexError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class DeriveError : public Error {
public:
  using Error::Error;
};

class EvalError : public Error {
public:
  using Error::Error;
};

class ApplyError : public Error {
public:
  using Error::Error;
};

/// Non-termination and ambiguity guards.
class GuardError : public Error {
public:
  using Error::Error;
};

}  // namespace dstl
