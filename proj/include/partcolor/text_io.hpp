#pragma once

#include <charconv>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "partcolor/errors.hpp"

namespace partcolor::text {

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Reads whitespace-separated tokens line by line, skipping blank lines and
// lines starting with '#' or '%'. Keeps the current 1-based line number.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Fills `tokens` with the next non-empty line; false at end of input.
  bool next(std::vector<std::string_view>& tokens) {
    tokens.clear();
    while (std::getline(in_, buf_)) {
      ++line_;
      std::string_view s(buf_);
      std::size_t i = 0;
      while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) tokens.push_back(s.substr(i, j - i));
        i = j;
      }
      if (tokens.empty() || tokens[0][0] == '#' || tokens[0][0] == '%') {
        tokens.clear();
        continue;
      }
      return true;
    }
    return false;
  }

  std::size_t line() const { return line_; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_); }

  double to_double(std::string_view t) const {
    double v = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) fail("expected a number, got '" + std::string(t) + "'");
    return v;
  }

  long long to_int(std::string_view t) const {
    long long v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) fail("expected an integer, got '" + std::string(t) + "'");
    return v;
  }

 private:
  std::istream& in_;
  std::string buf_;
  std::size_t line_ = 0;
};

}  // namespace partcolor::text
