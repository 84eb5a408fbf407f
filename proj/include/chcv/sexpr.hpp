#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chcv {

struct SourceLoc {
  int line = 1;
  int col = 1;
};

/// Error carrying a position in a source file; what() is `file:line:col: message`.
class SourceError : public std::runtime_error {
 public:
  SourceError(std::string file, SourceLoc loc, std::string message);

  const std::string& file() const { return file_; }
  SourceLoc loc() const { return loc_; }
  const std::string& message() const { return message_; }

 private:
  std::string file_;
  SourceLoc loc_;
  std::string message_;
};

struct Sexp {
  enum class Kind { List, Symbol, Int, Bool };

  Kind kind = Kind::List;
  SourceLoc loc;
  std::string text;      // Symbol
  std::int64_t value = 0;  // Int, Bool (0/1)
  std::vector<Sexp> items;

  bool is_list() const { return kind == Kind::List; }
  bool is_symbol() const { return kind == Kind::Symbol; }
  bool is_symbol(std::string_view s) const { return kind == Kind::Symbol && text == s; }
  /// Head symbol of a non-empty list, or "" otherwise.
  std::string_view head() const;

  friend bool operator==(const Sexp& a, const Sexp& b);
};

/// Reads every datum in `text`. `'x` is read as `(quote x)`; `[`/`]` behave like parens.
std::vector<Sexp> read_all(std::string_view text, const std::string& file);

std::string to_string(const Sexp& s);

}  // namespace chcv
