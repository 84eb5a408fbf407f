#include "chcv/sexpr.hpp"

#include <cctype>
#include <charconv>

namespace chcv {

SourceError::SourceError(std::string file, SourceLoc loc, std::string message)
    : std::runtime_error(file + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": " + message),
      file_(std::move(file)),
      loc_(loc),
      message_(std::move(message)) {}

std::string_view Sexp::head() const {
  if (kind != Kind::List || items.empty() || !items.front().is_symbol()) return {};
  return items.front().text;
}

bool operator==(const Sexp& a, const Sexp& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Sexp::Kind::Symbol:
      return a.text == b.text;
    case Sexp::Kind::Int:
    case Sexp::Kind::Bool:
      return a.value == b.value;
    case Sexp::Kind::List:
      return a.items == b.items;
  }
  return false;
}

namespace {

class Reader {
 public:
  Reader(std::string_view text, const std::string& file) : text_(text), file_(file) {}

  std::vector<Sexp> all() {
    std::vector<Sexp> out;
    skip();
    while (pos_ < text_.size()) {
      out.push_back(datum());
      skip();
    }
    return out;
  }

 private:
  std::string_view text_;
  const std::string& file_;
  std::size_t pos_ = 0;
  SourceLoc loc_;

  [[noreturn]] void fail(SourceLoc at, const std::string& msg) { throw SourceError(file_, at, msg); }

  char peek() const { return text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++loc_.line;
      loc_.col = 1;
    } else {
      ++loc_.col;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < text_.size()) {
      char c = peek();
      if (c == ';') {
        while (pos_ < text_.size() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  static bool delimiter(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '[' || c == ']' ||
           c == ';' || c == '\'';
  }

  Sexp datum() {
    SourceLoc start = loc_;
    char c = peek();
    if (c == '(' || c == '[') {
      char close = c == '(' ? ')' : ']';
      advance();
      Sexp list;
      list.loc = start;
      for (;;) {
        skip();
        if (pos_ >= text_.size()) fail(start, "unbalanced '" + std::string(1, c) + "': missing '" + close + "'");
        if (peek() == ')' || peek() == ']') {
          if (peek() != close) fail(loc_, std::string("mismatched '") + peek() + "'");
          advance();
          return list;
        }
        list.items.push_back(datum());
      }
    }
    if (c == ')' || c == ']') fail(start, std::string("unexpected '") + c + "'");
    if (c == '\'') {
      advance();
      skip();
      if (pos_ >= text_.size()) fail(start, "quote without datum");
      Sexp q;
      q.loc = start;
      Sexp sym;
      sym.kind = Sexp::Kind::Symbol;
      sym.text = "quote";
      sym.loc = start;
      q.items.push_back(std::move(sym));
      q.items.push_back(datum());
      return q;
    }
    std::size_t b = pos_;
    while (pos_ < text_.size() && !delimiter(peek())) advance();
    std::string_view tok = text_.substr(b, pos_ - b);
    Sexp atom;
    atom.loc = start;
    if (tok == "#t" || tok == "#true") {
      atom.kind = Sexp::Kind::Bool;
      atom.value = 1;
      return atom;
    }
    if (tok == "#f" || tok == "#false") {
      atom.kind = Sexp::Kind::Bool;
      atom.value = 0;
      return atom;
    }
    std::size_t digits_from = (tok.size() > 1 && (tok[0] == '-' || tok[0] == '+')) ? 1 : 0;
    bool numeric = digits_from < tok.size();
    for (std::size_t i = digits_from; i < tok.size(); ++i) numeric = numeric && std::isdigit(static_cast<unsigned char>(tok[i]));
    if (numeric) {
      std::string_view digits = tok[0] == '+' ? tok.substr(1) : tok;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), atom.value);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) fail(start, "integer literal out of range: " + std::string(tok));
      atom.kind = Sexp::Kind::Int;
      return atom;
    }
    atom.kind = Sexp::Kind::Symbol;
    atom.text = std::string(tok);
    return atom;
  }
};

}  // namespace

std::vector<Sexp> read_all(std::string_view text, const std::string& file) { return Reader(text, file).all(); }

std::string to_string(const Sexp& s) {
  switch (s.kind) {
    case Sexp::Kind::Symbol:
      return s.text;
    case Sexp::Kind::Int:
      return std::to_string(s.value);
    case Sexp::Kind::Bool:
      return s.value ? "#t" : "#f";
    case Sexp::Kind::List: {
      if (s.items.size() == 2 && s.items[0].is_symbol("quote")) return "'" + to_string(s.items[1]);
      std::string out = "(";
      for (std::size_t i = 0; i < s.items.size(); ++i) {
        if (i) out += ' ';
        out += to_string(s.items[i]);
      }
      return out + ")";
    }
  }
  return {};
}

}  // namespace chcv
