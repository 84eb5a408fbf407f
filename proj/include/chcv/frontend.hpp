#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chcv/sexpr.hpp"

namespace chcv {

enum class SymbolicSort { Int, Bool, List };

std::string_view sort_name(SymbolicSort s);

struct SurfaceParam {
  std::string name;
  bool is_function = false;  // written as `(fn name)`
  SourceLoc loc;

  friend bool operator==(const SurfaceParam& a, const SurfaceParam& b) {
    return a.name == b.name && a.is_function == b.is_function;
  }
};

/// One top-level form of a `.chl` program.
struct Form {
  enum class Kind { DefineFunction, DefineValue, DefineGlobal, DeclareSymbolic, Assume, Assert, Verify };

  Kind kind = Kind::DefineFunction;
  SourceLoc loc;
  std::vector<std::string> names;  // one name, except DeclareSymbolic which may declare several
  std::vector<SurfaceParam> params;
  SymbolicSort sort = SymbolicSort::Int;
  std::vector<Sexp> body;  // function body, value expression, asserted/assumed expressions

  /// Structural equality; source locations are ignored.
  friend bool operator==(const Form& a, const Form& b) {
    return a.kind == b.kind && a.names == b.names && a.params == b.params && a.sort == b.sort && a.body == b.body;
  }
};

struct SurfaceProgram {
  std::string file;
  std::vector<Form> forms;

  const Form* verify() const;
  std::size_t function_count() const;

  friend bool operator==(const SurfaceProgram& a, const SurfaceProgram& b) { return a.forms == b.forms; }
};

/// Parses `.chl` source text. Throws SourceError on malformed input.
SurfaceProgram parse(std::string_view text, const std::string& file = "<input>");

SurfaceProgram parse_file(const std::string& path);

/// Renders a program back to concrete syntax, one form per line.
std::string pretty_print(const SurfaceProgram& program);

}  // namespace chcv
