#include "chcv/frontend.hpp"

#include <fstream>
#include <sstream>

namespace chcv {

std::string_view sort_name(SymbolicSort s) {
  switch (s) {
    case SymbolicSort::Int:
      return "int";
    case SymbolicSort::Bool:
      return "bool";
    case SymbolicSort::List:
      return "list";
  }
  return "?";
}

const Form* SurfaceProgram::verify() const {
  for (const auto& f : forms)
    if (f.kind == Form::Kind::Verify) return &f;
  return nullptr;
}

std::size_t SurfaceProgram::function_count() const {
  std::size_t n = 0;
  for (const auto& f : forms) n += f.kind == Form::Kind::DefineFunction;
  return n;
}

namespace {

class FormParser {
 public:
  explicit FormParser(const std::string& file) : file_(file) {}

  [[noreturn]] void fail(SourceLoc at, const std::string& msg) const { throw SourceError(file_, at, msg); }

  std::string identifier(const Sexp& s, const char* what) const {
    if (!s.is_symbol()) fail(s.loc, std::string("expected ") + what + ", got '" + to_string(s) + "'");
    return s.text;
  }

  SurfaceParam param(const Sexp& s) const {
    if (s.is_list()) {
      if (s.items.size() != 2 || !s.items[0].is_symbol("fn"))
        fail(s.loc, "parameter must be a name or (fn name), got '" + to_string(s) + "'");
      return {identifier(s.items[1], "parameter name"), true, s.loc};
    }
    return {identifier(s, "parameter name"), false, s.loc};
  }

  Form form(const Sexp& s) const {
    if (!s.is_list() || s.items.empty() || !s.items[0].is_symbol())
      fail(s.loc, "unknown top-level form '" + to_string(s) + "'");
    std::string_view head = s.head();
    Form f;
    f.loc = s.loc;
    const auto& it = s.items;
    if (head == "define") {
      if (it.size() < 3) fail(s.loc, "malformed define");
      if (it[1].is_list()) {
        if (it[1].items.empty()) fail(it[1].loc, "define needs a function name");
        f.kind = Form::Kind::DefineFunction;
        f.names.push_back(identifier(it[1].items[0], "function name"));
        for (std::size_t i = 1; i < it[1].items.size(); ++i) f.params.push_back(param(it[1].items[i]));
        f.body.assign(it.begin() + 2, it.end());
      } else {
        if (it.size() != 3) fail(s.loc, "value define takes exactly one expression");
        f.kind = Form::Kind::DefineValue;
        f.names.push_back(identifier(it[1], "name"));
        f.body.push_back(it[2]);
      }
      return f;
    }
    if (head == "define-global") {
      if (it.size() != 3) fail(s.loc, "define-global takes a name and an initial value");
      f.kind = Form::Kind::DefineGlobal;
      f.names.push_back(identifier(it[1], "global name"));
      f.body.push_back(it[2]);
      return f;
    }
    if (head == "declare-symbolic" || head == "define-symbolic") {
      if (it.size() < 3) fail(s.loc, "declare-symbolic takes names and a sort");
      f.kind = Form::Kind::DeclareSymbolic;
      for (std::size_t i = 1; i + 1 < it.size(); ++i) f.names.push_back(identifier(it[i], "symbolic constant name"));
      std::string sort = identifier(it.back(), "sort");
      if (sort == "int" || sort == "integer" || sort == "integer?")
        f.sort = SymbolicSort::Int;
      else if (sort == "bool" || sort == "boolean" || sort == "boolean?")
        f.sort = SymbolicSort::Bool;
      else if (sort == "list")
        f.sort = SymbolicSort::List;
      else
        fail(it.back().loc, "unknown sort '" + sort + "' (expected int, bool or list)");
      return f;
    }
    if (head == "assume" || head == "assert") {
      if (it.size() != 2) fail(s.loc, std::string(head) + " takes one expression");
      f.kind = head == "assume" ? Form::Kind::Assume : Form::Kind::Assert;
      f.body.push_back(it[1]);
      return f;
    }
    if (head == "verify" || head == "verify/unbound") {
      f.kind = Form::Kind::Verify;
      f.body.assign(it.begin() + 1, it.end());
      return f;
    }
    fail(s.loc, "unknown top-level form '" + std::string(head) + "'");
  }

 private:
  const std::string& file_;
};

}  // namespace

SurfaceProgram parse(std::string_view text, const std::string& file) {
  SurfaceProgram program;
  program.file = file;
  FormParser parser(file);
  bool seen_verify = false;
  for (const auto& datum : read_all(text, file)) {
    Form f = parser.form(datum);
    if (f.kind == Form::Kind::Verify) {
      if (seen_verify) parser.fail(f.loc, "duplicate verify directive");
      seen_verify = true;
    }
    program.forms.push_back(std::move(f));
  }
  return program;
}

SurfaceProgram parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

std::string pretty_print(const SurfaceProgram& program) {
  std::string out;
  for (const auto& f : program.forms) {
    switch (f.kind) {
      case Form::Kind::DefineFunction: {
        out += "(define (" + f.names[0];
        for (const auto& p : f.params) out += p.is_function ? " (fn " + p.name + ")" : " " + p.name;
        out += ")";
        break;
      }
      case Form::Kind::DefineValue:
        out += "(define " + f.names[0];
        break;
      case Form::Kind::DefineGlobal:
        out += "(define-global " + f.names[0];
        break;
      case Form::Kind::DeclareSymbolic:
        out += "(declare-symbolic";
        for (const auto& n : f.names) out += " " + n;
        out += " " + std::string(sort_name(f.sort));
        break;
      case Form::Kind::Assume:
        out += "(assume";
        break;
      case Form::Kind::Assert:
        out += "(assert";
        break;
      case Form::Kind::Verify:
        out += "(verify";
        break;
    }
    for (const auto& b : f.body) out += " " + to_string(b);
    out += ")\n";
  }
  return out;
}

}  // namespace chcv
