#include "chcv/backend.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

extern char** environ;

namespace chcv {

std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Safe: return "SAFE";
    case Outcome::Unsafe: return "UNSAFE";
    case Outcome::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

int exit_code(Outcome o) {
  switch (o) {
    case Outcome::Safe: return 0;
    case Outcome::Unsafe: return 1;
    case Outcome::Unknown: return 2;
  }
  return 2;
}

namespace {

std::string smt_sort(Sort s) { return s == Sort::Int ? "Int" : "Bool"; }

Expr renamed(const Expr& e, const std::map<std::string, std::string>& names) {
  std::map<std::string, Expr> sub;
  for (const auto& v : free_vars(e))
    if (auto it = names.find(v.name()); it != names.end()) sub.emplace(v.name(), Expr::var(it->second, v.sort()));
  return substitute(e, sub);
}

std::string atom_smt(const RelAtom& a, const std::map<std::string, std::string>& names) {
  if (a.args.empty()) return smt_symbol(a.rel);
  std::string s = "(" + smt_symbol(a.rel);
  for (const auto& e : a.args) s += " " + to_smt(renamed(e, names));
  return s + ")";
}

}  // namespace

std::string emit_smt2(const ChcSystem& sys) {
  std::ostringstream out;
  out << "(set-logic HORN)\n";
  for (const auto& r : sys.relations) {
    out << "(declare-fun " << smt_symbol(r.name) << " (";
    for (std::size_t i = 0; i < r.args.size(); ++i) out << (i ? " " : "") << smt_sort(r.args[i].sort);
    out << ") Bool)\n";
  }
  for (const auto& c : sys.clauses) {
    auto names = clause_renaming(c);
    std::vector<Expr> vars;
    if (c.head)
      for (const auto& e : c.head->args) free_vars(e, vars);
    for (const auto& a : c.atoms)
      for (const auto& e : a.args) free_vars(e, vars);
    for (const auto& g : c.constraints()) free_vars(g, vars);
    std::vector<std::string> body;
    for (const auto& a : c.atoms) body.push_back(atom_smt(a, names));
    for (const auto& g : c.constraints()) body.push_back(to_smt(renamed(g, names)));
    std::string premise;
    if (body.empty()) premise = "true";
    else if (body.size() == 1) premise = body[0];
    else {
      premise = "(and";
      for (const auto& b : body) premise += " " + b;
      premise += ")";
    }
    std::string impl = "(=> " + premise + " " + (c.head ? atom_smt(*c.head, names) : "false") + ")";
    if (vars.empty()) {
      out << "(assert " << impl << ")\n";
      continue;
    }
    out << "(assert (forall (";
    for (std::size_t i = 0; i < vars.size(); ++i) {
      auto it = names.find(vars[i].name());
      std::string n = it == names.end() ? vars[i].name() : it->second;
      out << (i ? " " : "") << "(" << smt_symbol(n) << " " << smt_sort(vars[i].sort()) << ")";
    }
    out << ") " << impl << "))\n";
  }
  out << "(check-sat)\n(get-model)\n";
  return out.str();
}

std::optional<std::string> find_executable(const std::string& name) {
  auto ok = [](const std::string& p) {
    struct stat st {};
    return ::stat(p.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(p.c_str(), X_OK) == 0;
  };
  if (name.find('/') != std::string::npos) return ok(name) ? std::optional<std::string>(name) : std::nullopt;
  const char* path = std::getenv("PATH");
  std::stringstream ss(path ? path : "/usr/local/bin:/usr/bin:/bin");
  std::string dir;
  while (std::getline(ss, dir, ':')) {
    std::string cand = (dir.empty() ? "." : dir) + "/" + name;
    if (ok(cand)) return cand;
  }
  return std::nullopt;
}

Verdict interpret_output(const std::string& out) {
  Verdict v;
  v.raw = out;
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::string first = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
    if (first == "sat") {
      v.outcome = Outcome::Safe;
      std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      v.model = rest;
    } else if (first == "unsat") {
      v.outcome = Outcome::Unsafe;
    } else {
      v.outcome = Outcome::Unknown;
      v.reason = first == "unknown" ? "solver answered unknown" : "unexpected solver output: " + first;
    }
    return v;
  }
  v.reason = "solver produced no answer";
  return v;
}

namespace {

struct Child {
  pid_t pid = -1;
  int fd = -1;
  std::string output;
  int status = 0;
};

Child spawn(const std::string& exe, std::vector<std::string>& args) {
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  int pipefd[2];
  if (::pipe(pipefd) != 0) throw SolverConfigError(std::string("pipe: ") + std::strerror(errno));
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_adddup2(&fa, pipefd[1], 1);
  posix_spawn_file_actions_adddup2(&fa, pipefd[1], 2);
  posix_spawn_file_actions_addclose(&fa, pipefd[0]);
  posix_spawn_file_actions_addclose(&fa, pipefd[1]);
  Child c;
  int rc = ::posix_spawn(&c.pid, exe.c_str(), &fa, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&fa);
  ::close(pipefd[1]);
  if (rc != 0) {
    ::close(pipefd[0]);
    throw SolverConfigError("cannot start " + exe + ": " + std::strerror(rc));
  }
  c.fd = pipefd[0];
  return c;
}

void reap(Child& c, bool kill) {
  if (c.fd >= 0) {
    ::close(c.fd);
    c.fd = -1;
  }
  if (c.pid < 0) return;
  if (kill) ::kill(c.pid, SIGKILL);
  while (::waitpid(c.pid, &c.status, 0) < 0 && errno == EINTR) {
  }
  c.pid = -1;
}

}  // namespace

std::vector<std::vector<std::string>> engine_flags(const SolverConfig& cfg) {
  if (cfg.engine == SolverConfig::Engine::Default) return {{}};
  std::vector<std::vector<std::string>> out{{"fp.engine=spacer"}};
  if (cfg.portfolio) {
    out.push_back({"fp.engine=spacer", "fp.spacer.iuc=0"});
    out.push_back({"fp.engine=spacer", "fp.spacer.global=true", "fp.spacer.ground_pobs=false"});
  }
  return out;
}

Verdict solve(const ChcSystem& sys, const SolverConfig& cfg) {
  if (cfg.timeout_s <= 0) throw SolverConfigError("timeout must be positive");
  auto exe = find_executable(cfg.executable);
  if (!exe) throw SolverConfigError("solver executable '" + cfg.executable + "' not found");

  std::string path = cfg.smt2_path;
  if (path.empty()) {
    const char* tmp = std::getenv("TMPDIR");
    std::string templ = std::string(tmp && *tmp ? tmp : "/tmp") + "/chcv-XXXXXX.smt2";
    std::vector<char> buf(templ.begin(), templ.end());
    buf.push_back('\0');
    int fd = ::mkstemps(buf.data(), 5);
    if (fd < 0) throw SolverConfigError(std::string("cannot create temporary file: ") + std::strerror(errno));
    ::close(fd);
    path = buf.data();
  }
  {
    std::ofstream f(path);
    f << emit_smt2(sys);
    if (!f) throw SolverConfigError("cannot write " + path);
  }

  std::vector<std::vector<std::string>> runs;
  for (const auto& flags : engine_flags(cfg)) {
    std::vector<std::string> args{*exe};
    args.insert(args.end(), flags.begin(), flags.end());
    args.push_back(path);
    runs.push_back(std::move(args));
  }

  auto t0 = std::chrono::steady_clock::now();
  std::vector<Child> kids;
  try {
    for (auto& args : runs) kids.push_back(spawn(*exe, args));
  } catch (...) {
    for (auto& k : kids) reap(k, true);
    if (cfg.smt2_path.empty() && !cfg.keep_files) ::unlink(path.c_str());
    throw;
  }

  // First definite answer wins; the remaining runs are killed.
  auto deadline = t0 + std::chrono::duration<double>(cfg.timeout_s);
  const Child* winner = nullptr;
  bool timed_out = false;
  char chunk[4096];
  while (!winner) {
    std::vector<pollfd> pfds;
    std::vector<Child*> open;
    for (auto& k : kids)
      if (k.fd >= 0) {
        pfds.push_back({k.fd, POLLIN, 0});
        open.push_back(&k);
      }
    if (pfds.empty()) break;
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) {
      timed_out = true;
      break;
    }
    int pr = ::poll(pfds.data(), pfds.size(), static_cast<int>(std::min<long long>(left, 1000)));
    if (pr <= 0) continue;
    for (std::size_t i = 0; i < pfds.size() && !winner; ++i) {
      if (!(pfds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      Child& k = *open[i];
      ssize_t n = ::read(k.fd, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n > 0) {
        k.output.append(chunk, static_cast<std::size_t>(n));
        continue;
      }
      ::close(k.fd);
      k.fd = -1;
      reap(k, false);
      if (interpret_output(k.output).outcome != Outcome::Unknown) winner = &k;
    }
  }
  for (auto& k : kids) reap(k, true);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Verdict v;
  if (winner) {
    v = interpret_output(winner->output);
  } else if (timed_out) {
    v.outcome = Outcome::Unknown;
    char buf[64];
    std::snprintf(buf, sizeof buf, "timeout after %gs", cfg.timeout_s);
    v.reason = buf;
    v.raw = kids.empty() ? "" : kids.front().output;
  } else {
    v = interpret_output(kids.front().output);
    const Child& k = kids.front();
    if (WIFSIGNALED(k.status)) v.reason = "solver killed by signal " + std::to_string(WTERMSIG(k.status));
  }
  v.seconds = secs;
  if (cfg.keep_files || !cfg.smt2_path.empty()) v.smt2_file = path;
  else ::unlink(path.c_str());
  return v;
}

}  // namespace chcv
