#include "permlogic/smtlib.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <sstream>

#include "permlogic/error.hpp"
#include "permlogic/utf8.hpp"

namespace permlogic::smtlib {

namespace {

using Clock = std::chrono::steady_clock;

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%X", v);
  return buf;
}

/// re.union of codepoint runs, e.g. (re.union (re.range "0" "9") (str.to_re "/")).
std::string char_class(const std::u32string& chars) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < chars.size();) {
    std::size_t j = i;
    while (j + 1 < chars.size() && chars[j + 1] == chars[j] + 1) ++j;
    const std::u32string lo(1, chars[i]);
    if (j == i) {
      parts.push_back("(str.to_re " + quote_string(lo) + ")");
    } else {
      parts.push_back("(re.range " + quote_string(lo) + " " + quote_string(std::u32string(1, chars[j])) + ")");
    }
    i = j + 1;
  }
  if (parts.empty()) return "re.none";
  if (parts.size() == 1) return parts.front();
  std::string out = "(re.union";
  for (const auto& p : parts) out += " " + p;
  return out + ")";
}

std::u32string slot_chars(const FieldDef& def) {
  if (const auto* s = std::get_if<StringComponentDef>(&def)) return s->charset().value_chars();
  return std::get<StringEnumComponentDef>(def).value_chars();
}

std::string render_atom(const Atom& atom, const std::string& var, const std::string& any) {
  if (atom.strategy == MatchingStrategy::kExact || atom.pattern.find(kWildcardChar) == std::u32string::npos) {
    return "(= " + var + " " + quote_string(atom.pattern) + ")";
  }
  std::vector<std::string> pieces;
  std::u32string literal;
  bool last_star = false;
  for (char32_t c : atom.pattern) {
    if (c != kWildcardChar) {
      literal.push_back(c);
      last_star = false;
      continue;
    }
    if (!literal.empty()) pieces.push_back("(str.to_re " + quote_string(literal) + ")");
    literal.clear();
    if (!last_star) pieces.push_back("(re.* " + any + ")");
    last_star = true;
  }
  if (!literal.empty()) pieces.push_back("(str.to_re " + quote_string(literal) + ")");
  std::string re;
  if (pieces.size() == 1) {
    re = pieces.front();
  } else {
    re = "(re.++";
    for (const auto& p : pieces) re += " " + p;
    re += ")";
  }
  return "(str.in_re " + var + " " + re + ")";
}

void render(const Formula& f, const PolicyType& type, const std::vector<std::string>& any,
            std::string& out) {
  switch (f.kind()) {
    case Formula::Kind::kTrue: out += "true"; return;
    case Formula::Kind::kFalse: out += "false"; return;
    case Formula::Kind::kAtom: {
      const std::size_t slot = type.slot_index(f.atom().path);
      out += render_atom(f.atom(), variable_name(f.atom().path), any[slot]);
      return;
    }
    case Formula::Kind::kNot:
      out += "(not ";
      render(f.children().front(), type, any, out);
      out += ")";
      return;
    case Formula::Kind::kAnd:
    case Formula::Kind::kOr: {
      // Unary and/or is not portable; render the child alone.
      if (f.children().size() == 1) {
        render(f.children().front(), type, any, out);
        return;
      }
      out += f.kind() == Formula::Kind::kAnd ? "(and" : "(or";
      for (const auto& c : f.children()) {
        out += " ";
        render(c, type, any, out);
      }
      out += ")";
      return;
    }
  }
}

std::vector<std::string> any_char_classes(const PolicyType& type) {
  std::vector<std::string> out;
  for (const auto& slot : type.slots()) out.push_back(char_class(slot_chars(slot.def)));
  return out;
}

// --- output parsing ---------------------------------------------------------

struct SExpr {
  enum class Kind { kSymbol, kString, kList } kind = Kind::kSymbol;
  std::string text;  // symbol (bars stripped) or raw string literal with quotes
  std::vector<SExpr> items;
};

class SExprReader {
 public:
  explicit SExprReader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip();
    return pos_ >= text_.size();
  }

  SExpr read() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of output");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      SExpr list;
      list.kind = SExpr::Kind::kList;
      for (;;) {
        skip();
        if (pos_ >= text_.size()) fail("unbalanced parenthesis");
        if (text_[pos_] == ')') {
          ++pos_;
          return list;
        }
        list.items.push_back(read());
      }
    }
    if (c == ')') fail("unexpected ')'");
    if (c == '"') {
      const std::size_t start = pos_++;
      for (;;) {
        if (pos_ >= text_.size()) fail("unterminated string literal");
        if (text_[pos_] == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            pos_ += 2;
            continue;
          }
          ++pos_;
          break;
        }
        ++pos_;
      }
      return SExpr{SExpr::Kind::kString, std::string(text_.substr(start, pos_ - start)), {}};
    }
    if (c == '|') {
      const std::size_t close = text_.find('|', pos_ + 1);
      if (close == std::string_view::npos) fail("unterminated quoted symbol");
      SExpr s{SExpr::Kind::kSymbol, std::string(text_.substr(pos_ + 1, close - pos_ - 1)), {}};
      pos_ = close + 1;
      return s;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != '"' && text_[pos_] != ';') {
      ++pos_;
    }
    return SExpr{SExpr::Kind::kSymbol, std::string(text_.substr(start, pos_ - start)), {}};
  }

 private:
  [[noreturn]] static void fail(const std::string& what) { throw Error(ErrorCode::kModelParseError, what); }

  void skip() {
    while (pos_ < text_.size()) {
      if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      } else if (text_[pos_] == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void collect_definitions(const SExpr& e, std::map<std::string, SExpr>& defs) {
  if (e.kind != SExpr::Kind::kList) return;
  const auto& it = e.items;
  if (it.size() == 5 && it[0].kind == SExpr::Kind::kSymbol && it[0].text == "define-fun" &&
      it[1].kind == SExpr::Kind::kSymbol && it[2].kind == SExpr::Kind::kList && it[2].items.empty()) {
    defs[it[1].text] = it[4];
    return;
  }
  // (model ...) wrappers and bare lists of definitions.
  for (const auto& child : it) collect_definitions(child, defs);
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::u32string smallest_value(const FieldDef& def) {
  if (std::holds_alternative<StringComponentDef>(def)) return {};
  const auto& values = std::get<StringEnumComponentDef>(def).values();
  return *std::min_element(values.begin(), values.end());
}

Request parse_model(const SmtScript& script, std::string_view model_text) {
  std::map<std::string, SExpr> defs;
  SExprReader reader(model_text);
  while (!reader.at_end()) collect_definitions(reader.read(), defs);
  const auto& slots = script.type->slots();
  std::vector<std::u32string> values;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto found = defs.find(script.variable_map[i].second);
    // Solvers may omit variables the query leaves unconstrained.
    if (found == defs.end()) {
      values.push_back(smallest_value(slots[i].def));
    } else if (found->second.kind != SExpr::Kind::kString) {
      throw Error(ErrorCode::kModelParseError, "value of " + found->first + " is not a string literal");
    } else {
      values.push_back(unquote_string(found->second.text));
    }
  }
  try {
    return Request(script.type, std::move(values));
  } catch (const Error& e) {
    throw Error(ErrorCode::kModelParseError, std::string("model is not a valid request: ") + e.message());
  }
}

Verdict unknown(std::string reason) {
  Verdict v;
  v.kind = VerdictKind::kUnknown;
  v.reason = std::move(reason);
  return v;
}

// --- subprocess -------------------------------------------------------------

void set_nonblocking(int fd) { fcntl(fd, F_SETFL, fcntl(fd, F_GETFL) | O_NONBLOCK); }

struct Fd {
  int fd = -1;
  Fd() = default;
  explicit Fd(int f) : fd(f) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

class TempFile {
 public:
  explicit TempFile(const std::string& contents) {
    const char* dir = std::getenv("TMPDIR");
    path_ = std::string(dir && *dir ? dir : "/tmp") + "/permlogic-XXXXXX.smt2";
    int fd = ::mkstemps(path_.data(), 5);
    if (fd < 0) throw Error(ErrorCode::kSolverSpawnFailure, "cannot create script file: " + std::string(std::strerror(errno)));
    std::size_t off = 0;
    while (off < contents.size()) {
      const ssize_t n = ::write(fd, contents.data() + off, contents.size() - off);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) {
        ::close(fd);
        ::unlink(path_.c_str());
        throw Error(ErrorCode::kSolverSpawnFailure, "cannot write script file");
      }
      off += static_cast<std::size_t>(n);
    }
    ::close(fd);
  }
  ~TempFile() { ::unlink(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace

SolverConfig parse_solver_command(std::string_view command, std::chrono::milliseconds timeout) {
  std::istringstream in{std::string(command)};
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  if (words.empty()) throw Error(ErrorCode::kInvalidDefinition, "empty solver command");
  SolverConfig cfg;
  cfg.executable = words.front();
  cfg.arguments.assign(words.begin() + 1, words.end());
  cfg.timeout = timeout;
  cfg.name = std::string(command);
  return cfg;
}

std::string quote_string(std::u32string_view value) {
  std::string out = "\"";
  for (char32_t c : value) {
    if (c == U'"') {
      out += "\"\"";
    } else if (c >= 0x20 && c <= 0x7E && c != U'\\') {
      out.push_back(static_cast<char>(c));
    } else {
      out += "\\u{" + hex(static_cast<std::uint32_t>(c)) + "}";
    }
  }
  return out + "\"";
}

std::u32string unquote_string(std::string_view literal) {
  auto fail = [&](const std::string& why) -> Error {
    return Error(ErrorCode::kModelParseError, why + " in string literal " + std::string(literal));
  };
  if (literal.size() < 2 || literal.front() != '"' || literal.back() != '"') throw fail("missing quotes");
  const std::u32string body = utf8::decode(literal.substr(1, literal.size() - 2));
  auto hex_value = [&](std::u32string_view digits) {
    if (digits.empty() || digits.size() > 6) throw fail("bad escape");
    std::uint32_t v = 0;
    for (char32_t d : digits) {
      v <<= 4;
      if (d >= U'0' && d <= U'9') v |= d - U'0';
      else if (d >= U'a' && d <= U'f') v |= d - U'a' + 10;
      else if (d >= U'A' && d <= U'F') v |= d - U'A' + 10;
      else throw fail("bad escape");
    }
    if (v > 0x10FFFF) throw fail("escape out of range");
    return static_cast<char32_t>(v);
  };
  std::u32string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char32_t c = body[i];
    if (c == U'"') {
      if (i + 1 >= body.size() || body[i + 1] != U'"') throw fail("stray quote");
      out.push_back(U'"');
      ++i;
      continue;
    }
    if (c == U'\\' && i + 1 < body.size() && body[i + 1] == U'u') {
      if (i + 2 < body.size() && body[i + 2] == U'{') {
        const std::size_t close = body.find(U'}', i + 3);
        if (close == std::u32string::npos) throw fail("unterminated escape");
        out.push_back(hex_value(std::u32string_view(body).substr(i + 3, close - i - 3)));
        i = close;
        continue;
      }
      const auto digits = std::u32string_view(body).substr(i + 2, 4);
      if (digits.size() == 4 && std::all_of(digits.begin(), digits.end(), [](char32_t d) {
            return d < 0x80 && std::isxdigit(static_cast<int>(d));
          })) {
        out.push_back(hex_value(digits));
        i += 5;
        continue;
      }
    }
    // Anything else, including a lone backslash, is literal.
    out.push_back(c);
  }
  return out;
}

std::string variable_name(std::string_view path) { return "v." + std::string(path); }

std::string render_formula(const Formula& formula, const PolicyType& type) {
  std::string out;
  render(formula, type, any_char_classes(type), out);
  return out;
}

SmtScript emit_implication(const PolicySet& p, const PolicySet& q) {
  require_same_type(*p.type(), *q.type());
  const PolicyType& type = *p.type();
  const auto any = any_char_classes(type);

  SmtScript script;
  script.type = p.type();
  std::string& t = script.text;
  t += "; policy type " + type.name() + ": " + std::to_string(p.size()) + " policies imply " +
       std::to_string(q.size()) + " policies\n";
  t += "; unsat means the implication holds\n";
  t += "(set-option :produce-models true)\n";
  t += "(set-logic QF_SLIA)\n";
  for (const auto& slot : type.slots()) {
    const auto var = variable_name(slot.path);
    script.variable_map.emplace_back(slot.path, var);
    t += "(declare-fun " + var + " () String)\n";
  }
  for (std::size_t i = 0; i < type.slots().size(); ++i) {
    const auto& def = type.slots()[i].def;
    const auto& var = script.variable_map[i].second;
    if (const auto* s = std::get_if<StringComponentDef>(&def)) {
      t += "(assert (<= (str.len " + var + ") " + std::to_string(s->max_len()) + "))\n";
      t += "(assert (str.in_re " + var + " (re.* " + any[i] + ")))\n";
    } else {
      const auto& values = std::get<StringEnumComponentDef>(def).values();
      std::string members;
      for (const auto& v : values) members += " (= " + var + " " + quote_string(v) + ")";
      t += values.size() == 1 ? "(assert" + members + ")\n" : "(assert (or" + members + "))\n";
    }
  }
  std::string lhs;
  render(encode_policy_set(p), type, any, lhs);
  std::string rhs;
  render(encode_policy_set(q), type, any, rhs);
  t += "(assert " + lhs + ")\n";
  t += "(assert (not " + rhs + "))\n";
  t += "(check-sat)\n";
  t += "(get-model)\n";
  return script;
}

SolverRun run_process(const SolverConfig& config, const std::string& input) {
  std::optional<TempFile> file;
  std::vector<std::string> argv_store{config.executable};
  argv_store.insert(argv_store.end(), config.arguments.begin(), config.arguments.end());
  if (config.input == InputMode::kFile) {
    file.emplace(input);
    argv_store.push_back(file->path());
  }
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  // stdin is a socket so writes can use MSG_NOSIGNAL instead of touching the
  // process-wide SIGPIPE disposition.
  int in_pair[2];
  int out_pipe[2];
  int err_pipe[2];
  int exec_pipe[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in_pair) != 0) {
    throw Error(ErrorCode::kSolverSpawnFailure, "socketpair: " + std::string(std::strerror(errno)));
  }
  Fd in_parent(in_pair[0]), in_child(in_pair[1]);
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) throw Error(ErrorCode::kSolverSpawnFailure, "pipe failed");
  Fd out_parent(out_pipe[0]), out_child(out_pipe[1]);
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) throw Error(ErrorCode::kSolverSpawnFailure, "pipe failed");
  Fd err_parent(err_pipe[0]), err_child(err_pipe[1]);
  if (::pipe2(exec_pipe, O_CLOEXEC) != 0) throw Error(ErrorCode::kSolverSpawnFailure, "pipe failed");
  Fd exec_parent(exec_pipe[0]), exec_child(exec_pipe[1]);

  const pid_t pid = ::fork();
  if (pid < 0) throw Error(ErrorCode::kSolverSpawnFailure, "fork: " + std::string(std::strerror(errno)));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in_child.fd, 0);
    ::dup2(out_child.fd, 1);
    ::dup2(err_child.fd, 2);
    ::execvp(argv[0], argv.data());
    const int e = errno;
    [[maybe_unused]] auto n = ::write(exec_child.fd, &e, sizeof e);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  in_child.reset();
  out_child.reset();
  err_child.reset();
  exec_child.reset();

  int exec_errno = 0;
  ssize_t got;
  do {
    got = ::read(exec_parent.fd, &exec_errno, sizeof exec_errno);
  } while (got < 0 && errno == EINTR);
  if (got == static_cast<ssize_t>(sizeof exec_errno)) {
    int status;
    ::waitpid(pid, &status, 0);
    throw Error(ErrorCode::kSolverSpawnFailure,
                "cannot execute " + config.executable + ": " + std::strerror(exec_errno));
  }

  SolverRun run;
  const std::string& payload = config.input == InputMode::kStdin ? input : std::string();
  std::size_t written = 0;
  if (payload.empty()) in_parent.reset();
  set_nonblocking(out_parent.fd);
  set_nonblocking(err_parent.fd);
  if (in_parent.fd >= 0) set_nonblocking(in_parent.fd);

  const auto deadline = Clock::now() + config.timeout;
  char buf[65536];
  while (out_parent.fd >= 0 || err_parent.fd >= 0) {
    const auto now = Clock::now();
    if (now >= deadline) {
      run.timed_out = true;
      break;
    }
    std::vector<pollfd> fds;
    if (in_parent.fd >= 0) fds.push_back({in_parent.fd, POLLOUT, 0});
    if (out_parent.fd >= 0) fds.push_back({out_parent.fd, POLLIN, 0});
    if (err_parent.fd >= 0) fds.push_back({err_parent.fd, POLLIN, 0});
    const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
    const int ready = ::poll(fds.data(), fds.size(), static_cast<int>(std::min<long long>(wait_ms, 1000)));
    if (ready < 0 && errno != EINTR) break;
    for (const auto& p : fds) {
      if (p.revents == 0) continue;
      if (p.fd == in_parent.fd) {
        const ssize_t n = ::send(in_parent.fd, payload.data() + written, payload.size() - written, MSG_NOSIGNAL);
        if (n > 0) written += static_cast<std::size_t>(n);
        if ((n < 0 && errno != EAGAIN && errno != EINTR) || written == payload.size()) in_parent.reset();
        continue;
      }
      Fd& target = p.fd == out_parent.fd ? out_parent : err_parent;
      std::string& sink = p.fd == out_parent.fd ? run.out : run.err;
      const ssize_t n = ::read(p.fd, buf, sizeof buf);
      if (n > 0) {
        sink.append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
        target.reset();
      }
    }
  }

  int status = 0;
  if (run.timed_out) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &status, 0);
    return run;
  }
  // Output closed; the child may still be exiting (or may have closed its
  // streams and kept running).
  for (;;) {
    const pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) break;
    if (Clock::now() >= deadline) {
      run.timed_out = true;
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      return run;
    }
    ::usleep(1000);
  }
  if (WIFEXITED(status)) run.exit_code = WEXITSTATUS(status);
  ::kill(-pid, SIGKILL);  // stray grandchildren
  return run;
}

Verdict interpret_output(const SmtScript& script, const SolverRun& run) {
  std::istringstream lines(run.out);
  std::string line;
  std::size_t consumed = 0;
  std::string verdict_word;
  while (std::getline(lines, line)) {
    consumed += line.size() + 1;
    const auto word = trim(line);
    if (word == "sat" || word == "unsat" || word == "unknown") {
      verdict_word = word;
      break;
    }
  }
  if (verdict_word.empty()) {
    if (run.timed_out) return unknown(std::string(kReasonTimeout));
    if (run.exit_code != 0) {
      return unknown(run.exit_code < 0 ? "solver-crash: killed by signal"
                                       : "solver-crash: exit status " + std::to_string(run.exit_code));
    }
    return unknown("no-verdict");
  }
  if (verdict_word == "unsat") {
    Verdict v;
    v.kind = VerdictKind::kValid;
    return v;
  }
  if (verdict_word == "unknown") return unknown("solver-unknown");
  if (run.timed_out) return unknown(std::string(kReasonTimeout));
  try {
    Verdict v;
    v.counterexample = parse_model(script, std::string_view(run.out).substr(std::min(consumed, run.out.size())));
    v.kind = VerdictKind::kInvalid;
    return v;
  } catch (const Error& e) {
    return unknown(std::string("model-parse-error: ") + e.message());
  }
}

Verdict run_solver(const SmtScript& script, const SolverConfig& config) {
  if (config.timeout.count() <= 0) throw Error(ErrorCode::kInvalidDefinition, "solver timeout must be positive");
  const auto start = Clock::now();
  const auto run = run_process(config, script.text);
  Verdict v = interpret_output(script, run);
  v.stats.elapsed = Clock::now() - start;
  return v;
}

}  // namespace permlogic::smtlib
