#include "permlogic/bench.hpp"

#include <charconv>
#include <chrono>
#include <ostream>
#include <sstream>

#include "permlogic/adapters.hpp"
#include "permlogic/error.hpp"
#include "permlogic/formula.hpp"

namespace permlogic::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 0) {
    throw Error(ErrorCode::kSchemaError, "line " + std::to_string(line) + ": bad duration \"" + std::string(s) + "\"");
  }
  return v;
}

std::size_t parse_size(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kSchemaError, "line " + std::to_string(line) + ": bad integer \"" + std::string(s) + "\"");
  }
  return v;
}

std::string family_json(const PolicyTypePtr& type, const std::vector<std::string>& patterns) {
  PolicySet set(type);
  for (const auto& p : patterns) set.add(Policy(type, std::vector<std::string>{p}, Decision::kAllow));
  return adapters::dump_policy_json(set);
}

}  // namespace

Backend native_backend(const Budget& budget) {
  Backend b;
  b.label = "native";
  b.check = [budget](const PolicySet& p, const PolicySet& q) { return check_implication(p, q, budget); };
  b.encode = [](const PolicySet& p, const PolicySet& q) {
    encode_policy_set(p);
    encode_policy_set(q);
  };
  return b;
}

Backend smt_backend(const smtlib::SolverConfig& config) {
  Backend b;
  const auto slash = config.executable.rfind('/');
  b.label = "smt:" + (slash == std::string::npos ? config.executable : config.executable.substr(slash + 1));
  b.check = [config](const PolicySet& p, const PolicySet& q) {
    return smtlib::run_solver(smtlib::emit_implication(p, q), config);
  };
  b.encode = [](const PolicySet& p, const PolicySet& q) {
    smtlib::emit_implication(p, q);
    smtlib::emit_implication(q, p);
  };
  return b;
}

FamilyInstance make_family(std::string_view family, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidDefinition, "family size must be positive");
  FamilyInstance inst;
  std::vector<std::string> p;
  std::vector<std::string> q;
  if (family == "enum") {
    inst.type = adapters::enum_bench_policy_type(n);
    for (std::size_t i = 0; i < n; ++i) p.push_back(std::to_string(i));
    q.push_back("*");
  } else if (family == "wildcard") {
    inst.type = adapters::wildcard_bench_policy_type();
    for (std::size_t i = 0; i < n; ++i) {
      p.push_back("a1b2c3d4e5/" + std::to_string(i));
      q.push_back(p.back() + "*");
    }
  } else {
    throw Error(ErrorCode::kUnknownFamily, "unknown benchmark family \"" + std::string(family) + "\"");
  }
  inst.p_json = family_json(inst.type, p);
  inst.q_json = family_json(inst.type, q);
  return inst;
}

BenchRecord run_point(std::string_view family, std::size_t n, std::size_t repeat, const Backend& backend,
                      bool run_qp) {
  const auto inst = make_family(family, n);
  adapters::PolicyTypeRegistry registry;
  registry.add(inst.type);

  BenchRecord r;
  r.family = std::string(family);
  r.n = n;
  r.repeat = repeat;
  r.backend = backend.label;

  auto start = Clock::now();
  const auto p = adapters::load_policy_json(inst.p_json, registry);
  const auto q = adapters::load_policy_json(inst.q_json, registry);
  r.load_s = seconds_since(start);

  start = Clock::now();
  backend.encode(p, q);
  r.encode_s = seconds_since(start);

  start = Clock::now();
  r.verdict_pq = backend.check(p, q).kind;
  r.p_implies_q_s = seconds_since(start);

  if (run_qp) {
    start = Clock::now();
    r.verdict_qp = backend.check(q, p).kind;
    r.q_implies_p_s = seconds_since(start);
  }
  return r;
}

std::string to_csv_row(const BenchRecord& r) {
  std::string row = r.family + "," + std::to_string(r.n) + "," + std::to_string(r.repeat) + "," + r.backend + "," +
                    format_double(r.load_s) + "," + format_double(r.encode_s) + "," +
                    format_double(r.p_implies_q_s) + ",";
  if (r.q_implies_p_s) row += format_double(*r.q_implies_p_s);
  row += "," + std::string(to_string(r.verdict_pq)) + ",";
  if (r.verdict_qp) row += std::string(to_string(*r.verdict_qp));
  return row;
}

void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << kCsvComment << "\n" << kCsvHeader << "\n";
  for (const auto& r : records) out << to_csv_row(r) << "\n";
}

VerdictKind parse_verdict_kind(std::string_view text) {
  for (auto k : {VerdictKind::kValid, VerdictKind::kInvalid, VerdictKind::kUnknown}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::kSchemaError, "unknown verdict \"" + std::string(text) + "\"");
}

std::vector<BenchRecord> parse_csv(std::string_view text) {
  std::vector<BenchRecord> out;
  std::istringstream in{std::string(text)};
  bool header_seen = false;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw Error(ErrorCode::kSchemaError, "line " + std::to_string(line_no) + ": bad header");
      header_seen = true;
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 10) {
      throw Error(ErrorCode::kSchemaError, "line " + std::to_string(line_no) + ": expected 10 fields");
    }
    BenchRecord r;
    r.family = cells[0];
    r.n = parse_size(cells[1], line_no);
    r.repeat = parse_size(cells[2], line_no);
    r.backend = cells[3];
    r.load_s = parse_double(cells[4], line_no);
    r.encode_s = parse_double(cells[5], line_no);
    r.p_implies_q_s = parse_double(cells[6], line_no);
    if (!cells[7].empty()) r.q_implies_p_s = parse_double(cells[7], line_no);
    r.verdict_pq = parse_verdict_kind(cells[8]);
    if (!cells[9].empty()) r.verdict_qp = parse_verdict_kind(cells[9]);
    if (r.q_implies_p_s.has_value() != r.verdict_qp.has_value()) {
      throw Error(ErrorCode::kSchemaError, "line " + std::to_string(line_no) + ": q_implies_p fields disagree");
    }
    out.push_back(std::move(r));
  }
  if (!header_seen) throw Error(ErrorCode::kSchemaError, "missing header");
  return out;
}

}  // namespace permlogic::bench
