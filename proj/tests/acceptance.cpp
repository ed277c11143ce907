// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

#include "permlogic/adapters.hpp"
#include "permlogic/bench.hpp"
#include "permlogic/error.hpp"
#include "permlogic/formula.hpp"
#include "permlogic/smtlib.hpp"
#include "permlogic/solver.hpp"
#include "support.hpp"

using namespace permlogic;
using Clock = std::chrono::steady_clock;

namespace {

// Envelopes, in seconds.
constexpr double kCliffOneNativeLimit = 1.0;
constexpr double kCliffOneSmtTimeout = 10.0;
constexpr double kCliffTwoLimit = 5.0;
constexpr double kFamilyLimit = 120.0;
constexpr double kConnectorLimit = 60.0;
constexpr int kOracleInstances = 600;
constexpr int kSoundnessSets = 100;

int failures = 0;

void report(int id, const std::string& title, bool ok, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double seconds) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f s", seconds);
  return buf;
}

bool witnesses(const Verdict& v, const PolicySet& p, const PolicySet& q) {
  return v.kind == VerdictKind::kInvalid && v.counterexample && permitted(p, *v.counterexample) &&
         !permitted(q, *v.counterexample);
}

std::string describe(const Verdict& v) {
  std::string s(to_string(v.kind));
  if (v.kind == VerdictKind::kUnknown) s += "(" + v.reason + ")";
  if (v.counterexample) {
    s += " [";
    for (const auto& value : v.counterexample->values_utf8()) s += "\"" + value + "\" ";
    s.back() = ']';
  }
  return s;
}

PolicySet single(const PolicyTypePtr& type, std::initializer_list<std::pair<std::vector<std::string>, const char*>> items) {
  PolicySet ps(type);
  for (const auto& [values, decision] : items) ps.add(Policy(type, values, decision));
  return ps;
}

struct CliffOne {
  PolicyTypePtr type = adapters::path_policy_type();
  PolicySet p = single(type, {{{"/sys1*"}, "allow"}});
  PolicySet q = single(type, {{{"/*"}, "allow"}});
};

struct CliffTwo {
  PolicyTypePtr type = adapters::user_path_action_policy_type();
  PolicySet p = single(type, {{{"jstubbs", "s2/home/jstubbs/*", "*"}, "allow"},
                              {{"jstubbs", "s2/*", "PUT"}, "deny"},
                              {{"jstubbs", "s2/*", "POST"}, "deny"}});
  PolicySet q = single(type, {{{"jstubbs", "s2/home/jstubbs/a.out", "GET"}, "allow"},
                              {{"jstubbs", "s2/home/jstubbs/b.out", "GET"}, "allow"}});
};

std::pair<PolicySet, PolicySet> family(const std::string& name, std::size_t n) {
  const auto inst = bench::make_family(name, n);
  adapters::PolicyTypeRegistry registry;
  registry.add(inst.type);
  return {adapters::load_policy_json(inst.p_json, registry), adapters::load_policy_json(inst.q_json, registry)};
}

void criterion_1() {
  CliffOne c;
  const auto t = Clock::now();
  const auto native = check_implication(c.p, c.q);
  const double native_s = since(t);
  bool ok = native.kind == VerdictKind::kValid && native_s < kCliffOneNativeLimit;
  std::string detail = "native " + describe(native) + " in " + fmt(native_s);

  if (std::string(PERMLOGIC_Z3).empty()) {
    detail += "; external solver not found, SMT part not run";
  } else {
    smtlib::SolverConfig cfg;
    cfg.executable = PERMLOGIC_Z3;
    cfg.arguments = {"-in"};
    cfg.timeout = std::chrono::milliseconds(static_cast<long long>(kCliffOneSmtTimeout * 1000));
    cfg.name = "z3";
    const auto ext = smtlib::run_solver(smtlib::emit_implication(c.p, c.q), cfg);
    ok = ok && (ext.kind == VerdictKind::kValid ||
                (ext.kind == VerdictKind::kUnknown && ext.reason == kReasonTimeout));
    detail += "; z3 (timeout " + fmt(kCliffOneSmtTimeout) + ") " + describe(ext);
  }
  report(1, "prefix cliff, /sys1* => /*", ok, detail);
}

void criterion_2() {
  CliffTwo c;
  auto t = Clock::now();
  const auto qp = check_implication(c.q, c.p);
  const double qp_s = since(t);
  const auto pq = check_implication(c.p, c.q);
  const bool ok = qp.kind == VerdictKind::kValid && qp_s < kCliffTwoLimit && witnesses(pq, c.p, c.q);
  report(2, "deny-shadow cliff", ok,
         "Q=>P " + describe(qp) + " in " + fmt(qp_s) + "; P=>Q " + describe(pq) + ", counterexample " +
             (witnesses(pq, c.p, c.q) ? "validates" : "does not validate"));
}

void criterion_3() {
  bool ok = true;
  std::string detail;
  for (std::size_t n : {10, 100, 1000}) {
    const auto [p, q] = family("wildcard", n);
    const auto t = Clock::now();
    const auto pq = check_implication(p, q);
    const auto qp = check_implication(q, p);
    const double s = since(t);
    const bool point = pq.kind == VerdictKind::kValid && witnesses(qp, q, p) && (n != 1000 || s <= kFamilyLimit);
    ok = ok && point;
    detail += "N=" + std::to_string(n) + " pq " + describe(pq) + " qp " + describe(qp) + " " + fmt(s) + "; ";
  }
  detail.resize(detail.size() - 2);
  report(3, "wildcard family", ok, detail);
}

void criterion_4() {
  bool ok = true;
  std::string detail;
  for (std::size_t n : {10, 1000, 4000}) {
    const auto [p, q] = family("enum", n);
    const auto t = Clock::now();
    const auto pq = check_implication(p, q);
    const auto qp = check_implication(q, p);
    const double s = since(t);
    ok = ok && pq.kind == VerdictKind::kValid && qp.kind == VerdictKind::kValid && (n != 4000 || s <= kFamilyLimit);
    detail += "N=" + std::to_string(n) + " pq " + describe(pq) + " qp " + describe(qp) + " " + fmt(s) + "; ";
  }
  detail.resize(detail.size() - 2);
  report(4, "enum family", ok, detail);
}

void criterion_5() {
  testing::InstanceGenerator gen(20240601);
  int agree = 0;
  int invalid = 0;
  int validated = 0;
  int unknown = 0;
  int deny_instances = 0;
  for (int i = 0; i < kOracleInstances; ++i) {
    auto type = gen.type();
    auto p = gen.policy_set(type, 4);
    auto q = gen.policy_set(type, 4);
    auto has_deny = [](const PolicySet& ps) {
      return std::any_of(ps.policies().begin(), ps.policies().end(),
                         [](const Policy& x) { return x.decision() == Decision::kDeny; });
    };
    if (has_deny(p) || has_deny(q)) ++deny_instances;
    const auto native = check_implication(p, q);
    const auto oracle = brute_force_implication(p, q);
    if (native.kind == VerdictKind::kUnknown) ++unknown;
    if (native.kind == oracle.kind) ++agree;
    if (native.kind == VerdictKind::kInvalid) {
      ++invalid;
      if (witnesses(native, p, q)) ++validated;
    }
  }
  const bool ok = agree == kOracleInstances && validated == invalid && unknown == 0;
  report(5, "oracle equivalence", ok,
         std::to_string(agree) + "/" + std::to_string(kOracleInstances) + " agree, " + std::to_string(validated) +
             "/" + std::to_string(invalid) + " counterexamples validate, " + std::to_string(unknown) +
             " unknown, " + std::to_string(deny_instances) + " instances with deny policies");
}

void criterion_6() {
  std::mt19937 rng(606);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::size_t requests = 0;
  int mismatches = 0;
  for (int round = 0; round < kSoundnessSets; ++round) {
    std::vector<ComponentDef> comps;
    const int arity = pick(1, 2);
    for (int c = 0; c < arity; ++c) {
      comps.emplace_back(StringComponentDef("c" + std::to_string(c), CharSet(U"ab"), 2,
                                            pick(0, 3) == 0 ? MatchingStrategy::kExact : MatchingStrategy::kWildcard));
    }
    auto type = std::make_shared<const PolicyType>("small", std::move(comps));
    PolicySet ps(type);
    const int count = pick(0, 4);
    for (int k = 0; k < count; ++k) {
      std::vector<std::u32string> patterns;
      for (const auto& slot : type->slots()) {
        const bool wild = strategy_of(slot.def) == MatchingStrategy::kWildcard;
        std::u32string pat;
        for (int len = pick(0, 2); len > 0; --len) pat.push_back(wild && pick(0, 2) == 0 ? U'*' : (pick(0, 1) ? U'a' : U'b'));
        patterns.push_back(pat);
      }
      ps.add(Policy(type, patterns, pick(0, 2) == 0 ? Decision::kDeny : Decision::kAllow));
    }
    const auto f = encode_policy_set(ps);
    for (const auto& values : testing::all_requests(*type)) {
      Request r(type, values);
      ++requests;
      if (eval(f, r) != permitted(ps, r)) ++mismatches;
    }
  }
  report(6, "encoding soundness", mismatches == 0,
         std::to_string(kSoundnessSets) + " policy sets, " + std::to_string(requests) + " requests, " +
             std::to_string(mismatches) + " mismatches");
}

std::string synthetic_perms(bool leak) {
  std::ostringstream out;
  out << "# synthetic export: admin* own /data on corral, user* get home directories\n";
  for (int i = 0; i < 1000; ++i) {
    const bool admin = i % 10 == 0;
    const char* levels = i % 10 == 5 ? "read,modify" : (i % 3 == 0 ? "*" : "execute,read,modify");
    if (admin) {
      out << "admin" << i << " files:a2cps:" << levels << ":corral:/data/proj" << i << "/*\n";
    } else {
      out << "user" << i << " files:a2cps:" << levels << ":" << (i % 4 == 0 ? "corral" : "ls6.tacc")
          << ":/home/user" << i << "/*\n";
    }
  }
  if (leak) out << "user7 files:a2cps:read:corral:/data/proj0/results.csv\n";
  return out.str();
}

void criterion_7() {
  const auto t = Clock::now();
  const auto type = adapters::tapis_files_policy_type(adapters::RegistryConfig{});
  const auto granted =
      adapters::perm_specs_to_policy_set(type, adapters::parse_perms_file(synthetic_perms(false), "a2cps", ""));
  const PolicySet rule = single(type, {{{"*", "*", "*", "*", "*", "*"}, "allow"},
                                       {{"*", "user*", "*", "corral", "*", "/data/*"}, "deny"}});
  const auto verdict = check_implication(granted, rule);
  const double s = since(t);

  const auto leaky =
      adapters::perm_specs_to_policy_set(type, adapters::parse_perms_file(synthetic_perms(true), "a2cps", ""));
  const auto leak_verdict = check_implication(leaky, rule);

  const bool ok = granted.size() >= 2500 && verdict.kind == VerdictKind::kValid && s <= kConnectorLimit &&
                  witnesses(leak_verdict, leaky, rule);
  report(7, "connector scale", ok,
         "1000 lines -> " + std::to_string(granted.size()) + " policies, only-admins-reach-/data " +
             describe(verdict) + " in " + fmt(s) + " (" + std::to_string(verdict.stats.states_built) +
             " states); with one leaked grant " + describe(leak_verdict));
}

std::string snapshot() {
  std::string out;
  auto add = [&](const PolicySet& p, const PolicySet& q) {
    for (const auto& v : {check_implication(p, q), check_implication(q, p)}) out += describe(v) + "\n";
    out += smtlib::emit_implication(p, q).text;
    out += smtlib::emit_implication(q, p).text;
  };
  CliffOne one;
  add(one.p, one.q);
  CliffTwo two;
  add(two.p, two.q);
  for (std::size_t n : {10, 100, 1000}) {
    const auto [p, q] = family("wildcard", n);
    add(p, q);
  }
  for (std::size_t n : {10, 1000, 4000}) {
    const auto [p, q] = family("enum", n);
    add(p, q);
  }
  return out;
}

void criterion_8() {
  const auto first = snapshot();
  const auto second = snapshot();
  const auto third = snapshot();
  report(8, "determinism", first == second && second == third,
         "3 runs of criteria 1-4, " + std::to_string(first.size()) + " bytes of verdicts, counterexamples and scripts" +
             (first == second && second == third ? ", identical" : ", differ"));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria{criterion_1, criterion_2, criterion_3, criterion_4,
                                                    criterion_5, criterion_6, criterion_7, criterion_8};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "criterion", false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
