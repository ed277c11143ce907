#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "permlogic/bench.hpp"
#include "permlogic/error.hpp"

using namespace permlogic;

namespace {

const std::string kData = std::string(PERMLOGIC_TEST_DIR) + "/data/";
const std::string kGolden = std::string(PERMLOGIC_TEST_DIR) + "/golden/";

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "permlogic");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("permlogic-test-" + name)).string();
}

}  // namespace

TEST_CASE("check: exit codes follow the verdict") {
  auto r = run({"check", "--policies", kData + "sys1_p.json", "--against", kData + "sys1_q.json"});
  CHECK(r.code == cli::kExitValid);
  CHECK(r.out == "valid\n");

  r = run({"check", "--policies", kData + "wildcard10_p.json", "--against", kData + "wildcard10_q.json",
           "--direction", "qp"});
  CHECK(r.code == cli::kExitInvalid);
  CHECK(r.out == "invalid\n{\"path\":\"a1b2c3d4e5/0/\"}\n");

  r = run({"check", "--policies", kData + "wildcard10_p.json", "--against", kData + "wildcard10_q.json"});
  CHECK(r.code == cli::kExitValid);

  r = run({"check", "--policies", kData + "deny_p.json", "--against", kData + "deny_q.json"});
  CHECK(r.code == cli::kExitInvalid);
  CHECK(r.out == "invalid\n{\"username\":\"jstubbs\",\"path\":\"s2/home/jstubbs/\",\"action\":\"DELETE\"}\n");

  r = run({"check", "--policies", kData + "deny_p.json", "--against", kData + "deny_q.json", "--direction", "qp"});
  CHECK(r.code == cli::kExitValid);

  r = run({"check", "--policies", kData + "sys1_q.json", "--against", kData + "sys1_p.json", "--max-states", "2"});
  CHECK(r.code == cli::kExitUnknown);
  CHECK(r.out == "unknown: state-budget-exceeded\n");
}

TEST_CASE("check: external backend and its timeout") {
  auto r = run({"check", "--policies", kData + "sys1_p.json", "--against", kData + "sys1_q.json", "--backend", "smt",
                "--solver-cmd", "/bin/sh " + std::string(PERMLOGIC_TEST_DIR) + "/fake_solvers/hang.sh", "--timeout",
                "0.2"});
  CHECK(r.code == cli::kExitUnknown);
  CHECK(r.out == "unknown: timeout\n");

  r = run({"check", "--policies", kData + "sys1_p.json", "--against", kData + "sys1_q.json", "--backend", "smt",
           "--solver-cmd", "/nonexistent/solver"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("SolverSpawnFailure") != std::string::npos);
}

TEST_CASE("check: usage and IO errors exit 3") {
  CHECK(run({"check", "--policies", kData + "missing.json", "--against", kData + "sys1_q.json"}).code ==
        cli::kExitUsage);
  CHECK(run({"check", "--policies", kData + "sys1_p.json", "--against", kData + "deny_q.json"}).code ==
        cli::kExitUsage);
  CHECK(run({"check", "--policies", kData + "sys1_p.json"}).code == cli::kExitUsage);
  CHECK(run({"check", "--policies", kData + "sys1_p.json", "--against", kData + "sys1_q.json", "--backend", "cvc9"})
            .code == cli::kExitUsage);
  CHECK(run({"check", "--policies", kData + "sys1_p.json", "--against", kData + "sys1_q.json", "--timeout", "0"})
            .code == cli::kExitUsage);
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("emit-smt matches the golden file byte for byte") {
  const auto out = temp_path("sys1.smt2");
  REQUIRE(run({"emit-smt", "--policies", kData + "sys1_p.json", "--against", kData + "sys1_q.json", "-o", out}).code ==
          0);
  const auto first = slurp(out);
  CHECK(first == slurp(kGolden + "sys1_prefix.smt2"));
  REQUIRE(run({"emit-smt", "--policies", kData + "sys1_p.json", "--against", kData + "sys1_q.json", "-o", out}).code ==
          0);
  CHECK(slurp(out) == first);
  std::filesystem::remove(out);

  const auto to_stdout =
      run({"emit-smt", "--policies", kData + "sys1_p.json", "--against", kData + "sys1_q.json", "-o", "-"});
  CHECK(to_stdout.out == first);

  CHECK(run({"emit-smt", "--policies", kData + "sys1_p.json", "--against", kData + "deny_q.json", "-o", "-"}).code ==
        cli::kExitUsage);
}

TEST_CASE("convert: sample, bad line and empty input") {
  auto r = run({"convert", "--input", kData + "sample.perms", "--tenant", "a2cps"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("\"policy_type\": \"tapis_files\"") != std::string::npos);
  std::size_t decisions = 0;
  for (auto pos = r.out.find("\"decision\""); pos != std::string::npos; pos = r.out.find("\"decision\"", pos + 1)) {
    ++decisions;
  }
  CHECK(decisions == 1 + 3 + 2);
  // Deterministic output.
  CHECK(run({"convert", "--input", kData + "sample.perms", "--tenant", "a2cps"}).out == r.out);

  r = run({"convert", "--input", kData + "bad.perms", "--tenant", "a2cps"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.err.find("line 2") != std::string::npos);

  r = run({"convert", "--input", kData + "empty.perms", "--tenant", "a2cps", "--decision", "deny"});
  CHECK(r.code == 0);
  CHECK(r.out == "{\n  \"policy_type\": \"tapis_files\",\n  \"policies\": []\n}\n");

  // The converted file feeds straight back into check.
  const auto json = temp_path("converted.json");
  REQUIRE(run({"convert", "--input", kData + "sample.perms", "--tenant", "a2cps", "-o", json}).code == 0);
  CHECK(run({"check", "--policies", json, "--against", json}).code == cli::kExitValid);
  std::filesystem::remove(json);
}

TEST_CASE("convert honours a registry config") {
  const auto config = temp_path("registry.json");
  std::ofstream(config) << R"({"tenants": ["dev"]})";
  CHECK(run({"--config", config, "convert", "--input", kData + "sample.perms", "--tenant", "a2cps"}).code ==
        cli::kExitUsage);
  std::ofstream(config) << R"({"tenants": ["dev", "a2cps"], "bogus": 1})";
  CHECK(run({"--config", config, "convert", "--input", kData + "sample.perms", "--tenant", "a2cps"}).code ==
        cli::kExitUsage);
  std::filesystem::remove(config);
}

TEST_CASE("bench: CSV header, verdicts and round trip") {
  auto r = run({"bench", "--family", "wildcard", "--n", "2,10", "--repeats", "2"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string comment;
  std::string header;
  std::getline(lines, comment);
  std::getline(lines, header);
  CHECK(comment.rfind("#", 0) == 0);
  CHECK(comment.find("startup") != std::string::npos);
  CHECK(header == "family,n,repeat,backend,load_s,encode_s,p_implies_q_s,q_implies_p_s,verdict_pq,verdict_qp");
  const auto records = bench::parse_csv(r.out);
  REQUIRE(records.size() == 4);
  CHECK(records[1].n == 2);
  CHECK(records[1].repeat == 1);
  for (const auto& rec : records) {
    CHECK(rec.backend == "native");
    CHECK(rec.verdict_pq == VerdictKind::kValid);
    CHECK(rec.verdict_qp == VerdictKind::kInvalid);
    CHECK(rec.load_s >= 0);
    CHECK(*rec.q_implies_p_s >= 0);
  }

  r = run({"bench", "--family", "enum", "--n", "10", "--pq-only"});
  REQUIRE(r.code == 0);
  const auto enum_records = bench::parse_csv(r.out);
  REQUIRE(enum_records.size() == 1);
  CHECK(enum_records[0].verdict_pq == VerdictKind::kValid);
  CHECK_FALSE(enum_records[0].verdict_qp.has_value());
  CHECK_FALSE(enum_records[0].q_implies_p_s.has_value());

  r = run({"bench", "--family", "regex", "--n", "10"});
  CHECK(r.code == cli::kExitUsage);
  CHECK(r.out.empty());
  CHECK(r.err.find("UnknownFamily") != std::string::npos);
  CHECK(run({"bench", "--family", "enum", "--n", "0"}).code == cli::kExitUsage);
}

TEST_CASE("bench CSV parses back losslessly") {
  std::vector<bench::BenchRecord> records;
  bench::BenchRecord a;
  a.family = "enum";
  a.n = 4000;
  a.repeat = 3;
  a.backend = "smt:z3";
  a.load_s = 0.1 + 0.2;
  a.encode_s = 1e-9;
  a.p_implies_q_s = 12345.678901234567;
  a.q_implies_p_s = 0.0;
  a.verdict_pq = VerdictKind::kValid;
  a.verdict_qp = VerdictKind::kUnknown;
  records.push_back(a);
  a.q_implies_p_s.reset();
  a.verdict_qp.reset();
  records.push_back(a);
  std::ostringstream out;
  bench::write_csv(out, records);
  CHECK(bench::parse_csv(out.str()) == records);

  CHECK_THROWS_AS(bench::parse_csv("family,n\n"), Error);
  CHECK_THROWS_AS(bench::parse_csv(std::string(bench::kCsvHeader) + "\nenum,1,0,native,x,0,0,0,valid,valid\n"), Error);
  CHECK_THROWS_AS(bench::parse_csv(std::string(bench::kCsvHeader) + "\nenum,1,0,native,0,0,0,,valid,valid\n"), Error);
}

TEST_CASE("family generators use 0-based indices") {
  const auto w = bench::make_family("wildcard", 2);
  CHECK(w.p_json.find("\"a1b2c3d4e5/0\"") != std::string::npos);
  CHECK(w.p_json.find("\"a1b2c3d4e5/1\"") != std::string::npos);
  CHECK(w.p_json.find("\"a1b2c3d4e5/2\"") == std::string::npos);
  CHECK(w.q_json.find("\"a1b2c3d4e5/1*\"") != std::string::npos);
  const auto e = bench::make_family("enum", 3);
  CHECK(e.q_json.find("\"*\"") != std::string::npos);
  CHECK(e.p_json.find("\"2\"") != std::string::npos);
  CHECK_THROWS_AS(bench::make_family("tree", 3), Error);
}
