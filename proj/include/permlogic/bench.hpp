#ifndef PERMLOGIC_BENCH_HPP_
#define PERMLOGIC_BENCH_HPP_

// Scalability families and the per-phase benchmark harness.
//
//   enum      P = {(i, allow) : 0 <= i < n} over an n-member enum,
//             Q = {("*", allow)}
//   wildcard  P = {("a1b2c3d4e5/i", allow)}, Q = {("a1b2c3d4e5/i*", allow)}
//             for 0 <= i < n, alphanumerics plus "/", max_len 100
//
// Indices are 0-based.

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "permlogic/policy.hpp"
#include "permlogic/smtlib.hpp"
#include "permlogic/solver.hpp"

namespace permlogic::bench {

/// A named implication checker.
struct Backend {
  std::string label;
  std::function<Verdict(const PolicySet& p, const PolicySet& q)> check;
  /// Work done in the encoding phase (formula IR or SMT-LIB text).
  std::function<void(const PolicySet& p, const PolicySet& q)> encode;
};

Backend native_backend(const Budget& budget = {});
Backend smt_backend(const smtlib::SolverConfig& config);

struct FamilyInstance {
  PolicyTypePtr type;
  std::string p_json;
  std::string q_json;
};

/// Throws kUnknownFamily for anything but "enum" and "wildcard".
FamilyInstance make_family(std::string_view family, std::size_t n);

struct BenchRecord {
  std::string family;
  std::size_t n = 0;
  std::size_t repeat = 0;
  std::string backend;
  double load_s = 0;
  double encode_s = 0;
  double p_implies_q_s = 0;
  std::optional<double> q_implies_p_s;
  VerdictKind verdict_pq = VerdictKind::kUnknown;
  std::optional<VerdictKind> verdict_qp;

  bool operator==(const BenchRecord&) const = default;
};

/// Generates, loads, encodes and checks one point.
BenchRecord run_point(std::string_view family, std::size_t n, std::size_t repeat, const Backend& backend,
                      bool run_qp = true);

inline constexpr std::string_view kCsvComment =
    "# permlogic bench: seconds per phase from a monotonic clock; process startup excluded";
inline constexpr std::string_view kCsvHeader =
    "family,n,repeat,backend,load_s,encode_s,p_implies_q_s,q_implies_p_s,verdict_pq,verdict_qp";

std::string to_csv_row(const BenchRecord& record);
/// Comment line, header, then one row per record.
void write_csv(std::ostream& out, const std::vector<BenchRecord>& records);
/// Inverse of write_csv; `#` lines are skipped.  Throws kSchemaError.
std::vector<BenchRecord> parse_csv(std::string_view text);

VerdictKind parse_verdict_kind(std::string_view text);

}  // namespace permlogic::bench

#endif  // PERMLOGIC_BENCH_HPP_
