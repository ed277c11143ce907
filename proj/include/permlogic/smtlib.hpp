#ifndef PERMLOGIC_SMTLIB_HPP_
#define PERMLOGIC_SMTLIB_HPP_

// SMT-LIB2 rendering of implication queries and a one-shot driver for
// external solvers.
//
// Emitted grammar (one query per script):
//
//   (set-option :produce-models true)
//   (set-logic QF_SLIA)
//   (declare-fun VAR () String)                       ; one per slot
//   (assert (<= (str.len VAR) MAX_LEN))               ; string slots
//   (assert (str.in_re VAR (re.* CHARS)))             ; string slots
//   (assert (or (= VAR "m1") (= VAR "m2") ...))       ; enum slots
//   (assert P)
//   (assert (not Q))
//   (check-sat)
//   (get-model)
//
// where an atom without `*` is (= VAR "lit") and a glob atom is
// (str.in_re VAR (re.++ (str.to_re "lit") (re.* CHARS) ...)).  CHARS is a
// re.union of re.range runs over the slot's value characters.

#include <chrono>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "permlogic/formula.hpp"
#include "permlogic/policy.hpp"
#include "permlogic/solver.hpp"

namespace permlogic::smtlib {

struct SmtScript {
  std::string text;
  /// Slot path -> declared variable name, in slot order.
  std::vector<std::pair<std::string, std::string>> variable_map;
  PolicyTypePtr type;
};

enum class InputMode { kStdin, kFile };

struct SolverConfig {
  std::string executable;
  std::vector<std::string> arguments;
  std::chrono::milliseconds timeout{60'000};
  std::string name;
  InputMode input = InputMode::kStdin;
};

/// Splits a command line on whitespace; "z3 -in" -> {z3, [-in]}.
SolverConfig parse_solver_command(std::string_view command, std::chrono::milliseconds timeout);

std::string quote_string(std::u32string_view value);
/// Inverse of quote_string; also accepts \uXXXX and \u{X...}.  Throws
/// kModelParseError on malformed literals.
std::u32string unquote_string(std::string_view literal);

std::string variable_name(std::string_view path);
std::string render_formula(const Formula& formula, const PolicyType& type);

SmtScript emit_implication(const PolicySet& p, const PolicySet& q);

/// Raw result of running a solver process.
struct SolverRun {
  std::string out;
  std::string err;
  int exit_code = -1;  // -1 when killed or terminated by a signal
  bool timed_out = false;
};

/// Spawns the solver, feeds the script, and always reaps the child (killing
/// its process group on timeout).  Throws kSolverSpawnFailure if the
/// executable cannot be started.
SolverRun run_process(const SolverConfig& config, const std::string& input);

/// Maps solver output to a verdict; models are parsed through the script's
/// variable map.
Verdict interpret_output(const SmtScript& script, const SolverRun& run);

Verdict run_solver(const SmtScript& script, const SolverConfig& config);

}  // namespace permlogic::smtlib

#endif  // PERMLOGIC_SMTLIB_HPP_
