#ifndef PERMLOGIC_SOLVER_HPP_
#define PERMLOGIC_SOLVER_HPP_

// Built-in decision procedure for implication between policy sets.
//
// A request is read as the word  v_1 ⊣ v_2 ⊣ ... ⊣ v_m ⊣  over the alphabet
// of automaton.hpp.  The engine explores the product of the slot-domain
// automata with one glob automaton per distinct atom.  Rather than carrying
// a tuple of atom states, each product state carries the formula residual:
// the source formula with every atom replaced by its current automaton
// state, simplified (dead atom -> false, universal atom -> true) and
// hash-consed.  Because every atom automaton is deterministic, negation is
// exact and the product is deterministic; because every slot is bounded the
// product is acyclic.

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "permlogic/automaton.hpp"
#include "permlogic/formula.hpp"
#include "permlogic/policy.hpp"

namespace permlogic {

enum class VerdictKind { kValid, kInvalid, kUnknown };

std::string_view to_string(VerdictKind kind);

inline constexpr std::string_view kReasonStateBudget = "state-budget-exceeded";
inline constexpr std::string_view kReasonTimeout = "timeout";

struct SearchStats {
  std::size_t states_built = 0;
  std::chrono::duration<double> elapsed{0};
};

struct Verdict {
  VerdictKind kind = VerdictKind::kUnknown;
  std::optional<Request> counterexample;  // present iff kind == kInvalid
  std::string reason;                     // set iff kind == kUnknown
  SearchStats stats;
};

struct Budget {
  std::size_t max_states = 1'000'000;
  std::chrono::milliseconds timeout{60'000};
};

/// Materializes the trimmed automaton of `formula` over the sentinel-joined
/// request words of `type`.  Throws kStateBudgetExceeded past the cap.
Dfa formula_to_automaton(const Formula& formula, const PolicyTypePtr& type,
                         std::size_t max_states = Budget{}.max_states);

/// Splits an accepted word at separators into a request.
Request request_from_word(const PolicyTypePtr& type, const Alphabet& alphabet,
                          std::span<const Symbol> word);
/// The inverse: v_1 ⊣ ... ⊣ v_m ⊣.  Returns nullopt for characters outside
/// the alphabet.
std::optional<std::vector<Symbol>> word_from_request(const Request& request,
                                                     const Alphabet& alphabet);

/// Decides whether every request permitted by `p` is permitted by `q`.  The
/// counterexample of an Invalid verdict is the smallest witness in the order
/// of the separator-joined words (separator first, then codepoint order).
Verdict check_implication(const PolicySet& p, const PolicySet& q, const Budget& budget = {});

/// Searches for the smallest request satisfying `formula`; Valid means no
/// request does.
Verdict find_witness(const Formula& formula, const PolicyTypePtr& type, const Budget& budget = {});

/// Enumerates the whole request space (at most `max_requests` points,
/// otherwise kDomainTooLarge) in the same order check_implication uses.
Verdict brute_force_implication(const PolicySet& p, const PolicySet& q,
                                std::size_t max_requests = 1'000'000);

/// Number of requests of `type`, saturating at SIZE_MAX.
std::size_t request_space_size(const PolicyType& type);

}  // namespace permlogic

#endif  // PERMLOGIC_SOLVER_HPP_
