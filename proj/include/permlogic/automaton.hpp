#ifndef PERMLOGIC_AUTOMATON_HPP_
#define PERMLOGIC_AUTOMATON_HPP_

// Deterministic finite automata over a compressed, indexed alphabet.
//
// Characters that no pattern can tell apart (same slot membership, never a
// pattern literal) share one symbol; symbol 0 is the component separator.
// Symbols are ordered by their smallest member, so lexicographic order over
// symbols agrees with codepoint order once each symbol is replaced by its
// smallest member.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "permlogic/policy.hpp"

namespace permlogic {

using Symbol = std::uint32_t;
using StateId = std::int32_t;

inline constexpr StateId kNoState = -1;

class Alphabet {
 public:
  static constexpr Symbol kSentinel = 0;

  /// `slot_chars[i]` lists the characters legal in slot i's values;
  /// `literal_chars` are characters that must keep a symbol of their own.
  Alphabet(const std::vector<std::u32string>& slot_chars, std::u32string_view literal_chars);

  /// Alphabet for reasoning about `type` with the given patterns in play.
  static std::shared_ptr<const Alphabet> for_type(const PolicyType& type,
                                                  const std::vector<std::u32string>& patterns);

  std::size_t size() const { return members_.size(); }
  std::optional<Symbol> symbol_of(char32_t c) const;
  /// Smallest member; U'\0' for the separator.
  char32_t representative(Symbol s) const { return s == kSentinel ? U'\0' : members_[s].front(); }
  const std::u32string& members(Symbol s) const { return members_[s]; }
  /// Non-separator symbols whose members are legal in `slot`, ascending.
  const std::vector<Symbol>& slot_symbols(std::size_t slot) const { return slot_symbols_[slot]; }
  std::size_t slot_count() const { return slot_symbols_.size(); }

 private:
  std::vector<std::u32string> members_;
  std::vector<std::pair<char32_t, Symbol>> index_;
  std::vector<std::vector<Symbol>> slot_symbols_;
};

using AlphabetPtr = std::shared_ptr<const Alphabet>;

/// Deterministic automaton; a missing transition leads to an implicit dead
/// state.  This is the bounded automaton type handed out by the library.
class Dfa {
 public:
  explicit Dfa(AlphabetPtr alphabet) : alphabet_(std::move(alphabet)) {}

  const AlphabetPtr& alphabet() const { return alphabet_; }
  std::size_t num_states() const { return accepting_.size(); }
  StateId start() const { return start_; }
  bool accepting(StateId s) const { return accepting_[static_cast<std::size_t>(s)] != 0; }
  StateId next(StateId s, Symbol symbol) const {
    return delta_[static_cast<std::size_t>(s) * alphabet_->size() + symbol];
  }
  std::size_t num_transitions() const;

  StateId add_state(bool accepting);
  void set_start(StateId s) { start_ = s; }
  void set_accepting(StateId s, bool accepting) {
    accepting_[static_cast<std::size_t>(s)] = accepting ? 1 : 0;
  }
  void set_transition(StateId from, Symbol symbol, StateId to);

  bool accepts(std::span<const Symbol> word) const;
  /// Single-slot convenience: maps each character to its symbol.
  bool accepts(std::u32string_view word) const;
  bool empty() const { return !lexmin_word().has_value(); }
  /// Lexicographically smallest accepted word.  Language must be finite or
  /// the automaton trimmed; a prefix is smaller than its extensions.
  std::optional<std::vector<Symbol>> lexmin_word() const;
  /// Every accepted word (symbols expanded to members), for small languages.
  std::vector<std::u32string> enumerate(std::size_t limit) const;

  /// Copy restricted to states reachable from start and co-reachable to an
  /// accepting state.
  Dfa trimmed() const;

 private:
  AlphabetPtr alphabet_;
  std::vector<StateId> delta_;
  std::vector<std::uint8_t> accepting_;
  StateId start_ = kNoState;
};

enum class ProductMode { kIntersection, kUnion, kDifference };

/// Reachable product of two automata over the same alphabet.
Dfa product(const Dfa& a, const Dfa& b, ProductMode mode);
Dfa intersect(const Dfa& a, const Dfa& b);
Dfa unite(const Dfa& a, const Dfa& b);
/// universe minus a: complement relative to a well-formedness language.
Dfa complement(const Dfa& a, const Dfa& universe);

/// Unbounded glob automaton for one slot, defined only on that slot's
/// symbols.  Length bounds are left to the slot's well-formedness automaton.
Dfa glob_automaton(std::u32string_view pattern, const AlphabetPtr& alphabet, std::size_t slot);

/// Every legal value of a slot: words over the charset up to max_len, or
/// the enumeration members.
Dfa slot_domain_automaton(const FieldDef& def, const AlphabetPtr& alphabet, std::size_t slot);

/// Language { v : v legal for def and match(def, pattern, v) }.
Dfa pattern_to_automaton(const FieldDef& def, std::u32string_view pattern);
Dfa pattern_to_automaton(const FieldDef& def, std::string_view pattern_utf8);

/// Per-state classification relative to the slot's symbols: a dead state
/// accepts nothing further, a universal state accepts every continuation.
enum class StateStatus : std::uint8_t { kOpen, kDead, kUniversal };
std::vector<StateStatus> classify_states(const Dfa& dfa, std::size_t slot);

}  // namespace permlogic

#endif  // PERMLOGIC_AUTOMATON_HPP_
