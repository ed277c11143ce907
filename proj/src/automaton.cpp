#include "permlogic/automaton.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <utility>

#include "permlogic/error.hpp"
#include "permlogic/utf8.hpp"

namespace permlogic {

// ---------------------------------------------------------------------------
// Alphabet

Alphabet::Alphabet(const std::vector<std::u32string>& slot_chars,
                   std::u32string_view literal_chars) {
  const std::size_t slots = slot_chars.size();
  std::map<char32_t, std::vector<bool>> signature;
  for (std::size_t i = 0; i < slots; ++i) {
    for (char32_t c : slot_chars[i]) {
      if (c == kWildcardChar) continue;
      auto& sig = signature[c];
      sig.resize(slots);
      sig[i] = true;
    }
  }
  std::set<char32_t> literals;
  for (char32_t c : literal_chars) {
    if (c == kWildcardChar) continue;
    literals.insert(c);
    signature[c].resize(slots);
  }

  std::map<std::vector<bool>, std::u32string> shared;
  std::vector<std::u32string> groups;
  for (const auto& [c, sig] : signature) {
    if (literals.count(c) != 0) {
      groups.emplace_back(1, c);
    } else {
      shared[sig].push_back(c);
    }
  }
  for (auto& [sig, chars] : shared) groups.push_back(std::move(chars));
  std::sort(groups.begin(), groups.end(),
            [](const std::u32string& a, const std::u32string& b) { return a.front() < b.front(); });

  members_.emplace_back();  // separator
  for (auto& group : groups) members_.push_back(std::move(group));
  for (Symbol s = 1; s < members_.size(); ++s) {
    for (char32_t c : members_[s]) index_.emplace_back(c, s);
  }
  std::sort(index_.begin(), index_.end());

  slot_symbols_.resize(slots);
  for (Symbol s = 1; s < members_.size(); ++s) {
    const auto& sig = signature.at(members_[s].front());
    for (std::size_t i = 0; i < slots; ++i) {
      if (sig[i]) slot_symbols_[i].push_back(s);
    }
  }
}

AlphabetPtr Alphabet::for_type(const PolicyType& type,
                               const std::vector<std::u32string>& patterns) {
  std::vector<std::u32string> slot_chars;
  std::u32string literals;
  for (const auto& slot : type.slots()) {
    if (const auto* s = std::get_if<StringComponentDef>(&slot.def)) {
      slot_chars.push_back(s->charset().value_chars());
    } else {
      const auto& chars = std::get<StringEnumComponentDef>(slot.def).value_chars();
      slot_chars.push_back(chars);
      literals += chars;
    }
  }
  for (const auto& pattern : patterns) literals += pattern;
  return std::make_shared<const Alphabet>(slot_chars, literals);
}

std::optional<Symbol> Alphabet::symbol_of(char32_t c) const {
  auto it = std::lower_bound(index_.begin(), index_.end(), std::make_pair(c, Symbol{0}));
  if (it == index_.end() || it->first != c) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Dfa

StateId Dfa::add_state(bool accepting) {
  accepting_.push_back(accepting ? 1 : 0);
  delta_.resize(delta_.size() + alphabet_->size(), kNoState);
  return static_cast<StateId>(accepting_.size() - 1);
}

void Dfa::set_transition(StateId from, Symbol symbol, StateId to) {
  delta_[static_cast<std::size_t>(from) * alphabet_->size() + symbol] = to;
}

std::size_t Dfa::num_transitions() const {
  return static_cast<std::size_t>(
      std::count_if(delta_.begin(), delta_.end(), [](StateId s) { return s != kNoState; }));
}

bool Dfa::accepts(std::span<const Symbol> word) const {
  StateId s = start_;
  for (Symbol symbol : word) {
    if (s == kNoState) return false;
    if (symbol >= alphabet_->size()) return false;
    s = next(s, symbol);
  }
  return s != kNoState && accepting(s);
}

bool Dfa::accepts(std::u32string_view word) const {
  std::vector<Symbol> symbols;
  symbols.reserve(word.size());
  for (char32_t c : word) {
    auto symbol = alphabet_->symbol_of(c);
    if (!symbol) return false;
    symbols.push_back(*symbol);
  }
  return accepts(std::span<const Symbol>(symbols));
}

namespace {

std::vector<bool> coreachable(const Dfa& dfa) {
  const std::size_t n = dfa.num_states();
  const std::size_t k = dfa.alphabet()->size();
  std::vector<std::vector<StateId>> reverse(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (Symbol a = 0; a < k; ++a) {
      StateId t = dfa.next(static_cast<StateId>(s), a);
      if (t != kNoState) reverse[static_cast<std::size_t>(t)].push_back(static_cast<StateId>(s));
    }
  }
  std::vector<bool> live(n, false);
  std::vector<StateId> work;
  for (std::size_t s = 0; s < n; ++s) {
    if (dfa.accepting(static_cast<StateId>(s))) {
      live[s] = true;
      work.push_back(static_cast<StateId>(s));
    }
  }
  while (!work.empty()) {
    StateId s = work.back();
    work.pop_back();
    for (StateId p : reverse[static_cast<std::size_t>(s)]) {
      if (!live[static_cast<std::size_t>(p)]) {
        live[static_cast<std::size_t>(p)] = true;
        work.push_back(p);
      }
    }
  }
  return live;
}

}  // namespace

std::optional<std::vector<Symbol>> Dfa::lexmin_word() const {
  if (start_ == kNoState) return std::nullopt;
  const auto live = coreachable(*this);
  if (!live[static_cast<std::size_t>(start_)]) return std::nullopt;
  std::vector<Symbol> word;
  StateId s = start_;
  while (!accepting(s)) {
    if (word.size() > num_states()) {
      throw Error(ErrorCode::kInvalidDefinition, "lexmin_word on an automaton with a live cycle");
    }
    for (Symbol a = 0; a < alphabet_->size(); ++a) {
      StateId t = next(s, a);
      if (t != kNoState && live[static_cast<std::size_t>(t)]) {
        word.push_back(a);
        s = t;
        break;
      }
    }
  }
  return word;
}

std::vector<std::u32string> Dfa::enumerate(std::size_t limit) const {
  std::vector<std::u32string> out;
  if (start_ == kNoState) return out;
  const auto live = coreachable(*this);
  std::u32string word;
  // Depth is bounded by the state count on acyclic automata.
  auto walk = [&](auto&& self, StateId s) -> void {
    if (out.size() >= limit) return;
    if (word.size() > num_states()) {
      throw Error(ErrorCode::kInvalidDefinition, "enumerate on an automaton with a live cycle");
    }
    if (accepting(s)) out.push_back(word);
    for (Symbol a = 0; a < alphabet_->size(); ++a) {
      StateId t = next(s, a);
      if (t == kNoState || !live[static_cast<std::size_t>(t)]) continue;
      if (a == Alphabet::kSentinel) {
        word.push_back(U'⊣');
        self(self, t);
        word.pop_back();
        continue;
      }
      for (char32_t c : alphabet_->members(a)) {
        word.push_back(c);
        self(self, t);
        word.pop_back();
      }
    }
  };
  if (live[static_cast<std::size_t>(start_)]) walk(walk, start_);
  std::sort(out.begin(), out.end());
  return out;
}

Dfa Dfa::trimmed() const {
  Dfa out(alphabet_);
  if (start_ == kNoState) return out;
  const auto live = coreachable(*this);
  if (!live[static_cast<std::size_t>(start_)]) {
    out.set_start(kNoState);
    return out;
  }
  std::vector<StateId> renumber(num_states(), kNoState);
  std::deque<StateId> queue{start_};
  renumber[static_cast<std::size_t>(start_)] = out.add_state(accepting(start_));
  out.set_start(0);
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    for (Symbol a = 0; a < alphabet_->size(); ++a) {
      StateId t = next(s, a);
      if (t == kNoState || !live[static_cast<std::size_t>(t)]) continue;
      auto& mapped = renumber[static_cast<std::size_t>(t)];
      if (mapped == kNoState) {
        mapped = out.add_state(accepting(t));
        queue.push_back(t);
      }
      out.set_transition(renumber[static_cast<std::size_t>(s)], a, mapped);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Products

Dfa product(const Dfa& a, const Dfa& b, ProductMode mode) {
  if (a.alphabet() != b.alphabet()) {
    throw Error(ErrorCode::kTypeMismatch, "product of automata over different alphabets");
  }
  const auto& alphabet = a.alphabet();
  Dfa out(alphabet);
  using Pair = std::pair<StateId, StateId>;
  std::map<Pair, StateId> ids;
  std::deque<Pair> queue;
  auto accept = [&](const Pair& p) {
    const bool in_a = p.first != kNoState && a.accepting(p.first);
    const bool in_b = p.second != kNoState && b.accepting(p.second);
    switch (mode) {
      case ProductMode::kIntersection: return in_a && in_b;
      case ProductMode::kUnion: return in_a || in_b;
      case ProductMode::kDifference: return in_a && !in_b;
    }
    return false;
  };
  auto viable = [&](const Pair& p) {
    switch (mode) {
      case ProductMode::kIntersection: return p.first != kNoState && p.second != kNoState;
      case ProductMode::kUnion: return p.first != kNoState || p.second != kNoState;
      case ProductMode::kDifference: return p.first != kNoState;
    }
    return false;
  };
  auto intern = [&](const Pair& p) {
    auto [it, inserted] = ids.emplace(p, kNoState);
    if (inserted) {
      it->second = out.add_state(accept(p));
      queue.push_back(p);
    }
    return it->second;
  };
  const Pair start{a.start(), b.start()};
  if (!viable(start)) return out;
  out.set_start(intern(start));
  while (!queue.empty()) {
    const Pair p = queue.front();
    queue.pop_front();
    const StateId from = ids.at(p);
    for (Symbol s = 0; s < alphabet->size(); ++s) {
      const Pair q{p.first == kNoState ? kNoState : a.next(p.first, s),
                   p.second == kNoState ? kNoState : b.next(p.second, s)};
      if (!viable(q)) continue;
      out.set_transition(from, s, intern(q));
    }
  }
  return out.trimmed();
}

Dfa intersect(const Dfa& a, const Dfa& b) { return product(a, b, ProductMode::kIntersection); }
Dfa unite(const Dfa& a, const Dfa& b) { return product(a, b, ProductMode::kUnion); }
Dfa complement(const Dfa& a, const Dfa& universe) {
  return product(universe, a, ProductMode::kDifference);
}

// ---------------------------------------------------------------------------
// Slot automata

Dfa glob_automaton(std::u32string_view pattern, const AlphabetPtr& alphabet, std::size_t slot) {
  // Subset construction over pattern positions; position i means pattern[0, i)
  // has been consumed.  A `*` at i lets i also stand for i + 1.
  const std::size_t n = pattern.size();
  auto close = [&](std::vector<std::uint32_t> set) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t i : set) {
      while (true) {
        out.push_back(i);
        if (i < n && pattern[i] == kWildcardChar) {
          ++i;
          continue;
        }
        break;
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  };

  Dfa dfa(alphabet);
  std::map<std::vector<std::uint32_t>, StateId> ids;
  std::deque<std::vector<std::uint32_t>> queue;
  auto intern = [&](std::vector<std::uint32_t> set) {
    auto it = ids.find(set);
    if (it != ids.end()) return it->second;
    const bool accepting = std::binary_search(set.begin(), set.end(), static_cast<std::uint32_t>(n));
    const StateId id = dfa.add_state(accepting);
    ids.emplace(set, id);
    queue.push_back(std::move(set));
    return id;
  };
  dfa.set_start(intern(close({0})));
  const auto& symbols = alphabet->slot_symbols(slot);
  while (!queue.empty()) {
    auto set = std::move(queue.front());
    queue.pop_front();
    const StateId from = ids.at(set);
    for (Symbol symbol : symbols) {
      const char32_t c = alphabet->representative(symbol);
      std::vector<std::uint32_t> moved;
      for (std::uint32_t i : set) {
        if (i >= n) continue;
        if (pattern[i] == kWildcardChar) {
          moved.push_back(i);
        } else if (pattern[i] == c) {
          moved.push_back(i + 1);
        }
      }
      if (moved.empty()) continue;
      dfa.set_transition(from, symbol, intern(close(std::move(moved))));
    }
  }
  return dfa;
}

Dfa slot_domain_automaton(const FieldDef& def, const AlphabetPtr& alphabet, std::size_t slot) {
  Dfa dfa(alphabet);
  if (const auto* s = std::get_if<StringComponentDef>(&def)) {
    const auto& symbols = alphabet->slot_symbols(slot);
    StateId prev = dfa.add_state(true);
    dfa.set_start(prev);
    for (std::size_t len = 1; len <= s->max_len(); ++len) {
      const StateId cur = dfa.add_state(true);
      for (Symbol symbol : symbols) dfa.set_transition(prev, symbol, cur);
      prev = cur;
    }
    return dfa;
  }
  const auto& e = std::get<StringEnumComponentDef>(def);
  auto values = e.values();
  std::sort(values.begin(), values.end());
  dfa.set_start(dfa.add_state(false));
  for (const auto& value : values) {
    StateId s = dfa.start();
    for (char32_t c : value) {
      auto symbol = alphabet->symbol_of(c);
      if (!symbol) {
        throw Error(ErrorCode::kCharOutsideCharset, "enum value character missing from alphabet");
      }
      StateId t = dfa.next(s, *symbol);
      if (t == kNoState) {
        t = dfa.add_state(false);
        dfa.set_transition(s, *symbol, t);
      }
      s = t;
    }
    dfa.set_accepting(s, true);
  }
  return dfa;
}

Dfa pattern_to_automaton(const FieldDef& def, std::u32string_view pattern) {
  validate_pattern(def, pattern);
  std::u32string chars;
  if (const auto* s = std::get_if<StringComponentDef>(&def)) {
    chars = s->charset().value_chars();
  } else {
    chars = std::get<StringEnumComponentDef>(def).value_chars();
  }
  std::u32string literals(pattern);
  if (std::holds_alternative<StringEnumComponentDef>(def)) literals += chars;
  auto alphabet = std::make_shared<const Alphabet>(std::vector<std::u32string>{chars}, literals);
  // Exact patterns carry no `*`, so their glob automaton is plain equality.
  return intersect(glob_automaton(pattern, alphabet, 0), slot_domain_automaton(def, alphabet, 0));
}

Dfa pattern_to_automaton(const FieldDef& def, std::string_view pattern_utf8) {
  return pattern_to_automaton(def, utf8::decode(pattern_utf8));
}

std::vector<StateStatus> classify_states(const Dfa& dfa, std::size_t slot) {
  const std::size_t n = dfa.num_states();
  const auto& symbols = dfa.alphabet()->slot_symbols(slot);
  std::vector<StateStatus> status(n, StateStatus::kOpen);

  std::vector<bool> live(n, false);
  for (std::size_t s = 0; s < n; ++s) live[s] = dfa.accepting(static_cast<StateId>(s));
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (live[s]) continue;
      for (Symbol a : symbols) {
        StateId t = dfa.next(static_cast<StateId>(s), a);
        if (t != kNoState && live[static_cast<std::size_t>(t)]) {
          live[s] = true;
          changed = true;
          break;
        }
      }
    }
  }

  // Greatest fixpoint: accepting, total on the slot symbols, closed under steps.
  std::vector<bool> universal(n, false);
  for (std::size_t s = 0; s < n; ++s) universal[s] = dfa.accepting(static_cast<StateId>(s));
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (!universal[s]) continue;
      for (Symbol a : symbols) {
        StateId t = dfa.next(static_cast<StateId>(s), a);
        if (t == kNoState || !universal[static_cast<std::size_t>(t)]) {
          universal[s] = false;
          changed = true;
          break;
        }
      }
    }
  }

  for (std::size_t s = 0; s < n; ++s) {
    if (!live[s]) {
      status[s] = StateStatus::kDead;
    } else if (universal[s]) {
      status[s] = StateStatus::kUniversal;
    }
  }
  return status;
}

}  // namespace permlogic
