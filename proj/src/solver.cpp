#include "permlogic/solver.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "permlogic/error.hpp"

namespace permlogic {

std::string_view to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::kValid: return "valid";
    case VerdictKind::kInvalid: return "invalid";
    case VerdictKind::kUnknown: return "unknown";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint32_t kFalseNode = 0;
constexpr std::uint32_t kTrueNode = 1;
constexpr std::uint32_t kNoSlot = std::numeric_limits<std::uint32_t>::max();

struct BudgetExhausted {
  std::string_view reason;
};

struct VectorHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::uint32_t x : v) {
      h ^= x;
      h *= 1099511628211ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

struct CompiledAtom {
  std::size_t slot;
  Dfa automaton;
  std::vector<StateStatus> status;
};

/// Hash-consed residual formulas.  Node 0 is false, node 1 is true.
class ResidualStore {
 public:
  enum class Kind : std::uint32_t { kFalse, kTrue, kAtom, kNot, kAnd, kOr };

  explicit ResidualStore(const std::vector<CompiledAtom>& atoms) : atoms_(atoms) {
    nodes_.push_back(Node{Kind::kFalse, 0, kNoState, kNoSlot, {}});
    nodes_.push_back(Node{Kind::kTrue, 0, kNoState, kNoSlot, {}});
  }

  std::uint32_t from_formula(const Formula& f, const std::map<std::pair<std::size_t, std::u32string>,
                                                              std::uint32_t>& atom_ids) {
    switch (f.kind()) {
      case Formula::Kind::kTrue: return kTrueNode;
      case Formula::Kind::kFalse: return kFalseNode;
      case Formula::Kind::kAtom: {
        const auto id = atom_ids.at({f.atom().slot, f.atom().pattern});
        return make_atom(id, atoms_[id].automaton.start());
      }
      case Formula::Kind::kNot: return make_not(from_formula(f.children().front(), atom_ids));
      case Formula::Kind::kAnd:
      case Formula::Kind::kOr: {
        std::vector<std::uint32_t> kids;
        kids.reserve(f.children().size());
        for (const auto& child : f.children()) kids.push_back(from_formula(child, atom_ids));
        return f.kind() == Formula::Kind::kAnd ? make_nary(Kind::kAnd, std::move(kids))
                                               : make_nary(Kind::kOr, std::move(kids));
      }
    }
    return kFalseNode;
  }

  /// Advances every atom of `slot` on `symbol`.
  std::uint32_t step(std::uint32_t id, std::size_t slot, Symbol symbol) {
    if (nodes_[id].min_slot != slot) return id;
    const std::uint64_t key = (static_cast<std::uint64_t>(id) << 32) | symbol;
    if (auto it = step_memo_.find(key); it != step_memo_.end()) return it->second;
    std::uint32_t result = kFalseNode;
    const Node node = nodes_[id];
    switch (node.kind) {
      case Kind::kAtom:
        result = make_atom(node.atom, atoms_[node.atom].automaton.next(node.state, symbol));
        break;
      case Kind::kNot:
        result = make_not(step(node.kids.front(), slot, symbol));
        break;
      case Kind::kAnd:
      case Kind::kOr: {
        std::vector<std::uint32_t> kids;
        kids.reserve(node.kids.size());
        for (std::uint32_t kid : node.kids) kids.push_back(step(kid, slot, symbol));
        result = make_nary(node.kind, std::move(kids));
        break;
      }
      default:
        result = id;
    }
    step_memo_.emplace(key, result);
    return result;
  }

  /// Settles every atom of `slot` at the end of its value.
  std::uint32_t resolve(std::uint32_t id, std::size_t slot) {
    if (nodes_[id].min_slot != slot) return id;
    if (auto it = resolve_memo_.find(id); it != resolve_memo_.end()) return it->second;
    std::uint32_t result = kFalseNode;
    const Node node = nodes_[id];
    switch (node.kind) {
      case Kind::kAtom:
        result = atoms_[node.atom].automaton.accepting(node.state) ? kTrueNode : kFalseNode;
        break;
      case Kind::kNot:
        result = make_not(resolve(node.kids.front(), slot));
        break;
      case Kind::kAnd:
      case Kind::kOr: {
        std::vector<std::uint32_t> kids;
        kids.reserve(node.kids.size());
        for (std::uint32_t kid : node.kids) kids.push_back(resolve(kid, slot));
        result = make_nary(node.kind, std::move(kids));
        break;
      }
      default:
        result = id;
    }
    resolve_memo_.emplace(id, result);
    return result;
  }

 private:
  struct Node {
    Kind kind;
    std::uint32_t atom;
    StateId state;
    std::uint32_t min_slot;
    std::vector<std::uint32_t> kids;
  };

  std::uint32_t intern(Node node) {
    key_.clear();
    key_.push_back(static_cast<std::uint32_t>(node.kind));
    key_.push_back(node.atom);
    key_.push_back(static_cast<std::uint32_t>(node.state));
    key_.insert(key_.end(), node.kids.begin(), node.kids.end());
    auto [it, inserted] = ids_.emplace(key_, static_cast<std::uint32_t>(nodes_.size()));
    if (inserted) nodes_.push_back(std::move(node));
    return it->second;
  }

  std::uint32_t make_atom(std::uint32_t atom, StateId state) {
    if (state == kNoState) return kFalseNode;
    const auto& compiled = atoms_[atom];
    switch (compiled.status[static_cast<std::size_t>(state)]) {
      case StateStatus::kDead: return kFalseNode;
      case StateStatus::kUniversal: return kTrueNode;
      case StateStatus::kOpen: break;
    }
    return intern(Node{Kind::kAtom, atom, state, static_cast<std::uint32_t>(compiled.slot), {}});
  }

  std::uint32_t make_not(std::uint32_t kid) {
    if (kid == kFalseNode) return kTrueNode;
    if (kid == kTrueNode) return kFalseNode;
    if (nodes_[kid].kind == Kind::kNot) return nodes_[kid].kids.front();
    return intern(Node{Kind::kNot, 0, kNoState, nodes_[kid].min_slot, {kid}});
  }

  std::uint32_t make_nary(Kind kind, std::vector<std::uint32_t> kids) {
    const std::uint32_t absorbing = kind == Kind::kAnd ? kFalseNode : kTrueNode;
    const std::uint32_t neutral = kind == Kind::kAnd ? kTrueNode : kFalseNode;
    std::vector<std::uint32_t> flat;
    flat.reserve(kids.size());
    for (std::uint32_t kid : kids) {
      if (kid == absorbing) return absorbing;
      if (kid == neutral) continue;
      if (nodes_[kid].kind == kind) {
        const auto& grand = nodes_[kid].kids;
        flat.insert(flat.end(), grand.begin(), grand.end());
      } else {
        flat.push_back(kid);
      }
    }
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    if (flat.empty()) return neutral;
    if (flat.size() == 1) return flat.front();
    std::uint32_t min_slot = kNoSlot;
    for (std::uint32_t kid : flat) min_slot = std::min(min_slot, nodes_[kid].min_slot);
    return intern(Node{kind, 0, kNoState, min_slot, std::move(flat)});
  }

  const std::vector<CompiledAtom>& atoms_;
  std::vector<Node> nodes_;
  std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VectorHash> ids_;
  std::unordered_map<std::uint64_t, std::uint32_t> step_memo_;
  std::unordered_map<std::uint32_t, std::uint32_t> resolve_memo_;
  std::vector<std::uint32_t> key_;
};

struct ProductKey {
  std::uint32_t slot;
  StateId domain_state;
  std::uint32_t residual;

  bool operator==(const ProductKey&) const = default;
};

struct ProductKeyHash {
  std::size_t operator()(const ProductKey& k) const noexcept {
    std::uint64_t h = (static_cast<std::uint64_t>(k.residual) << 32) ^
                      (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.domain_state)) << 8) ^
                      k.slot;
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return static_cast<std::size_t>(h);
  }
};

/// Lazily explored product of slot-domain automata and the residual store.
class ProductEngine {
 public:
  ProductEngine(const Formula& formula, const PolicyTypePtr& type, std::size_t max_states,
                std::optional<Clock::time_point> deadline)
      : type_(type), max_states_(max_states), deadline_(deadline) {
    const auto atoms = collect_atoms(formula);
    std::vector<std::u32string> patterns;
    patterns.reserve(atoms.size());
    for (const auto& atom : atoms) {
      require_same_type(*atom.type, *type_);
      patterns.push_back(atom.pattern);
    }
    alphabet_ = Alphabet::for_type(*type_, patterns);
    const auto& slots = type_->slots();
    for (std::size_t i = 0; i < slots.size(); ++i) {
      domains_.push_back(slot_domain_automaton(slots[i].def, alphabet_, i));
    }
    std::map<std::pair<std::size_t, std::u32string>, std::uint32_t> atom_ids;
    for (const auto& atom : atoms) {
      auto [it, inserted] = atom_ids.emplace(std::make_pair(atom.slot, atom.pattern),
                                             static_cast<std::uint32_t>(compiled_.size()));
      if (!inserted) continue;
      Dfa automaton = glob_automaton(atom.pattern, alphabet_, atom.slot);
      auto status = classify_states(automaton, atom.slot);
      compiled_.push_back(CompiledAtom{atom.slot, std::move(automaton), std::move(status)});
    }
    store_ = std::make_unique<ResidualStore>(compiled_);
    start_residual_ = store_->from_formula(formula, atom_ids);
  }

  const AlphabetPtr& alphabet() const { return alphabet_; }
  std::size_t states_built() const { return keys_.size(); }

  /// Interns the start state; returns false when the formula is already false.
  std::optional<std::uint32_t> start() {
    if (start_residual_ == kFalseNode) return std::nullopt;
    return intern(ProductKey{0, domains_.empty() ? 0 : domains_[0].start(), start_residual_}).first;
  }

  bool accepting(std::uint32_t state) const {
    const auto& key = keys_[state];
    return key.slot == domains_.size() && key.residual == kTrueNode;
  }

  /// Symbols to try from `state`, in alphabet order.
  std::size_t symbol_count(std::uint32_t state) const {
    const auto slot = keys_[state].slot;
    if (slot == domains_.size()) return 0;
    return 1 + alphabet_->slot_symbols(slot).size();
  }

  Symbol symbol_at(std::uint32_t state, std::size_t index) const {
    if (index == 0) return Alphabet::kSentinel;
    return alphabet_->slot_symbols(keys_[state].slot)[index - 1];
  }

  /// Successor key on `symbol`, or nullopt when it is certainly rejecting.
  std::optional<ProductKey> successor(std::uint32_t state, Symbol symbol) {
    const ProductKey key = keys_[state];
    const auto& domain = domains_[key.slot];
    if (symbol == Alphabet::kSentinel) {
      if (!domain.accepting(key.domain_state)) return std::nullopt;
      const auto residual = store_->resolve(key.residual, key.slot);
      if (residual == kFalseNode) return std::nullopt;
      const std::uint32_t next_slot = key.slot + 1;
      const StateId next_domain = next_slot < domains_.size() ? domains_[next_slot].start() : 0;
      return ProductKey{next_slot, next_domain, residual};
    }
    const StateId next_domain = domain.next(key.domain_state, symbol);
    if (next_domain == kNoState) return std::nullopt;
    const auto residual = store_->step(key.residual, key.slot, symbol);
    if (residual == kFalseNode) return std::nullopt;
    return ProductKey{key.slot, next_domain, residual};
  }

  /// Returns (id, newly created).
  std::pair<std::uint32_t, bool> intern(const ProductKey& key) {
    auto [it, inserted] = ids_.emplace(key, static_cast<std::uint32_t>(keys_.size()));
    if (inserted) {
      keys_.push_back(key);
      if (keys_.size() > max_states_) throw BudgetExhausted{kReasonStateBudget};
      if (deadline_ && (keys_.size() & 0x3FF) == 0 && Clock::now() > *deadline_) {
        throw BudgetExhausted{kReasonTimeout};
      }
    }
    return {it->second, inserted};
  }

  void check_deadline() const {
    if (deadline_ && Clock::now() > *deadline_) throw BudgetExhausted{kReasonTimeout};
  }

 private:
  PolicyTypePtr type_;
  std::size_t max_states_;
  std::optional<Clock::time_point> deadline_;
  AlphabetPtr alphabet_;
  std::vector<Dfa> domains_;
  std::vector<CompiledAtom> compiled_;
  std::unique_ptr<ResidualStore> store_;
  std::uint32_t start_residual_ = kFalseNode;
  std::vector<ProductKey> keys_;
  std::unordered_map<ProductKey, std::uint32_t, ProductKeyHash> ids_;
};

/// Depth-first search in symbol order; the first accepting state reached is
/// the lexicographically smallest witness because every state already
/// interned when met again has been fully explored without success.
std::optional<std::vector<Symbol>> lexmin_witness(ProductEngine& engine) {
  auto start = engine.start();
  if (!start) return std::nullopt;
  struct Frame {
    std::uint32_t state;
    std::size_t cursor;
    Symbol via;
  };
  std::vector<Frame> stack{{*start, 0, Alphabet::kSentinel}};
  std::size_t steps = 0;
  while (!stack.empty()) {
    if ((++steps & 0xFFF) == 0) engine.check_deadline();
    Frame& top = stack.back();
    if (top.cursor == 0 && engine.accepting(top.state)) {
      std::vector<Symbol> word;
      for (std::size_t i = 1; i < stack.size(); ++i) word.push_back(stack[i].via);
      return word;
    }
    if (top.cursor >= engine.symbol_count(top.state)) {
      stack.pop_back();
      continue;
    }
    const Symbol symbol = engine.symbol_at(top.state, top.cursor);
    const std::uint32_t from = top.state;
    ++top.cursor;
    auto next = engine.successor(from, symbol);
    if (!next) continue;
    auto [id, fresh] = engine.intern(*next);
    if (!fresh) continue;
    stack.push_back(Frame{id, 0, symbol});
  }
  return std::nullopt;
}

}  // namespace

Request request_from_word(const PolicyTypePtr& type, const Alphabet& alphabet,
                          std::span<const Symbol> word) {
  std::vector<std::u32string> values(1);
  for (Symbol symbol : word) {
    if (symbol == Alphabet::kSentinel) {
      values.emplace_back();
    } else {
      values.back().push_back(alphabet.representative(symbol));
    }
  }
  if (!values.back().empty()) {
    throw Error(ErrorCode::kArityMismatch, "witness word does not end with a separator");
  }
  values.pop_back();
  return Request(type, std::move(values));
}

std::optional<std::vector<Symbol>> word_from_request(const Request& request,
                                                     const Alphabet& alphabet) {
  std::vector<Symbol> word;
  for (const auto& value : request.values()) {
    for (char32_t c : value) {
      auto symbol = alphabet.symbol_of(c);
      if (!symbol) return std::nullopt;
      word.push_back(*symbol);
    }
    word.push_back(Alphabet::kSentinel);
  }
  return word;
}

Dfa formula_to_automaton(const Formula& formula, const PolicyTypePtr& type,
                         std::size_t max_states) {
  ProductEngine engine(formula, type, max_states, std::nullopt);
  Dfa dfa(engine.alphabet());
  try {
    auto start = engine.start();
    if (!start) return dfa;
    // Product state ids are dense and assigned in discovery order, so they
    // double as automaton state ids.
    std::deque<std::uint32_t> queue{*start};
    dfa.set_start(dfa.add_state(engine.accepting(*start)));
    while (!queue.empty()) {
      const std::uint32_t state = queue.front();
      queue.pop_front();
      for (std::size_t i = 0; i < engine.symbol_count(state); ++i) {
        const Symbol symbol = engine.symbol_at(state, i);
        auto next = engine.successor(state, symbol);
        if (!next) continue;
        auto [id, fresh] = engine.intern(*next);
        if (fresh) {
          dfa.add_state(engine.accepting(id));
          queue.push_back(id);
        }
        dfa.set_transition(static_cast<StateId>(state), symbol, static_cast<StateId>(id));
      }
    }
  } catch (const BudgetExhausted&) {
    throw Error(ErrorCode::kStateBudgetExceeded,
                "automaton construction exceeded " + std::to_string(max_states) + " states");
  }
  return dfa.trimmed();
}

Verdict find_witness(const Formula& formula, const PolicyTypePtr& type, const Budget& budget) {
  const auto began = Clock::now();
  Verdict verdict;
  std::optional<ProductEngine> engine;
  try {
    engine.emplace(formula, type, budget.max_states, began + budget.timeout);
    auto word = lexmin_witness(*engine);
    if (word) {
      verdict.kind = VerdictKind::kInvalid;
      verdict.counterexample = request_from_word(type, *engine->alphabet(), *word);
    } else {
      verdict.kind = VerdictKind::kValid;
    }
  } catch (const BudgetExhausted& exhausted) {
    verdict.kind = VerdictKind::kUnknown;
    verdict.reason = std::string(exhausted.reason);
  }
  verdict.stats.states_built = engine ? engine->states_built() : 0;
  verdict.stats.elapsed = Clock::now() - began;
  return verdict;
}

Verdict check_implication(const PolicySet& p, const PolicySet& q, const Budget& budget) {
  require_same_type(*p.type(), *q.type());
  const auto query = Formula::make_and(
      {encode_policy_set(p), Formula::make_not(encode_policy_set(q))});
  return find_witness(query, p.type(), budget);
}

// ---------------------------------------------------------------------------
// Brute force

namespace {

void words_in_order(const std::u32string& chars, std::size_t max_len, std::u32string& prefix,
                    std::vector<std::u32string>& out) {
  out.push_back(prefix);
  if (prefix.size() == max_len) return;
  for (char32_t c : chars) {
    prefix.push_back(c);
    words_in_order(chars, max_len, prefix, out);
    prefix.pop_back();
  }
}

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    return std::numeric_limits<std::size_t>::max();
  }
  return a * b;
}

std::size_t slot_domain_size(const FieldDef& def) {
  if (const auto* s = std::get_if<StringComponentDef>(&def)) {
    const std::size_t k = s->charset().value_chars().size();
    std::size_t total = 0;
    std::size_t power = 1;
    for (std::size_t len = 0; len <= s->max_len(); ++len) {
      total += power;
      if (total < power) return std::numeric_limits<std::size_t>::max();
      power = saturating_mul(power, k);
    }
    return total;
  }
  return std::get<StringEnumComponentDef>(def).values().size();
}

}  // namespace

std::size_t request_space_size(const PolicyType& type) {
  std::size_t total = 1;
  for (const auto& slot : type.slots()) total = saturating_mul(total, slot_domain_size(slot.def));
  return total;
}

Verdict brute_force_implication(const PolicySet& p, const PolicySet& q,
                                std::size_t max_requests) {
  require_same_type(*p.type(), *q.type());
  const auto began = Clock::now();
  const auto& type = p.type();
  const std::size_t space = request_space_size(*type);
  if (space > max_requests) {
    throw Error(ErrorCode::kDomainTooLarge, "request space of \"" + type->name() + "\" has " +
                                                (space == std::numeric_limits<std::size_t>::max()
                                                     ? std::string("too many")
                                                     : std::to_string(space)) +
                                                " points");
  }
  std::vector<std::vector<std::u32string>> domains;
  for (const auto& slot : type->slots()) {
    std::vector<std::u32string> values;
    if (const auto* s = std::get_if<StringComponentDef>(&slot.def)) {
      std::u32string prefix;
      words_in_order(s->charset().value_chars(), s->max_len(), prefix, values);
    } else {
      values = std::get<StringEnumComponentDef>(slot.def).values();
      std::sort(values.begin(), values.end());
    }
    domains.push_back(std::move(values));
  }

  Verdict verdict;
  verdict.kind = VerdictKind::kValid;
  std::vector<std::size_t> odometer(domains.size(), 0);
  std::size_t visited = 0;
  while (true) {
    std::vector<std::u32string> values;
    values.reserve(domains.size());
    for (std::size_t i = 0; i < domains.size(); ++i) values.push_back(domains[i][odometer[i]]);
    Request request(type, std::move(values));
    ++visited;
    if (permitted(p, request) && !permitted(q, request)) {
      verdict.kind = VerdictKind::kInvalid;
      verdict.counterexample = std::move(request);
      break;
    }
    std::size_t i = domains.size();
    while (i > 0) {
      --i;
      if (++odometer[i] < domains[i].size()) break;
      odometer[i] = 0;
      if (i == 0) {
        i = domains.size() + 1;
        break;
      }
    }
    if (i == domains.size() + 1 || domains.empty()) break;
  }
  verdict.stats.states_built = visited;
  verdict.stats.elapsed = Clock::now() - began;
  return verdict;
}

}  // namespace permlogic
