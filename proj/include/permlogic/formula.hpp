#ifndef PERMLOGIC_FORMULA_HPP_
#define PERMLOGIC_FORMULA_HPP_

// Solver-independent constraint IR.  A policy compiles to a conjunction of
// "slot matches pattern" atoms; a policy set to
//   (OR over allow policies) AND NOT (OR over deny policies).

#include <memory>
#include <string>
#include <vector>

#include "permlogic/policy.hpp"

namespace permlogic {

struct Atom {
  PolicyTypePtr type;
  std::size_t slot = 0;
  std::string path;
  std::u32string pattern;
  MatchingStrategy strategy = MatchingStrategy::kExact;

  const FieldDef& def() const { return type->slots()[slot].def; }

  bool operator==(const Atom& other) const {
    return slot == other.slot && path == other.path && pattern == other.pattern &&
           strategy == other.strategy;
  }
};

/// Immutable formula tree with value semantics; copies share nodes.
class Formula {
 public:
  enum class Kind { kTrue, kFalse, kAtom, kNot, kAnd, kOr };

  static Formula make_true();
  static Formula make_false();
  static Formula make_atom(Atom atom);
  static Formula make_not(Formula child);
  /// And/Or require at least one child.
  static Formula make_and(std::vector<Formula> children);
  static Formula make_or(std::vector<Formula> children);

  Kind kind() const { return node_->kind; }
  const Atom& atom() const { return node_->atom; }
  const std::vector<Formula>& children() const { return node_->children; }

  bool operator==(const Formula& other) const;

 private:
  struct Node {
    Kind kind;
    Atom atom;
    std::vector<Formula> children;
  };

  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

Formula encode_policy(const Policy& policy);
Formula encode_policy_set(const PolicySet& policies);

/// Atom truth is match() of the atom's pattern against the request value at
/// the atom's component path (kUnknownComponentPath if the request lacks it).
bool eval(const Formula& formula, const Request& request);

/// Debug rendering, e.g. (and (= action "GET") (glob path "/sys1*")).
std::string to_sexpr(const Formula& formula);

/// Atoms in depth-first, left-to-right order (duplicates kept).
std::vector<Atom> collect_atoms(const Formula& formula);

}  // namespace permlogic

#endif  // PERMLOGIC_FORMULA_HPP_
