#include "permlogic/formula.hpp"

#include "permlogic/error.hpp"
#include "permlogic/utf8.hpp"

namespace permlogic {

Formula Formula::make_true() {
  static const Formula kTrue(std::make_shared<const Node>(Node{Kind::kTrue, {}, {}}));
  return kTrue;
}

Formula Formula::make_false() {
  static const Formula kFalse(std::make_shared<const Node>(Node{Kind::kFalse, {}, {}}));
  return kFalse;
}

Formula Formula::make_atom(Atom atom) {
  validate_pattern(atom.def(), atom.pattern);
  return Formula(std::make_shared<const Node>(Node{Kind::kAtom, std::move(atom), {}}));
}

Formula Formula::make_not(Formula child) {
  return Formula(std::make_shared<const Node>(Node{Kind::kNot, {}, {std::move(child)}}));
}

Formula Formula::make_and(std::vector<Formula> children) {
  if (children.empty()) throw Error(ErrorCode::kInvalidDefinition, "empty conjunction");
  return Formula(std::make_shared<const Node>(Node{Kind::kAnd, {}, std::move(children)}));
}

Formula Formula::make_or(std::vector<Formula> children) {
  if (children.empty()) throw Error(ErrorCode::kInvalidDefinition, "empty disjunction");
  return Formula(std::make_shared<const Node>(Node{Kind::kOr, {}, std::move(children)}));
}

bool Formula::operator==(const Formula& other) const {
  if (node_ == other.node_) return true;
  if (kind() != other.kind()) return false;
  if (kind() == Kind::kAtom) return atom() == other.atom();
  return children() == other.children();
}

Formula encode_policy(const Policy& policy) {
  const auto& type = policy.type();
  std::vector<Formula> per_component;
  std::size_t slot = 0;
  auto atom_for = [&](std::size_t index) {
    const auto& s = type->slots()[index];
    return Formula::make_atom(
        Atom{type, index, s.path, policy.patterns()[index], strategy_of(s.def)});
  };
  for (const auto& component : type->components()) {
    if (const auto* tuple = std::get_if<TupleComponentDef>(&component)) {
      std::vector<Formula> fields;
      for (std::size_t k = 0; k < tuple->fields().size(); ++k) fields.push_back(atom_for(slot++));
      per_component.push_back(Formula::make_and(std::move(fields)));
    } else {
      per_component.push_back(atom_for(slot++));
    }
  }
  if (per_component.size() == 1) return per_component.front();
  return Formula::make_and(std::move(per_component));
}

Formula encode_policy_set(const PolicySet& policies) {
  std::vector<Formula> allow;
  std::vector<Formula> deny;
  for (const auto& policy : policies.policies()) {
    (policy.decision() == Decision::kAllow ? allow : deny).push_back(encode_policy(policy));
  }
  if (allow.empty()) return Formula::make_false();
  auto allowed = Formula::make_or(std::move(allow));
  if (deny.empty()) return allowed;
  return Formula::make_and({allowed, Formula::make_not(Formula::make_or(std::move(deny)))});
}

bool eval(const Formula& formula, const Request& request) {
  switch (formula.kind()) {
    case Formula::Kind::kTrue:
      return true;
    case Formula::Kind::kFalse:
      return false;
    case Formula::Kind::kAtom: {
      const auto& atom = formula.atom();
      const auto& rtype = *request.type();
      std::size_t index = atom.slot;
      if (atom.type.get() != &rtype) {
        index = rtype.slot_index(atom.path);
        require_same_type(*atom.type, rtype);
      }
      return match(atom.def(), atom.pattern, request.values()[index]);
    }
    case Formula::Kind::kNot:
      return !eval(formula.children().front(), request);
    case Formula::Kind::kAnd:
      for (const auto& child : formula.children()) {
        if (!eval(child, request)) return false;
      }
      return true;
    case Formula::Kind::kOr:
      for (const auto& child : formula.children()) {
        if (eval(child, request)) return true;
      }
      return false;
  }
  return false;
}

namespace {

void render(const Formula& formula, std::string& out) {
  switch (formula.kind()) {
    case Formula::Kind::kTrue:
      out += "true";
      return;
    case Formula::Kind::kFalse:
      out += "false";
      return;
    case Formula::Kind::kAtom: {
      const auto& atom = formula.atom();
      out += atom.strategy == MatchingStrategy::kExact ? "(= " : "(glob ";
      out += atom.path;
      out += " \"";
      for (char c : utf8::encode(atom.pattern)) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      out += "\")";
      return;
    }
    case Formula::Kind::kNot:
      out += "(not ";
      render(formula.children().front(), out);
      out += ')';
      return;
    case Formula::Kind::kAnd:
    case Formula::Kind::kOr:
      out += formula.kind() == Formula::Kind::kAnd ? "(and" : "(or";
      for (const auto& child : formula.children()) {
        out += ' ';
        render(child, out);
      }
      out += ')';
      return;
  }
}

void collect(const Formula& formula, std::vector<Atom>& out) {
  if (formula.kind() == Formula::Kind::kAtom) {
    out.push_back(formula.atom());
    return;
  }
  for (const auto& child : formula.children()) collect(child, out);
}

}  // namespace

std::string to_sexpr(const Formula& formula) {
  std::string out;
  render(formula, out);
  return out;
}

std::vector<Atom> collect_atoms(const Formula& formula) {
  std::vector<Atom> out;
  collect(formula, out);
  return out;
}

}  // namespace permlogic
