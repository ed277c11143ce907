#ifndef PERMLOGIC_POLICY_HPP_
#define PERMLOGIC_POLICY_HPP_

// Component / policy data model and the reference (direct) semantics of
// matching and permission.  Every string handled here is a sequence of
// unicode scalar values; the UTF-8 overloads decode at the boundary.

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace permlogic {

inline constexpr char32_t kWildcardChar = U'*';

enum class MatchingStrategy { kExact, kWildcard };

std::string_view to_string(MatchingStrategy strategy);

/// Sorted, duplicate-free alphabet of a String component.  A member `*` stays
/// reserved: it may appear in wildcard patterns but never in concrete values.
class CharSet {
 public:
  explicit CharSet(std::u32string_view chars);
  static CharSet from_utf8(std::string_view chars);

  bool contains(char32_t c) const;
  bool contains_wildcard_char() const { return contains(kWildcardChar); }

  const std::u32string& chars() const { return chars_; }
  /// Members usable in concrete values (everything except `*`).
  std::u32string value_chars() const;

  bool operator==(const CharSet&) const = default;

 private:
  std::u32string chars_;
};

class StringComponentDef {
 public:
  StringComponentDef(std::string name, CharSet charset, std::size_t max_len,
                     MatchingStrategy strategy);

  const std::string& name() const { return name_; }
  const CharSet& charset() const { return charset_; }
  std::size_t max_len() const { return max_len_; }
  MatchingStrategy strategy() const { return strategy_; }

  bool operator==(const StringComponentDef&) const = default;

 private:
  std::string name_;
  CharSet charset_;
  std::size_t max_len_;
  MatchingStrategy strategy_;
};

class StringEnumComponentDef {
 public:
  /// Values keep their declaration order; duplicates, empty strings and the
  /// literal `*` are rejected.
  StringEnumComponentDef(std::string name, const std::vector<std::string>& values,
                         MatchingStrategy strategy);

  const std::string& name() const { return name_; }
  const std::vector<std::u32string>& values() const { return values_; }
  MatchingStrategy strategy() const { return strategy_; }
  bool is_member(std::u32string_view value) const;
  /// Distinct characters occurring in any value, sorted.
  const std::u32string& value_chars() const { return value_chars_; }

  bool operator==(const StringEnumComponentDef& other) const {
    return name_ == other.name_ && values_ == other.values_ && strategy_ == other.strategy_;
  }

 private:
  std::string name_;
  std::vector<std::u32string> values_;
  std::vector<std::u32string> sorted_values_;
  std::u32string value_chars_;
  MatchingStrategy strategy_;
};

using FieldDef = std::variant<StringComponentDef, StringEnumComponentDef>;

class TupleComponentDef {
 public:
  TupleComponentDef(std::string name, std::vector<FieldDef> fields);

  const std::string& name() const { return name_; }
  const std::vector<FieldDef>& fields() const { return fields_; }

  bool operator==(const TupleComponentDef&) const = default;

 private:
  std::string name_;
  std::vector<FieldDef> fields_;
};

using ComponentDef = std::variant<StringComponentDef, StringEnumComponentDef, TupleComponentDef>;

const std::string& field_name(const FieldDef& def);
const std::string& component_name(const ComponentDef& def);
MatchingStrategy strategy_of(const FieldDef& def);

/// One flattened matchable position of a policy type: a top-level scalar
/// component ("action") or a tuple field ("principal.username").
struct Slot {
  std::string path;
  FieldDef def;

  bool operator==(const Slot&) const = default;
};

/// Schema of a policy.  The allow/deny decision component is implicit and
/// always last; it is not listed among components() or slots().
class PolicyType {
 public:
  PolicyType(std::string name, std::vector<ComponentDef> components);

  const std::string& name() const { return name_; }
  const std::vector<ComponentDef>& components() const { return components_; }
  const std::vector<Slot>& slots() const { return slots_; }
  std::size_t arity() const { return slots_.size(); }
  /// Throws kUnknownComponentPath.
  std::size_t slot_index(std::string_view path) const;

  bool operator==(const PolicyType& other) const {
    return name_ == other.name_ && components_ == other.components_;
  }

 private:
  std::string name_;
  std::vector<ComponentDef> components_;
  std::vector<Slot> slots_;
};

using PolicyTypePtr = std::shared_ptr<const PolicyType>;

enum class Decision { kAllow, kDeny };

std::string_view to_string(Decision decision);
/// Accepts exactly "allow" or "deny"; anything else throws kInvalidDecision.
Decision parse_decision(std::string_view text);

class Policy {
 public:
  Policy(PolicyTypePtr type, std::vector<std::u32string> patterns, Decision decision);
  Policy(PolicyTypePtr type, const std::vector<std::string>& patterns, Decision decision);
  Policy(PolicyTypePtr type, const std::vector<std::string>& patterns, std::string_view decision);

  const PolicyTypePtr& type() const { return type_; }
  const std::vector<std::u32string>& patterns() const { return patterns_; }
  std::vector<std::string> patterns_utf8() const;
  Decision decision() const { return decision_; }

  bool operator==(const Policy& other) const {
    return *type_ == *other.type_ && patterns_ == other.patterns_ && decision_ == other.decision_;
  }

 private:
  PolicyTypePtr type_;
  std::vector<std::u32string> patterns_;
  Decision decision_;
};

class PolicySet {
 public:
  explicit PolicySet(PolicyTypePtr type) : type_(std::move(type)) {}
  PolicySet(PolicyTypePtr type, std::vector<Policy> policies);

  const PolicyTypePtr& type() const { return type_; }
  const std::vector<Policy>& policies() const { return policies_; }
  bool empty() const { return policies_.empty(); }
  std::size_t size() const { return policies_.size(); }

  /// Throws kTypeMismatch when the policy belongs to another type.
  void add(Policy policy);

 private:
  PolicyTypePtr type_;
  std::vector<Policy> policies_;
};

/// A concrete point of the request space: one wildcard-free value per slot.
class Request {
 public:
  Request(PolicyTypePtr type, std::vector<std::u32string> values);
  Request(PolicyTypePtr type, const std::vector<std::string>& values);

  const PolicyTypePtr& type() const { return type_; }
  const std::vector<std::u32string>& values() const { return values_; }
  std::vector<std::string> values_utf8() const;

  bool operator==(const Request& other) const {
    return *type_ == *other.type_ && values_ == other.values_;
  }

 private:
  PolicyTypePtr type_;
  std::vector<std::u32string> values_;
};

/// Throws the matching pattern error when `pattern` is not well formed.
void validate_pattern(const FieldDef& def, std::u32string_view pattern);
void validate_pattern(const FieldDef& def, std::string_view pattern_utf8);

/// Throws when `value` is not a legal concrete value of the field.
void validate_value(const FieldDef& def, std::u32string_view value);

/// Glob matching where each `*` absorbs any (possibly empty) run of
/// non-wildcard characters and every other character matches itself.
bool glob_match(std::u32string_view pattern, std::u32string_view value);

bool match(const FieldDef& def, std::u32string_view pattern, std::u32string_view value);
bool match(const FieldDef& def, std::string_view pattern_utf8, std::string_view value_utf8);

bool policy_matches(const Policy& policy, const Request& request);

/// Direct evaluation: some allow policy matches and no deny policy matches.
/// Throws kTypeMismatch if the request belongs to another policy type.
bool permitted(const PolicySet& policies, const Request& request);

void require_same_type(const PolicyType& a, const PolicyType& b);

}  // namespace permlogic

#endif  // PERMLOGIC_POLICY_HPP_
