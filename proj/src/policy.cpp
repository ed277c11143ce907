#include "permlogic/policy.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "permlogic/error.hpp"
#include "permlogic/utf8.hpp"

namespace permlogic {

namespace {

std::string describe(std::u32string_view text) { return "\"" + utf8::encode(text) + "\""; }

void require_identifier(const std::string& name, std::string_view what) {
  if (name.empty()) {
    throw Error(ErrorCode::kInvalidDefinition, std::string(what) + " name must be non-empty");
  }
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-';
    if (!ok) {
      throw Error(ErrorCode::kInvalidDefinition,
                  std::string(what) + " name \"" + name + "\" is not an identifier");
    }
  }
}

bool has_wildcard(std::u32string_view text) {
  return text.find(kWildcardChar) != std::u32string_view::npos;
}

}  // namespace

std::string_view to_string(MatchingStrategy strategy) {
  return strategy == MatchingStrategy::kExact ? "exact" : "wildcard";
}

std::string_view to_string(Decision decision) {
  return decision == Decision::kAllow ? "allow" : "deny";
}

Decision parse_decision(std::string_view text) {
  if (text == "allow") return Decision::kAllow;
  if (text == "deny") return Decision::kDeny;
  throw Error(ErrorCode::kInvalidDecision, "decision must be \"allow\" or \"deny\", got \"" +
                                               std::string(text) + "\"");
}

// ---------------------------------------------------------------------------
// CharSet

CharSet::CharSet(std::u32string_view chars) : chars_(chars) {
  if (chars_.empty()) throw Error(ErrorCode::kInvalidDefinition, "charset must be non-empty");
  std::sort(chars_.begin(), chars_.end());
  if (std::adjacent_find(chars_.begin(), chars_.end()) != chars_.end()) {
    throw Error(ErrorCode::kInvalidDefinition, "charset contains duplicate characters");
  }
  if (chars_.size() == 1 && chars_[0] == kWildcardChar) {
    throw Error(ErrorCode::kInvalidDefinition, "charset has no value characters besides '*'");
  }
}

CharSet CharSet::from_utf8(std::string_view chars) { return CharSet(utf8::decode(chars)); }

bool CharSet::contains(char32_t c) const {
  return std::binary_search(chars_.begin(), chars_.end(), c);
}

std::u32string CharSet::value_chars() const {
  std::u32string out;
  for (char32_t c : chars_) {
    if (c != kWildcardChar) out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Component definitions

StringComponentDef::StringComponentDef(std::string name, CharSet charset, std::size_t max_len,
                                       MatchingStrategy strategy)
    : name_(std::move(name)), charset_(std::move(charset)), max_len_(max_len), strategy_(strategy) {
  require_identifier(name_, "component");
  if (max_len_ < 1) throw Error(ErrorCode::kInvalidDefinition, "max_len must be >= 1");
}

StringEnumComponentDef::StringEnumComponentDef(std::string name,
                                               const std::vector<std::string>& values,
                                               MatchingStrategy strategy)
    : name_(std::move(name)), strategy_(strategy) {
  require_identifier(name_, "component");
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidDefinition, "enum \"" + name_ + "\" has no values");
  }
  std::set<char32_t> chars;
  for (const auto& raw : values) {
    auto value = utf8::decode(raw);
    if (value.empty()) {
      throw Error(ErrorCode::kInvalidDefinition, "enum \"" + name_ + "\" has an empty value");
    }
    if (value == U"*") {
      throw Error(ErrorCode::kInvalidDefinition, "enum \"" + name_ + "\" may not contain \"*\"");
    }
    chars.insert(value.begin(), value.end());
    values_.push_back(std::move(value));
  }
  sorted_values_ = values_;
  std::sort(sorted_values_.begin(), sorted_values_.end());
  if (std::adjacent_find(sorted_values_.begin(), sorted_values_.end()) != sorted_values_.end()) {
    throw Error(ErrorCode::kInvalidDefinition, "enum \"" + name_ + "\" has duplicate values");
  }
  value_chars_.assign(chars.begin(), chars.end());
}

bool StringEnumComponentDef::is_member(std::u32string_view value) const {
  return std::binary_search(sorted_values_.begin(), sorted_values_.end(), value);
}

TupleComponentDef::TupleComponentDef(std::string name, std::vector<FieldDef> fields)
    : name_(std::move(name)), fields_(std::move(fields)) {
  require_identifier(name_, "tuple");
  if (fields_.empty()) {
    throw Error(ErrorCode::kInvalidDefinition, "tuple \"" + name_ + "\" has no fields");
  }
  std::set<std::string> seen;
  for (const auto& field : fields_) {
    if (!seen.insert(field_name(field)).second) {
      throw Error(ErrorCode::kInvalidDefinition,
                  "tuple \"" + name_ + "\" repeats field \"" + field_name(field) + "\"");
    }
  }
}

const std::string& field_name(const FieldDef& def) {
  return std::visit([](const auto& d) -> const std::string& { return d.name(); }, def);
}

const std::string& component_name(const ComponentDef& def) {
  return std::visit([](const auto& d) -> const std::string& { return d.name(); }, def);
}

MatchingStrategy strategy_of(const FieldDef& def) {
  return std::visit([](const auto& d) { return d.strategy(); }, def);
}

// ---------------------------------------------------------------------------
// PolicyType

PolicyType::PolicyType(std::string name, std::vector<ComponentDef> components)
    : name_(std::move(name)), components_(std::move(components)) {
  require_identifier(name_, "policy type");
  if (components_.empty()) {
    throw Error(ErrorCode::kInvalidDefinition, "policy type \"" + name_ + "\" has no components");
  }
  std::set<std::string> seen;
  for (const auto& component : components_) {
    const auto& cname = component_name(component);
    if (cname == "decision") {
      throw Error(ErrorCode::kInvalidDefinition, "\"decision\" is a reserved component name");
    }
    if (!seen.insert(cname).second) {
      throw Error(ErrorCode::kInvalidDefinition, "duplicate component name \"" + cname + "\"");
    }
    if (const auto* tuple = std::get_if<TupleComponentDef>(&component)) {
      for (const auto& field : tuple->fields()) {
        slots_.push_back(Slot{cname + "." + field_name(field), field});
      }
    } else if (const auto* s = std::get_if<StringComponentDef>(&component)) {
      slots_.push_back(Slot{cname, *s});
    } else {
      slots_.push_back(Slot{cname, std::get<StringEnumComponentDef>(component)});
    }
  }
}

std::size_t PolicyType::slot_index(std::string_view path) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].path == path) return i;
  }
  throw Error(ErrorCode::kUnknownComponentPath,
              "policy type \"" + name_ + "\" has no component \"" + std::string(path) + "\"");
}

void require_same_type(const PolicyType& a, const PolicyType& b) {
  if (&a != &b && !(a == b)) {
    throw Error(ErrorCode::kTypeMismatch,
                "policy type \"" + a.name() + "\" does not match \"" + b.name() + "\"");
  }
}

// ---------------------------------------------------------------------------
// Pattern and value validation

void validate_pattern(const FieldDef& def, std::u32string_view pattern) {
  if (const auto* s = std::get_if<StringComponentDef>(&def)) {
    if (s->strategy() == MatchingStrategy::kExact && has_wildcard(pattern)) {
      throw Error(ErrorCode::kWildcardNotAllowed,
                  "exact component \"" + s->name() + "\" given pattern " + describe(pattern));
    }
    if (pattern.size() > s->max_len()) {
      throw Error(ErrorCode::kPatternTooLong, "pattern " + describe(pattern) + " exceeds max_len " +
                                                  std::to_string(s->max_len()) + " of \"" +
                                                  s->name() + "\"");
    }
    for (char32_t c : pattern) {
      if (c == kWildcardChar) continue;
      if (!s->charset().contains(c)) {
        throw Error(ErrorCode::kCharOutsideCharset, "pattern " + describe(pattern) +
                                                        " uses a character outside the charset of \"" +
                                                        s->name() + "\"");
      }
    }
    return;
  }
  const auto& e = std::get<StringEnumComponentDef>(def);
  if (e.strategy() == MatchingStrategy::kExact) {
    if (has_wildcard(pattern)) {
      throw Error(ErrorCode::kWildcardNotAllowed,
                  "exact component \"" + e.name() + "\" given pattern " + describe(pattern));
    }
    if (!e.is_member(pattern)) {
      throw Error(ErrorCode::kEnumValueUnknown,
                  describe(pattern) + " is not a value of \"" + e.name() + "\"");
    }
    return;
  }
  const auto& chars = e.value_chars();
  for (char32_t c : pattern) {
    if (c == kWildcardChar) continue;
    if (!std::binary_search(chars.begin(), chars.end(), c)) {
      throw Error(ErrorCode::kCharOutsideCharset,
                  "pattern " + describe(pattern) + " uses a character absent from every value of \"" +
                      e.name() + "\"");
    }
  }
}

void validate_pattern(const FieldDef& def, std::string_view pattern_utf8) {
  validate_pattern(def, utf8::decode(pattern_utf8));
}

void validate_value(const FieldDef& def, std::u32string_view value) {
  if (const auto* s = std::get_if<StringComponentDef>(&def)) {
    if (value.size() > s->max_len()) {
      throw Error(ErrorCode::kPatternTooLong, "value " + describe(value) + " exceeds max_len of \"" +
                                                  s->name() + "\"");
    }
    for (char32_t c : value) {
      if (c == kWildcardChar) {
        throw Error(ErrorCode::kWildcardNotAllowed, "concrete value " + describe(value) +
                                                        " contains '*'");
      }
      if (!s->charset().contains(c)) {
        throw Error(ErrorCode::kCharOutsideCharset, "value " + describe(value) +
                                                        " uses a character outside the charset of \"" +
                                                        s->name() + "\"");
      }
    }
    return;
  }
  const auto& e = std::get<StringEnumComponentDef>(def);
  if (!e.is_member(value)) {
    throw Error(ErrorCode::kEnumValueUnknown,
                describe(value) + " is not a value of \"" + e.name() + "\"");
  }
}

// ---------------------------------------------------------------------------
// Matching

bool glob_match(std::u32string_view pattern, std::u32string_view value) {
  // Backtracking to the most recent star is sufficient for `*`-only globs.
  std::size_t p = 0;
  std::size_t v = 0;
  std::size_t star_p = std::u32string_view::npos;
  std::size_t star_v = 0;
  while (v < value.size()) {
    if (p < pattern.size() && pattern[p] == kWildcardChar) {
      star_p = p++;
      star_v = v;
    } else if (p < pattern.size() && pattern[p] == value[v]) {
      ++p;
      ++v;
    } else if (star_p != std::u32string_view::npos) {
      p = star_p + 1;
      v = ++star_v;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == kWildcardChar) ++p;
  return p == pattern.size();
}

namespace {

bool match_unchecked(const FieldDef& def, std::u32string_view pattern, std::u32string_view value) {
  if (strategy_of(def) == MatchingStrategy::kExact) return pattern == value;
  return glob_match(pattern, value);
}

}  // namespace

bool match(const FieldDef& def, std::u32string_view pattern, std::u32string_view value) {
  validate_pattern(def, pattern);
  validate_value(def, value);
  return match_unchecked(def, pattern, value);
}

bool match(const FieldDef& def, std::string_view pattern_utf8, std::string_view value_utf8) {
  return match(def, utf8::decode(pattern_utf8), utf8::decode(value_utf8));
}

// ---------------------------------------------------------------------------
// Policy, PolicySet, Request

Policy::Policy(PolicyTypePtr type, std::vector<std::u32string> patterns, Decision decision)
    : type_(std::move(type)), patterns_(std::move(patterns)), decision_(decision) {
  if (!type_) throw Error(ErrorCode::kInvalidDefinition, "policy without a policy type");
  const auto& slots = type_->slots();
  if (patterns_.size() != slots.size()) {
    throw Error(ErrorCode::kArityMismatch,
                "policy of type \"" + type_->name() + "\" needs " + std::to_string(slots.size()) +
                    " values, got " + std::to_string(patterns_.size()));
  }
  for (std::size_t i = 0; i < slots.size(); ++i) validate_pattern(slots[i].def, patterns_[i]);
}

namespace {

std::vector<std::u32string> decode_all(const std::vector<std::string>& items) {
  std::vector<std::u32string> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(utf8::decode(item));
  return out;
}

std::vector<std::string> encode_all(const std::vector<std::u32string>& items) {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(utf8::encode(item));
  return out;
}

}  // namespace

Policy::Policy(PolicyTypePtr type, const std::vector<std::string>& patterns, Decision decision)
    : Policy(std::move(type), decode_all(patterns), decision) {}

Policy::Policy(PolicyTypePtr type, const std::vector<std::string>& patterns,
               std::string_view decision)
    : Policy(std::move(type), decode_all(patterns), parse_decision(decision)) {}

std::vector<std::string> Policy::patterns_utf8() const { return encode_all(patterns_); }

PolicySet::PolicySet(PolicyTypePtr type, std::vector<Policy> policies) : type_(std::move(type)) {
  policies_.reserve(policies.size());
  for (auto& policy : policies) add(std::move(policy));
}

void PolicySet::add(Policy policy) {
  require_same_type(*type_, *policy.type());
  policies_.push_back(std::move(policy));
}

Request::Request(PolicyTypePtr type, std::vector<std::u32string> values)
    : type_(std::move(type)), values_(std::move(values)) {
  const auto& slots = type_->slots();
  if (values_.size() != slots.size()) {
    throw Error(ErrorCode::kArityMismatch,
                "request of type \"" + type_->name() + "\" needs " + std::to_string(slots.size()) +
                    " values, got " + std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < slots.size(); ++i) validate_value(slots[i].def, values_[i]);
}

Request::Request(PolicyTypePtr type, const std::vector<std::string>& values)
    : Request(std::move(type), decode_all(values)) {}

std::vector<std::string> Request::values_utf8() const { return encode_all(values_); }

bool policy_matches(const Policy& policy, const Request& request) {
  const auto& slots = policy.type()->slots();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!match_unchecked(slots[i].def, policy.patterns()[i], request.values()[i])) return false;
  }
  return true;
}

bool permitted(const PolicySet& policies, const Request& request) {
  require_same_type(*policies.type(), *request.type());
  bool allowed = false;
  for (const auto& policy : policies.policies()) {
    if (policy.decision() == Decision::kAllow && !allowed) {
      allowed = policy_matches(policy, request);
    }
  }
  if (!allowed) return false;
  for (const auto& policy : policies.policies()) {
    if (policy.decision() == Decision::kDeny && policy_matches(policy, request)) return false;
  }
  return true;
}

}  // namespace permlogic
