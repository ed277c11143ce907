#ifndef PERMLOGIC_TESTS_SUPPORT_HPP_
#define PERMLOGIC_TESTS_SUPPORT_HPP_

// Test-only oracles and generators.  Nothing here calls into the automata or
// the glob matcher under test.

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "permlogic/policy.hpp"

namespace permlogic::testing {

/// Dynamic-programming glob matcher over a (|p|+1) x (|v|+1) table.
inline bool dp_glob(std::u32string_view p, std::u32string_view v) {
  const std::size_t n = p.size();
  const std::size_t m = v.size();
  std::vector<std::vector<char>> t(n + 1, std::vector<char>(m + 1, 0));
  t[n][m] = 1;
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m + 1; j-- > 0;) {
      if (p[i] == U'*') {
        t[i][j] = t[i + 1][j] || (j < m && v[j] != U'*' && t[i][j + 1]);
      } else {
        t[i][j] = j < m && p[i] == v[j] && t[i + 1][j + 1];
      }
    }
  }
  return t[0][0] != 0;
}

/// All words over `chars` of length <= max_len.
inline std::vector<std::u32string> all_words(const std::u32string& chars, std::size_t max_len) {
  std::vector<std::u32string> out{U""};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (char32_t c : chars) out.push_back(out[i] + c);
    }
    begin = end;
  }
  return out;
}

inline std::shared_ptr<const PolicyType> single_string_type(const std::string& charset,
                                                            std::size_t max_len,
                                                            MatchingStrategy strategy =
                                                                MatchingStrategy::kWildcard) {
  return std::make_shared<const PolicyType>(
      "single", std::vector<ComponentDef>{
                    StringComponentDef("path", CharSet::from_utf8(charset), max_len, strategy)});
}

/// Reference semantics written out independently of permitted().
inline bool reference_permitted(const PolicySet& ps, const std::vector<std::u32string>& values) {
  auto matches = [&](const Policy& policy) {
    const auto& slots = ps.type()->slots();
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& pattern = policy.patterns()[i];
      const bool ok = strategy_of(slots[i].def) == MatchingStrategy::kExact
                          ? pattern == values[i]
                          : dp_glob(pattern, values[i]);
      if (!ok) return false;
    }
    return true;
  };
  bool any_allow = false;
  for (const auto& policy : ps.policies()) {
    if (policy.decision() == Decision::kDeny && matches(policy)) return false;
    if (policy.decision() == Decision::kAllow && matches(policy)) any_allow = true;
  }
  return any_allow;
}

/// Small random instances: charsets <= 3 symbols, max_len <= 3.
class InstanceGenerator {
 public:
  explicit InstanceGenerator(std::uint32_t seed) : rng_(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  std::shared_ptr<const PolicyType> type(std::size_t max_slots = 2) {
    static const std::u32string kPool = U"abc";
    std::vector<ComponentDef> components;
    const int count = uniform(1, static_cast<int>(max_slots));
    for (int i = 0; i < count; ++i) {
      const std::string name = "c" + std::to_string(i);
      const int kind = uniform(0, 5);
      if (kind == 0) {
        std::vector<std::string> values{"x", "xy", "yz"};
        values.resize(static_cast<std::size_t>(uniform(1, 3)));
        components.emplace_back(StringEnumComponentDef(
            name, values, uniform(0, 1) ? MatchingStrategy::kWildcard : MatchingStrategy::kExact));
        continue;
      }
      const auto chars = kPool.substr(0, static_cast<std::size_t>(uniform(1, 3)));
      const auto strategy = kind == 1 ? MatchingStrategy::kExact : MatchingStrategy::kWildcard;
      StringComponentDef def(name, CharSet(chars), static_cast<std::size_t>(uniform(1, 3)), strategy);
      if (kind == 2) {
        components.emplace_back(TupleComponentDef(name, {def}));
      } else {
        components.emplace_back(def);
      }
    }
    return std::make_shared<const PolicyType>("random", std::move(components));
  }

  std::u32string pattern(const FieldDef& def) {
    if (const auto* e = std::get_if<StringEnumComponentDef>(&def)) {
      if (e->strategy() == MatchingStrategy::kExact || uniform(0, 2) == 0) {
        return e->values()[static_cast<std::size_t>(uniform(0, static_cast<int>(e->values().size()) - 1))];
      }
      static const std::u32string kGlobs[] = {U"*", U"x*", U"*z", U"x", U"*y*"};
      const auto& glob = kGlobs[uniform(0, 4)];
      for (char32_t c : glob) {
        if (c != U'*' && e->value_chars().find(c) == std::u32string::npos) return U"*";
      }
      return glob;
    }
    const auto& s = std::get<StringComponentDef>(def);
    const auto chars = s.charset().value_chars();
    const bool wildcard = s.strategy() == MatchingStrategy::kWildcard;
    const int len = uniform(0, static_cast<int>(s.max_len()));
    std::u32string out;
    for (int i = 0; i < len; ++i) {
      if (wildcard && uniform(0, 3) == 0) {
        out.push_back(U'*');
      } else {
        out.push_back(chars[static_cast<std::size_t>(uniform(0, static_cast<int>(chars.size()) - 1))]);
      }
    }
    return out;
  }

  PolicySet policy_set(const std::shared_ptr<const PolicyType>& t, int max_policies) {
    PolicySet ps(t);
    const int n = uniform(0, max_policies);
    for (int i = 0; i < n; ++i) {
      std::vector<std::u32string> patterns;
      for (const auto& slot : t->slots()) patterns.push_back(pattern(slot.def));
      ps.add(Policy(t, std::move(patterns), uniform(0, 2) == 0 ? Decision::kDeny : Decision::kAllow));
    }
    return ps;
  }

  std::mt19937& rng() { return rng_; }

 private:
  std::mt19937 rng_;
};

/// Every request of a small type, as value vectors.
inline std::vector<std::vector<std::u32string>> all_requests(const PolicyType& type) {
  std::vector<std::vector<std::u32string>> domains;
  for (const auto& slot : type.slots()) {
    if (const auto* s = std::get_if<StringComponentDef>(&slot.def)) {
      domains.push_back(all_words(s->charset().value_chars(), s->max_len()));
    } else {
      domains.push_back(std::get<StringEnumComponentDef>(slot.def).values());
    }
  }
  std::vector<std::vector<std::u32string>> out{{}};
  for (const auto& domain : domains) {
    std::vector<std::vector<std::u32string>> next;
    for (const auto& prefix : out) {
      for (const auto& v : domain) {
        auto row = prefix;
        row.push_back(v);
        next.push_back(std::move(row));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace permlogic::testing

#endif  // PERMLOGIC_TESTS_SUPPORT_HPP_
