#ifndef PERMLOGIC_ADAPTERS_HPP_
#define PERMLOGIC_ADAPTERS_HPP_

// Ready-made policy types, the policy-type registry, the policy JSON format
// and the files perm-spec connector.
//
// Policy JSON:
//   {"policy_type": "<name>",
//    "policies": [{"values": ["...", ...], "decision": "allow"}]}
// with tuple fields flattened in declaration order.
//
// Registry config JSON (every key optional):
//   {"tenants": ["a2cps", "tacc"],
//    "services": ["files", "jobs"],
//    "policy_types": [{"name": "...", "components": [COMPONENT, ...]}]}
//   COMPONENT := {"name": N, "kind": "string", "charset": S, "max_len": K,
//                 "matching": "exact"|"wildcard"}
//              | {"name": N, "kind": "enum", "values": [...], "matching": M}
//              | {"name": N, "kind": "tuple", "fields": [COMPONENT, ...]}

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "permlogic/policy.hpp"

namespace permlogic::adapters {

inline constexpr std::string_view kAlphanumeric =
    "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

struct RegistryConfig {
  std::vector<std::string> tenants{"a2cps", "tacc"};
  std::vector<std::string> services{"apps", "files", "jobs", "systems"};
  std::vector<PolicyTypePtr> custom_types;
};

/// Throws kSchemaError on malformed documents or unknown keys.
RegistryConfig parse_registry_config(std::string_view json_text);

PolicyTypePtr http_api_policy_type(const RegistryConfig& config);
PolicyTypePtr tapis_files_policy_type(const RegistryConfig& config);

/// Single `path` component over alphanumerics and "/._-", max 255.
PolicyTypePtr path_policy_type();
/// username, path, action: the shape of the deny-shadowing example.
PolicyTypePtr user_path_action_policy_type();
/// Single `path` component over alphanumerics and "/", max 100.
PolicyTypePtr wildcard_bench_policy_type();
/// Single enum component `value` with members "0" .. "n-1", wildcard.
PolicyTypePtr enum_bench_policy_type(std::size_t n);

class PolicyTypeRegistry {
 public:
  PolicyTypeRegistry() = default;
  /// The built-in types plus config.custom_types.
  explicit PolicyTypeRegistry(const RegistryConfig& config);

  /// kInvalidDefinition if the name is already taken.
  void add(PolicyTypePtr type);
  /// kUnknownPolicyType when absent.
  const PolicyTypePtr& find(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, PolicyTypePtr, std::less<>> types_;
};

PolicySet load_policy_json(std::string_view doc, const PolicyTypeRegistry& registry);
/// Canonical rendering: keys in fixed order, two-space indent, trailing newline.
std::string dump_policy_json(const PolicySet& policies);

// --- perm specs --------------------------------------------------------------

inline const std::vector<std::string>& perm_levels() {
  static const std::vector<std::string> levels{"read", "modify", "execute"};
  return levels;
}

struct PermSpec {
  std::string raw;
  std::string tenant;
  std::vector<std::string> levels;  // expanded, in read/modify/execute order
  std::string system_id;
  std::string path;
};

/// files:<tenant>:<levels>:<system_id>:<path>.  Throws kMalformedPermSpec.
PermSpec parse_perm_spec(std::string_view raw);
/// Canonical text; the level list is rendered as `*` when all three are set.
std::string render(const PermSpec& spec);

struct PermEntry {
  std::string username;
  std::string tenant;
  std::string raw;
};

/// One policy per (entry, level) in input order.  Malformed entries raise
/// kMalformedPermSpec naming the entry index.
PolicySet perm_specs_to_policy_set(const PolicyTypePtr& tapis_files, const std::vector<PermEntry>& entries,
                                   Decision decision = Decision::kAllow);

/// `.perms` text: one spec per line, optionally preceded by a username and
/// whitespace; `#` comments and blank lines are skipped.  Lines without a
/// username get `default_username`.  Errors name the 1-based line.
std::vector<PermEntry> parse_perms_file(std::string_view text, std::string_view tenant,
                                        std::string_view default_username);

}  // namespace permlogic::adapters

#endif  // PERMLOGIC_ADAPTERS_HPP_
