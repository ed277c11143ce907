#include "permlogic/adapters.hpp"

#include <json.hpp>

#include <algorithm>
#include <set>
#include <sstream>

#include "permlogic/error.hpp"
#include "permlogic/utf8.hpp"

namespace permlogic::adapters {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

const std::string kPathChars = std::string(kAlphanumeric) + "/._-";

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::kSchemaError, where + ": " + what);
}

void require_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed,
                  std::initializer_list<std::string_view> required) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      schema_error(where, "unknown key \"" + key + "\"");
    }
  }
  for (auto key : required) {
    if (!obj.contains(key)) schema_error(where, "missing key \"" + std::string(key) + "\"");
  }
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_string()) schema_error(where + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> get_strings(const json& obj, const char* key, const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_array()) schema_error(where + "." + key, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) schema_error(where + "." + key + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

MatchingStrategy get_matching(const json& obj, const std::string& where) {
  if (!obj.contains("matching")) return MatchingStrategy::kExact;
  const auto m = get_string(obj, "matching", where);
  if (m == "exact") return MatchingStrategy::kExact;
  if (m == "wildcard") return MatchingStrategy::kWildcard;
  schema_error(where + ".matching", "expected \"exact\" or \"wildcard\"");
}

FieldDef parse_field(const json& obj, const std::string& where) {
  if (!obj.is_object()) schema_error(where, "expected an object");
  const auto kind = obj.contains("kind") && obj.at("kind").is_string() ? obj.at("kind").get<std::string>() : "";
  if (kind == "string") {
    require_keys(obj, where, {"name", "kind", "charset", "max_len", "matching"}, {"name", "charset", "max_len"});
    const auto& len = obj.at("max_len");
    if (!len.is_number_unsigned()) schema_error(where + ".max_len", "expected a non-negative integer");
    return StringComponentDef(get_string(obj, "name", where), CharSet::from_utf8(get_string(obj, "charset", where)),
                              len.get<std::size_t>(), get_matching(obj, where));
  }
  if (kind == "enum") {
    require_keys(obj, where, {"name", "kind", "values", "matching"}, {"name", "values"});
    return StringEnumComponentDef(get_string(obj, "name", where), get_strings(obj, "values", where),
                                  get_matching(obj, where));
  }
  schema_error(where + ".kind", "expected \"string\" or \"enum\"");
}

ComponentDef parse_component(const json& obj, const std::string& where) {
  if (obj.is_object() && obj.contains("kind") && obj.at("kind") == "tuple") {
    require_keys(obj, where, {"name", "kind", "fields"}, {"name", "fields"});
    const auto& fields = obj.at("fields");
    if (!fields.is_array()) schema_error(where + ".fields", "expected an array");
    std::vector<FieldDef> defs;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      defs.push_back(parse_field(fields[i], where + ".fields[" + std::to_string(i) + "]"));
    }
    return TupleComponentDef(get_string(obj, "name", where), std::move(defs));
  }
  return std::visit([](auto&& f) -> ComponentDef { return f; }, parse_field(obj, where));
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchemaError, std::string("invalid JSON: ") + e.what());
  }
}

StringEnumComponentDef tenant_field(const RegistryConfig& config) {
  return StringEnumComponentDef("tenant", config.tenants, MatchingStrategy::kWildcard);
}

TupleComponentDef principal(const RegistryConfig& config) {
  return TupleComponentDef(
      "principal", {tenant_field(config), StringComponentDef("username", CharSet::from_utf8(kAlphanumeric), 64,
                                                             MatchingStrategy::kWildcard)});
}

bool blank_or_comment(std::string_view line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string_view::npos || line[first] == '#';
}

}  // namespace

RegistryConfig parse_registry_config(std::string_view json_text) {
  const json doc = parse_json(json_text);
  require_keys(doc, "$", {"tenants", "services", "policy_types"}, {});
  RegistryConfig config;
  try {
    if (doc.contains("tenants")) config.tenants = get_strings(doc, "tenants", "$");
    if (doc.contains("services")) config.services = get_strings(doc, "services", "$");
    if (doc.contains("policy_types")) {
      const auto& types = doc.at("policy_types");
      if (!types.is_array()) schema_error("$.policy_types", "expected an array");
      for (std::size_t i = 0; i < types.size(); ++i) {
        const std::string where = "$.policy_types[" + std::to_string(i) + "]";
        require_keys(types[i], where, {"name", "components"}, {"name", "components"});
        const auto& comps = types[i].at("components");
        if (!comps.is_array()) schema_error(where + ".components", "expected an array");
        std::vector<ComponentDef> defs;
        for (std::size_t j = 0; j < comps.size(); ++j) {
          defs.push_back(parse_component(comps[j], where + ".components[" + std::to_string(j) + "]"));
        }
        config.custom_types.push_back(
            std::make_shared<const PolicyType>(get_string(types[i], "name", where), std::move(defs)));
      }
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSchemaError) throw;
    throw Error(ErrorCode::kSchemaError, std::string("registry config: ") + e.message());
  }
  return config;
}

PolicyTypePtr http_api_policy_type(const RegistryConfig& config) {
  return std::make_shared<const PolicyType>(
      "http_api",
      std::vector<ComponentDef>{
          principal(config),
          TupleComponentDef(
              "resource",
              {tenant_field(config), StringEnumComponentDef("service", config.services, MatchingStrategy::kWildcard),
               StringComponentDef("path", CharSet::from_utf8(std::string(kAlphanumeric) + "/*"), 255,
                                  MatchingStrategy::kWildcard)}),
          StringEnumComponentDef("action", {"GET", "POST", "PUT", "DELETE"}, MatchingStrategy::kWildcard)});
}

PolicyTypePtr tapis_files_policy_type(const RegistryConfig& config) {
  return std::make_shared<const PolicyType>(
      "tapis_files",
      std::vector<ComponentDef>{
          principal(config),
          TupleComponentDef(
              "perm", {tenant_field(config),
                       StringComponentDef("system_id", CharSet::from_utf8(std::string(kAlphanumeric) + ".-"), 80,
                                          MatchingStrategy::kWildcard),
                       StringEnumComponentDef("level", perm_levels(), MatchingStrategy::kWildcard),
                       StringComponentDef("path", CharSet::from_utf8(kPathChars), 255,
                                          MatchingStrategy::kWildcard)})});
}

PolicyTypePtr path_policy_type() {
  return std::make_shared<const PolicyType>(
      "path", std::vector<ComponentDef>{
                  StringComponentDef("path", CharSet::from_utf8(kPathChars), 255, MatchingStrategy::kWildcard)});
}

PolicyTypePtr user_path_action_policy_type() {
  return std::make_shared<const PolicyType>(
      "user_path_action",
      std::vector<ComponentDef>{
          StringComponentDef("username", CharSet::from_utf8(kAlphanumeric), 64, MatchingStrategy::kWildcard),
          StringComponentDef("path", CharSet::from_utf8(kPathChars), 255, MatchingStrategy::kWildcard),
          StringEnumComponentDef("action", {"GET", "POST", "PUT", "DELETE"}, MatchingStrategy::kWildcard)});
}

PolicyTypePtr wildcard_bench_policy_type() {
  return std::make_shared<const PolicyType>(
      "wildcard_bench",
      std::vector<ComponentDef>{StringComponentDef("path", CharSet::from_utf8(std::string(kAlphanumeric) + "/*"),
                                                   100, MatchingStrategy::kWildcard)});
}

PolicyTypePtr enum_bench_policy_type(std::size_t n) {
  std::vector<std::string> values;
  values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) values.push_back(std::to_string(i));
  return std::make_shared<const PolicyType>(
      "enum_bench_" + std::to_string(n),
      std::vector<ComponentDef>{StringEnumComponentDef("value", values, MatchingStrategy::kWildcard)});
}

PolicyTypeRegistry::PolicyTypeRegistry(const RegistryConfig& config) {
  add(http_api_policy_type(config));
  add(tapis_files_policy_type(config));
  add(path_policy_type());
  add(user_path_action_policy_type());
  add(wildcard_bench_policy_type());
  for (const auto& t : config.custom_types) add(t);
}

void PolicyTypeRegistry::add(PolicyTypePtr type) {
  const std::string name = type->name();
  if (!types_.emplace(name, std::move(type)).second) {
    throw Error(ErrorCode::kInvalidDefinition, "policy type \"" + name + "\" is already registered");
  }
}

const PolicyTypePtr& PolicyTypeRegistry::find(std::string_view name) const {
  const auto it = types_.find(name);
  if (it == types_.end()) {
    throw Error(ErrorCode::kUnknownPolicyType, "no policy type named \"" + std::string(name) + "\"");
  }
  return it->second;
}

std::vector<std::string> PolicyTypeRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, type] : types_) out.push_back(name);
  return out;
}

PolicySet load_policy_json(std::string_view doc, const PolicyTypeRegistry& registry) {
  const json root = parse_json(doc);
  require_keys(root, "$", {"policy_type", "policies"}, {"policy_type", "policies"});
  const auto& type = registry.find(get_string(root, "policy_type", "$"));
  const auto& items = root.at("policies");
  if (!items.is_array()) schema_error("$.policies", "expected an array");
  PolicySet set(type);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::string where = "$.policies[" + std::to_string(i) + "]";
    require_keys(items[i], where, {"values", "decision"}, {"values", "decision"});
    const auto values = get_strings(items[i], "values", where);
    const auto decision = get_string(items[i], "decision", where);
    if (values.size() != type->arity()) {
      throw Error(ErrorCode::kArityMismatch, where + ".values: expected " + std::to_string(type->arity()) +
                                                 " values for " + type->name() + ", got " +
                                                 std::to_string(values.size()));
    }
    for (std::size_t j = 0; j < values.size(); ++j) {
      try {
        validate_pattern(type->slots()[j].def, std::string_view(values[j]));
      } catch (const Error& e) {
        throw Error(e.code(), where + ".values[" + std::to_string(j) + "]: " + e.message());
      }
    }
    try {
      set.add(Policy(type, values, std::string_view(decision)));
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.message());
    }
  }
  return set;
}

std::string dump_policy_json(const PolicySet& policies) {
  ordered_json root;
  root["policy_type"] = policies.type()->name();
  root["policies"] = ordered_json::array();
  for (const auto& p : policies.policies()) {
    ordered_json item;
    item["values"] = p.patterns_utf8();
    item["decision"] = std::string(to_string(p.decision()));
    root["policies"].push_back(std::move(item));
  }
  return root.dump(2) + "\n";
}

PermSpec parse_perm_spec(std::string_view raw) {
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::kMalformedPermSpec, "\"" + std::string(raw) + "\": " + why);
  };
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto colon = raw.find(':', start);
    parts.emplace_back(raw.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 5) throw fail("expected 5 colon-separated parts, got " + std::to_string(parts.size()));
  if (parts[0] != "files") throw fail("unknown prefix \"" + parts[0] + "\"");
  static const char* const kNames[] = {"prefix", "tenant", "levels", "system_id", "path"};
  for (std::size_t i = 1; i < parts.size(); ++i) {
    if (parts[i].empty()) throw fail(std::string("empty ") + kNames[i]);
  }
  PermSpec spec;
  spec.raw = std::string(raw);
  spec.tenant = parts[1];
  spec.system_id = parts[3];
  spec.path = parts[4];
  if (spec.path.front() != '/') throw fail("path must start with '/'");

  std::set<std::size_t> seen;
  std::istringstream list(parts[2]);
  for (std::string token; std::getline(list, token, ',');) {
    if (token == "*") {
      for (std::size_t k = 0; k < perm_levels().size(); ++k) seen.insert(k);
      continue;
    }
    const auto it = std::find(perm_levels().begin(), perm_levels().end(), token);
    if (it == perm_levels().end()) throw fail("unknown level \"" + token + "\"");
    seen.insert(static_cast<std::size_t>(it - perm_levels().begin()));
  }
  if (parts[2].back() == ',' || seen.empty()) throw fail("empty level in \"" + parts[2] + "\"");
  for (auto k : seen) spec.levels.push_back(perm_levels()[k]);
  return spec;
}

std::string render(const PermSpec& spec) {
  std::string levels;
  if (spec.levels == perm_levels()) {
    levels = "*";
  } else {
    for (const auto& l : spec.levels) levels += (levels.empty() ? "" : ",") + l;
  }
  return "files:" + spec.tenant + ":" + levels + ":" + spec.system_id + ":" + spec.path;
}

PolicySet perm_specs_to_policy_set(const PolicyTypePtr& tapis_files, const std::vector<PermEntry>& entries,
                                   Decision decision) {
  PolicySet set(tapis_files);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    try {
      const auto spec = parse_perm_spec(e.raw);
      for (const auto& level : spec.levels) {
        set.add(Policy(tapis_files, std::vector<std::string>{e.tenant, e.username, spec.tenant, spec.system_id,
                                                              level, spec.path},
                       decision));
      }
    } catch (const Error& err) {
      throw Error(err.code(), "entry " + std::to_string(i) + ": " + err.message());
    }
  }
  return set;
}

std::vector<PermEntry> parse_perms_file(std::string_view text, std::string_view tenant,
                                        std::string_view default_username) {
  std::vector<PermEntry> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (blank_or_comment(line)) {
      if (end == text.size()) break;
      continue;
    }
    std::istringstream words{std::string(line)};
    std::vector<std::string> fields;
    for (std::string w; words >> w;) fields.push_back(w);
    PermEntry entry;
    entry.tenant = std::string(tenant);
    try {
      if (fields.size() == 2) {
        entry.username = fields[0];
        entry.raw = fields[1];
      } else if (fields.size() == 1 && !default_username.empty()) {
        entry.username = std::string(default_username);
        entry.raw = fields[0];
      } else {
        throw Error(ErrorCode::kMalformedPermSpec,
                    fields.size() == 1 ? "no username given" : "expected \"[username] perm-spec\"");
      }
      parse_perm_spec(entry.raw);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.message());
    }
    out.push_back(std::move(entry));
    if (end == text.size()) break;
  }
  return out;
}

}  // namespace permlogic::adapters
