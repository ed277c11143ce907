#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "permlogic/adapters.hpp"
#include "permlogic/bench.hpp"
#include "permlogic/error.hpp"
#include "permlogic/smtlib.hpp"
#include "permlogic/solver.hpp"

namespace permlogic::cli {

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << text)) throw IoError("cannot write " + path);
}

int exit_code(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::kValid: return kExitValid;
    case VerdictKind::kInvalid: return kExitInvalid;
    case VerdictKind::kUnknown: return kExitUnknown;
  }
  return kExitUnknown;
}

std::string counterexample_json(const Request& r) {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  const auto values = r.values_utf8();
  for (std::size_t i = 0; i < values.size(); ++i) obj[r.type()->slots()[i].path] = values[i];
  return obj.dump();
}

struct Options {
  std::string config_path;

  std::string policies;
  std::string against;
  std::string direction = "pq";
  std::string backend = "native";
  std::string solver_cmd = "z3 -in";
  std::string solver_input = "stdin";
  double timeout_s = 60;
  std::size_t max_states = Budget{}.max_states;

  std::string family;
  std::vector<std::size_t> n_list;
  std::size_t repeats = 1;
  bool pq_only = false;

  std::string input;
  std::string tenant;
  std::string username;
  std::string decision = "allow";
  std::string output;
};

adapters::RegistryConfig load_config(const Options& o) {
  if (o.config_path.empty()) return adapters::RegistryConfig{};
  return adapters::parse_registry_config(read_file(o.config_path));
}

bench::Backend make_backend(const Options& o) {
  if (!(o.timeout_s > 0)) throw CLI::ValidationError("--timeout", "must be positive");
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(o.timeout_s * 1000.0 + 0.5));
  if (o.backend == "native") return bench::native_backend(Budget{o.max_states, timeout});
  auto cfg = smtlib::parse_solver_command(o.solver_cmd, timeout);
  cfg.input = o.solver_input == "file" ? smtlib::InputMode::kFile : smtlib::InputMode::kStdin;
  return bench::smt_backend(cfg);
}

std::pair<PolicySet, PolicySet> load_pair(const Options& o) {
  const adapters::PolicyTypeRegistry registry(load_config(o));
  auto p = adapters::load_policy_json(read_file(o.policies), registry);
  auto q = adapters::load_policy_json(read_file(o.against), registry);
  require_same_type(*p.type(), *q.type());
  if (o.direction == "qp") return {std::move(q), std::move(p)};
  return {std::move(p), std::move(q)};
}

int cmd_check(const Options& o, std::ostream& out) {
  const auto backend = make_backend(o);
  const auto [p, q] = load_pair(o);
  const auto verdict = backend.check(p, q);
  out << to_string(verdict.kind);
  if (verdict.kind == VerdictKind::kUnknown) out << ": " << verdict.reason;
  out << "\n";
  if (verdict.counterexample) out << counterexample_json(*verdict.counterexample) << "\n";
  return exit_code(verdict.kind);
}

int cmd_bench(const Options& o, std::ostream& out) {
  if (o.family != "enum" && o.family != "wildcard") bench::make_family(o.family, 1);
  const auto backend = make_backend(o);
  out << bench::kCsvComment << "\n" << bench::kCsvHeader << "\n";
  for (auto n : o.n_list) {
    for (std::size_t k = 0; k < o.repeats; ++k) {
      out << bench::to_csv_row(bench::run_point(o.family, n, k, backend, !o.pq_only)) << "\n" << std::flush;
    }
  }
  return 0;
}

int cmd_convert(const Options& o, std::ostream& out) {
  const auto type = adapters::tapis_files_policy_type(load_config(o));
  const auto entries = adapters::parse_perms_file(read_file(o.input), o.tenant, o.username);
  const auto set = adapters::perm_specs_to_policy_set(type, entries, parse_decision(o.decision));
  write_output(o.output, adapters::dump_policy_json(set), out);
  return 0;
}

int cmd_emit_smt(const Options& o, std::ostream& out) {
  const auto [p, q] = load_pair(o);
  write_output(o.output, smtlib::emit_implication(p, q).text, out);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Decide permissiveness implications between policy sets."};
  app.name(args.empty() ? "permlogic" : args.front());
  app.require_subcommand(1);
  app.add_option("--config", o.config_path, "Policy type registry config (JSON)");

  auto add_backend = [&](CLI::App* cmd) {
    cmd->add_option("--backend", o.backend, "native or smt")->check(CLI::IsMember({"native", "smt"}));
    cmd->add_option("--solver-cmd", o.solver_cmd, "External solver command line")->capture_default_str();
    cmd->add_option("--solver-input", o.solver_input, "Pass the script on stdin or as a file argument")
        ->check(CLI::IsMember({"stdin", "file"}));
    cmd->add_option("--timeout", o.timeout_s, "Seconds per query")->capture_default_str();
    cmd->add_option("--max-states", o.max_states, "Native state budget per query")->capture_default_str();
  };
  auto add_pair = [&](CLI::App* cmd) {
    cmd->add_option("--policies", o.policies, "Policy JSON (P)")->required();
    cmd->add_option("--against", o.against, "Policy JSON (Q)")->required();
    cmd->add_option("--direction", o.direction, "pq checks P => Q, qp checks Q => P")
        ->check(CLI::IsMember({"pq", "qp"}));
  };

  auto* check = app.add_subcommand("check", "Decide whether P implies Q");
  add_pair(check);
  add_backend(check);

  auto* bench_cmd = app.add_subcommand("bench", "Time an instance family, CSV on stdout");
  bench_cmd->add_option("--family", o.family, "enum or wildcard")->required();
  bench_cmd->add_option("--n", o.n_list, "Comma-separated sizes")->required()->delimiter(',')->check(CLI::PositiveNumber);
  bench_cmd->add_option("--repeats", o.repeats, "Runs per size")->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--pq-only", o.pq_only, "Skip the Q => P direction");
  add_backend(bench_cmd);

  auto* convert = app.add_subcommand("convert", "Turn a .perms file into tapis_files policy JSON");
  convert->add_option("--input", o.input, ".perms file")->required();
  convert->add_option("--tenant", o.tenant, "Tenant of the listed users")->required();
  convert->add_option("--username", o.username, "User for lines without one");
  convert->add_option("--decision", o.decision, "allow or deny")->check(CLI::IsMember({"allow", "deny"}));
  convert->add_option("-o,--output", o.output, "Output file (default stdout)");

  auto* emit = app.add_subcommand("emit-smt", "Write the SMT-LIB2 query for P => Q");
  add_pair(emit);
  emit->add_option("-o,--output", o.output, "Output file, - for stdout")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (*check) return cmd_check(o, out);
    if (*bench_cmd) return cmd_bench(o, out);
    if (*convert) return cmd_convert(o, out);
    return cmd_emit_smt(o, out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitUsage;
}

}  // namespace permlogic::cli
