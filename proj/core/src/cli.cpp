#include "hyltl/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hyltl/automata.hpp"
#include "hyltl/certificates.hpp"
#include "hyltl/config.hpp"
#include "hyltl/errors.hpp"
#include "hyltl/expr.hpp"
#include "hyltl/ltl.hpp"
#include "hyltl/num_format.hpp"
#include "hyltl/simulator.hpp"
#include "hyltl/trace_io.hpp"

namespace hyltl {

namespace {

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::string::size_type begin = 0;
  while (true) {
    auto comma = text.find(',', begin);
    std::string field = text.substr(begin, comma == std::string::npos ? comma : comma - begin);
    auto l = field.find_first_not_of(" \t");
    auto r = field.find_last_not_of(" \t");
    out.push_back(l == std::string::npos ? "" : field.substr(l, r - l + 1));
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    raise(errc::bad_config, what + ": '" + text + "' is not a number");
  return value;
}

std::vector<double> parse_csv_doubles(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const std::string& field : split_csv(text)) out.push_back(parse_double(field, what));
  return out;
}

HybridTime parse_hybrid_time(const std::string& text) {
  auto fields = split_csv(text);
  if (fields.size() != 2) raise(errc::bad_config, "--at expects 't,j', got '" + text + "'");
  HybridTime at;
  at.t = parse_double(fields[0], "--at");
  at.j = static_cast<std::int64_t>(parse_double(fields[1], "--at"));
  return at;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) raise(errc::io_error, "cannot open '" + path + "' for writing");
  f << text;
  f.flush();
  if (!f.good()) raise(errc::io_error, "failed while writing '" + path + "'");
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const std::string& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

std::string pick_proposition(const CompiledSystem& cs, const std::string& requested,
                             const char* flag) {
  if (!requested.empty()) {
    if (!cs.props.contains(requested))
      raise(errc::unknown_proposition, "unknown proposition '" + requested + "' (declared: " +
                                           join_names(cs.props.names()) + ")");
    return requested;
  }
  auto names = cs.props.names();
  if (names.size() == 1) return names.front();
  raise(errc::bad_parameters,
        std::string(flag) + " is required (declared propositions: " + join_names(names) + ")");
}

const ScalarCertificate& pick_certificate(const CompiledSystem& cs, const std::string& requested,
                                          cert_role role, const char* role_name,
                                          const char* flag) {
  if (!requested.empty()) {
    auto it = cs.certificates.find(requested);
    if (it != cs.certificates.end()) return it->second;
    std::vector<std::string> names;
    for (const auto& [name, cert] : cs.certificates) names.push_back(name);
    raise(errc::bad_config, "unknown certificate '" + requested + "' in system '" +
                                cs.config.name + "' (declared: " + join_names(names) + ")");
  }
  const ScalarCertificate* found = nullptr;
  for (const auto& [name, cert] : cs.certificates) {
    if (cert.role != role) continue;
    if (found)
      raise(errc::bad_parameters,
            std::string("system declares several ") + role_name + " certificates; pass " + flag);
    found = &cert;
  }
  if (!found)
    raise(errc::bad_parameters, std::string("system '") + cs.config.name + "' declares no " +
                                    role_name + " certificate");
  return *found;
}

// Certificate parameters resolve from the command line first, then from the
// certificate's `params` table in the config.
struct ParamSource {
  std::map<std::string, double> defaults;
  std::map<std::string, std::optional<double>> cli;

  std::optional<double> lookup(const std::string& key) const {
    auto it = cli.find(key);
    if (it != cli.end() && it->second) return it->second;
    auto d = defaults.find(key);
    if (d != defaults.end()) return d->second;
    return std::nullopt;
  }
  double need(const std::string& key) const {
    if (auto v = lookup(key)) return *v;
    raise(errc::bad_parameters,
          "parameter " + key + " is required (pass --" + key + " or set certificate params)");
  }
  double get(const std::string& key, double fallback) const {
    if (auto v = lookup(key)) return *v;
    return fallback;
  }
};

struct SamplerFlags {
  std::string bounds;
  std::string grid;
  std::optional<std::size_t> random_budget;
  std::optional<std::uint64_t> seed;
  std::string region;
  std::optional<double> boundary_radius;
  std::optional<double> probe_step;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--bounds", bounds,
                    "sampling box as 'lo1,hi1,lo2,hi2,...' (default: config sampler bounds)");
    cmd->add_option("--grid", grid, "grid points per axis as 'n1,n2,...'");
    cmd->add_option("--random", random_budget, "sample N uniform points instead of a grid");
    cmd->add_option("--sample-seed", seed, "seed for random sampling");
    cmd->add_option("--region", region, "boolean expression restricting samples");
    cmd->add_option("--boundary-radius", boundary_radius,
                    "width of the band around the target-set boundary");
    cmd->add_option("--probe-step", probe_step, "Euler membership probe step");
  }

  Sampler resolve(const CompiledSystem& cs) const {
    Sampler smp = cs.sampler;
    if (!bounds.empty()) {
      auto values = parse_csv_doubles(bounds, "--bounds");
      if (values.size() != 2 * static_cast<std::size_t>(cs.system.dim))
        raise(errc::bad_parameters, "--bounds expects lo,hi for each of the " +
                                        std::to_string(cs.system.dim) + " coordinates");
      smp.bounds.clear();
      for (std::size_t i = 0; i < values.size(); i += 2)
        smp.bounds.emplace_back(values[i], values[i + 1]);
    }
    if (!grid.empty()) {
      smp.mode = sampler_mode::grid;
      smp.counts.clear();
      for (double v : parse_csv_doubles(grid, "--grid")) {
        if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
          raise(errc::bad_parameters, "--grid expects positive integers");
        smp.counts.push_back(static_cast<std::size_t>(v));
      }
    }
    if (random_budget) {
      smp.mode = sampler_mode::random_points;
      smp.budget = *random_budget;
    }
    if (seed) smp.seed = *seed;
    if (boundary_radius) smp.boundary_radius = *boundary_radius;
    if (probe_step) smp.probe_step = *probe_step;
    if (!region.empty()) {
      Expr e = parse_expression(region);
      e = bind_constants(e, cs.config.constants);
      check_dimension(e, cs.system.dim);
      if (type_of(e) != expr_type::boolean)
        raise(errc::type_error, "--region: expected a boolean expression");
      smp.region = [e](std::span<const double> x) { return eval_boolean(e, EvalEnv{x, nullptr}); };
      smp.region_text = region;
    }
    return smp;
  }
};

struct CliState {
  // simulate
  std::string sim_system, sim_x0, sim_priority = "jump", sim_selection = "first", sim_out;
  SimOptions sim_opts;
  // check
  std::string check_trace, check_formula, check_at = "0,0", check_system;
  bool check_all = false;
  // certify
  std::string cert_kind, cert_system, cert_name, cert_barrier, cert_prop, cert_target,
      cert_mode = "flow", cert_out;
  std::optional<double> cert_c1, cert_c2, cert_c3, cert_c, cert_r;
  bool cert_nonstrict = false, cert_jump_return = false, cert_strengthened = false,
       cert_text = false;
  SamplerFlags cert_sampler;
  // automaton
  std::string fsa_formula, fsa_run, fsa_out, fsa_dot;
  // export
  std::string export_trace, export_csv;
  // examples
  std::string examples_show;
};

int cmd_simulate(const CliState& st, std::ostream& out) {
  CompiledSystem cs = load_system(st.sim_system);
  StateVec x0 = parse_csv_doubles(st.sim_x0, "--x0");
  if (x0.size() != static_cast<std::size_t>(cs.system.dim))
    raise(errc::bad_config, "--x0 has " + std::to_string(x0.size()) + " coordinates, system '" +
                                cs.config.name + "' has dim " + std::to_string(cs.system.dim));
  SimOptions opts = st.sim_opts;
  if (st.sim_priority == "jump") {
    opts.priority = priority_rule::jump_first;
  } else if (st.sim_priority == "flow") {
    opts.priority = priority_rule::flow_first;
  } else if (st.sim_priority == "random") {
    opts.priority = priority_rule::random_choice;
  } else {
    raise(errc::bad_parameters, "--priority must be jump, flow or random");
  }
  if (st.sim_selection == "first") {
    opts.selection = selection_rule::first;
  } else if (st.sim_selection == "random") {
    opts.selection = selection_rule::random_choice;
  } else {
    raise(errc::bad_parameters, "--selection must be first or random");
  }

  SimResult res = simulate(cs.system, x0, opts);

  Trace trace;
  trace.arc = res.arc;
  std::string x0_text;
  for (double v : x0) {
    if (!x0_text.empty()) x0_text += ",";
    x0_text += shortest_double(v);
  }
  trace.meta["system"] = cs.config.name;
  trace.meta["x0"] = x0_text;
  trace.meta["t_max"] = shortest_double(opts.t_max);
  trace.meta["j_max"] = std::to_string(opts.j_max);
  trace.meta["step"] = shortest_double(opts.step);
  trace.meta["seed"] = std::to_string(opts.seed);
  trace.meta["priority"] = st.sim_priority;
  trace.meta["selection"] = st.sim_selection;
  trace.meta["termination"] = termination_name(res.termination);
  trace.meta["jump_count"] = std::to_string(res.jumps.size());

  if (st.sim_out.empty()) {
    out << write_trace(trace);
    return 0;
  }
  save_trace(trace, st.sim_out);
  HybridTime end = res.arc.domain().end();
  out << "samples: " << res.arc.sample_count() << "\n"
      << "jumps: " << res.jumps.size() << "\n"
      << "end: (t=" << shortest_double(end.t) << ", j=" << end.j << ")\n"
      << "termination: " << termination_name(res.termination) << "\n"
      << "trace: " << st.sim_out << "\n";
  return 0;
}

int cmd_check(const CliState& st, std::ostream& out) {
  Trace trace = load_trace(st.check_trace);
  std::string system_spec = st.check_system;
  if (system_spec.empty()) {
    auto it = trace.meta.find("system");
    if (it == trace.meta.end())
      raise(errc::bad_config, "trace carries no 'system' metadata; pass --system");
    system_spec = it->second;
  }
  CompiledSystem cs = load_system(system_spec);
  Formula f = parse_formula(st.check_formula);

  if (st.check_all) {
    if (holds_for_all_times(f, trace.arc, cs.props)) {
      out << "true\n"
          << "holds at every sample point (" << trace.arc.sample_count() << " samples)\n";
      return 0;
    }
    out << "false\n";
    for (std::size_t i = 0; i < trace.arc.sample_count(); ++i) {
      auto s = trace.arc.sample(i);
      if (!evaluate(f, trace.arc, cs.props, HybridTime{s.t, s.j})) {
        out << "fails at (t=" << shortest_double(s.t) << ", j=" << s.j << ")\n";
        break;
      }
    }
    return 2;
  }

  CheckResult r = evaluate_with_witness(f, trace.arc, cs.props, parse_hybrid_time(st.check_at));
  out << (r.value ? "true" : "false") << "\n";
  if (r.point)
    out << (r.value ? "witness" : "counterexample") << ": (t=" << shortest_double(r.point->t)
        << ", j=" << r.point->j << ")\n";
  if (!r.note.empty()) out << r.note << "\n";
  return r.value ? 0 : 2;
}

int cmd_certify(const CliState& st, std::ostream& out) {
  CompiledSystem cs = load_system(st.cert_system);
  Sampler smp = st.cert_sampler.resolve(cs);
  std::string p = pick_proposition(cs, st.cert_prop, "--prop");

  ParamSource params;
  params.cli = {{"c1", st.cert_c1}, {"c2", st.cert_c2}, {"c3", st.cert_c3},
                {"c", st.cert_c},   {"r", st.cert_r}};
  auto bind_params = [&](const ScalarCertificate& cert) {
    auto it = cs.certificate_params.find(cert.name);
    if (it != cs.certificate_params.end()) params.defaults = it->second;
  };

  CertificateReport report;
  if (st.cert_kind == "always") {
    const ScalarCertificate& barrier =
        pick_certificate(cs, st.cert_name, cert_role::barrier, "barrier", "--cert");
    report = certify_always(cs.system, cs.props, p, barrier, smp);
  } else if (st.cert_kind == "eventually") {
    const ScalarCertificate& lyap =
        pick_certificate(cs, st.cert_name, cert_role::lyapunov, "Lyapunov", "--cert");
    bind_params(lyap);
    if (st.cert_mode == "flow") {
      report = certify_eventually_flow(cs.system, cs.props, p, lyap, params.need("c1"),
                                       params.get("c2", 0.0), smp);
    } else if (st.cert_mode == "jump") {
      double c = st.cert_nonstrict ? params.get("c", 1.0) : params.need("c");
      report = certify_eventually_jump(cs.system, cs.props, p, lyap, c, smp, st.cert_nonstrict);
    } else if (st.cert_mode == "combined") {
      report = certify_eventually_combined(cs.system, cs.props, p, lyap, params.need("c1"),
                                           params.get("c2", 0.0), params.need("c3"), smp);
    } else {
      raise(errc::bad_parameters, "--mode must be flow, jump or combined");
    }
  } else if (st.cert_kind == "next") {
    report = certify_next(cs.system, cs.props, p, smp);
  } else if (st.cert_kind == "until") {
    if (st.cert_target.empty()) raise(errc::bad_parameters, "until requires --target");
    std::string q = pick_proposition(cs, st.cert_target, "--target");
    const ScalarCertificate& lyap =
        pick_certificate(cs, st.cert_name, cert_role::lyapunov, "Lyapunov", "--cert");
    bind_params(lyap);
    UntilParams up;
    if (st.cert_mode == "flow") {
      up.mode = UntilParams::reach_mode::flow;
      up.c1 = params.need("c1");
      up.c2 = params.get("c2", 0.0);
    } else if (st.cert_mode == "jump") {
      up.mode = UntilParams::reach_mode::jump;
      up.c = params.need("c");
    } else {
      raise(errc::bad_parameters, "until supports --mode flow or jump");
    }
    up.r = params.get("r", std::numeric_limits<double>::infinity());
    up.check_jump_return = st.cert_jump_return;
    report = certify_until_strong(cs.system, cs.props, p, q, lyap, up, smp);
  } else if (st.cert_kind == "eventually-always") {
    const ScalarCertificate& lyap =
        pick_certificate(cs, st.cert_name, cert_role::lyapunov, "Lyapunov", "--cert");
    bind_params(lyap);
    if (st.cert_strengthened) {
      report = certify_eventually_always_strengthened(cs.system, cs.props, p, lyap,
                                                      params.need("c1"), params.get("c2", 0.0),
                                                      params.need("c"), smp);
    } else {
      const ScalarCertificate& barrier =
          pick_certificate(cs, st.cert_barrier, cert_role::barrier, "barrier", "--barrier");
      EventuallyAlwaysParams ep;
      if (st.cert_mode == "flow") {
        ep.mode = EventuallyAlwaysParams::reach_mode::flow;
        ep.c1 = params.need("c1");
        ep.c2 = params.get("c2", 0.0);
      } else if (st.cert_mode == "jump") {
        ep.mode = EventuallyAlwaysParams::reach_mode::jump;
        ep.c = st.cert_nonstrict ? params.get("c", 1.0) : params.need("c");
      } else if (st.cert_mode == "combined") {
        ep.mode = EventuallyAlwaysParams::reach_mode::combined;
        ep.c1 = params.need("c1");
        ep.c2 = params.get("c2", 0.0);
        ep.c = st.cert_c3 || params.defaults.count("c3") ? params.need("c3") : params.need("c");
      } else {
        raise(errc::bad_parameters, "--mode must be flow, jump or combined");
      }
      ep.nonstrict_jump = st.cert_nonstrict;
      report = certify_eventually_always_pair(cs.system, cs.props, p, barrier, lyap, ep, smp);
    }
  } else {
    raise(errc::bad_parameters, "unknown certify kind '" + st.cert_kind + "'");
  }

  if (!st.cert_out.empty()) {
    write_file(st.cert_out, report_to_json(report));
    out << report_to_text(report);
    out << "report: " << st.cert_out << "\n";
  } else if (st.cert_text) {
    out << report_to_text(report);
  } else {
    out << report_to_json(report);
  }
  return report.passed() ? 0 : 2;
}

int cmd_automaton(const CliState& st, std::ostream& out) {
  Formula f = parse_formula(st.fsa_formula);
  Fsa fsa = build_automaton(f);
  if (!st.fsa_out.empty()) write_file(st.fsa_out, fsa_to_json(fsa));
  if (!st.fsa_dot.empty()) write_file(st.fsa_dot, fsa_to_dot(fsa));

  int code = 0;
  if (!st.fsa_run.empty()) {
    ObservationWord word = split_csv(st.fsa_run);
    FsaRun run = run_automaton(fsa, word);
    out << "run:";
    for (const std::string& state : run.run) out << " " << state;
    out << "\n" << (run.accepted ? "accepted" : "rejected") << "\n";
    code = run.accepted ? 0 : 2;
  } else if (st.fsa_out.empty() && st.fsa_dot.empty()) {
    out << fsa_to_json(fsa);
  }
  if (!st.fsa_out.empty()) out << "automaton: " << st.fsa_out << "\n";
  if (!st.fsa_dot.empty()) out << "dot: " << st.fsa_dot << "\n";
  return code;
}

int cmd_export(const CliState& st, std::ostream& out) {
  Trace trace = load_trace(st.export_trace);
  save_csv(trace.arc, st.export_csv);
  out << "rows: " << trace.arc.sample_count() << "\n"
      << "csv: " << st.export_csv << "\n";
  return 0;
}

int cmd_examples(const CliState& st, std::ostream& out) {
  if (!st.examples_show.empty()) {
    out << config_to_json(builtin_config(st.examples_show));
    return 0;
  }
  for (const SystemConfig& cfg : builtin_examples()) out << cfg.name << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"hybrid system simulation, LTL trace checking and certificate sampling", "hyltl"};
  app.require_subcommand(1);
  CliState st;

  CLI::App* sim = app.add_subcommand("simulate", "integrate a system and record a trace");
  sim->add_option("--system", st.sim_system, "registry name or config file")->required();
  sim->add_option("--x0", st.sim_x0, "initial state as 'v1,v2,...'")->required();
  sim->add_option("--tmax", st.sim_opts.t_max, "flow time budget");
  sim->add_option("--jmax", st.sim_opts.j_max, "jump budget");
  sim->add_option("--step", st.sim_opts.step, "integration step");
  sim->add_option("--seed", st.sim_opts.seed, "seed for random priority/selection");
  sim->add_option("--priority", st.sim_priority, "jump | flow | random (both sets hold)");
  sim->add_option("--selection", st.sim_selection, "first | random (several selections)");
  sim->add_option("--out", st.sim_out, "trace file (default: print the trace)");

  CLI::App* check = app.add_subcommand("check", "evaluate an LTL formula on a trace");
  check->add_option("--trace", st.check_trace, "trace file")->required();
  check->add_option("--formula", st.check_formula, "LTL formula over proposition names")
      ->required();
  check->add_option("--at", st.check_at, "evaluation point 't,j' (default 0,0)");
  check->add_flag("--all", st.check_all, "require the formula at every sample point");
  check->add_option("--system", st.check_system,
                    "system providing the propositions (default: trace metadata)");

  CLI::App* certify = app.add_subcommand("certify", "run sampled certificate checks");
  certify
      ->add_option("kind", st.cert_kind,
                   "always | eventually | next | until | eventually-always")
      ->required()
      ->check(CLI::IsMember({"always", "eventually", "next", "until", "eventually-always"}));
  certify->add_option("--system", st.cert_system, "registry name or config file")->required();
  certify->add_option("--cert", st.cert_name, "certificate name (default: by role)");
  certify->add_option("--barrier", st.cert_barrier,
                      "barrier certificate for eventually-always (default: by role)");
  certify->add_option("--prop", st.cert_prop, "target proposition (default: the only one)");
  certify->add_option("--target", st.cert_target, "right operand proposition for until");
  certify->add_option("--mode", st.cert_mode, "decrease mode: flow | jump | combined");
  certify->add_option("--c1", st.cert_c1, "flow decrease gain");
  certify->add_option("--c2", st.cert_c2, "flow decrease exponent in [0,1)");
  certify->add_option("--c3", st.cert_c3, "jump decrease floor (combined mode)");
  certify->add_option("--c", st.cert_c, "jump decrease floor (jump mode)");
  certify->add_option("--r", st.cert_r, "sublevel value for the until band");
  certify->add_flag("--nonstrict-jump", st.cert_nonstrict,
                    "relax the jump condition to no increase");
  certify->add_flag("--check-jump-return", st.cert_jump_return,
                    "check that jumps from the target set stay in the sublevel band");
  certify->add_flag("--strengthened", st.cert_strengthened,
                    "eventually-always via a single strengthened Lyapunov certificate");
  certify->add_flag("--text", st.cert_text, "print the human-readable report");
  certify->add_option("--out", st.cert_out, "write the JSON report to a file");
  st.cert_sampler.add_to(certify);

  CLI::App* automaton = app.add_subcommand("automaton", "co-safe formula to automaton");
  automaton->add_option("--formula", st.fsa_formula, "co-safe formula (F a, a U b, X a, &)")
      ->required();
  automaton->add_option("--run", st.fsa_run, "observation word 'p1,p2,...' to run");
  automaton->add_option("--out", st.fsa_out, "automaton JSON file");
  automaton->add_option("--dot", st.fsa_dot, "graph description file");

  CLI::App* exp = app.add_subcommand("export", "trace to CSV");
  exp->add_option("--trace", st.export_trace, "trace file")->required();
  exp->add_option("--csv", st.export_csv, "CSV output file")->required();

  CLI::App* examples = app.add_subcommand("examples", "list built-in example systems");
  examples->add_option("--show", st.examples_show, "print one example's config JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  try {
    if (*sim) return cmd_simulate(st, out);
    if (*check) return cmd_check(st, out);
    if (*certify) return cmd_certify(st, out);
    if (*automaton) return cmd_automaton(st, out);
    if (*exp) return cmd_export(st, out);
    if (*examples) return cmd_examples(st, out);
  } catch (const error& e) {
    err << "error [" << errc_name(e.code()) << "]: " << e.what();
    if (e.position() != error::no_position) err << " (offset " << e.position() << ")";
    err << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace hyltl
