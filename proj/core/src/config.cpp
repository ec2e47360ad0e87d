#include "hyltl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "hyltl/expr.hpp"

namespace hyltl {

using nlohmann::json;

namespace {

std::string trimmed(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad(const std::string& what) { raise(errc::bad_config, what); }

const json* find_key(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string need_string(const json& obj, const char* key) {
  const json* v = find_key(obj, key);
  if (!v || !v->is_string()) bad(std::string("config field '") + key + "' must be a string");
  return v->get<std::string>();
}

std::string opt_string(const json& obj, const char* key, const std::string& fallback = "") {
  const json* v = find_key(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) bad(std::string("config field '") + key + "' must be a string");
  return v->get<std::string>();
}

double opt_number(const json& obj, const char* key, double fallback) {
  const json* v = find_key(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) bad(std::string("config field '") + key + "' must be a number");
  return v->get<double>();
}

bool opt_bool(const json& obj, const char* key, bool fallback) {
  const json* v = find_key(obj, key);
  if (!v) return fallback;
  if (!v->is_boolean()) bad(std::string("config field '") + key + "' must be a boolean");
  return v->get<bool>();
}

std::map<std::string, double> opt_number_map(const json& obj, const char* key) {
  std::map<std::string, double> out;
  const json* v = find_key(obj, key);
  if (!v) return out;
  if (!v->is_object()) bad(std::string("config field '") + key + "' must be an object");
  for (auto it = v->begin(); it != v->end(); ++it) {
    if (!it.value().is_number())
      bad(std::string("config field '") + key + "." + it.key() + "' must be a number");
    out[it.key()] = it.value().get<double>();
  }
  return out;
}

std::vector<std::vector<std::string>> opt_selections(const json& obj, const char* key) {
  std::vector<std::vector<std::string>> out;
  const json* v = find_key(obj, key);
  if (!v) return out;
  if (!v->is_array()) bad(std::string("config field '") + key + "' must be an array");
  for (const json& sel : *v) {
    if (!sel.is_array()) bad(std::string("config field '") + key + "' entries must be arrays");
    std::vector<std::string> coords;
    for (const json& c : sel) {
      if (!c.is_string())
        bad(std::string("config field '") + key + "' coordinates must be expression strings");
      coords.push_back(c.get<std::string>());
    }
    out.push_back(std::move(coords));
  }
  return out;
}

SamplerConfig parse_sampler(const json& obj) {
  SamplerConfig sc;
  sc.mode = opt_string(obj, "mode", sc.mode);
  if (const json* b = find_key(obj, "bounds")) {
    if (!b->is_array()) bad("config field 'sampler.bounds' must be an array of [lo, hi] pairs");
    for (const json& pair : *b) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
        bad("config field 'sampler.bounds' must be an array of [lo, hi] pairs");
      sc.bounds.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }
  }
  if (const json* c = find_key(obj, "counts")) {
    if (!c->is_array()) bad("config field 'sampler.counts' must be an array");
    for (const json& n : *c) {
      if (!n.is_number_unsigned()) bad("config field 'sampler.counts' entries must be non-negative integers");
      sc.counts.push_back(n.get<std::size_t>());
    }
  }
  if (const json* v = find_key(obj, "budget")) {
    if (!v->is_number_unsigned()) bad("config field 'sampler.budget' must be a non-negative integer");
    sc.budget = v->get<std::size_t>();
  }
  if (const json* v = find_key(obj, "seed")) {
    if (!v->is_number_unsigned()) bad("config field 'sampler.seed' must be a non-negative integer");
    sc.seed = v->get<std::uint64_t>();
  }
  sc.boundary_radius = opt_number(obj, "boundary_radius", sc.boundary_radius);
  sc.probe_step = opt_number(obj, "probe_step", sc.probe_step);
  sc.region = opt_string(obj, "region", sc.region);
  return sc;
}

bool sampler_is_default(const SamplerConfig& sc) {
  SamplerConfig def;
  return sc.mode == def.mode && sc.bounds.empty() && sc.counts.empty() && sc.budget == def.budget &&
         sc.seed == def.seed && sc.boundary_radius == def.boundary_radius &&
         sc.probe_step == def.probe_step && sc.region.empty();
}

}  // namespace

SystemConfig config_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) bad("config is not valid JSON");
  if (!doc.is_object()) bad("config root must be an object");
  try {
    SystemConfig cfg;
    cfg.name = need_string(doc, "name");
    const json* dim = find_key(doc, "dim");
    if (!dim || !dim->is_number_integer()) bad("config field 'dim' must be an integer");
    cfg.dim = dim->get<int>();
    cfg.constants = opt_number_map(doc, "constants");
    cfg.flow_set = need_string(doc, "flow_set");
    cfg.jump_set = need_string(doc, "jump_set");
    cfg.state_space = opt_string(doc, "state_space");
    cfg.flow_selections = opt_selections(doc, "flow_selections");
    cfg.jump_selections = opt_selections(doc, "jump_selections");
    if (const json* props = find_key(doc, "propositions")) {
      if (!props->is_object()) bad("config field 'propositions' must be an object");
      for (auto it = props->begin(); it != props->end(); ++it) {
        PropositionConfig pc;
        if (it.value().is_string()) {
          pc.expr = it.value().get<std::string>();
        } else if (it.value().is_object()) {
          pc.expr = need_string(it.value(), "expr");
          pc.margin = opt_string(it.value(), "margin");
        } else {
          bad("config field 'propositions." + it.key() + "' must be a string or an object");
        }
        cfg.propositions[it.key()] = std::move(pc);
      }
    }
    if (const json* certs = find_key(doc, "certificates")) {
      if (!certs->is_object()) bad("config field 'certificates' must be an object");
      for (auto it = certs->begin(); it != certs->end(); ++it) {
        if (!it.value().is_object()) bad("config field 'certificates." + it.key() + "' must be an object");
        CertificateConfig cc;
        cc.expr = need_string(it.value(), "expr");
        if (const json* grad = find_key(it.value(), "gradient")) {
          if (!grad->is_array()) bad("config field 'certificates." + it.key() + ".gradient' must be an array");
          for (const json& g : *grad) {
            if (!g.is_string())
              bad("config field 'certificates." + it.key() + ".gradient' entries must be expression strings");
            cc.gradient.push_back(g.get<std::string>());
          }
        }
        cc.role = opt_string(it.value(), "role", cc.role);
        cc.nonsmooth = opt_bool(it.value(), "nonsmooth", cc.nonsmooth);
        cc.params = opt_number_map(it.value(), "params");
        cfg.certificates[it.key()] = std::move(cc);
      }
    }
    if (const json* sampler = find_key(doc, "sampler")) {
      if (!sampler->is_object()) bad("config field 'sampler' must be an object");
      cfg.sampler = parse_sampler(*sampler);
    }
    return cfg;
  } catch (const json::exception& e) {
    bad(std::string("config: ") + e.what());
  }
}

std::string config_to_json(const SystemConfig& cfg) {
  json doc;
  doc["name"] = cfg.name;
  doc["dim"] = cfg.dim;
  if (!cfg.constants.empty()) doc["constants"] = cfg.constants;
  doc["flow_set"] = cfg.flow_set;
  doc["jump_set"] = cfg.jump_set;
  if (!cfg.state_space.empty()) doc["state_space"] = cfg.state_space;
  doc["flow_selections"] = cfg.flow_selections;
  doc["jump_selections"] = cfg.jump_selections;
  if (!cfg.propositions.empty()) {
    json props = json::object();
    for (const auto& [name, pc] : cfg.propositions) {
      if (pc.margin.empty()) {
        props[name] = pc.expr;
      } else {
        props[name] = json{{"expr", pc.expr}, {"margin", pc.margin}};
      }
    }
    doc["propositions"] = std::move(props);
  }
  if (!cfg.certificates.empty()) {
    json certs = json::object();
    for (const auto& [name, cc] : cfg.certificates) {
      json c;
      c["expr"] = cc.expr;
      c["role"] = cc.role;
      if (!cc.gradient.empty()) c["gradient"] = cc.gradient;
      if (cc.nonsmooth) c["nonsmooth"] = true;
      if (!cc.params.empty()) c["params"] = cc.params;
      certs[name] = std::move(c);
    }
    doc["certificates"] = std::move(certs);
  }
  if (!sampler_is_default(cfg.sampler)) {
    const SamplerConfig& sc = cfg.sampler;
    SamplerConfig def;
    json s;
    if (sc.mode != def.mode) s["mode"] = sc.mode;
    if (!sc.bounds.empty()) {
      json b = json::array();
      for (const auto& [lo, hi] : sc.bounds) b.push_back(json::array({lo, hi}));
      s["bounds"] = std::move(b);
    }
    if (!sc.counts.empty()) s["counts"] = sc.counts;
    if (sc.budget != def.budget) s["budget"] = sc.budget;
    if (sc.seed != def.seed) s["seed"] = sc.seed;
    if (sc.boundary_radius != def.boundary_radius) s["boundary_radius"] = sc.boundary_radius;
    if (sc.probe_step != def.probe_step) s["probe_step"] = sc.probe_step;
    if (!sc.region.empty()) s["region"] = sc.region;
    doc["sampler"] = std::move(s);
  }
  return doc.dump(2) + "\n";
}

namespace {

Expr parse_in_context(const std::string& text, const std::map<std::string, double>& constants,
                      int dim, expr_type want, const std::string& field) {
  try {
    Expr e = parse_expression(text);
    e = bind_constants(e, constants);
    check_dimension(e, dim);
    if (type_of(e) != want)
      raise(errc::type_error, want == expr_type::boolean ? "expected a boolean expression"
                                                         : "expected a numeric expression");
    return e;
  } catch (const error& err) {
    raise(err.code(), field + ": " + err.what(), err.position());
  }
}

Predicate compile_predicate(const std::string& text, const std::map<std::string, double>& constants,
                            int dim, const std::string& field) {
  std::string t = trimmed(text);
  if (t.empty()) raise(errc::bad_config, field + ": empty expression");
  if (t == "true") return [](std::span<const double>) { return true; };
  if (t == "false") return [](std::span<const double>) { return false; };
  Expr e = parse_in_context(t, constants, dim, expr_type::boolean, field);
  return [e](std::span<const double> x) { return eval_boolean(e, EvalEnv{x, nullptr}); };
}

ScalarFn compile_scalar(const std::string& text, const std::map<std::string, double>& constants,
                        int dim, const std::string& field) {
  Expr e = parse_in_context(text, constants, dim, expr_type::number, field);
  return [e](std::span<const double> x) { return eval_number(e, EvalEnv{x, nullptr}); };
}

MapFn compile_map(const std::vector<std::string>& coords,
                  const std::map<std::string, double>& constants, int dim,
                  const std::string& field) {
  if (static_cast<int>(coords.size()) != dim)
    raise(errc::bad_config,
          field + ": selection has " + std::to_string(coords.size()) + " coordinates, expected " +
              std::to_string(dim));
  std::vector<Expr> parts;
  parts.reserve(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i)
    parts.push_back(parse_in_context(coords[i], constants, dim, expr_type::number,
                                     field + "[" + std::to_string(i) + "]"));
  return [parts](std::span<const double> x, std::span<double> dx) {
    EvalEnv env{x, nullptr};
    for (std::size_t i = 0; i < parts.size(); ++i) dx[i] = eval_number(parts[i], env);
  };
}

}  // namespace

CompiledSystem compile_system(const SystemConfig& cfg) {
  if (cfg.dim < 1) raise(errc::bad_config, "dim must be >= 1");
  CompiledSystem out;
  out.config = cfg;

  HybridSystem& sys = out.system;
  sys.dim = cfg.dim;
  sys.flow_set = compile_predicate(cfg.flow_set, cfg.constants, cfg.dim, "flow_set");
  sys.jump_set = compile_predicate(cfg.jump_set, cfg.constants, cfg.dim, "jump_set");
  if (!trimmed(cfg.state_space).empty() && trimmed(cfg.state_space) != "true")
    sys.state_space = compile_predicate(cfg.state_space, cfg.constants, cfg.dim, "state_space");
  for (std::size_t i = 0; i < cfg.flow_selections.size(); ++i)
    sys.flow_selections.push_back(compile_map(cfg.flow_selections[i], cfg.constants, cfg.dim,
                                              "flow_selections[" + std::to_string(i) + "]"));
  for (std::size_t i = 0; i < cfg.jump_selections.size(); ++i)
    sys.jump_selections.push_back(compile_map(cfg.jump_selections[i], cfg.constants, cfg.dim,
                                              "jump_selections[" + std::to_string(i) + "]"));
  sys.validate();

  for (const auto& [name, pc] : cfg.propositions) {
    const std::string field = "propositions." + name;
    Predicate pred = compile_predicate(pc.expr, cfg.constants, cfg.dim, field);
    ScalarFn margin;
    if (!pc.margin.empty())
      margin = compile_scalar(pc.margin, cfg.constants, cfg.dim, field + ".margin");
    out.props.add(name, std::move(pred), std::move(margin));
  }

  Sampler& smp = out.sampler;
  const SamplerConfig& sc = cfg.sampler;
  if (sc.mode == "grid") {
    smp.mode = sampler_mode::grid;
  } else if (sc.mode == "random") {
    smp.mode = sampler_mode::random_points;
  } else {
    raise(errc::bad_config, "sampler.mode must be \"grid\" or \"random\"");
  }
  if (!sc.bounds.empty() && static_cast<int>(sc.bounds.size()) != cfg.dim)
    raise(errc::bad_config, "sampler.bounds must list one [lo, hi] pair per coordinate");
  smp.bounds = sc.bounds;
  smp.counts = sc.counts;
  smp.budget = sc.budget;
  smp.seed = sc.seed;
  smp.boundary_radius = sc.boundary_radius;
  smp.probe_step = sc.probe_step;
  if (!sc.region.empty()) {
    smp.region = compile_predicate(sc.region, cfg.constants, cfg.dim, "sampler.region");
    smp.region_text = sc.region;
  }

  for (const auto& [name, cc] : cfg.certificates) {
    const std::string field = "certificates." + name;
    ScalarCertificate cert;
    cert.name = name;
    cert.value = parse_in_context(cc.expr, cfg.constants, cfg.dim, expr_type::number, field);
    if (!cc.gradient.empty() && static_cast<int>(cc.gradient.size()) != cfg.dim)
      raise(errc::bad_config, field + ".gradient must list one expression per coordinate");
    for (std::size_t i = 0; i < cc.gradient.size(); ++i)
      cert.gradient.push_back(parse_in_context(cc.gradient[i], cfg.constants, cfg.dim,
                                               expr_type::number,
                                               field + ".gradient[" + std::to_string(i) + "]"));
    if (cc.role == "barrier") {
      cert.role = cert_role::barrier;
    } else if (cc.role == "lyapunov") {
      cert.role = cert_role::lyapunov;
    } else {
      raise(errc::bad_config, field + ".role must be \"barrier\" or \"lyapunov\"");
    }
    cert.nonsmooth = cc.nonsmooth;
    if (!cert.gradient.empty()) {
      std::vector<std::pair<double, double>> box = smp.bounds;
      if (static_cast<int>(box.size()) != cfg.dim)
        box.assign(static_cast<std::size_t>(cfg.dim), {-1.0, 1.0});
      try {
        validate_gradient(cert, box);
      } catch (const error& err) {
        raise(err.code(), field + ": " + err.what());
      }
    }
    out.certificate_params[name] = cc.params;
    out.certificates[name] = std::move(cert);
  }

  return out;
}

namespace {

SystemConfig make_bouncing_ball() {
  SystemConfig cfg;
  cfg.name = "bouncing_ball";
  cfg.dim = 2;
  cfg.constants = {{"gam", 1.0}, {"lam", 0.5}};
  cfg.flow_set = "x1 >= 0";
  cfg.jump_set = "x1 <= 0 and x2 <= 0";
  cfg.flow_selections = {{"x2", "-gam"}};
  cfg.jump_selections = {{"0", "-lam * x2"}};
  cfg.propositions["p_energy"] = {
      "x1 >= 0 and 2 * gam * x1 + (x2 - 1) * (x2 + 1) <= 0",
      "max(-x1, 2 * gam * x1 + (x2 - 1) * (x2 + 1))"};
  cfg.propositions["x2_le_0"] = {"x2 <= 0", "x2"};
  cfg.propositions["x2_ge_0"] = {"x2 >= 0", "-x2"};
  cfg.propositions["x2_le_m1"] = {"x2 <= -1", "x2 + 1"};
  CertificateConfig barrier;
  barrier.expr = "2 * gam * x1 + (x2 - 1) * (x2 + 1)";
  barrier.gradient = {"2 * gam", "2 * x2"};
  barrier.role = "barrier";
  cfg.certificates["B"] = barrier;
  CertificateConfig speed;
  speed.expr = "abs(x2)";
  speed.nonsmooth = true;
  speed.params = {{"c1", 1.0}, {"c2", 0.0}};
  cfg.certificates["V"] = speed;
  cfg.sampler.bounds = {{0.0, 2.0}, {-3.0, 3.0}};
  cfg.sampler.counts = {101, 101};
  return cfg;
}

SystemConfig make_timer() {
  SystemConfig cfg;
  cfg.name = "timer";
  cfg.dim = 2;
  cfg.constants = {{"T", 1.0}};
  cfg.flow_set = "x1 >= 0 and x1 <= T";
  cfg.jump_set = "x1 >= T";
  cfg.state_space = "x1 >= 0 and (x2 = 0 or x2 = 1)";
  cfg.flow_selections = {{"1", "0"}};
  cfg.jump_selections = {{"0", "1 - x2"}};
  cfg.propositions["p_window"] = {"x1 >= 0 and x1 <= T", "max(-x1, x1 - T)"};
  CertificateConfig barrier;
  barrier.expr = "x1 - T";
  barrier.gradient = {"1", "0"};
  barrier.role = "barrier";
  cfg.certificates["B"] = barrier;
  cfg.sampler.bounds = {{0.0, 2.0}, {0.0, 1.0}};
  cfg.sampler.counts = {81, 2};
  return cfg;
}

SystemConfig make_fta_scalar() {
  SystemConfig cfg;
  cfg.name = "fta_scalar";
  cfg.dim = 2;
  cfg.constants = {{"k", 1.0}, {"alpha", 0.5}};
  cfg.flow_set = "x2 >= 0 and x2 <= 1";
  cfg.jump_set = "x2 >= 1";
  cfg.state_space = "x2 >= 0 and x2 <= 1";
  cfg.flow_selections = {{"-k * abs(x1)^alpha * sgn(x1)", "1"}};
  cfg.jump_selections = {{"-x1", "0"}};
  cfg.propositions["at_origin"] = {"abs(x1) <= 0", "abs(x1)"};
  CertificateConfig lyap;
  lyap.expr = "x1 * x1 / 2";
  lyap.gradient = {"x1", "0"};
  lyap.params = {{"c1", std::pow(2.0, 0.75)}, {"c2", 0.75}};
  cfg.certificates["V"] = lyap;
  cfg.sampler.bounds = {{-1.0, 1.0}, {0.0, 1.0}};
  cfg.sampler.counts = {101, 11};
  return cfg;
}

// Jump rule for one firefly phase u = (1 + eps) * xi: keep u below the
// threshold, reset past it, and at u = 1 exactly the map is set-valued with
// values {0, 1}. reset0/reset1 pick the two values; the registry lists all
// four per-coordinate combinations as jump selections.
std::string firefly_reset0(const std::string& xi) {
  return "(1 + eps) * " + xi + " * (1 - sgn((1 + eps) * " + xi + " - 1)) / 2";
}

std::string firefly_reset1(const std::string& xi) {
  return firefly_reset0(xi) + " + (1 + sgn((1 + eps) * " + xi +
         " - 1)) * (1 + sgn(1 - (1 + eps) * " + xi + ")) / 4";
}

SystemConfig make_firefly() {
  SystemConfig cfg;
  cfg.name = "firefly";
  cfg.dim = 2;
  cfg.constants = {{"gam", 1.0}, {"eps", 0.2}};
  const std::string box = "x1 >= 0 and x1 <= 1 and x2 >= 0 and x2 <= 1";
  cfg.flow_set = box;
  // The threshold slice max = 1 extended past the box edge so that event
  // bisection, which brackets the crossing from both sides, lands in the set.
  cfg.jump_set = "x1 >= 0 and x2 >= 0 and max(x1, x2) >= 1";
  cfg.flow_selections = {{"gam", "gam"}};
  cfg.jump_selections = {{firefly_reset0("x1"), firefly_reset0("x2")},
                         {firefly_reset0("x1"), firefly_reset1("x2")},
                         {firefly_reset1("x1"), firefly_reset0("x2")},
                         {firefly_reset1("x1"), firefly_reset1("x2")}};
  cfg.propositions["synced"] = {box + " and x1 = x2", "abs(x1 - x2)"};
  const std::string gap = "min(abs(x1 - x2), 1 + eps / (2 + eps) - abs(x1 - x2))";
  CertificateConfig lyap;
  lyap.expr = gap;
  lyap.nonsmooth = true;
  cfg.certificates["V"] = lyap;
  cfg.sampler.bounds = {{0.0, 1.0}, {0.0, 1.0}};
  cfg.sampler.counts = {101, 101};
  cfg.sampler.region = gap + " <= 0.4";
  return cfg;
}

SystemConfig make_sgn_jump() {
  SystemConfig cfg;
  cfg.name = "sgn_jump";
  cfg.dim = 1;
  cfg.flow_set = "false";
  cfg.jump_set = "true";
  cfg.jump_selections = {{"sgn(x1)"}};
  cfg.propositions["p_unit"] = {"abs(x1) = 1", "abs(abs(x1) - 1)"};
  cfg.sampler.bounds = {{-2.0, 2.0}};
  cfg.sampler.counts = {81};
  return cfg;
}

}  // namespace

const std::vector<SystemConfig>& builtin_examples() {
  static const std::vector<SystemConfig> registry = {
      make_bouncing_ball(), make_timer(), make_fta_scalar(), make_firefly(), make_sgn_jump()};
  return registry;
}

bool is_builtin(const std::string& name) {
  for (const SystemConfig& cfg : builtin_examples())
    if (cfg.name == name) return true;
  return false;
}

SystemConfig builtin_config(const std::string& name) {
  for (const SystemConfig& cfg : builtin_examples())
    if (cfg.name == name) return cfg;
  std::string names;
  for (const SystemConfig& cfg : builtin_examples()) {
    if (!names.empty()) names += ", ";
    names += cfg.name;
  }
  raise(errc::bad_config, "unknown example system '" + name + "' (registry: " + names + ")");
}

CompiledSystem load_system(const std::string& name_or_path) {
  if (is_builtin(name_or_path)) return compile_system(builtin_config(name_or_path));
  std::ifstream in(name_or_path, std::ios::binary);
  if (!in)
    raise(errc::io_error,
          "cannot load system '" + name_or_path + "': not a registry entry or a readable file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return compile_system(config_from_json(buf.str()));
}

}  // namespace hyltl
