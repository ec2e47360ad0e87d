#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hyltl/certificates.hpp"
#include "hyltl/errors.hpp"
#include "hyltl/hybrid.hpp"

namespace hyltl {

/// Declarative system description: every function of the state is an
/// expression string (see expr.hpp for the grammar). Configs serialize to a
/// JSON document and compile into executable HybridSystem / PropositionSet /
/// ScalarCertificate objects.

struct PropositionConfig {
  std::string expr;    // boolean expression
  std::string margin;  // optional numeric expression, <= 0 iff expr holds
};

struct CertificateConfig {
  std::string expr;                   // numeric expression
  std::vector<std::string> gradient;  // empty, or one expression per coordinate
  std::string role = "lyapunov";      // "barrier" | "lyapunov"
  bool nonsmooth = false;
  std::map<std::string, double> params;  // default c, c1, c2, c3, r, ...
};

struct SamplerConfig {
  std::string mode = "grid";  // "grid" | "random"
  std::vector<std::pair<double, double>> bounds;
  std::vector<std::size_t> counts;
  std::size_t budget = 1000;
  std::uint64_t seed = 0;
  double boundary_radius = 0.1;
  double probe_step = 1e-6;
  std::string region;  // optional boolean expression restricting samples
};

struct SystemConfig {
  std::string name;
  int dim = 0;
  std::map<std::string, double> constants;
  // Membership expressions accept the shorthand strings "true" and "false".
  std::string flow_set;
  std::string jump_set;
  std::string state_space;  // empty = all of R^dim
  std::vector<std::vector<std::string>> flow_selections;
  std::vector<std::vector<std::string>> jump_selections;
  std::map<std::string, PropositionConfig> propositions;
  std::map<std::string, CertificateConfig> certificates;
  SamplerConfig sampler;
};

/// Parses a config document. Throws error(errc::bad_config) for malformed
/// JSON, missing required fields (name, dim, flow_set, jump_set) or wrongly
/// typed fields.
SystemConfig config_from_json(const std::string& text);

/// Deterministic rendering (sorted keys, shortest number forms, trailing
/// newline). config_from_json(config_to_json(c)) reproduces c.
std::string config_to_json(const SystemConfig& cfg);

/// A config compiled into executable objects. `sampler` carries the config's
/// sampling defaults with the region expression compiled to a predicate.
struct CompiledSystem {
  SystemConfig config;
  HybridSystem system;
  PropositionSet props;
  std::map<std::string, ScalarCertificate> certificates;
  std::map<std::string, std::map<std::string, double>> certificate_params;
  Sampler sampler;
};

/// Parses, binds constants into and type-checks every expression, builds the
/// system and propositions, and cross-checks supplied certificate gradients
/// against finite differences over the sampler bounds. Throws the offending
/// expression error with a "field:" prefix, or error(errc::bad_config) for
/// structural problems (bad dim, wrong selection arity, unknown role or
/// sampler mode, gradient arity).
CompiledSystem compile_system(const SystemConfig& cfg);

/// Built-in example registry: bouncing_ball, timer, fta_scalar, firefly and
/// sgn_jump, each with its propositions and certificates pre-filled.
const std::vector<SystemConfig>& builtin_examples();

bool is_builtin(const std::string& name);

/// Copy of a registry entry. Throws error(errc::bad_config) for unknown names.
SystemConfig builtin_config(const std::string& name);

/// Loads a system by registry name, or, when no entry matches, by config file
/// path. Throws error(errc::io_error) when the file cannot be read and
/// compile/parse errors as above.
CompiledSystem load_system(const std::string& name_or_path);

}  // namespace hyltl
