#pragma once

// Sampled numerical checkers for the barrier and Lyapunov sufficient
// conditions, the flow/jump change bounds u_C and u_D, and the settling-time
// bound formulas. Every checker evaluates its inequalities on a finite sample
// set and reports "passed_on_samples" or "violated" with witnesses; nothing
// here is a proof.

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "hyltl/expr.hpp"
#include "hyltl/hybrid.hpp"

namespace hyltl {

enum class cert_role { barrier, lyapunov };

// Scalar function of the state used as a barrier candidate or Lyapunov-like
// function. When `gradient` is empty the checkers fall back to central finite
// differences with step h = 1e-6 * (1 + |x|). `nonsmooth` additionally feeds
// directional difference quotients (V(x + h*eta) - V(x)) / h into u_C so that
// kinks (e.g. absolute values) are treated conservatively.
struct ScalarCertificate {
  std::string name;
  Expr value;
  std::vector<Expr> gradient;  // empty, or one entry per coordinate
  cert_role role = cert_role::lyapunov;
  bool nonsmooth = false;
};

double certificate_value(const ScalarCertificate& cert, std::span<const double> x);

// Gradient from the supplied expressions when present, otherwise central
// finite differences. Throws gradient_unavailable when neither produces
// finite values.
std::vector<double> certificate_gradient(const ScalarCertificate& cert,
                                         std::span<const double> x);

// Checks a supplied gradient against central finite differences at `count`
// random points inside `bounds` (relative tolerance `rel_tol`). Throws
// bad_parameters on mismatch; a certificate without a gradient passes
// trivially.
void validate_gradient(const ScalarCertificate& cert,
                       const std::vector<std::pair<double, double>>& bounds,
                       std::uint64_t seed = 0, std::size_t count = 100,
                       double rel_tol = 1e-5);

enum class sampler_mode { grid, random_points };

// Finite sample set over a bounding box. Grid mode places `counts[i]` points
// per axis, endpoints included (a single count means the interval midpoint);
// random mode draws `budget` uniform points. An optional `region` predicate
// restricts samples to a user-asserted neighborhood, e.g. a sublevel set that
// is not a box; `region_text` is echoed in reports.
struct Sampler {
  sampler_mode mode = sampler_mode::grid;
  std::vector<std::pair<double, double>> bounds;  // one interval per coordinate
  std::vector<std::size_t> counts;                // grid points per axis; empty = 10 each
  std::size_t budget = 1000;                      // random mode sample count
  std::uint64_t seed = 0;
  double boundary_radius = 0.1;  // width of the band around the set boundary
  double probe_step = 1e-6;      // Euler membership probe step
  Predicate region;              // optional restriction; null = whole box
  std::string region_text;

  // Deterministic enumeration (fixed grid order / fixed seed), region applied.
  // Throws bad_parameters on empty or unbounded bounds or a zero budget.
  std::vector<StateVec> points() const;
};

// Outcome of one inequality (or set-membership) check. `worst_margin` is the
// largest violation amount seen over all samples; values <= 0 mean every
// sample satisfied the inequality. Boolean conditions report margin 1 per
// failing sample. `checked == false` marks hypotheses that have no finite
// check and are recorded as assumptions only.
struct ConditionReport {
  std::string name;
  bool checked = true;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double worst_margin = 0.0;
  std::vector<StateVec> witnesses;  // at most 10 violating points
  bool vacuous = false;             // no sample fell into the condition's set
  std::string note;
};

enum class cert_verdict { passed_on_samples, violated };

struct CertificateReport {
  std::string check;
  cert_verdict verdict = cert_verdict::passed_on_samples;
  std::map<std::string, double> parameters;  // echoed c, c1, c2, c3, r, ...
  std::vector<ConditionReport> conditions;
  std::string sampler_summary;
  std::string note;

  bool passed() const { return verdict == cert_verdict::passed_on_samples; }
};

// Deterministic structured document (sorted keys, shortest number forms) and
// a human-readable summary.
std::string report_to_json(const CertificateReport& report);
std::string report_to_text(const CertificateReport& report);

// Inequality checks treat a margin as a violation only beyond
// 1e-9 + 1e-6 * |scale|; exact ties pass.
double violation_tolerance(double scale);

// Largest directional derivative of the certificate along the flow
// selections: max over eta in F(x) of <grad V(x), eta> for x in the flow set,
// -inf otherwise (also -inf when there are no flow selections).
double u_c(const HybridSystem& sys, const ScalarCertificate& cert,
           std::span<const double> x);

// Largest change of the certificate across a jump: max over zeta in G(x) of
// V(zeta) - V(x) for x in the jump set, -inf otherwise.
double u_d(const HybridSystem& sys, const ScalarCertificate& cert,
           std::span<const double> x);

// Barrier candidate shape with respect to the set K = {x : p(x)}:
// B <= 0 on sampled K points, B > 0 on sampled points of
// (C u D u G(D)) \ K.
CertificateReport check_barrier_candidate(const HybridSystem& sys,
                                          const PropositionSet& props,
                                          const std::string& p,
                                          const ScalarCertificate& barrier,
                                          const Sampler& sampler);

// Sufficient conditions for "always p" (forward pre-invariance of K):
// (1) <grad B, eta> <= 0 on flow-set samples in the band outside K within
//     boundary_radius of the K boundary, for every flow selection whose Euler
//     probe stays in the flow set;
// (2) B(zeta) <= 0 for jump-set samples inside K, every jump selection;
// (3) each such zeta lands in the flow or jump set.
CertificateReport certify_always(const HybridSystem& sys, const PropositionSet& props,
                                 const std::string& p, const ScalarCertificate& barrier,
                                 const Sampler& sampler);

// Sufficient conditions for "eventually p" with decrease along flows:
// positive definiteness of V with respect to K on the sampled region, then
// u_C + c1 * V^c2 <= 0 off K on the flow set and u_D <= 0 off K on the jump
// set. The solution-horizon hypothesis has no finite check and is recorded as
// an assumption. Requires c1 > 0 and 0 <= c2 < 1.
CertificateReport certify_eventually_flow(const HybridSystem& sys,
                                          const PropositionSet& props,
                                          const std::string& p,
                                          const ScalarCertificate& lyapunov, double c1,
                                          double c2, const Sampler& sampler);

// Dual form with decrease across jumps: u_C <= 0 off K on the flow set and
// u_D <= -min{c, V} off K on the jump set (c > 0). With `nonstrict_jump` the
// jump condition relaxes to u_D <= 0, for systems certified through the
// all-initial-conditions variant.
CertificateReport certify_eventually_jump(const HybridSystem& sys,
                                          const PropositionSet& props,
                                          const std::string& p,
                                          const ScalarCertificate& lyapunov, double c,
                                          const Sampler& sampler,
                                          bool nonstrict_jump = false);

// Combined form: u_C <= -c1 * V^c2 off K on the flow set and
// u_D <= -min{c3, V} off K on the jump set. Requires c1, c3 > 0, 0 <= c2 < 1.
CertificateReport certify_eventually_combined(const HybridSystem& sys,
                                              const PropositionSet& props,
                                              const std::string& p,
                                              const ScalarCertificate& lyapunov,
                                              double c1, double c2, double c3,
                                              const Sampler& sampler);

// Settling bounds: flow mode gives v0^(1-c2) / (c1 * (1 - c2)) seconds of
// flow, jump mode gives ceil(v0 / c) jumps. Throw bad_parameters outside
// v0 >= 0, c1 > 0, 0 <= c2 < 1, c > 0.
double settling_bound_flow(double v0, double c1, double c2);
std::int64_t settling_bound_jump(double v0, double c);

// Sufficient conditions for "next p":
// (b) from every flow-set sample, each flow selection's Euler probe leaves
//     the flow set (no flowing possible);
// (c) every jump selection from jump-set samples lands in K and in the jump
//     set;
// (d) every flow-set sample also lies in the jump set.
// The remaining hypothesis follows from (b) and (d) and is recorded as
// derived.
CertificateReport certify_next(const HybridSystem& sys, const PropositionSet& props,
                               const std::string& p, const Sampler& sampler);

// Weak-until cover: every sampled state-space point satisfies p or q.
CertificateReport check_weak_until_cover(const PropositionSet& props,
                                         const std::string& p, const std::string& q,
                                         const Sampler& sampler,
                                         const Predicate& state_space);

struct UntilParams {
  enum class reach_mode { flow, jump } mode = reach_mode::flow;
  double c1 = 1.0;  // flow mode
  double c2 = 0.0;  // flow mode
  double c = 1.0;   // jump mode
  double r = std::numeric_limits<double>::infinity();  // sublevel value for L_V(r)
  bool check_jump_return = false;  // optional condition on jumps from Q
};

// Sufficient conditions for "p strong-until q" with Q = {x : q(x)}:
// (1) Q nonempty on samples (closedness recorded as an assumption);
// (2) the eventually-q conditions per `mode` (sub-conditions prefixed
//     "reach.");
// (4) sampled points of the sublevel set L_V(r) inside the flow or jump set
//     and outside Q satisfy p;
// (5, when check_jump_return) jump selections from Q n D land back in
//     L_V(r) n (C u D).
// The initial-condition constraint (3) depends on the solution, not the data,
// and is recorded as an assumption.
CertificateReport certify_until_strong(const HybridSystem& sys,
                                       const PropositionSet& props, const std::string& p,
                                       const std::string& q,
                                       const ScalarCertificate& lyapunov,
                                       const UntilParams& params, const Sampler& sampler);

struct EventuallyAlwaysParams {
  enum class reach_mode { flow, jump, combined } mode = reach_mode::flow;
  double c1 = 1.0;
  double c2 = 0.0;
  double c = 1.0;  // jump decrease parameter (jump and combined modes)
  bool nonstrict_jump = false;
};

// "Eventually always p" via a barrier certificate for the invariance half and
// a Lyapunov certificate for the attractivity half; conditions are the union
// of certify_always (prefixed "invariance.") and the selected
// certify_eventually_* (prefixed "attractivity.").
CertificateReport certify_eventually_always_pair(
    const HybridSystem& sys, const PropositionSet& props, const std::string& p,
    const ScalarCertificate& barrier, const ScalarCertificate& lyapunov,
    const EventuallyAlwaysParams& params, const Sampler& sampler);

// "Eventually always p" via a single strengthened Lyapunov certificate:
// u_C + c1 * V^c2 <= 0 on ALL sampled flow-set region points and
// u_D <= -min{c, V} on ALL sampled jump-set region points (inside K too, not
// just off it).
CertificateReport certify_eventually_always_strengthened(
    const HybridSystem& sys, const PropositionSet& props, const std::string& p,
    const ScalarCertificate& lyapunov, double c1, double c2, double c,
    const Sampler& sampler);

}  // namespace hyltl
