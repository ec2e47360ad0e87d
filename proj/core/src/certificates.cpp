#include "hyltl/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "hyltl/num_format.hpp"
#include "json.hpp"

namespace hyltl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double vec_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

StateVec apply_map(const MapFn& f, std::span<const double> x) {
  StateVec out(x.size());
  f(x, out);
  return out;
}

double eval_cert(const ScalarCertificate& cert, std::span<const double> x) {
  return eval_number(cert.value, EvalEnv{x, nullptr});
}

// Central finite differences with step h = 1e-6 * (1 + |x|).
std::vector<double> fd_gradient(const ScalarCertificate& cert, std::span<const double> x) {
  const double h = 1e-6 * (1.0 + vec_norm(x));
  std::vector<double> g(x.size());
  StateVec probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double hi = eval_cert(cert, probe);
    probe[i] = x[i] - h;
    const double lo = eval_cert(cert, probe);
    probe[i] = x[i];
    g[i] = (hi - lo) / (2.0 * h);
    if (!std::isfinite(g[i]))
      raise(errc::gradient_unavailable,
            "finite differences of '" + cert.name + "' are not finite");
  }
  return g;
}

// Accumulates one inequality check over sample points. Margins <= tolerance
// pass; a sample's margin is the worst over its selections.
class Cond {
 public:
  explicit Cond(std::string name, std::string note = "") {
    rep_.name = std::move(name);
    rep_.note = std::move(note);
  }

  void add(std::span<const double> witness, double margin, double scale) {
    ++rep_.samples;
    worst_ = std::max(worst_, margin);
    if (margin > violation_tolerance(scale)) {
      ++rep_.violations;
      if (rep_.witnesses.size() < 10)
        rep_.witnesses.emplace_back(witness.begin(), witness.end());
    }
  }

  void add_bool(std::span<const double> witness, bool ok) {
    add(witness, ok ? -1.0 : 1.0, 0.0);
  }

  ConditionReport finish() {
    if (rep_.samples == 0) {
      rep_.vacuous = true;
      rep_.worst_margin = 0.0;
    } else {
      rep_.worst_margin = worst_;
    }
    return std::move(rep_);
  }

 private:
  ConditionReport rep_;
  double worst_ = -kInf;
};

ConditionReport assumption(std::string name, std::string note) {
  ConditionReport c;
  c.name = std::move(name);
  c.note = std::move(note);
  c.checked = false;
  return c;
}

void finalize_verdict(CertificateReport& rep) {
  rep.verdict = cert_verdict::passed_on_samples;
  for (const auto& c : rep.conditions)
    if (c.violations > 0) {
      rep.verdict = cert_verdict::violated;
      return;
    }
}

std::vector<StateVec> space_points(const HybridSystem& sys, const Sampler& sampler) {
  auto pts = sampler.points();
  std::erase_if(pts, [&](const StateVec& x) { return !sys.in_state_space(x); });
  return pts;
}

std::string sampler_line(const Sampler& s) {
  std::string out = s.mode == sampler_mode::grid ? "grid" : "random";
  if (s.mode == sampler_mode::grid) {
    std::vector<std::size_t> counts = s.counts;
    if (counts.empty()) counts.assign(s.bounds.size(), 10);
    if (counts.size() == 1 && s.bounds.size() > 1) counts.assign(s.bounds.size(), counts[0]);
    out += ' ';
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (i) out += 'x';
      out += std::to_string(counts[i]);
    }
  } else {
    out += ' ' + std::to_string(s.budget) + " seed=" + std::to_string(s.seed);
  }
  out += " over ";
  for (std::size_t i = 0; i < s.bounds.size(); ++i) {
    if (i) out += 'x';
    out += '[' + shortest_double(s.bounds[i].first) + ',' +
           shortest_double(s.bounds[i].second) + ']';
  }
  out += " boundary_radius=" + shortest_double(s.boundary_radius);
  out += " probe_step=" + shortest_double(s.probe_step);
  if (s.region) out += " region=" + (s.region_text.empty() ? "<set>" : s.region_text);
  return out;
}

// Positive definiteness of V with respect to K = {x : k(x)} over the sampled
// points: V >= 0 everywhere, V > 0 off K (ties pass per the shared tolerance
// rule), and the smallest sampled value on K reaches (numerical) zero.
void pd_conditions(CertificateReport& rep, const std::vector<StateVec>& pts,
                   const Predicate& k, const ScalarCertificate& cert) {
  Cond nonneg("pd.nonnegative");
  Cond positive("pd.positive_outside");
  ConditionReport vanish;
  vanish.name = "pd.vanishes_on_set";
  vanish.note = "smallest sampled value on the set";

  double min_on_k = kInf;
  const StateVec* argmin = nullptr;
  for (const auto& x : pts) {
    const double v = eval_cert(cert, x);
    nonneg.add(x, -v, std::fabs(v));
    if (k(x)) {
      ++vanish.samples;
      if (v < min_on_k) {
        min_on_k = v;
        argmin = &x;
      }
    } else {
      positive.add(x, -v, std::fabs(v));
    }
  }
  if (vanish.samples == 0) {
    vanish.vacuous = true;
  } else {
    vanish.worst_margin = min_on_k;
    if (min_on_k > violation_tolerance(1.0)) {
      vanish.violations = 1;
      if (argmin) vanish.witnesses.push_back(*argmin);
    }
  }
  rep.conditions.push_back(nonneg.finish());
  rep.conditions.push_back(positive.finish());
  rep.conditions.push_back(std::move(vanish));
}

// Spot check that jump images stay inside the sampled region (only when a
// region restriction is in effect).
void region_closure_condition(CertificateReport& rep, const HybridSystem& sys,
                              const Sampler& sampler, const std::vector<StateVec>& pts) {
  if (!sampler.region) return;
  Cond cond("region.closed_under_jumps", "jump images remain in the sampled region");
  for (const auto& x : pts) {
    if (!sys.jump_set || !sys.jump_set(x)) continue;
    bool ok = true;
    for (const auto& g : sys.jump_selections)
      if (!sampler.region(apply_map(g, x))) ok = false;
    cond.add_bool(x, ok);
  }
  rep.conditions.push_back(cond.finish());
}

ConditionReport horizon_assumption(std::string_view direction) {
  return assumption("horizon",
                    std::string("maximal solutions from the region are assumed "
                                "complete and unbounded in ") +
                        std::string(direction) + "; not checkable from the data");
}

}  // namespace

double certificate_value(const ScalarCertificate& cert, std::span<const double> x) {
  return eval_cert(cert, x);
}

std::vector<double> certificate_gradient(const ScalarCertificate& cert,
                                         std::span<const double> x) {
  if (!cert.gradient.empty()) {
    if (cert.gradient.size() != x.size())
      raise(errc::bad_parameters, "gradient of '" + cert.name + "' has " +
                                      std::to_string(cert.gradient.size()) +
                                      " components, state has " +
                                      std::to_string(x.size()));
    std::vector<double> g(x.size());
    bool ok = true;
    try {
      for (std::size_t i = 0; i < x.size(); ++i) {
        g[i] = eval_number(cert.gradient[i], EvalEnv{x, nullptr});
        if (!std::isfinite(g[i])) ok = false;
      }
    } catch (const error&) {
      ok = false;
    }
    if (ok) return g;
  }
  return fd_gradient(cert, x);
}

void validate_gradient(const ScalarCertificate& cert,
                       const std::vector<std::pair<double, double>>& bounds,
                       std::uint64_t seed, std::size_t count, double rel_tol) {
  if (cert.gradient.empty()) return;
  std::mt19937_64 rng(seed);
  StateVec x(bounds.size());
  for (std::size_t n = 0; n < count; ++n) {
    for (std::size_t i = 0; i < bounds.size(); ++i)
      x[i] = std::uniform_real_distribution<double>(bounds[i].first,
                                                    bounds[i].second)(rng);
    std::vector<double> analytic(x.size());
    std::vector<double> numeric;
    try {
      for (std::size_t i = 0; i < x.size(); ++i)
        analytic[i] = eval_number(cert.gradient[i], EvalEnv{x, nullptr});
      numeric = fd_gradient(cert, x);
    } catch (const error&) {
      continue;  // point outside the expression's domain
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double diff = std::fabs(analytic[i] - numeric[i]);
      const double ref = std::max({1.0, std::fabs(analytic[i]), std::fabs(numeric[i])});
      if (diff > rel_tol * ref)
        raise(errc::bad_parameters,
              "gradient of '" + cert.name + "' disagrees with finite differences in "
              "coordinate " + std::to_string(i + 1) + " at a sampled point");
    }
  }
}

std::vector<StateVec> Sampler::points() const {
  if (bounds.empty()) raise(errc::bad_parameters, "sampler has no bounds");
  for (const auto& [lo, hi] : bounds)
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
      raise(errc::bad_parameters, "sampler bounds must be finite intervals");

  std::vector<StateVec> pts;
  const std::size_t dim = bounds.size();
  if (mode == sampler_mode::grid) {
    std::vector<std::size_t> c = counts;
    if (c.empty()) c.assign(dim, 10);
    if (c.size() == 1 && dim > 1) c.assign(dim, c[0]);
    if (c.size() != dim)
      raise(errc::bad_parameters, "sampler counts must match the dimension");
    std::size_t total = 1;
    for (std::size_t n : c) {
      if (n == 0) raise(errc::bad_parameters, "sampler counts must be positive");
      if (total > 10'000'000 / n)
        raise(errc::bad_parameters, "sampler grid exceeds 10^7 points");
      total *= n;
    }
    pts.reserve(total);
    std::vector<std::size_t> idx(dim, 0);
    StateVec x(dim);
    for (std::size_t flat = 0; flat < total; ++flat) {
      for (std::size_t i = 0; i < dim; ++i) {
        const auto [lo, hi] = bounds[i];
        x[i] = c[i] == 1 ? 0.5 * (lo + hi)
                         : lo + (hi - lo) * static_cast<double>(idx[i]) /
                                   static_cast<double>(c[i] - 1);
      }
      pts.push_back(x);
      for (std::size_t i = dim; i-- > 0;) {  // last axis fastest
        if (++idx[i] < c[i]) break;
        idx[i] = 0;
      }
    }
  } else {
    if (budget == 0) raise(errc::bad_parameters, "sampler budget must be positive");
    std::mt19937_64 rng(seed);
    pts.reserve(budget);
    StateVec x(dim);
    for (std::size_t n = 0; n < budget; ++n) {
      for (std::size_t i = 0; i < dim; ++i)
        x[i] = std::uniform_real_distribution<double>(bounds[i].first,
                                                      bounds[i].second)(rng);
      pts.push_back(x);
    }
  }
  if (region) std::erase_if(pts, [&](const StateVec& x) { return !region(x); });
  return pts;
}

double violation_tolerance(double scale) { return 1e-9 + 1e-6 * std::fabs(scale); }

double u_c(const HybridSystem& sys, const ScalarCertificate& cert,
           std::span<const double> x) {
  if (!sys.flow_set || !sys.flow_set(x)) return -kInf;
  if (sys.flow_selections.empty()) return -kInf;
  const std::vector<double> grad = certificate_gradient(cert, x);
  const double h = 1e-6 * (1.0 + vec_norm(x));
  const double vx = cert.nonsmooth ? eval_cert(cert, x) : 0.0;
  double best = -kInf;
  StateVec probe(x.size());
  for (const auto& f : sys.flow_selections) {
    const StateVec eta = apply_map(f, x);
    double v = dot(grad, eta);
    if (cert.nonsmooth) {
      for (std::size_t i = 0; i < x.size(); ++i) probe[i] = x[i] + h * eta[i];
      v = std::max(v, (eval_cert(cert, probe) - vx) / h);
    }
    best = std::max(best, v);
  }
  return best;
}

double u_d(const HybridSystem& sys, const ScalarCertificate& cert,
           std::span<const double> x) {
  if (!sys.jump_set || !sys.jump_set(x)) return -kInf;
  if (sys.jump_selections.empty()) return -kInf;
  const double vx = eval_cert(cert, x);
  double best = -kInf;
  for (const auto& g : sys.jump_selections)
    best = std::max(best, eval_cert(cert, apply_map(g, x)) - vx);
  return best;
}

CertificateReport check_barrier_candidate(const HybridSystem& sys,
                                          const PropositionSet& props,
                                          const std::string& p,
                                          const ScalarCertificate& barrier,
                                          const Sampler& sampler) {
  const Predicate& k = props.predicate(p);
  CertificateReport rep;
  rep.check = "barrier_candidate";
  rep.sampler_summary = sampler_line(sampler);

  Cond on_set("candidate.nonpositive_on_set");
  Cond off_set("candidate.positive_outside",
               "checked on sampled flow-set, jump-set and jump-image points");
  for (const auto& x : space_points(sys, sampler)) {
    const double b = eval_cert(barrier, x);
    if (k(x)) {
      on_set.add(x, b, std::fabs(b));
    } else if ((sys.flow_set && sys.flow_set(x)) || (sys.jump_set && sys.jump_set(x))) {
      off_set.add(x, -b, std::fabs(b));
    }
    if (sys.jump_set && sys.jump_set(x)) {
      for (const auto& g : sys.jump_selections) {
        const StateVec zeta = apply_map(g, x);
        if (!k(zeta)) {
          const double bz = eval_cert(barrier, zeta);
          off_set.add(zeta, -bz, std::fabs(bz));
        }
      }
    }
  }
  rep.conditions.push_back(on_set.finish());
  rep.conditions.push_back(off_set.finish());
  finalize_verdict(rep);
  return rep;
}

CertificateReport certify_always(const HybridSystem& sys, const PropositionSet& props,
                                 const std::string& p, const ScalarCertificate& barrier,
                                 const Sampler& sampler) {
  const Predicate& k = props.predicate(p);
  const ScalarFn& margin = props.margin_fn(p);
  auto band = [&](const StateVec& x) { return margin ? margin(x) : (k(x) ? 0.0 : 1.0); };
  CertificateReport rep;
  rep.check = "always";
  rep.parameters = {{"boundary_radius", sampler.boundary_radius},
                    {"probe_step", sampler.probe_step}};
  rep.sampler_summary = sampler_line(sampler);

  Cond flow("flow.band_decrease",
            "flow-set samples outside the set within boundary_radius of its "
            "boundary (by the proposition margin); selections probed for "
            "flow-set membership");
  Cond jump("jump.nonpositive_candidate");
  Cond stays("jump.stays_in_flow_or_jump_set");
  const auto pts = space_points(sys, sampler);
  StateVec probe(sys.dim);
  for (const auto& x : pts) {
    const bool in_k = k(x);
    if (!in_k && sys.flow_set && sys.flow_set(x) && band(x) <= sampler.boundary_radius) {
      const std::vector<double> grad = certificate_gradient(barrier, x);
      double margin = -kInf;
      for (const auto& f : sys.flow_selections) {
        const StateVec eta = apply_map(f, x);
        for (std::size_t i = 0; i < sys.dim; ++i)
          probe[i] = x[i] + sampler.probe_step * eta[i];
        if (!sys.flow_set(probe)) continue;  // direction points out of the flow set
        margin = std::max(margin, dot(grad, eta));
      }
      flow.add(x, margin, std::fabs(margin));
    }
    if (in_k && sys.jump_set && sys.jump_set(x)) {
      double margin = -kInf;
      bool ok = true;
      for (const auto& g : sys.jump_selections) {
        const StateVec zeta = apply_map(g, x);
        margin = std::max(margin, eval_cert(barrier, zeta));
        if (!((sys.flow_set && sys.flow_set(zeta)) || sys.jump_set(zeta))) ok = false;
      }
      jump.add(x, margin, std::fabs(margin));
      stays.add_bool(x, ok);
    }
  }
  rep.conditions.push_back(flow.finish());
  rep.conditions.push_back(jump.finish());
  rep.conditions.push_back(stays.finish());
  finalize_verdict(rep);
  return rep;
}

CertificateReport certify_eventually_flow(const HybridSystem& sys,
                                          const PropositionSet& props,
                                          const std::string& p,
                                          const ScalarCertificate& lyapunov, double c1,
                                          double c2, const Sampler& sampler) {
  if (!(c1 > 0.0) || !(c2 >= 0.0 && c2 < 1.0))
    raise(errc::bad_parameters, "need c1 > 0 and 0 <= c2 < 1");
  const Predicate& k = props.predicate(p);
  CertificateReport rep;
  rep.check = "eventually.flow";
  rep.parameters = {{"c1", c1}, {"c2", c2}};
  rep.sampler_summary = sampler_line(sampler);

  const auto pts = space_points(sys, sampler);
  pd_conditions(rep, pts, k, lyapunov);
  Cond flow("flow.decrease");
  Cond jump("jump.noincrease");
  for (const auto& x : pts) {
    if (k(x)) continue;
    if (sys.flow_set && sys.flow_set(x)) {
      const double v = eval_cert(lyapunov, x);
      const double penalty = c1 * std::pow(std::max(v, 0.0), c2);
      const double uc = u_c(sys, lyapunov, x);
      flow.add(x, uc + penalty, std::max(std::fabs(uc), penalty));
    }
    if (sys.jump_set && sys.jump_set(x)) {
      const double ud = u_d(sys, lyapunov, x);
      jump.add(x, ud, std::fabs(ud));
    }
  }
  rep.conditions.push_back(flow.finish());
  rep.conditions.push_back(jump.finish());
  region_closure_condition(rep, sys, sampler, pts);
  rep.conditions.push_back(horizon_assumption("t"));
  finalize_verdict(rep);
  return rep;
}

CertificateReport certify_eventually_jump(const HybridSystem& sys,
                                          const PropositionSet& props,
                                          const std::string& p,
                                          const ScalarCertificate& lyapunov, double c,
                                          const Sampler& sampler, bool nonstrict_jump) {
  if (!(c > 0.0)) raise(errc::bad_parameters, "need c > 0");
  const Predicate& k = props.predicate(p);
  CertificateReport rep;
  rep.check = "eventually.jump";
  rep.parameters = {{"c", c}, {"nonstrict_jump", nonstrict_jump ? 1.0 : 0.0}};
  rep.sampler_summary = sampler_line(sampler);
  if (nonstrict_jump) rep.note = "relaxed variant: jump condition is u_D <= 0";

  const auto pts = space_points(sys, sampler);
  pd_conditions(rep, pts, k, lyapunov);
  Cond flow("flow.noincrease");
  Cond jump(nonstrict_jump ? "jump.noincrease" : "jump.decrease");
  for (const auto& x : pts) {
    if (k(x)) continue;
    if (sys.flow_set && sys.flow_set(x)) {
      const double uc = u_c(sys, lyapunov, x);
      flow.add(x, uc, std::fabs(uc));
    }
    if (sys.jump_set && sys.jump_set(x)) {
      const double ud = u_d(sys, lyapunov, x);
      if (nonstrict_jump) {
        jump.add(x, ud, std::fabs(ud));
      } else {
        const double need = std::min(c, eval_cert(lyapunov, x));
        jump.add(x, ud + need, std::max(std::fabs(ud), std::fabs(need)));
      }
    }
  }
  rep.conditions.push_back(flow.finish());
  rep.conditions.push_back(jump.finish());
  region_closure_condition(rep, sys, sampler, pts);
  rep.conditions.push_back(horizon_assumption("j"));
  finalize_verdict(rep);
  return rep;
}

CertificateReport certify_eventually_combined(const HybridSystem& sys,
                                              const PropositionSet& props,
                                              const std::string& p,
                                              const ScalarCertificate& lyapunov,
                                              double c1, double c2, double c3,
                                              const Sampler& sampler) {
  if (!(c1 > 0.0) || !(c2 >= 0.0 && c2 < 1.0) || !(c3 > 0.0))
    raise(errc::bad_parameters, "need c1 > 0, 0 <= c2 < 1 and c3 > 0");
  const Predicate& k = props.predicate(p);
  CertificateReport rep;
  rep.check = "eventually.combined";
  rep.parameters = {{"c1", c1}, {"c2", c2}, {"c3", c3}};
  rep.sampler_summary = sampler_line(sampler);

  const auto pts = space_points(sys, sampler);
  pd_conditions(rep, pts, k, lyapunov);
  Cond flow("flow.decrease");
  Cond jump("jump.decrease");
  for (const auto& x : pts) {
    if (k(x)) continue;
    const double v = eval_cert(lyapunov, x);
    if (sys.flow_set && sys.flow_set(x)) {
      const double penalty = c1 * std::pow(std::max(v, 0.0), c2);
      const double uc = u_c(sys, lyapunov, x);
      flow.add(x, uc + penalty, std::max(std::fabs(uc), penalty));
    }
    if (sys.jump_set && sys.jump_set(x)) {
      const double need = std::min(c3, v);
      const double ud = u_d(sys, lyapunov, x);
      jump.add(x, ud + need, std::max(std::fabs(ud), std::fabs(need)));
    }
  }
  rep.conditions.push_back(flow.finish());
  rep.conditions.push_back(jump.finish());
  region_closure_condition(rep, sys, sampler, pts);
  rep.conditions.push_back(horizon_assumption("t+j"));
  finalize_verdict(rep);
  return rep;
}

double settling_bound_flow(double v0, double c1, double c2) {
  if (!(v0 >= 0.0) || !(c1 > 0.0) || !(c2 >= 0.0 && c2 < 1.0))
    raise(errc::bad_parameters, "need v0 >= 0, c1 > 0 and 0 <= c2 < 1");
  if (v0 == 0.0) return 0.0;
  return std::pow(v0, 1.0 - c2) / (c1 * (1.0 - c2));
}

std::int64_t settling_bound_jump(double v0, double c) {
  if (!(v0 >= 0.0) || !(c > 0.0)) raise(errc::bad_parameters, "need v0 >= 0 and c > 0");
  return static_cast<std::int64_t>(std::ceil(v0 / c));
}

CertificateReport certify_next(const HybridSystem& sys, const PropositionSet& props,
                               const std::string& p, const Sampler& sampler) {
  const Predicate& k = props.predicate(p);
  CertificateReport rep;
  rep.check = "next";
  rep.parameters = {{"probe_step", sampler.probe_step}};
  rep.sampler_summary = sampler_line(sampler);

  Cond blocked("flow.blocked",
               "every flow selection's Euler probe must leave the flow set");
  Cond lands("jump.lands_in_set",
             "jump images must satisfy the proposition and re-enter the jump set");
  Cond within("flow_set.within_jump_set");
  StateVec probe(sys.dim);
  for (const auto& x : space_points(sys, sampler)) {
    if (sys.flow_set && sys.flow_set(x)) {
      bool ok = true;
      for (const auto& f : sys.flow_selections) {
        const StateVec eta = apply_map(f, x);
        for (std::size_t i = 0; i < sys.dim; ++i)
          probe[i] = x[i] + sampler.probe_step * eta[i];
        if (sys.flow_set(probe)) ok = false;
      }
      blocked.add_bool(x, ok);
      within.add_bool(x, sys.jump_set && sys.jump_set(x));
    }
    if (sys.jump_set && sys.jump_set(x)) {
      bool ok = true;
      for (const auto& g : sys.jump_selections) {
        const StateVec zeta = apply_map(g, x);
        if (!k(zeta) || !sys.jump_set(zeta)) ok = false;
      }
      lands.add_bool(x, ok);
    }
  }
  rep.conditions.push_back(blocked.finish());
  rep.conditions.push_back(lands.finish());
  rep.conditions.push_back(within.finish());
  rep.conditions.push_back(assumption(
      "jumps_dominate", "implied by flow.blocked and flow_set.within_jump_set"));
  finalize_verdict(rep);
  return rep;
}

CertificateReport check_weak_until_cover(const PropositionSet& props,
                                         const std::string& p, const std::string& q,
                                         const Sampler& sampler,
                                         const Predicate& state_space) {
  const Predicate& pp = props.predicate(p);
  const Predicate& qq = props.predicate(q);
  CertificateReport rep;
  rep.check = "weak_until_cover";
  rep.sampler_summary = sampler_line(sampler);

  Cond cover("cover.p_or_q");
  for (const auto& x : sampler.points()) {
    if (state_space && !state_space(x)) continue;
    cover.add_bool(x, pp(x) || qq(x));
  }
  rep.conditions.push_back(cover.finish());
  finalize_verdict(rep);
  return rep;
}

CertificateReport certify_until_strong(const HybridSystem& sys,
                                       const PropositionSet& props, const std::string& p,
                                       const std::string& q,
                                       const ScalarCertificate& lyapunov,
                                       const UntilParams& params,
                                       const Sampler& sampler) {
  if (!(params.r >= 0.0)) raise(errc::bad_parameters, "need r >= 0");
  const Predicate& pp = props.predicate(p);
  const Predicate& qq = props.predicate(q);
  CertificateReport rep;
  rep.check = "until_strong";
  rep.parameters = {{"r", params.r}};
  rep.sampler_summary = sampler_line(sampler);

  const auto pts = space_points(sys, sampler);

  ConditionReport nonempty;
  nonempty.name = "target.nonempty";
  nonempty.samples = pts.size();
  std::size_t q_count = 0;
  for (const auto& x : pts)
    if (qq(x)) ++q_count;
  nonempty.note = std::to_string(q_count) + " sampled points satisfy the target";
  if (q_count == 0) {
    nonempty.violations = 1;
    nonempty.worst_margin = 1.0;
  } else {
    nonempty.worst_margin = -1.0;
  }
  rep.conditions.push_back(std::move(nonempty));
  rep.conditions.push_back(
      assumption("target.closed", "the target set is asserted closed"));

  // Reaching the target is delegated to the eventually checker toward q.
  CertificateReport reach =
      params.mode == UntilParams::reach_mode::flow
          ? certify_eventually_flow(sys, props, q, lyapunov, params.c1, params.c2,
                                    sampler)
          : certify_eventually_jump(sys, props, q, lyapunov, params.c, sampler);
  for (auto& [key, value] : reach.parameters) rep.parameters.emplace(key, value);
  for (auto& c : reach.conditions) {
    c.name = "reach." + c.name;
    rep.conditions.push_back(std::move(c));
  }

  rep.conditions.push_back(assumption(
      "initial.in_basin",
      "solutions must start in (P n L_V(r)) u Q; depends on the initial condition"));

  Cond band("band.left_operand_holds",
            "sublevel-set samples in the flow or jump set outside the target "
            "must satisfy the left operand");
  for (const auto& x : pts) {
    const bool in_sets = (sys.flow_set && sys.flow_set(x)) ||
                         (sys.jump_set && sys.jump_set(x));
    if (!in_sets || qq(x)) continue;
    if (eval_cert(lyapunov, x) > params.r) continue;
    band.add_bool(x, pp(x));
  }
  rep.conditions.push_back(band.finish());

  if (params.check_jump_return) {
    Cond back("target.jumps_stay_in_basin",
              "jump images from the target stay in the sublevel set and in the "
              "flow or jump set");
    for (const auto& x : pts) {
      if (!sys.jump_set || !sys.jump_set(x) || !qq(x)) continue;
      bool ok = true;
      for (const auto& g : sys.jump_selections) {
        const StateVec zeta = apply_map(g, x);
        const bool in_sets = (sys.flow_set && sys.flow_set(zeta)) ||
                             sys.jump_set(zeta);
        if (!in_sets || eval_cert(lyapunov, zeta) > params.r) ok = false;
      }
      back.add_bool(x, ok);
    }
    rep.conditions.push_back(back.finish());
  }
  finalize_verdict(rep);
  return rep;
}

CertificateReport certify_eventually_always_pair(
    const HybridSystem& sys, const PropositionSet& props, const std::string& p,
    const ScalarCertificate& barrier, const ScalarCertificate& lyapunov,
    const EventuallyAlwaysParams& params, const Sampler& sampler) {
  CertificateReport rep;
  rep.check = "eventually_always.pair";
  rep.sampler_summary = sampler_line(sampler);

  CertificateReport inv = certify_always(sys, props, p, barrier, sampler);
  CertificateReport attr;
  switch (params.mode) {
    case EventuallyAlwaysParams::reach_mode::flow:
      attr = certify_eventually_flow(sys, props, p, lyapunov, params.c1, params.c2,
                                     sampler);
      break;
    case EventuallyAlwaysParams::reach_mode::jump:
      attr = certify_eventually_jump(sys, props, p, lyapunov, params.c, sampler,
                                     params.nonstrict_jump);
      break;
    case EventuallyAlwaysParams::reach_mode::combined:
      attr = certify_eventually_combined(sys, props, p, lyapunov, params.c1, params.c2,
                                         params.c, sampler);
      break;
  }
  for (auto& [key, value] : inv.parameters) rep.parameters.emplace(key, value);
  for (auto& [key, value] : attr.parameters) rep.parameters.emplace(key, value);
  for (auto& c : inv.conditions) {
    c.name = "invariance." + c.name;
    rep.conditions.push_back(std::move(c));
  }
  for (auto& c : attr.conditions) {
    c.name = "attractivity." + c.name;
    rep.conditions.push_back(std::move(c));
  }
  finalize_verdict(rep);
  return rep;
}

CertificateReport certify_eventually_always_strengthened(
    const HybridSystem& sys, const PropositionSet& props, const std::string& p,
    const ScalarCertificate& lyapunov, double c1, double c2, double c,
    const Sampler& sampler) {
  if (!(c1 > 0.0) || !(c2 >= 0.0 && c2 < 1.0) || !(c > 0.0))
    raise(errc::bad_parameters, "need c1 > 0, 0 <= c2 < 1 and c > 0");
  const Predicate& k = props.predicate(p);
  CertificateReport rep;
  rep.check = "eventually_always.strengthened";
  rep.parameters = {{"c", c}, {"c1", c1}, {"c2", c2}};
  rep.sampler_summary = sampler_line(sampler);

  const auto pts = space_points(sys, sampler);
  pd_conditions(rep, pts, k, lyapunov);
  Cond flow("flow.decrease_everywhere",
            "decrease required on every sampled flow-set point, inside the set too");
  Cond jump("jump.decrease_everywhere",
            "decrease required on every sampled jump-set point, inside the set too");
  for (const auto& x : pts) {
    const double v = eval_cert(lyapunov, x);
    if (sys.flow_set && sys.flow_set(x)) {
      const double penalty = c1 * std::pow(std::max(v, 0.0), c2);
      const double uc = u_c(sys, lyapunov, x);
      flow.add(x, uc + penalty, std::max(std::fabs(uc), penalty));
    }
    if (sys.jump_set && sys.jump_set(x)) {
      const double need = std::min(c, v);
      const double ud = u_d(sys, lyapunov, x);
      jump.add(x, ud + need, std::max(std::fabs(ud), std::fabs(need)));
    }
  }
  rep.conditions.push_back(flow.finish());
  rep.conditions.push_back(jump.finish());
  region_closure_condition(rep, sys, sampler, pts);
  rep.conditions.push_back(horizon_assumption("t+j"));
  finalize_verdict(rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json guarded_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

std::string report_to_json(const CertificateReport& report) {
  nlohmann::json j;
  j["check"] = report.check;
  j["verdict"] =
      report.verdict == cert_verdict::passed_on_samples ? "passed_on_samples"
                                                        : "violated";
  j["note"] = report.note;
  j["sampler"] = report.sampler_summary;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [key, value] : report.parameters) params[key] = guarded_number(value);
  j["parameters"] = std::move(params);
  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : report.conditions) {
    nlohmann::json jc;
    jc["name"] = c.name;
    jc["checked"] = c.checked;
    jc["samples"] = c.samples;
    jc["violations"] = c.violations;
    jc["worst_margin"] = guarded_number(c.worst_margin);
    jc["vacuous"] = c.vacuous;
    jc["note"] = c.note;
    nlohmann::json w = nlohmann::json::array();
    for (const auto& x : c.witnesses) w.push_back(x);
    jc["witnesses"] = std::move(w);
    conds.push_back(std::move(jc));
  }
  j["conditions"] = std::move(conds);
  return j.dump(2) + "\n";
}

std::string report_to_text(const CertificateReport& report) {
  std::ostringstream out;
  out << "check: " << report.check << "\n";
  out << "verdict: "
      << (report.verdict == cert_verdict::passed_on_samples ? "passed_on_samples"
                                                            : "violated")
      << "\n";
  if (!report.note.empty()) out << "note: " << report.note << "\n";
  if (!report.parameters.empty()) {
    out << "parameters:";
    for (const auto& [key, value] : report.parameters)
      out << ' ' << key << '=' << shortest_double(value);
    out << "\n";
  }
  out << "sampler: " << report.sampler_summary << "\n";
  out << "conditions:\n";
  for (const auto& c : report.conditions) {
    const char* tag = !c.checked ? "assume"
                      : c.violations > 0 ? "FAIL"
                      : c.vacuous ? "vacuous"
                                  : "pass";
    out << "  [" << tag << "] " << c.name;
    if (c.checked) {
      out << ": samples=" << c.samples << " violations=" << c.violations;
      if (!c.vacuous) out << " worst_margin=" << shortest_double(c.worst_margin);
    }
    if (!c.note.empty()) out << " (" << c.note << ")";
    out << "\n";
    std::size_t shown = 0;
    for (const auto& x : c.witnesses) {
      if (++shown > 3) {
        out << "      ... " << c.witnesses.size() - 3 << " more witnesses\n";
        break;
      }
      out << "      witness (";
      for (std::size_t i = 0; i < x.size(); ++i)
        out << (i ? ", " : "") << shortest_double(x[i]);
      out << ")\n";
    }
  }
  return out.str();
}

}  // namespace hyltl
