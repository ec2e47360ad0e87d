#include "hyltl/hybrid.hpp"

#include <algorithm>
#include <cmath>

namespace hyltl {

namespace {

// Relative slack used when matching t against phase boundaries and stored
// sample times. Domains are built from exact arithmetic on stored doubles, so
// this only has to absorb serialization round-off.
double time_slack(double t) { return 1e-12 * (1.0 + std::fabs(t)); }

std::string fmt_time(HybridTime p) {
  return "(" + std::to_string(p.t) + ", " + std::to_string(p.j) + ")";
}

}  // namespace

void validate_domain(const std::vector<Phase>& phases) {
  if (phases.empty())
    raise(errc::nonzero_origin, "domain is empty; the first phase must start at (0, 0)");
  if (phases.front().j != 0 || phases.front().t_start != 0.0)
    raise(errc::nonzero_origin, "the first phase must start at (t, j) = (0, 0)");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const Phase& ph = phases[i];
    if (!(ph.t_start <= ph.t_end) || !std::isfinite(ph.t_start) || !std::isfinite(ph.t_end))
      raise(errc::negative_interval,
            "phase " + std::to_string(i) + " has t_end < t_start or non-finite bounds");
    if (i == 0) continue;
    const Phase& prev = phases[i - 1];
    if (ph.j != prev.j + 1)
      raise(errc::nonconsecutive_j,
            "phase " + std::to_string(i) + " has j = " + std::to_string(ph.j) +
                ", expected " + std::to_string(prev.j + 1));
    if (ph.t_start != prev.t_end)
      raise(errc::gap_or_overlap,
            "phase " + std::to_string(i) + " starts at t = " + std::to_string(ph.t_start) +
                " but the previous phase ends at t = " + std::to_string(prev.t_end));
  }
}

HybridTimeDomain::HybridTimeDomain(std::vector<Phase> phases) : phases_(std::move(phases)) {
  validate_domain(phases_);
}

bool HybridTimeDomain::contains(HybridTime p) const {
  if (p.j < 0 || static_cast<std::size_t>(p.j) >= phases_.size()) return false;
  const Phase& ph = phases_[static_cast<std::size_t>(p.j)];
  double slack = time_slack(p.t);
  return p.t >= ph.t_start - slack && p.t <= ph.t_end + slack;
}

HybridTime HybridTimeDomain::end() const {
  if (phases_.empty()) raise(errc::not_in_domain, "empty domain has no end point");
  return {phases_.back().t_end, phases_.back().j};
}

int compare_hybrid_times(const HybridTimeDomain& dom, HybridTime a, HybridTime b) {
  if (!dom.contains(a))
    raise(errc::not_in_domain, "hybrid time " + fmt_time(a) + " is not in the domain");
  if (!dom.contains(b))
    raise(errc::not_in_domain, "hybrid time " + fmt_time(b) + " is not in the domain");
  double sa = a.t + static_cast<double>(a.j);
  double sb = b.t + static_cast<double>(b.j);
  if (sa < sb) return -1;
  if (sa > sb) return 1;
  return 0;
}

HybridArc::HybridArc(HybridTimeDomain domain, std::vector<PhaseSamples> samples)
    : domain_(std::move(domain)), samples_(std::move(samples)) {
  const auto& phases = domain_.phases();
  if (samples_.size() != phases.size())
    raise(errc::bad_config, "arc needs exactly one sample list per phase");
  for (std::size_t p = 0; p < phases.size(); ++p) {
    const PhaseSamples& list = samples_[p];
    if (list.empty())
      raise(errc::bad_config, "phase " + std::to_string(p) + " has no samples");
    if (list.front().first != phases[p].t_start || list.back().first != phases[p].t_end)
      raise(errc::not_in_domain,
            "phase " + std::to_string(p) + " samples do not cover the phase endpoints");
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i > 0 && !(list[i - 1].first < list[i].first))
        raise(errc::bad_config,
              "phase " + std::to_string(p) + " sample times are not strictly increasing");
      if (dim_ == 0)
        dim_ = static_cast<int>(list[i].second.size());
      if (static_cast<int>(list[i].second.size()) != dim_ || dim_ == 0)
        raise(errc::bad_config, "inconsistent state dimension in arc samples");
    }
  }
  for (std::size_t p = 0; p < samples_.size(); ++p)
    for (std::size_t i = 0; i < samples_[p].size(); ++i)
      flat_.push_back({static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(i)});
}

StateVec HybridArc::sample_at(HybridTime p) const {
  if (!domain_.contains(p))
    raise(errc::not_in_domain, "hybrid time " + fmt_time(p) + " is not in the domain");
  const PhaseSamples& list = samples_[static_cast<std::size_t>(p.j)];
  const Phase& ph = domain_.phases()[static_cast<std::size_t>(p.j)];
  double t = std::clamp(p.t, ph.t_start, ph.t_end);
  // upper_bound of t, then check the neighbours for an exact (slack) match
  auto it = std::upper_bound(list.begin(), list.end(), t,
                             [](double v, const auto& s) { return v < s.first; });
  std::size_t hi = static_cast<std::size_t>(it - list.begin());
  double slack = time_slack(t);
  if (hi < list.size() && std::fabs(list[hi].first - t) <= slack) return list[hi].second;
  if (hi > 0 && std::fabs(list[hi - 1].first - t) <= slack) return list[hi - 1].second;
  // interpolate between samples hi-1 and hi
  const auto& a = list[hi - 1];
  const auto& b = list[hi];
  double w = (t - a.first) / (b.first - a.first);
  StateVec x(a.second.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    x[k] = a.second[k] + w * (b.second[k] - a.second[k]);
  return x;
}

HybridArc::SampleRef HybridArc::sample(std::size_t i) const {
  const FlatRef& r = flat_.at(i);
  const auto& s = samples_[r.phase][r.idx];
  return {s.first, domain_.phases()[r.phase].j, &s.second};
}

std::optional<std::size_t> HybridArc::sample_index(HybridTime p) const {
  if (p.j < 0 || static_cast<std::size_t>(p.j) >= samples_.size()) return std::nullopt;
  const PhaseSamples& list = samples_[static_cast<std::size_t>(p.j)];
  auto it = std::upper_bound(list.begin(), list.end(), p.t,
                             [](double v, const auto& s) { return v < s.first; });
  std::size_t hi = static_cast<std::size_t>(it - list.begin());
  double slack = time_slack(p.t);
  std::size_t idx;
  if (hi < list.size() && std::fabs(list[hi].first - p.t) <= slack)
    idx = hi;
  else if (hi > 0 && std::fabs(list[hi - 1].first - p.t) <= slack)
    idx = hi - 1;
  else
    return std::nullopt;
  std::size_t base = 0;
  for (std::size_t ph = 0; ph < static_cast<std::size_t>(p.j); ++ph)
    base += samples_[ph].size();
  return base + idx;
}

void HybridSystem::validate() const {
  if (dim < 1) raise(errc::bad_config, "system dimension must be at least 1");
  if (!flow_set || !jump_set)
    raise(errc::bad_config, "flow_set and jump_set predicates are required");
  if (flow_selections.empty() && jump_selections.empty())
    raise(errc::bad_config, "at least one flow or jump selection is required");
}

void PropositionSet::add(const std::string& name, Predicate pred, ScalarFn margin) {
  if (!pred) raise(errc::bad_config, "proposition " + name + " needs a predicate");
  props_[name] = Prop{std::move(pred), std::move(margin)};
}

std::vector<std::string> PropositionSet::names() const {
  std::vector<std::string> out;
  out.reserve(props_.size());
  for (const auto& [name, _] : props_) out.push_back(name);
  return out;
}

const PropositionSet::Prop& PropositionSet::get(const std::string& name) const {
  auto it = props_.find(name);
  if (it == props_.end())
    raise(errc::unknown_proposition, "unknown proposition: " + name);
  return it->second;
}

bool PropositionSet::holds(const std::string& name, std::span<const double> x) const {
  return get(name).pred(x);
}

bool PropositionSet::has_margin(const std::string& name) const {
  return static_cast<bool>(get(name).margin);
}

double PropositionSet::margin(const std::string& name, std::span<const double> x) const {
  const Prop& p = get(name);
  if (!p.margin)
    raise(errc::bad_config, "proposition " + name + " has no margin function");
  return p.margin(x);
}

double PropositionSet::margin_or_indicator(const std::string& name,
                                           std::span<const double> x) const {
  const Prop& p = get(name);
  if (p.margin) return p.margin(x);
  return p.pred(x) ? 0.0 : 1.0;
}

const Predicate& PropositionSet::predicate(const std::string& name) const {
  return get(name).pred;
}

const ScalarFn& PropositionSet::margin_fn(const std::string& name) const {
  return get(name).margin;
}

}  // namespace hyltl
