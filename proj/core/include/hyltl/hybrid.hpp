#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hyltl/errors.hpp"

namespace hyltl {

using StateVec = std::vector<double>;

/// Boolean membership test over a state vector.
using Predicate = std::function<bool(std::span<const double>)>;

/// Scalar function over a state vector (margins, certificate values).
using ScalarFn = std::function<double(std::span<const double>)>;

/// Vector-valued map: writes f(x) into dx (same dimension as x). Used both for
/// flow vector fields and jump maps.
using MapFn = std::function<void(std::span<const double> x, std::span<double> dx)>;

/// A point (t, j) in hybrid time: t seconds of flow, j jumps so far.
struct HybridTime {
  double t = 0.0;
  std::int64_t j = 0;
};

/// One interval of a hybrid time domain: during jump count j, time flows from
/// t_start to t_end (t_start == t_end for a pure jump instant).
struct Phase {
  std::int64_t j = 0;
  double t_start = 0.0;
  double t_end = 0.0;
};

/// Validates a phase list as a hybrid time domain:
///   - at least one phase, the first starting at (t, j) = (0, 0)
///   - within each phase t_start <= t_end
///   - consecutive phases have j, j+1 and share the boundary time
/// Throws error with code nonzero_origin, negative_interval, nonconsecutive_j
/// or gap_or_overlap.
void validate_domain(const std::vector<Phase>& phases);

/// An ordered union of intervals [t_start, t_end] x {j}. Intervals are closed
/// on both ends, so the jump time belongs to both neighbouring phases.
class HybridTimeDomain {
public:
  HybridTimeDomain() = default;
  explicit HybridTimeDomain(std::vector<Phase> phases);

  const std::vector<Phase>& phases() const { return phases_; }
  bool empty() const { return phases_.empty(); }

  /// Membership of a hybrid time point, with a small relative slack on t to
  /// absorb floating point noise at phase boundaries.
  bool contains(HybridTime p) const;

  /// Last point of the domain.
  HybridTime end() const;

private:
  std::vector<Phase> phases_;
};

/// Total order on domain points by t + j (the natural order along a solution;
/// t + j is injective on a valid domain). Returns -1, 0 or +1.
/// Throws error(errc::not_in_domain) if either point lies outside the domain.
int compare_hybrid_times(const HybridTimeDomain& dom, HybridTime a, HybridTime b);

/// A sampled hybrid arc: a state trajectory over a hybrid time domain, stored
/// as per-phase (t, x) sample lists that always include the phase endpoints.
class HybridArc {
public:
  using PhaseSamples = std::vector<std::pair<double, StateVec>>;

  HybridArc() = default;

  /// Validates that samples align with the domain: one list per phase, strictly
  /// increasing t, first/last samples at the phase endpoints, uniform state
  /// dimension. Throws error(errc::not_in_domain / errc::bad_config).
  HybridArc(HybridTimeDomain domain, std::vector<PhaseSamples> samples);

  const HybridTimeDomain& domain() const { return domain_; }
  int dim() const { return dim_; }

  /// State at a hybrid time point: exact stored sample when available,
  /// otherwise linear interpolation between the bracketing samples of phase j.
  /// Throws error(errc::not_in_domain) outside the domain.
  StateVec sample_at(HybridTime p) const;

  /// Flattened view of all samples in hybrid-time order (phase by phase).
  struct SampleRef {
    double t;
    std::int64_t j;
    const StateVec* x;
  };
  std::size_t sample_count() const { return flat_.size(); }
  SampleRef sample(std::size_t i) const;

  /// Index of a stored sample point, or nullopt when (t, j) does not match a
  /// sample exactly (up to a tiny relative slack on t).
  std::optional<std::size_t> sample_index(HybridTime p) const;

  const std::vector<PhaseSamples>& phase_samples() const { return samples_; }

private:
  struct FlatRef {
    std::uint32_t phase;
    std::uint32_t idx;
  };

  HybridTimeDomain domain_;
  std::vector<PhaseSamples> samples_;
  std::vector<FlatRef> flat_;
  int dim_ = 0;
};

/// Hybrid system data (C, F, D, G) over an ambient state space X. Flow and
/// jump maps are finite lists of single-valued selections; set-valued dynamics
/// are represented by listing several selections.
struct HybridSystem {
  int dim = 0;
  Predicate flow_set;    // C
  Predicate jump_set;    // D
  Predicate state_space; // X; defaults to "everything" when null
  std::vector<MapFn> flow_selections;
  std::vector<MapFn> jump_selections;

  /// Optional signed margins for C and D: negative or zero inside the set.
  /// Used to accept initial conditions on the closure of C.
  ScalarFn flow_margin;
  ScalarFn jump_margin;

  bool in_state_space(std::span<const double> x) const {
    return !state_space || state_space(x);
  }

  /// Throws error(errc::bad_config) when dim < 1, a membership predicate is
  /// missing, or there is neither a flow nor a jump selection.
  void validate() const;
};

/// Named atomic propositions over the state space. Truth is decided by the
/// exact boolean predicate; the optional margin g satisfies g(x) <= 0 iff the
/// predicate holds and is used for tolerance-based queries (settling times,
/// trace checks with slack).
class PropositionSet {
public:
  void add(const std::string& name, Predicate pred, ScalarFn margin = nullptr);

  bool contains(const std::string& name) const { return props_.count(name) != 0; }
  std::vector<std::string> names() const;

  /// Throws error(errc::unknown_proposition) for unknown names.
  bool holds(const std::string& name, std::span<const double> x) const;
  bool has_margin(const std::string& name) const;
  double margin(const std::string& name, std::span<const double> x) const;

  /// Margin when defined, otherwise 0 / 1 as a surrogate signed value.
  double margin_or_indicator(const std::string& name, std::span<const double> x) const;

  const Predicate& predicate(const std::string& name) const;

  /// The margin function itself; null when the proposition has none.
  const ScalarFn& margin_fn(const std::string& name) const;

private:
  struct Prop {
    Predicate pred;
    ScalarFn margin;
  };
  const Prop& get(const std::string& name) const;
  std::map<std::string, Prop> props_;
};

}  // namespace hyltl
