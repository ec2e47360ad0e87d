#pragma once

// Small hand-built system configs shared by the test binaries, plus helpers
// for matching library errors by category.

#include <functional>
#include <string>

#include "hyltl/config.hpp"
#include "hyltl/errors.hpp"

namespace hyltl::testing {

// Pure jump dynamics on the half line: x+ = max(x - 1, 0) whenever x >= 0.
// With V(x) = x and c = 1 the jump decrease u_D = -min{1, x} holds with
// equality, so certificate margins are exact ties.
inline SystemConfig decrement_config() {
  SystemConfig cfg;
  cfg.name = "decrement";
  cfg.dim = 1;
  cfg.flow_set = "false";
  cfg.jump_set = "x1 >= 0";
  cfg.jump_selections = {{"max(x1 - 1, 0)"}};
  cfg.propositions["at_zero"] = {"x1 <= 0", "x1"};
  cfg.certificates["V"] = {"x1", {"1"}, "lyapunov", false, {{"c", 1.0}}};
  cfg.sampler.bounds = {{0.0, 3.0}};
  cfg.sampler.counts = {31};
  return cfg;
}

// Flow and jump decrease combined: a leaking level x1 driven by a periodic
// drain. Flow x1' = -sqrt(x1) gives u_C = -V^{1/2} exactly; the drain halves
// x1, giving u_D = -x1/2. On an 11-point grid the smallest off-target x1
// sample is 0.1, so c3 = 0.05 passes with ties and c3 = 0.2 is violated.
inline SystemConfig leak_config() {
  SystemConfig cfg;
  cfg.name = "leak";
  cfg.dim = 2;
  cfg.flow_set = "x1 >= 0 and x2 >= 0 and x2 <= 1";
  cfg.jump_set = "x1 >= 0 and x2 >= 1";
  cfg.flow_selections = {{"-sqrt(x1)", "1"}};
  cfg.jump_selections = {{"x1 / 2", "0"}};
  cfg.propositions["drained"] = {"x1 <= 0", "x1"};
  cfg.certificates["V"] = {"x1", {"1", "0"}, "lyapunov", false,
                           {{"c1", 1.0}, {"c2", 0.5}, {"c3", 0.05}}};
  cfg.sampler.bounds = {{0.0, 1.0}, {0.0, 1.0}};
  cfg.sampler.counts = {11, 11};
  return cfg;
}

// Constant drift toward a jump band thinner than one integration step. The
// band lies strictly inside (1.000, 1.001), so endpoint checks miss it and
// only the mid-step check can notice.
inline SystemConfig thin_band_config() {
  SystemConfig cfg;
  cfg.name = "thin_band";
  cfg.dim = 1;
  cfg.flow_set = "x1 <= 2";
  cfg.jump_set = "x1 >= 1.0004 and x1 <= 1.0006";
  cfg.flow_selections = {{"1"}};
  cfg.jump_selections = {{"0"}};
  cfg.sampler.bounds = {{0.0, 2.0}};
  return cfg;
}

struct ErrorProbe {
  bool threw = false;
  errc code = errc::bad_config;
  std::size_t position = error::no_position;
  std::string message;
};

inline ErrorProbe probe_error(const std::function<void()>& fn) {
  ErrorProbe probe;
  try {
    fn();
  } catch (const error& e) {
    probe.threw = true;
    probe.code = e.code();
    probe.position = e.position();
    probe.message = e.what();
  }
  return probe;
}

}  // namespace hyltl::testing
