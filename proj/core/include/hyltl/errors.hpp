#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hyltl {

/// Error categories raised by the library. Every throwing operation documents
/// which categories it can produce; tests match on the category, not the text.
enum class errc {
  // hybrid time domains and arcs
  nonzero_origin,
  gap_or_overlap,
  negative_interval,
  nonconsecutive_j,
  not_in_domain,
  not_a_sample,

  // propositions and observations
  unknown_proposition,
  unknown_observation,

  // expression and formula front ends
  syntax_error,
  type_error,
  unbound_variable,
  domain_error,

  // simulation
  not_in_flow_or_jump_set,
  step_too_large,
  no_sign_change,

  // certificate checks
  bad_parameters,
  gradient_unavailable,

  // automata
  unsupported_formula,

  // configuration and file handling
  bad_config,
  io_error,
};

/// Stable identifier for an error category, used in CLI diagnostics.
const char* errc_name(errc code);

/// Library exception type. Parser errors carry the byte offset of the first
/// offending character in `position()`; everything else reports no_position.
class error : public std::runtime_error {
public:
  static constexpr std::size_t no_position = static_cast<std::size_t>(-1);

  error(errc code, const std::string& what, std::size_t position = no_position)
      : std::runtime_error(what), code_(code), position_(position) {}

  errc code() const { return code_; }
  std::size_t position() const { return position_; }

private:
  errc code_;
  std::size_t position_;
};

[[noreturn]] inline void raise(errc code, const std::string& what,
                               std::size_t position = error::no_position) {
  throw error(code, what, position);
}

}  // namespace hyltl
