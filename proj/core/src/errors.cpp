#include "hyltl/errors.hpp"

namespace hyltl {

const char* errc_name(errc code) {
  switch (code) {
    case errc::nonzero_origin: return "NonzeroOrigin";
    case errc::gap_or_overlap: return "GapOrOverlap";
    case errc::negative_interval: return "NegativeInterval";
    case errc::nonconsecutive_j: return "NonConsecutiveJ";
    case errc::not_in_domain: return "NotInDomain";
    case errc::not_a_sample: return "NotASample";
    case errc::unknown_proposition: return "UnknownProposition";
    case errc::unknown_observation: return "UnknownObservation";
    case errc::syntax_error: return "SyntaxError";
    case errc::type_error: return "TypeError";
    case errc::unbound_variable: return "UnboundVariable";
    case errc::domain_error: return "DomainError";
    case errc::not_in_flow_or_jump_set: return "NotInCupD";
    case errc::step_too_large: return "StepTooLarge";
    case errc::no_sign_change: return "NoSignChange";
    case errc::bad_parameters: return "BadParameters";
    case errc::gradient_unavailable: return "GradientUnavailable";
    case errc::unsupported_formula: return "UnsupportedFormula";
    case errc::bad_config: return "BadConfig";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

}  // namespace hyltl
