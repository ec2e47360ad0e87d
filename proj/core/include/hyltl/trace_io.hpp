#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "hyltl/hybrid.hpp"

namespace hyltl {

/// Free-form metadata attached to a stored trace (producer, seed, termination
/// reason, ...). Values are stored as strings; numeric values round-trip
/// through their shortest decimal representation.
using TraceMeta = std::map<std::string, std::string>;

struct Trace {
  HybridArc arc;
  TraceMeta meta;
};

/// JSON trace document with fields:
///   dim     : state dimension
///   phases  : [{"j": 0, "t_start": 0.0, "t_end": 1.5}, ...]
///   samples : [{"t": 0.0, "j": 0, "x": [..]}, ...]  in hybrid-time order
///   meta    : free-form string map
/// Serialization is deterministic (sorted keys, shortest round-trip floats),
/// and read(write(trace)) reproduces every sample bit-exactly.
std::string write_trace(const Trace& trace);
Trace read_trace(const std::string& text);

/// File helpers. Throw error(errc::io_error) on filesystem problems and
/// error(errc::bad_config) on malformed documents.
void save_trace(const Trace& trace, const std::string& path);
Trace load_trace(const std::string& path);

/// CSV export with header "t,j,x1,...,xn", one row per sample in hybrid-time
/// order. Values use shortest round-trip formatting.
void write_csv(const HybridArc& arc, std::ostream& out);
void save_csv(const HybridArc& arc, const std::string& path);

}  // namespace hyltl
