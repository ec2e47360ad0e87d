#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hyltl {

/// Command-line front end. `args` excludes the program name. Subcommands:
///
///   simulate   integrate a system from an initial state, write a trace
///   check      evaluate an LTL formula on a stored trace
///   certify    run sampled certificate checks (always / eventually / next /
///              until / eventually-always)
///   automaton  translate a co-safe formula to an automaton, optionally run a
///              word through it
///   export     convert a trace to CSV
///   examples   list the built-in example systems
///
/// Returns the process exit code: 0 for success / property true / certificate
/// passed, 1 for usage or data errors, 2 for property false / certificate
/// violated / word rejected.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hyltl
