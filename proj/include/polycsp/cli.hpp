#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace polycsp {

/// Runs one command-line invocation. The report document goes to out,
/// diagnostics go to err. Returns the process exit code: 0 when a verdict
/// was produced, 1 for input errors, 2 for budget or precondition errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace polycsp
