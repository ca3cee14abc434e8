#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fieldops {

/**
 * Executes one subcommand (args exclude the program name). The run report
 * goes to out, diagnostics to err. Returns 0 on success or acceptance, 2
 * when a quality gate rejects, 1 on any error.
 */
int run_command(const std::vector<std::string>& args, std::ostream& out,
                std::ostream& err);

}  // namespace fieldops
