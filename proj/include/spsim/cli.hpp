#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spsim {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_numerical = 3 };

/// Entry point of the spsim tool. args excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace spsim
