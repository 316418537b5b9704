#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace optomech {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitSimulation = 4,
};

/// Entry point of the `optomech` command line tool. `args` excludes the
/// program name. Results go to `out` (or --out), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace optomech
