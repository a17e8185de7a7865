#pragma once

// Command-line front end. Subcommands write CSV files and a manifest.json
// into --out; exit codes are 0 (success), 1 (a verification failed) and
// 2 (bad configuration or arguments).

#include <iostream>
#include <string>
#include <string_view>
#include <vector>

namespace firlab {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace firlab
