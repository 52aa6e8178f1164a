#pragma once

#include <iostream>

namespace parallax::cli {

/// Runs one subcommand. The JSON summary goes to `out`, logs and usage text
/// to `err`. Returns 0 on success, 1 for domain errors and 2 for usage
/// errors.
int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace parallax::cli
