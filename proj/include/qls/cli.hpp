#pragma once

namespace qls::cli {

// Entry point for the qls command-line tool. Exit codes: 0 success, 1 invalid
// configuration (diagnostic names the field), 2 non-convergence under --strict.
int run(int argc, const char* const* argv);

} // namespace qls::cli
