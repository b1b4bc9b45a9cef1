#pragma once

namespace ctqw {

// Command-line front door. Exit codes: 0 success, 1 validation or usage
// error, 2 numerical failure.
int cli_main(int argc, const char* const* argv);

} // namespace ctqw
