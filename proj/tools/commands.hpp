#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace laserpick::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitDomain = 2;

/// Runs one command line (args excludes the program name). All regular
/// output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace laserpick::cli
