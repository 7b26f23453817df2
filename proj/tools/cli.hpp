#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prophet::cli {

// Exit codes of the command-line tool.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kInput = 3;
inline constexpr int kConfig = 4;

inline constexpr const char* kVersion = "0.1.0";

// args excludes the program name. Output files are written as a side effect;
// human-readable messages go to `out` / `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace prophet::cli
