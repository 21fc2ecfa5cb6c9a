#pragma once

#include <ostream>

namespace taxnet::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kComputationError = 1;
inline constexpr int kInputError = 2;

// The whole command-line tool; `out` receives results and tables, `err`
// warnings and the single-line error report.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace taxnet::cli
