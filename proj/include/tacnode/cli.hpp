#pragma once

#include <iosfwd>

namespace tacnode {

// Exit codes: 0 success, 2 input validation, 3 numerical failure,
// 4 verification failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitVerify = 4;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tacnode
