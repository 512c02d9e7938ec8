#pragma once

#include <ostream>

namespace gmi::cli {

// Exit codes: 0 ok, 1 internal numeric failure, 2 invalid input or flags,
// 3 tail cannot be certified, 4 no collisions observed.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gmi::cli
