#pragma once

#include <iosfwd>

namespace chartreview {

// Exit status: 0 success, 1 validation error, 2 runtime error.
int cli_dispatch(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace chartreview
