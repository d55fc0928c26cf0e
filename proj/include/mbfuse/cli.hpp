#pragma once

#include <iosfwd>

namespace mbfuse {

/// Entry point of the `mbfuse` binary. Returns 0 on success, 1 on a usage
/// error and 2 when the data or a config is rejected.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mbfuse
