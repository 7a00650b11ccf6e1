#pragma once

#include <ostream>

namespace changeminer {

/// Entry point of the `changeminer` tool. Returns the process exit code:
/// 0 on success (possibly with warnings), 1 on usage or fatal input errors.
int cli_main(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace changeminer
