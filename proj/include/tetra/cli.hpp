#pragma once

#include <iosfwd>
#include <string>

#include "tetra/config.hpp"

namespace tetra {

// Entry point of the `tetra` tool. Output goes to `out`, diagnostics and
// stage-tagged JSON errors to `err`. Returns the process exit code:
// 0 ok, 2 parameter gate, 3 numerical failure, 4 integrity fault.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

// key = value lines accepted by --config
std::string to_config_text(const RunConfig &c);

}  // namespace tetra
