#pragma once

#include <string>
#include <vector>

namespace sdprop {

// Entry point shared by the binary and the in-process CLI tests.
// args excludes the program name. Returns the process exit code.
int cli_main(const std::vector<std::string>& args);

} // namespace sdprop
