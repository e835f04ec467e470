#pragma once

#include <string>
#include <string_view>

namespace corpuskit {

// Runs `command` through the shell with `input` on stdin and returns its
// stdout. Throws Error on a non-zero exit status.
std::string run_command(const std::string& command, std::string_view input);

}  // namespace corpuskit
