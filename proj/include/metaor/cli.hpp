#pragma once

// Command-line front end: analyze / simulate / density / report subcommands
// over the study-record JSON format, with reproducible seeded configuration
// and self-describing output directories.
//
// Exit codes: 0 success, 2 validation failure, 3 sampler failure, 4 I/O
// failure.

#include <string>
#include <vector>

namespace metaor {

int run_cli(const std::vector<std::string>& args);

} // namespace metaor
