/// @file cli.hpp
/// @brief Command-line front end: run / sweep / compare / list-scenarios.
#pragma once

#include <string>
#include <vector>

namespace mmrelax {

/// Parses argv and dispatches.  Exit status: 0 on success, 1 on run failure,
/// 2 on bad arguments or config invariant violations.
int parse_and_dispatch(const std::vector<std::string>& args);

}  // namespace mmrelax
