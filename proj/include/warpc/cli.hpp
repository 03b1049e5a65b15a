// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.

#ifndef WARPC_CLI_HPP
#define WARPC_CLI_HPP

#include <string>
#include <vector>

namespace warpc {

/// Command-line dispatch. Returns 0 on success, 1 on usage errors, 2 on data
/// errors (missing files, malformed inputs, config schema violations).
int run_cli(const std::vector<std::string>& args);

}  // namespace warpc

#endif  // WARPC_CLI_HPP
