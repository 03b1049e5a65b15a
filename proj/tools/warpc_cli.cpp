// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.

#include <string>
#include <vector>

#include "warpc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return warpc::run_cli(args);
}
