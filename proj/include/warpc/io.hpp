// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.
//
// Middlebury .flo and 8-bit PNG I/O. The .flo layout is bit-exact: 4-byte
// magic float 202021.25, int32 width, int32 height, then row-major
// interleaved float32 (u,v), all little-endian. PNG images convert to [0,1]
// doubles on read and back to 8-bit on write.

#ifndef WARPC_IO_HPP
#define WARPC_IO_HPP

#include <string>

#include "warpc/field.hpp"

namespace warpc {

/// Raised for malformed or unreadable input files.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_flo(const FlowField& f, const std::string& path);
FlowField read_flo(const std::string& path);

void write_png(const ScalarField& img, const std::string& path);
ScalarField read_png(const std::string& path);

/// Masks are stored as 8-bit gray PNGs with values 0/255.
void write_mask_png(const ValidityMask& m, const std::string& path);
ValidityMask read_mask_png(const std::string& path);

}  // namespace warpc

#endif  // WARPC_IO_HPP
