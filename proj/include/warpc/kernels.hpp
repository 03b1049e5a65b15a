// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.
//
// Per-pixel compute kernels. Every kernel comes in two variants: an OpenMP
// one used by the library and a serial reference kept for testing and
// benchmarking. Parallel variants only ever write disjoint output elements
// and all reductions run serially over precomputed buffers, so serial and
// parallel results are bit-identical for any thread count.

#ifndef WARPC_KERNELS_HPP
#define WARPC_KERNELS_HPP

#include <cstdint>

#include "warpc/field.hpp"

namespace warpc::kernels {

/// Bilinear sample of a c-channel grid at position p. Returns false (and
/// zero-fills out) when p leaves the pixel-center hull [0,w-1]x[0,h-1].
bool sample_bilinear(const double* src, int h, int w, int c, Vec2 p, double* out);

/// Spatial derivative of the bilinear interpolant at p: dout[k*2+0] is
/// d(channel k)/dx, dout[k*2+1] is d(channel k)/dy. Returns sample validity.
bool sample_bilinear_grad(const double* src, int h, int w, int c, Vec2 p,
                          double* out, double* dout);

/// Gather: out[i] = bilinear(src, pos[i]) for n positions, c channels.
void gather_serial(const double* src, int h, int w, int c, const Vec2* pos,
                   size_t n, double* out, uint8_t* valid);
void gather_omp(const double* src, int h, int w, int c, const Vec2* pos,
                size_t n, double* out, uint8_t* valid);

/// Adjoint of gather: scatter val[i] into dst with the bilinear weights of
/// pos[i]. Skips entries with valid[i] == 0. Serial only: scatters collide.
void scatter_serial(double* dst, int h, int w, int c, const Vec2* pos,
                    size_t n, const double* val, const uint8_t* valid);

/// Align-corners bilinear resize of a c-channel grid.
void resize_bilinear_serial(const double* src, int sh, int sw, int c,
                            double* dst, int dh, int dw);
void resize_bilinear_omp(const double* src, int sh, int sw, int c,
                         double* dst, int dh, int dw);

/// Separable Gaussian blur with zero padding; kernel truncated at
/// radius = max(1, ceil(3*sigma)). src and dst may not alias.
void gaussian_blur_serial(const double* src, int h, int w, int c, double sigma, double* dst);
void gaussian_blur_omp(const double* src, int h, int w, int c, double sigma, double* dst);

/// Serial sum; the one reduction primitive, shared by both lanes.
double sum_serial(const double* buf, size_t n);

}  // namespace warpc::kernels

#endif  // WARPC_KERNELS_HPP
