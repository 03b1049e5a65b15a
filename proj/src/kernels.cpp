// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.

#include "warpc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace warpc::kernels {

namespace {

struct Stencil {
    int x0, y0, x1, y1;
    double fx, fy;
};

// Valid iff p lies in the pixel-center hull. Neighbors at the exact
// right/bottom edge are clamped; their weight is zero there.
inline bool stencil_at(int h, int w, Vec2 p, Stencil& s) {
    if (!(p.x >= 0.0 && p.x <= w - 1 && p.y >= 0.0 && p.y <= h - 1)) return false;
    s.x0 = static_cast<int>(std::floor(p.x));
    s.y0 = static_cast<int>(std::floor(p.y));
    s.fx = p.x - s.x0;
    s.fy = p.y - s.y0;
    s.x1 = std::min(s.x0 + 1, w - 1);
    s.y1 = std::min(s.y0 + 1, h - 1);
    return true;
}

}  // namespace

bool sample_bilinear(const double* src, int h, int w, int c, Vec2 p, double* out) {
    Stencil s;
    if (!stencil_at(h, w, p, s)) {
        std::fill(out, out + c, 0.0);
        return false;
    }
    // Factored form: exact on constant and linear fields, exact gather at
    // integer positions.
    const double* r0 = src + (static_cast<size_t>(s.y0) * w) * c;
    const double* r1 = src + (static_cast<size_t>(s.y1) * w) * c;
    for (int k = 0; k < c; ++k) {
        const double v00 = r0[s.x0 * c + k], v10 = r0[s.x1 * c + k];
        const double v01 = r1[s.x0 * c + k], v11 = r1[s.x1 * c + k];
        out[k] = v00 + s.fx * (v10 - v00) + s.fy * (v01 - v00) +
                 s.fx * s.fy * (v11 - v10 - v01 + v00);
    }
    return true;
}

bool sample_bilinear_grad(const double* src, int h, int w, int c, Vec2 p,
                          double* out, double* dout) {
    Stencil s;
    if (!stencil_at(h, w, p, s)) {
        std::fill(out, out + c, 0.0);
        std::fill(dout, dout + 2 * c, 0.0);
        return false;
    }
    const double* r0 = src + (static_cast<size_t>(s.y0) * w) * c;
    const double* r1 = src + (static_cast<size_t>(s.y1) * w) * c;
    for (int k = 0; k < c; ++k) {
        const double v00 = r0[s.x0 * c + k], v10 = r0[s.x1 * c + k];
        const double v01 = r1[s.x0 * c + k], v11 = r1[s.x1 * c + k];
        out[k] = v00 + s.fx * (v10 - v00) + s.fy * (v01 - v00) +
                 s.fx * s.fy * (v11 - v10 - v01 + v00);
        dout[2 * k + 0] = (1.0 - s.fy) * (v10 - v00) + s.fy * (v11 - v01);
        dout[2 * k + 1] = (1.0 - s.fx) * (v01 - v00) + s.fx * (v11 - v10);
    }
    return true;
}

void gather_serial(const double* src, int h, int w, int c, const Vec2* pos,
                   size_t n, double* out, uint8_t* valid) {
    for (size_t i = 0; i < n; ++i)
        valid[i] = sample_bilinear(src, h, w, c, pos[i], out + i * c) ? 1 : 0;
}

void gather_omp(const double* src, int h, int w, int c, const Vec2* pos,
                size_t n, double* out, uint8_t* valid) {
    const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < nn; ++i)
        valid[i] = sample_bilinear(src, h, w, c, pos[i], out + i * c) ? 1 : 0;
}

void scatter_serial(double* dst, int h, int w, int c, const Vec2* pos,
                    size_t n, const double* val, const uint8_t* valid) {
    for (size_t i = 0; i < n; ++i) {
        if (valid && !valid[i]) continue;
        Stencil s;
        if (!stencil_at(h, w, pos[i], s)) continue;
        const double w00 = (1.0 - s.fx) * (1.0 - s.fy);
        const double w10 = s.fx * (1.0 - s.fy);
        const double w01 = (1.0 - s.fx) * s.fy;
        const double w11 = s.fx * s.fy;
        double* r0 = dst + (static_cast<size_t>(s.y0) * w) * c;
        double* r1 = dst + (static_cast<size_t>(s.y1) * w) * c;
        for (int k = 0; k < c; ++k) {
            const double v = val[i * c + k];
            r0[s.x0 * c + k] += w00 * v;
            r0[s.x1 * c + k] += w10 * v;
            r1[s.x0 * c + k] += w01 * v;
            r1[s.x1 * c + k] += w11 * v;
        }
    }
}

namespace {

inline void resize_row(const double* src, int sh, int sw, int c,
                       double* dst, int dh, int dw, int dy) {
    const double sy = dh > 1 ? static_cast<double>(sh - 1) / (dh - 1) : 0.0;
    const double sx = dw > 1 ? static_cast<double>(sw - 1) / (dw - 1) : 0.0;
    const double y = dy * sy;
    for (int dx = 0; dx < dw; ++dx) {
        Vec2 p{dx * sx, y};
        sample_bilinear(src, sh, sw, c, p, dst + (static_cast<size_t>(dy) * dw + dx) * c);
    }
}

}  // namespace

void resize_bilinear_serial(const double* src, int sh, int sw, int c,
                            double* dst, int dh, int dw) {
    for (int dy = 0; dy < dh; ++dy) resize_row(src, sh, sw, c, dst, dh, dw, dy);
}

void resize_bilinear_omp(const double* src, int sh, int sw, int c,
                         double* dst, int dh, int dw) {
#pragma omp parallel for schedule(static)
    for (int dy = 0; dy < dh; ++dy) resize_row(src, sh, sw, c, dst, dh, dw, dy);
}

namespace {

std::vector<double> gaussian_taps(double sigma, int& radius) {
    radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> taps(2 * radius + 1);
    double s = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        taps[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        s += taps[i + radius];
    }
    for (double& t : taps) t /= s;
    return taps;
}

inline void blur_row_h(const double* src, int w, int c, const double* taps,
                       int radius, double* dst) {
    for (int x = 0; x < w; ++x) {
        for (int k = 0; k < c; ++k) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int xx = x + i;
                if (xx < 0 || xx >= w) continue;  // zero padding
                acc += taps[i + radius] * src[static_cast<size_t>(xx) * c + k];
            }
            dst[static_cast<size_t>(x) * c + k] = acc;
        }
    }
}

inline void blur_col_v(const double* src, int h, int w, int c, int x,
                       const double* taps, int radius, double* dst) {
    for (int y = 0; y < h; ++y) {
        for (int k = 0; k < c; ++k) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int yy = y + i;
                if (yy < 0 || yy >= h) continue;
                acc += taps[i + radius] * src[(static_cast<size_t>(yy) * w + x) * c + k];
            }
            dst[(static_cast<size_t>(y) * w + x) * c + k] = acc;
        }
    }
}

}  // namespace

void gaussian_blur_serial(const double* src, int h, int w, int c, double sigma, double* dst) {
    int radius;
    const auto taps = gaussian_taps(sigma, radius);
    std::vector<double> tmp(static_cast<size_t>(h) * w * c);
    for (int y = 0; y < h; ++y)
        blur_row_h(src + static_cast<size_t>(y) * w * c, w, c, taps.data(), radius,
                   tmp.data() + static_cast<size_t>(y) * w * c);
    for (int x = 0; x < w; ++x)
        blur_col_v(tmp.data(), h, w, c, x, taps.data(), radius, dst);
}

void gaussian_blur_omp(const double* src, int h, int w, int c, double sigma, double* dst) {
    int radius;
    const auto taps = gaussian_taps(sigma, radius);
    std::vector<double> tmp(static_cast<size_t>(h) * w * c);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        blur_row_h(src + static_cast<size_t>(y) * w * c, w, c, taps.data(), radius,
                   tmp.data() + static_cast<size_t>(y) * w * c);
#pragma omp parallel for schedule(static)
    for (int x = 0; x < w; ++x)
        blur_col_v(tmp.data(), h, w, c, x, taps.data(), radius, dst);
}

double sum_serial(const double* buf, size_t n) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += buf[i];
    return acc;
}

}  // namespace warpc::kernels
