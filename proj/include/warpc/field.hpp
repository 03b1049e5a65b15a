// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.

#ifndef WARPC_FIELD_HPP
#define WARPC_FIELD_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace warpc {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
    double norm2() const { return x * x + y * y; }
};

/// Dense per-pixel 2D displacement grid. Component x is the horizontal
/// displacement (along columns), y the vertical one (along rows). Pixel
/// centers sit at integer coordinates, origin at the top-left center.
struct FlowField {
    int height = 0;
    int width = 0;
    std::vector<Vec2> data;

    FlowField() = default;
    FlowField(int h, int w, Vec2 fill = {0.0, 0.0})
        : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

    Vec2& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    const Vec2& at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return data.size(); }
    bool same_shape(const FlowField& o) const { return height == o.height && width == o.width; }

    bool all_finite() const {
        for (const Vec2& v : data)
            if (!std::isfinite(v.x) || !std::isfinite(v.y)) return false;
        return true;
    }
};

/// Dense per-pixel absolute target coordinates: M(x) = x + F(x).
struct MappingField {
    int height = 0;
    int width = 0;
    std::vector<Vec2> data;

    MappingField() = default;
    MappingField(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w) {}

    Vec2& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    const Vec2& at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return data.size(); }
};

/// h x w x c grid of real values; images live here with values in [0,1].
struct ScalarField {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    ScalarField() = default;
    ScalarField(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {}

    double& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    size_t size() const { return data.size(); }
    bool same_shape(const ScalarField& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

/// Per-pixel boolean tracking in-bounds bilinear sampling through warps.
struct ValidityMask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data;

    ValidityMask() = default;
    ValidityMask(int h, int w, bool fill = true)
        : height(h), width(w), data(static_cast<size_t>(h) * w, fill ? 1 : 0) {}

    uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return data.size(); }

    size_t count() const {
        size_t n = 0;
        for (uint8_t v : data) n += v;
        return n;
    }

    ValidityMask operator&(const ValidityMask& o) const {
        ValidityMask out(height, width);
        for (size_t i = 0; i < data.size(); ++i) out.data[i] = data[i] & o.data[i];
        return out;
    }

    /// True if every pixel valid in this mask is also valid in `o`.
    bool subset_of(const ValidityMask& o) const {
        for (size_t i = 0; i < data.size(); ++i)
            if (data[i] && !o.data[i]) return false;
        return true;
    }
};

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace warpc

#endif  // WARPC_FIELD_HPP
