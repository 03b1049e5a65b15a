// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.

#include "warpc/flow_ops.hpp"

#include <vector>

#include "warpc/kernels.hpp"

namespace warpc {

MappingField flow_to_mapping(const FlowField& f) {
    require(f.all_finite(), "flow_to_mapping: non-finite flow");
    MappingField m(f.height, f.width);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            const Vec2& d = f.at(y, x);
            m.at(y, x) = {x + d.x, y + d.y};
        }
    return m;
}

FlowField mapping_to_flow(const MappingField& m) {
    FlowField f(m.height, m.width);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            const Vec2& p = m.at(y, x);
            f.at(y, x) = {p.x - x, p.y - y};
        }
    return f;
}

namespace {

std::vector<Vec2> sample_positions(const FlowField& f) {
    std::vector<Vec2> pos(f.size());
#pragma omp parallel for schedule(static)
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            const Vec2& d = f.at(y, x);
            pos[static_cast<size_t>(y) * f.width + x] = {x + d.x, y + d.y};
        }
    return pos;
}

}  // namespace

WarpedScalar warp(const ScalarField& t, const FlowField& f) {
    require(t.height == f.height && t.width == f.width, "warp: dimension mismatch");
    const auto pos = sample_positions(f);
    WarpedScalar out{ScalarField(t.height, t.width, t.channels), ValidityMask(t.height, t.width)};
    kernels::gather_omp(t.data.data(), t.height, t.width, t.channels, pos.data(),
                        pos.size(), out.field.data.data(), out.valid.data.data());
    return out;
}

WarpedFlow warp(const FlowField& t, const FlowField& f) {
    require(t.same_shape(f), "warp: dimension mismatch");
    const auto pos = sample_positions(f);
    WarpedFlow out{FlowField(t.height, t.width), ValidityMask(t.height, t.width)};
    kernels::gather_omp(&t.data[0].x, t.height, t.width, 2, pos.data(),
                        pos.size(), &out.field.data[0].x, out.valid.data.data());
    return out;
}

WarpedFlow compose_flows(const FlowField& f12, const FlowField& f23) {
    require(f12.same_shape(f23), "compose_flows: dimension mismatch");
    WarpedFlow w = warp(f23, f12);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < f12.height; ++y)
        for (int x = 0; x < f12.width; ++x)
            w.field.at(y, x) += f12.at(y, x);
    return w;
}

namespace {

inline std::pair<int, int> crop_offsets(int h, int w, int s) {
    require(s > 0 && s <= h && s <= w, "central_crop: size exceeds dimensions");
    return {(h - s) / 2, (w - s) / 2};
}

}  // namespace

ScalarField central_crop(const ScalarField& t, int s) {
    const auto [oy, ox] = crop_offsets(t.height, t.width, s);
    ScalarField out(s, s, t.channels);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
            for (int c = 0; c < t.channels; ++c)
                out.at(y, x, c) = t.at(y + oy, x + ox, c);
    return out;
}

FlowField central_crop(const FlowField& f, int s) {
    const auto [oy, ox] = crop_offsets(f.height, f.width, s);
    FlowField out(s, s);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
            out.at(y, x) = f.at(y + oy, x + ox);
    return out;
}

ValidityMask central_crop(const ValidityMask& m, int s) {
    const auto [oy, ox] = crop_offsets(m.height, m.width, s);
    ValidityMask out(s, s);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
            out.at(y, x) = m.at(y + oy, x + ox);
    return out;
}

FlowField warp_adjoint(const FlowField& g, const FlowField& f) {
    require(g.same_shape(f), "warp_adjoint: dimension mismatch");
    const auto pos = sample_positions(f);
    FlowField out(f.height, f.width);
    kernels::scatter_serial(&out.data[0].x, f.height, f.width, 2, pos.data(),
                            pos.size(), &g.data[0].x, nullptr);
    return out;
}

FlowField resize_flow(const FlowField& f, int new_h, int new_w) {
    require(new_h > 0 && new_w > 0, "resize_flow: non-positive target dims");
    if (new_h == f.height && new_w == f.width) return f;
    FlowField out(new_h, new_w);
    kernels::resize_bilinear_omp(&f.data[0].x, f.height, f.width, 2,
                                 &out.data[0].x, new_h, new_w);
    const double su = static_cast<double>(new_w) / f.width;
    const double sv = static_cast<double>(new_h) / f.height;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < new_h; ++y)
        for (int x = 0; x < new_w; ++x) {
            Vec2& d = out.at(y, x);
            d.x *= su;
            d.y *= sv;
        }
    return out;
}

}  // namespace warpc
