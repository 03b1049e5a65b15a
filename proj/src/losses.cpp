// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.

#include "warpc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "warpc/kernels.hpp"

namespace warpc {

namespace {

double norm_of(Vec2 r, Norm n) {
    return n == Norm::kL2Vector ? r.norm() : std::abs(r.x) + std::abs(r.y);
}

// Subgradient at 0 is taken as 0 so exact minima have exactly zero gradient.
Vec2 dnorm(Vec2 r, Norm n) {
    if (n == Norm::kL2Vector) {
        const double m = r.norm();
        return m > 0.0 ? Vec2{r.x / m, r.y / m} : Vec2{0.0, 0.0};
    }
    auto sgn = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
    return {sgn(r.x), sgn(r.y)};
}

LossValue finalize(FlowField residual, ValidityMask valid, Norm norm) {
    LossValue out;
    out.valid_count = valid.count();
    std::vector<double> rho(residual.size(), 0.0);
    const long long n = static_cast<long long>(residual.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i)
        if (valid.data[i]) rho[i] = norm_of(residual.data[i], norm);
    out.scalar = out.valid_count > 0
                     ? kernels::sum_serial(rho.data(), rho.size()) / out.valid_count
                     : 0.0;
    out.residual = std::move(residual);
    out.valid = std::move(valid);
    return out;
}

void check_shapes(const FlowField& a, const FlowField& b, const char* what) {
    require(a.same_shape(b), what);
}

}  // namespace

LossValue forward_backward_loss(const FlowField& f_ij, const FlowField& f_ji,
                                const LossConfig& cfg) {
    check_shapes(f_ij, f_ji, "forward_backward_loss: dimension mismatch");
    WarpedFlow wf = warp(f_ji, f_ij);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(wf.field.size()); ++i)
        wf.field.data[i] += f_ij.data[i];
    return finalize(std::move(wf.field), std::move(wf.valid), cfg.norm);
}

LossValue warp_supervision_loss(const FlowField& f_ipi, const FlowField& w,
                                const LossConfig& cfg) {
    check_shapes(f_ipi, w, "warp_supervision_loss: dimension mismatch");
    FlowField r(f_ipi.height, f_ipi.width);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(r.size()); ++i)
        r.data[i] = f_ipi.data[i] - w.data[i];
    return finalize(std::move(r), ValidityMask(f_ipi.height, f_ipi.width, true), cfg.norm);
}

LossValue ipj_bipath_residual(const FlowField& f_ipj, const FlowField& f_ij,
                              const FlowField& w, const LossConfig& cfg) {
    check_shapes(f_ipj, f_ij, "ipj_bipath_residual: dimension mismatch");
    check_shapes(f_ipj, w, "ipj_bipath_residual: dimension mismatch");
    WarpedFlow wf = warp(f_ij, w);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(wf.field.size()); ++i)
        wf.field.data[i] = f_ipj.data[i] - w.data[i] - wf.field.data[i];
    return finalize(std::move(wf.field), std::move(wf.valid), cfg.norm);
}

LossValue ji_bipath_loss(const FlowField& f_jip, const FlowField& f_ji,
                         const FlowField& w, const LossConfig& cfg) {
    check_shapes(f_jip, f_ji, "ji_bipath_loss: dimension mismatch");
    check_shapes(f_jip, w, "ji_bipath_loss: dimension mismatch");
    WarpedFlow wf = warp(w, f_jip);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(wf.field.size()); ++i)
        wf.field.data[i] = f_jip.data[i] + wf.field.data[i] - f_ji.data[i];
    return finalize(std::move(wf.field), std::move(wf.valid), cfg.norm);
}

namespace {

struct WBipathParts {
    FlowField residual;
    FlowField warped_ji;  // phi_{F_I'J}(F_JI)
    ValidityMask valid;
};

WBipathParts w_bipath_parts(const FlowField& f_ipj, const FlowField& f_ji,
                            const FlowField& w) {
    require(f_ipj.same_shape(f_ji) && f_ipj.same_shape(w), "w_bipath: dimension mismatch");
    WarpedFlow wf = warp(f_ji, f_ipj);
    WBipathParts parts;
    parts.warped_ji = wf.field;
    parts.valid = std::move(wf.valid);
    parts.residual = FlowField(f_ipj.height, f_ipj.width);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(parts.residual.size()); ++i)
        parts.residual.data[i] = f_ipj.data[i] + parts.warped_ji.data[i] - w.data[i];
    return parts;
}

}  // namespace

LossValue w_bipath_loss(const FlowField& f_ipj, const FlowField& f_ji,
                        const FlowField& w, const LossConfig& cfg) {
    WBipathParts parts = w_bipath_parts(f_ipj, f_ji, w);
    return finalize(std::move(parts.residual), std::move(parts.valid), cfg.norm);
}

VisibilityMask visibility_mask(const FlowField& f_ipj, const FlowField& f_ji,
                               const FlowField& w, const LossConfig& cfg) {
    require(cfg.alpha1 >= 0.0 && cfg.alpha2 >= 0.0, "visibility_mask: negative alpha");
    WBipathParts parts = w_bipath_parts(f_ipj, f_ji, w);
    VisibilityMask mask(f_ipj.height, f_ipj.width);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(mask.size()); ++i) {
        const double lhs = parts.residual.data[i].norm2();
        const double rhs = cfg.alpha2 + cfg.alpha1 * (f_ipj.data[i].norm2() +
                                                      parts.warped_ji.data[i].norm2() +
                                                      w.data[i].norm2());
        mask.data[i] = (parts.valid.data[i] && lhs < rhs) ? 1 : 0;
    }
    return mask;
}

LossValue w_bipath_visibility_loss(const FlowField& f_ipj, const FlowField& f_ji,
                                   const FlowField& w, const LossConfig& cfg) {
    VisibilityMask mask = visibility_mask(f_ipj, f_ji, w, cfg);
    WBipathParts parts = w_bipath_parts(f_ipj, f_ji, w);
    return finalize(std::move(parts.residual), std::move(mask), cfg.norm);
}

LossValue cycle_loss(CycleStart start, const FlowField& f_ij, const FlowField& f_jip,
                     const FlowField& w, const LossConfig& cfg) {
    require(f_ij.same_shape(f_jip) && f_ij.same_shape(w), "cycle_loss: dimension mismatch");
    WarpedFlow first, second;
    switch (start) {
        case CycleStart::kI:
            first = compose_flows(f_ij, f_jip);
            second = compose_flows(first.field, w);
            break;
        case CycleStart::kIPrime:
            first = compose_flows(w, f_ij);
            second = compose_flows(first.field, f_jip);
            break;
        case CycleStart::kJ:
            first = compose_flows(f_jip, w);
            second = compose_flows(first.field, f_ij);
            break;
    }
    return finalize(std::move(second.field), first.valid & second.valid, cfg.norm);
}

WarpcResult warpc_loss(const FlowField& f_ipj, const FlowField& f_ji,
                       const FlowField& f_ipi, const FlowField& w,
                       const LossConfig& cfg) {
    LossValue vis = w_bipath_visibility_loss(f_ipj, f_ji, w, cfg);
    const LossValue sup = warp_supervision_loss(f_ipi, w, cfg);
    WarpcResult out;
    out.w_vis_value = vis.scalar;
    out.warp_sup_value = sup.scalar;
    out.lambda = sup.scalar > 0.0 ? vis.scalar / sup.scalar : 0.0;
    out.total = std::move(vis);
    out.total.scalar = out.w_vis_value + out.lambda * out.warp_sup_value;
    return out;
}

// ---------------------------------------------------------------------------
// Photometric loss
// ---------------------------------------------------------------------------

namespace {

struct SsimMaps {
    // Per-channel coefficient fields so that dS(q)/dY(r) factors as
    // G(q-r) * (c_mu(q) + c_y(q) Y(r) + c_x(q) X(r)).
    ScalarField s;
    ScalarField c_mu;
    ScalarField c_y;
    ScalarField c_x;
};

constexpr double kSsimSigma = 1.5;  // radius ceil(3*sigma) = 5, an 11-px window
constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;

SsimMaps ssim_maps(const ScalarField& x, const ScalarField& y) {
    const int h = x.height, w = x.width, c = x.channels;
    const size_t n = static_cast<size_t>(h) * w * c;
    auto blur = [&](const std::vector<double>& src) {
        std::vector<double> dst(n);
        kernels::gaussian_blur_omp(src.data(), h, w, c, kSsimSigma, dst.data());
        return dst;
    };
    std::vector<double> xx(n), yy(n), xy(n);
    for (size_t i = 0; i < n; ++i) {
        xx[i] = x.data[i] * x.data[i];
        yy[i] = y.data[i] * y.data[i];
        xy[i] = x.data[i] * y.data[i];
    }
    const auto mx = blur(x.data), my = blur(y.data);
    const auto mxx = blur(xx), myy = blur(yy), mxy = blur(xy);

    SsimMaps maps{ScalarField(h, w, c), ScalarField(h, w, c), ScalarField(h, w, c),
                  ScalarField(h, w, c)};
    for (size_t i = 0; i < n; ++i) {
        const double mux = mx[i], muy = my[i];
        const double sx2 = mxx[i] - mux * mux;
        const double sy2 = myy[i] - muy * muy;
        const double sxy = mxy[i] - mux * muy;
        const double a1 = 2.0 * mux * muy + kSsimC1;
        const double a2 = 2.0 * sxy + kSsimC2;
        const double b1 = mux * mux + muy * muy + kSsimC1;
        const double b2 = sx2 + sy2 + kSsimC2;
        const double s = (a1 * a2) / (b1 * b2);
        maps.s.data[i] = s;
        const double ds_da1 = a2 / (b1 * b2);
        const double ds_da2 = a1 / (b1 * b2);
        const double ds_db1 = -s / b1;
        const double ds_db2 = -s / b2;
        const double ds_dmuy = ds_da1 * 2.0 * mux + ds_db1 * 2.0 * muy;
        const double ds_dsy2 = ds_db2;
        const double ds_dsxy = ds_da2 * 2.0;
        maps.c_mu.data[i] = ds_dmuy - ds_dsy2 * 2.0 * muy - ds_dsxy * mux;
        maps.c_y.data[i] = ds_dsy2 * 2.0;
        maps.c_x.data[i] = ds_dsxy;
    }
    return maps;
}

}  // namespace

LossValue photometric_loss(const ScalarField& i, const ScalarField& j,
                           const FlowField& f_ij, const LossConfig& cfg) {
    require(i.same_shape(j), "photometric_loss: image dimension mismatch");
    require(i.height == f_ij.height && i.width == f_ij.width,
            "photometric_loss: flow dimension mismatch");
    WarpedScalar wj = warp(j, f_ij);
    FlowField rho(i.height, i.width);  // (rho, 0) per pixel
    if (cfg.photometric == PhotometricKind::kCharbonnier) {
        const double eps2 = cfg.charbonnier_eps * cfg.charbonnier_eps;
#pragma omp parallel for schedule(static)
        for (int y = 0; y < i.height; ++y)
            for (int x = 0; x < i.width; ++x) {
                double acc = 0.0;
                for (int k = 0; k < i.channels; ++k) {
                    const double d = i.at(y, x, k) - wj.field.at(y, x, k);
                    acc += std::sqrt(d * d + eps2);
                }
                rho.at(y, x) = {acc / i.channels, 0.0};
            }
    } else {
        const SsimMaps maps = ssim_maps(i, wj.field);
#pragma omp parallel for schedule(static)
        for (int y = 0; y < i.height; ++y)
            for (int x = 0; x < i.width; ++x) {
                double acc = 0.0;
                for (int k = 0; k < i.channels; ++k)
                    acc += (1.0 - maps.s.at(y, x, k)) * 0.5;
                rho.at(y, x) = {acc / i.channels, 0.0};
            }
    }
    LossValue out;
    out.valid = std::move(wj.valid);
    out.valid_count = out.valid.count();
    std::vector<double> buf(rho.size(), 0.0);
    for (size_t k = 0; k < rho.size(); ++k)
        if (out.valid.data[k]) buf[k] = rho.data[k].x;
    out.scalar = out.valid_count > 0
                     ? kernels::sum_serial(buf.data(), buf.size()) / out.valid_count
                     : 0.0;
    out.residual = std::move(rho);
    return out;
}

// ---------------------------------------------------------------------------
// Gradients
// ---------------------------------------------------------------------------

namespace {

std::vector<Vec2> positions_of(const FlowField& f) {
    std::vector<Vec2> pos(f.size());
#pragma omp parallel for schedule(static)
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x)
            pos[static_cast<size_t>(y) * f.width + x] = {x + f.at(y, x).x, y + f.at(y, x).y};
    return pos;
}

/// Upstream gradient into the residual: (1/N) dnorm(r) on valid pixels.
FlowField upstream(const LossValue& v, Norm norm) {
    FlowField g(v.residual.height, v.residual.width);
    if (v.valid_count == 0) return g;
    const double inv_n = 1.0 / static_cast<double>(v.valid_count);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(g.size()); ++i)
        if (v.valid.data[i]) g.data[i] = dnorm(v.residual.data[i], norm) * inv_n;
    return g;
}

/// Accumulates J_t(p)^T g into out, with J_t the spatial Jacobian of the
/// bilinear interpolant of t at the sample position: the coordinate path of
/// a warp, skipped entirely under stop-gradient.
void add_jacobian_path(const FlowField& t, const std::vector<Vec2>& pos,
                       const FlowField& g, FlowField& out) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(g.size()); ++i) {
        const Vec2 gi = g.data[i];
        if (gi.x == 0.0 && gi.y == 0.0) continue;
        double val[2], dval[4];
        if (!kernels::sample_bilinear_grad(&t.data[0].x, t.height, t.width, 2, pos[i],
                                           val, dval))
            continue;
        // dval = [dtx/dx, dtx/dy, dty/dx, dty/dy]
        out.data[i].x += dval[0] * gi.x + dval[2] * gi.y;
        out.data[i].y += dval[1] * gi.x + dval[3] * gi.y;
    }
}

FlowField scatter_at(const std::vector<Vec2>& pos, const FlowField& g, int h, int w) {
    FlowField out(h, w);
    kernels::scatter_serial(&out.data[0].x, h, w, 2, pos.data(), pos.size(),
                            &g.data[0].x, nullptr);
    return out;
}

const FlowField& arg(const FlowField* p, const char* name) {
    if (!p) throw std::invalid_argument(std::string("loss_gradient: missing input ") + name);
    return *p;
}

LossGradient grad_warp_supervision(const LossInputs& in, const LossConfig& cfg) {
    const LossValue v = warp_supervision_loss(arg(in.f_ipi, "f_ipi"), arg(in.w, "w"), cfg);
    LossGradient out{{{"f_ipi", upstream(v, cfg.norm)}}};
    out.value = v.scalar;
    out.valid_count = v.valid_count;
    return out;
}

LossGradient grad_forward_backward(const LossInputs& in, const LossConfig& cfg) {
    const FlowField& f_ij = arg(in.f_ij, "f_ij");
    const FlowField& f_ji = arg(in.f_ji, "f_ji");
    const LossValue v = forward_backward_loss(f_ij, f_ji, cfg);
    const FlowField g = upstream(v, cfg.norm);
    const auto pos = positions_of(f_ij);
    FlowField g_ij = g;
    if (!cfg.stop_gradient_through_warping_flow) add_jacobian_path(f_ji, pos, g, g_ij);
    LossGradient out{
        {{"f_ij", std::move(g_ij)}, {"f_ji", scatter_at(pos, g, f_ij.height, f_ij.width)}}};
    out.value = v.scalar;
    out.valid_count = v.valid_count;
    return out;
}

LossGradient grad_ipj(const LossInputs& in, const LossConfig& cfg) {
    const FlowField& f_ipj = arg(in.f_ipj, "f_ipj");
    const FlowField& f_ij = arg(in.f_ij, "f_ij");
    const FlowField& w = arg(in.w, "w");
    const LossValue v = ipj_bipath_residual(f_ipj, f_ij, w, cfg);
    const FlowField g = upstream(v, cfg.norm);
    FlowField g_ij = scatter_at(positions_of(w), g, w.height, w.width);
    for (Vec2& d : g_ij.data) d = d * -1.0;
    LossGradient out{{{"f_ipj", g}, {"f_ij", std::move(g_ij)}}};
    out.value = v.scalar;
    out.valid_count = v.valid_count;
    return out;
}

LossGradient grad_ji(const LossInputs& in, const LossConfig& cfg) {
    const FlowField& f_jip = arg(in.f_jip, "f_jip");
    const FlowField& f_ji = arg(in.f_ji, "f_ji");
    const FlowField& w = arg(in.w, "w");
    const LossValue v = ji_bipath_loss(f_jip, f_ji, w, cfg);
    const FlowField g = upstream(v, cfg.norm);
    FlowField g_jip = g;
    if (!cfg.stop_gradient_through_warping_flow)
        add_jacobian_path(w, positions_of(f_jip), g, g_jip);
    FlowField g_ji(g.height, g.width);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(g.size()); ++i)
        g_ji.data[i] = g.data[i] * -1.0;
    LossGradient out{{{"f_jip", std::move(g_jip)}, {"f_ji", std::move(g_ji)}}};
    out.value = v.scalar;
    out.valid_count = v.valid_count;
    return out;
}

LossGradient grad_w_bipath(const LossInputs& in, const LossConfig& cfg, bool with_mask) {
    const FlowField& f_ipj = arg(in.f_ipj, "f_ipj");
    const FlowField& f_ji = arg(in.f_ji, "f_ji");
    const FlowField& w = arg(in.w, "w");
    const LossValue v = with_mask ? w_bipath_visibility_loss(f_ipj, f_ji, w, cfg)
                                  : w_bipath_loss(f_ipj, f_ji, w, cfg);
    const FlowField g = upstream(v, cfg.norm);
    const auto pos = positions_of(f_ipj);
    FlowField g_ipj = g;
    if (!cfg.stop_gradient_through_warping_flow) add_jacobian_path(f_ji, pos, g, g_ipj);
    LossGradient out{{{"f_ipj", std::move(g_ipj)},
                      {"f_ji", scatter_at(pos, g, f_ipj.height, f_ipj.width)}}};
    out.value = v.scalar;
    out.valid_count = v.valid_count;
    return out;
}

LossGradient grad_cycle(CycleStart start, const LossInputs& in, const LossConfig& cfg) {
    const FlowField& f_ij = arg(in.f_ij, "f_ij");
    const FlowField& f_jip = arg(in.f_jip, "f_jip");
    const FlowField& w = arg(in.w, "w");
    const LossValue v = cycle_loss(start, f_ij, f_jip, w, cfg);
    const FlowField g = upstream(v, cfg.norm);
    const int h = f_ij.height, wd = f_ij.width;
    const bool stop = cfg.stop_gradient_through_warping_flow;

    // The chain is r = c1 + phi_{c1}(last) with c1 = first + phi_{first}(inner).
    const FlowField* first = nullptr;
    const FlowField* inner = nullptr;
    const FlowField* last = nullptr;
    switch (start) {
        case CycleStart::kI: first = &f_ij; inner = &f_jip; last = &w; break;
        case CycleStart::kIPrime: first = &w; inner = &f_ij; last = &f_jip; break;
        case CycleStart::kJ: first = &f_jip; inner = &w; last = &f_ij; break;
    }
    const FlowField c1 = compose_flows(*first, *inner).field;
    const auto pos2 = positions_of(c1);
    const auto pos1 = positions_of(*first);

    FlowField g_c1 = g;
    if (!stop) add_jacobian_path(*last, pos2, g, g_c1);

    FlowField g_last = scatter_at(pos2, g, h, wd);
    FlowField g_inner = scatter_at(pos1, g_c1, h, wd);
    FlowField g_first = g_c1;
    if (!stop) add_jacobian_path(*inner, pos1, g_c1, g_first);

    LossGradient out;
    switch (start) {
        case CycleStart::kI:
            out.args = {{"f_ij", std::move(g_first)}, {"f_jip", std::move(g_inner)}};
            break;
        case CycleStart::kIPrime:
            out.args = {{"f_ij", std::move(g_inner)}, {"f_jip", std::move(g_last)}};
            break;
        case CycleStart::kJ:
            out.args = {{"f_ij", std::move(g_last)}, {"f_jip", std::move(g_first)}};
            break;
    }
    out.value = v.scalar;
    out.valid_count = v.valid_count;
    return out;
}

LossGradient grad_photometric(const LossInputs& in, const LossConfig& cfg) {
    require(in.img_i && in.img_j, "loss_gradient: photometric needs images");
    const ScalarField& i = *in.img_i;
    const ScalarField& j = *in.img_j;
    const FlowField& f = arg(in.f_ij, "f_ij");
    const WarpedScalar wj = warp(j, f);
    const size_t npix = static_cast<size_t>(i.height) * i.width;
    const size_t nvalid = wj.valid.count();
    FlowField g_f(i.height, i.width);
    const LossValue value = photometric_loss(i, j, f, cfg);
    if (nvalid == 0) {
        LossGradient empty{{{"f_ij", std::move(g_f)}}};
        return empty;
    }
    const double inv = 1.0 / (static_cast<double>(nvalid) * i.channels);

    ScalarField dldy(i.height, i.width, i.channels);  // dL/dJw per channel
    if (cfg.photometric == PhotometricKind::kCharbonnier) {
        const double eps2 = cfg.charbonnier_eps * cfg.charbonnier_eps;
#pragma omp parallel for schedule(static)
        for (long long p = 0; p < static_cast<long long>(npix); ++p) {
            if (!wj.valid.data[p]) continue;
            for (int k = 0; k < i.channels; ++k) {
                const double d = i.data[p * i.channels + k] - wj.field.data[p * i.channels + k];
                dldy.data[p * i.channels + k] = -inv * d / std::sqrt(d * d + eps2);
            }
        }
    } else {
        const SsimMaps maps = ssim_maps(i, wj.field);
        // Upstream into S is -inv/2 on valid pixels; push each coefficient
        // term back through the blur (zero-padded blur is self-adjoint).
        const size_t n = dldy.size();
        std::vector<double> wmu(n, 0.0), wy(n, 0.0), wx(n, 0.0);
        for (size_t p = 0; p < npix; ++p) {
            if (!wj.valid.data[p]) continue;
            for (int k = 0; k < i.channels; ++k) {
                const size_t q = p * i.channels + k;
                wmu[q] = -0.5 * inv * maps.c_mu.data[q];
                wy[q] = -0.5 * inv * maps.c_y.data[q];
                wx[q] = -0.5 * inv * maps.c_x.data[q];
            }
        }
        std::vector<double> bmu(n), by(n), bx(n);
        kernels::gaussian_blur_omp(wmu.data(), i.height, i.width, i.channels, kSsimSigma,
                                   bmu.data());
        kernels::gaussian_blur_omp(wy.data(), i.height, i.width, i.channels, kSsimSigma,
                                   by.data());
        kernels::gaussian_blur_omp(wx.data(), i.height, i.width, i.channels, kSsimSigma,
                                   bx.data());
        for (size_t q = 0; q < n; ++q)
            dldy.data[q] = bmu[q] + by[q] * wj.field.data[q] + bx[q] * i.data[q];
    }

    // Chain through the sampling coordinates.
    const auto pos = positions_of(f);
#pragma omp parallel for schedule(static)
    for (long long p = 0; p < static_cast<long long>(npix); ++p) {
        if (!wj.valid.data[p]) continue;
        std::vector<double> val(i.channels), dval(static_cast<size_t>(i.channels) * 2);
        if (!kernels::sample_bilinear_grad(j.data.data(), j.height, j.width, j.channels,
                                           pos[p], val.data(), dval.data()))
            continue;
        double gx = 0.0, gy = 0.0;
        for (int k = 0; k < i.channels; ++k) {
            gx += dldy.data[p * i.channels + k] * dval[2 * k + 0];
            gy += dldy.data[p * i.channels + k] * dval[2 * k + 1];
        }
        g_f.data[p] = {gx, gy};
    }
    LossGradient out{{{"f_ij", std::move(g_f)}}};
    out.value = value.scalar;
    out.valid_count = value.valid_count;
    return out;
}

LossGradient grad_warpc(const LossInputs& in, const LossConfig& cfg) {
    const WarpcResult r = warpc_loss(arg(in.f_ipj, "f_ipj"), arg(in.f_ji, "f_ji"),
                                     arg(in.f_ipi, "f_ipi"), arg(in.w, "w"), cfg);
    LossGradient vis = grad_w_bipath(in, cfg, /*with_mask=*/true);
    LossGradient sup = grad_warp_supervision(in, cfg);
    FlowField g_ipi = std::move(sup.args[0].second);
    for (Vec2& v : g_ipi.data) v = v * r.lambda;
    vis.args.emplace_back("f_ipi", std::move(g_ipi));
    vis.value = r.total.scalar;
    vis.valid_count = r.total.valid_count;
    return vis;
}

}  // namespace

const FlowField* LossGradient::find(const std::string& name) const {
    for (const auto& [n, f] : args)
        if (n == name) return &f;
    return nullptr;
}

LossGradient loss_gradient(LossId id, const LossInputs& in, const LossConfig& cfg) {
    switch (id) {
        case LossId::kPhotometric: return grad_photometric(in, cfg);
        case LossId::kForwardBackward: return grad_forward_backward(in, cfg);
        case LossId::kWarpSupervision: return grad_warp_supervision(in, cfg);
        case LossId::kIpjBipath: return grad_ipj(in, cfg);
        case LossId::kJiBipath: return grad_ji(in, cfg);
        case LossId::kWBipath: return grad_w_bipath(in, cfg, false);
        case LossId::kWBipathVisibility: return grad_w_bipath(in, cfg, true);
        case LossId::kCycleI: return grad_cycle(CycleStart::kI, in, cfg);
        case LossId::kCycleIPrime: return grad_cycle(CycleStart::kIPrime, in, cfg);
        case LossId::kCycleJ: return grad_cycle(CycleStart::kJ, in, cfg);
        case LossId::kWarpc: return grad_warpc(in, cfg);
    }
    throw std::invalid_argument("loss_gradient: unknown loss id");
}

// ---------------------------------------------------------------------------
// Bias bound
// ---------------------------------------------------------------------------

BiasBoundReport ji_bias_bound_check(const FlowField& f_jip, const FlowField& f_ji,
                                    const FlowField& w, Vec2 b, const LossConfig& cfg) {
    require(f_jip.same_shape(f_ji) && f_jip.same_shape(w),
            "ji_bias_bound_check: dimension mismatch");
    const int h = w.height, wd = w.width;

    // Residuals are evaluated with the prediction difference grouped first:
    // (F_JI' + b) - (F_JI + b) == F_JI' - F_JI holds exactly this way, so a
    // pure-translation W yields a measured delta of exactly zero.
    FlowField f_jip_b = f_jip;
    for (Vec2& v : f_jip_b.data) v += b;
    const WarpedFlow warped_base = warp(w, f_jip);
    const WarpedFlow warped_biased = warp(w, f_jip_b);
    FlowField r_base(h, wd), r_biased(h, wd);
    for (size_t i = 0; i < r_base.size(); ++i) {
        const Vec2 diff = f_jip.data[i] - f_ji.data[i];
        r_base.data[i] = diff + warped_base.field.data[i];
        r_biased.data[i] = diff + warped_biased.field.data[i];
    }
    const ValidityMask common = warped_base.valid & warped_biased.valid;
    const size_t n = common.count();

    BiasBoundReport rep;
    rep.common_valid = n;
    if (n == 0) return rep;

    auto masked_mean = [&](const FlowField& r) {
        std::vector<double> buf(r.size(), 0.0);
        for (size_t i = 0; i < r.size(); ++i)
            if (common.data[i]) buf[i] = norm_of(r.data[i], cfg.norm);
        return kernels::sum_serial(buf.data(), buf.size()) / n;
    };
    rep.measured = masked_mean(r_biased) - masked_mean(r_base);

    // DW by central differences, 1-px step, one-sided at the borders.
    FlowField dwb(h, wd);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < wd; ++x) {
            const int xm = std::max(x - 1, 0), xp = std::min(x + 1, wd - 1);
            const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
            const Vec2 dx = (w.at(y, xp) - w.at(y, xm)) * (1.0 / (xp - xm));
            const Vec2 dy = (w.at(yp, x) - w.at(ym, x)) * (1.0 / (yp - ym));
            dwb.at(y, x) = {dx.x * b.x + dy.x * b.y, dx.y * b.x + dy.y * b.y};
        }
    const WarpedFlow warped = warp(dwb, f_jip);
    rep.bound = masked_mean(warped.field);
    return rep;
}

// ---------------------------------------------------------------------------
// Config and names
// ---------------------------------------------------------------------------

std::string LossConfig::to_json() const {
    nlohmann::json j;
    j["norm"] = norm == Norm::kL2Vector ? "l2" : "l1";
    j["alpha1"] = alpha1;
    j["alpha2"] = alpha2;
    j["stop_gradient_through_warping_flow"] = stop_gradient_through_warping_flow;
    j["photometric"] = photometric == PhotometricKind::kCharbonnier ? "charbonnier" : "ssim";
    j["charbonnier_eps"] = charbonnier_eps;
    return j.dump(2);
}

LossConfig LossConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("loss config: invalid JSON: ") + e.what());
    }
    LossConfig cfg;
    try {
        if (j.contains("norm")) {
            const std::string n = j.at("norm").get<std::string>();
            if (n == "l2")
                cfg.norm = Norm::kL2Vector;
            else if (n == "l1")
                cfg.norm = Norm::kL1;
            else
                throw std::invalid_argument("loss config: unknown norm '" + n + "'");
        }
        if (j.contains("alpha1")) cfg.alpha1 = j.at("alpha1").get<double>();
        if (j.contains("alpha2")) cfg.alpha2 = j.at("alpha2").get<double>();
        if (j.contains("stop_gradient_through_warping_flow"))
            cfg.stop_gradient_through_warping_flow =
                j.at("stop_gradient_through_warping_flow").get<bool>();
        if (j.contains("photometric")) {
            const std::string p = j.at("photometric").get<std::string>();
            if (p == "charbonnier")
                cfg.photometric = PhotometricKind::kCharbonnier;
            else if (p == "ssim")
                cfg.photometric = PhotometricKind::kSsim;
            else
                throw std::invalid_argument("loss config: unknown photometric '" + p + "'");
        }
        if (j.contains("charbonnier_eps"))
            cfg.charbonnier_eps = j.at("charbonnier_eps").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("loss config: bad field type: ") + e.what());
    }
    require(cfg.alpha1 >= 0.0 && cfg.alpha2 >= 0.0, "loss config: negative alpha");
    return cfg;
}

LossConfig LossConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

LossId loss_id_from_string(const std::string& name) {
    if (name == "photometric") return LossId::kPhotometric;
    if (name == "forward-backward") return LossId::kForwardBackward;
    if (name == "warp-supervision") return LossId::kWarpSupervision;
    if (name == "ipj-bipath") return LossId::kIpjBipath;
    if (name == "ji-bipath") return LossId::kJiBipath;
    if (name == "w-bipath") return LossId::kWBipath;
    if (name == "w-bipath-vis") return LossId::kWBipathVisibility;
    if (name == "cycle-i") return LossId::kCycleI;
    if (name == "cycle-i-prime") return LossId::kCycleIPrime;
    if (name == "cycle-j") return LossId::kCycleJ;
    if (name == "warpc") return LossId::kWarpc;
    throw std::invalid_argument("unknown loss id: " + name);
}

std::string to_string(LossId id) {
    switch (id) {
        case LossId::kPhotometric: return "photometric";
        case LossId::kForwardBackward: return "forward-backward";
        case LossId::kWarpSupervision: return "warp-supervision";
        case LossId::kIpjBipath: return "ipj-bipath";
        case LossId::kJiBipath: return "ji-bipath";
        case LossId::kWBipath: return "w-bipath";
        case LossId::kWBipathVisibility: return "w-bipath-vis";
        case LossId::kCycleI: return "cycle-i";
        case LossId::kCycleIPrime: return "cycle-i-prime";
        case LossId::kCycleJ: return "cycle-j";
        case LossId::kWarpc: return "warpc";
    }
    return "?";
}

}  // namespace warpc
