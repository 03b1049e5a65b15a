// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.
//
// Random warp sampling: homographies from corner jitter, thin-plate splines
// from a jittered 3x3 control grid, affine transforms, elastic residual
// fields, and the family mixture that produces the synthetic flow W.
//
// Coordinates are normalized per axis to [-1,1] via x_n = 2x/w - 1, so one
// normalized unit equals w/2 pixels. Rasterized flows follow the convention
// I'(x) = I(x + W(x)).

#ifndef WARPC_WARP_SAMPLING_HPP
#define WARPC_WARP_SAMPLING_HPP

#include <array>
#include <string>

#include "warpc/field.hpp"
#include "warpc/flow_ops.hpp"
#include "warpc/rng.hpp"

namespace warpc {

/// 3x3 projective matrix, normalized so h[2][2] == 1. Maps normalized source
/// coordinates to normalized target coordinates.
struct HomographyParams {
    std::array<std::array<double, 3>, 3> h{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

    Vec2 apply(Vec2 p) const {
        const double zx = h[0][0] * p.x + h[0][1] * p.y + h[0][2];
        const double zy = h[1][0] * p.x + h[1][1] * p.y + h[1][2];
        const double zw = h[2][0] * p.x + h[2][1] * p.y + h[2][2];
        return {zx / zw, zy / zw};
    }

    double det() const;
    HomographyParams inverse() const;
    /// Product applying `this` first, then `after`.
    HomographyParams then(const HomographyParams& after) const;
};

/// Thin-plate spline through a 3x3 control grid over [-1,1]^2 with kernel
/// U(r) = r^2 log(r^2) and an affine part; weights solve the standard TPS
/// system with a 1e-9 ridge on the kernel block.
struct TpsParams {
    std::array<Vec2, 9> source;
    std::array<Vec2, 9> target;
    // Per output dimension: 9 kernel weights + affine (a0 + ax*x + ay*y).
    std::array<double, 9> wx{}, wy{};
    std::array<double, 3> ax{}, ay{};

    Vec2 apply(Vec2 p) const;
};

struct AffineParams {
    double scale = 1.0;
    double rotation = 0.0;     // radians
    double shear = 0.0;        // radians, horizontal shear tan(shear)
    Vec2 translation{0, 0};    // normalized units

    /// Row-major 2x3 matrix of scale*rotation*shear then translation.
    std::array<double, 6> matrix() const;
    Vec2 apply(Vec2 p) const;
};

struct ElasticParams {
    double sigma_px = 25.0;      // smoothing of the random field
    double magnitude_px = 15.0;  // peak displacement of the smoothed field
    int region_count_min = 1;
    int region_count_max = 5;
    double spread_min_px = 10.0;       // region mask Gaussian stddev range
    double spread_max_px = 0.0;        // <= 0 means s_r / 8
};

enum class SamplingScheme { kUniform, kGaussian };

struct WarpDistributionConfig {
    double sigma_h = 0.33;              // homography/TPS jitter, normalized
    double tau = 0.45;                  // affine scale range
    double t = 0.25;                    // affine translation range
    double alpha = std::numbers::pi / 12.0;  // affine rotation/shear range
    double sigma_tps = 0.08;            // TPS range inside affine-TPS
    SamplingScheme scheme = SamplingScheme::kUniform;
    bool elastic_enabled = false;
    ElasticParams elastic;
    std::array<double, 3> family_probs{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

    static WarpDistributionConfig stage1();
    static WarpDistributionConfig stage2();

    std::string to_json() const;
    static WarpDistributionConfig from_json(const std::string& text);
    static WarpDistributionConfig load(const std::string& path);
};

/// Corners of [-1,1]^2 displaced independently per axis, 4-point DLT solve.
/// Re-samples on degeneracy; fails after 10 degenerate draws.
HomographyParams sample_homography(const WarpDistributionConfig& cfg, Rng& rng);

TpsParams sample_tps(double sigma, SamplingScheme scheme, Rng& rng);

AffineParams sample_affine(const WarpDistributionConfig& cfg, Rng& rng);

FlowField rasterize(const HomographyParams& p, int h, int w);
FlowField rasterize(const TpsParams& p, int h, int w);
FlowField rasterize(const AffineParams& p, int h, int w);

/// Smoothed random field scaled to `magnitude`, applied inside Gaussian
/// region masks (scaled to 2, clipped to 1, combined with min(1, sum)).
FlowField sample_elastic(const ElasticParams& p, int h, int w, Rng& rng);

enum class WarpFamily { kHomography, kTps, kAffineTps };

/// Draw a family (homography / TPS / affine-TPS) per the configured
/// probabilities and rasterize; composes the elastic residual when enabled.
/// `chosen` reports the drawn family when non-null.
FlowField sample_warp(const WarpDistributionConfig& cfg, int h, int w, Rng& rng,
                      WarpFamily* chosen = nullptr);

}  // namespace warpc

#endif  // WARPC_WARP_SAMPLING_HPP
