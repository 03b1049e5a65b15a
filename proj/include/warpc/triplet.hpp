// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.
//
// Training-triplet construction: resize the pair to s_r, sample W, warp I
// into I', centrally crop everything to s, and photometrically jitter I'.

#ifndef WARPC_TRIPLET_HPP
#define WARPC_TRIPLET_HPP

#include "warpc/field.hpp"
#include "warpc/rng.hpp"
#include "warpc/warp_sampling.hpp"

namespace warpc {

/// Align-corners bilinear image resize.
ScalarField resize_image(const ScalarField& img, int new_h, int new_w);

struct AppearanceJitterConfig {
    bool enabled = true;
    double brightness = 0.2;       // additive, +- range
    double contrast_lo = 0.8, contrast_hi = 1.2;
    double saturation_lo = 0.8, saturation_hi = 1.2;
    double hue = 0.05;             // fraction of a full circle, +- range
    double blur_prob = 0.2;
    int blur_kernel_min = 3, blur_kernel_max = 7;  // odd sizes
    double blur_sigma_lo = 0.2, blur_sigma_hi = 2.0;
};

/// Contrast, saturation, brightness and hue adjustments plus an occasional
/// Gaussian blur. Saturation/hue are identity for single-channel images.
ScalarField appearance_jitter(const ScalarField& img, const AppearanceJitterConfig& cfg, Rng& rng);

struct Triplet {
    ScalarField i;        // s x s
    ScalarField i_prime;  // s x s, jittered
    ScalarField j;        // s x s
    FlowField w_crop;     // ground-truth flow I' -> I on the crop, pre-jitter
    ValidityMask w_valid;
};

struct TripletConfig {
    int resize_to = 750;  // s_r
    int crop_to = 520;    // s
    WarpDistributionConfig warp = WarpDistributionConfig::stage1();
    AppearanceJitterConfig jitter;
};

Triplet build_triplet(const ScalarField& i, const ScalarField& j,
                      const TripletConfig& cfg, Rng& rng);

}  // namespace warpc

#endif  // WARPC_TRIPLET_HPP
