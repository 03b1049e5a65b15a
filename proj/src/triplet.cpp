// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.

#include "warpc/triplet.hpp"

#include <algorithm>
#include <cmath>

#include "warpc/flow_ops.hpp"
#include "warpc/kernels.hpp"

namespace warpc {

ScalarField resize_image(const ScalarField& img, int new_h, int new_w) {
    require(new_h > 0 && new_w > 0, "resize_image: non-positive target dims");
    if (new_h == img.height && new_w == img.width) return img;
    ScalarField out(new_h, new_w, img.channels);
    kernels::resize_bilinear_omp(img.data.data(), img.height, img.width, img.channels,
                                 out.data.data(), new_h, new_w);
    return out;
}

namespace {

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    v = mx;
    s = mx > 0.0 ? d / mx : 0.0;
    if (d <= 0.0) {
        h = 0.0;
        return;
    }
    if (mx == r)
        h = std::fmod((g - b) / d, 6.0);
    else if (mx == g)
        h = (b - r) / d + 2.0;
    else
        h = (r - g) / d + 4.0;
    h /= 6.0;
    if (h < 0.0) h += 1.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
    const double hh = std::fmod(h, 1.0) * 6.0;
    const int i = static_cast<int>(hh) % 6;
    const double f = hh - std::floor(hh);
    const double p = v * (1.0 - s);
    const double q = v * (1.0 - s * f);
    const double t = v * (1.0 - s * (1.0 - f));
    switch (i) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
}

}  // namespace

ScalarField appearance_jitter(const ScalarField& img, const AppearanceJitterConfig& cfg, Rng& rng) {
    if (!cfg.enabled) return img;
    const double brightness = rng.uniform(-cfg.brightness, cfg.brightness);
    const double contrast = rng.uniform(cfg.contrast_lo, cfg.contrast_hi);
    const double saturation = rng.uniform(cfg.saturation_lo, cfg.saturation_hi);
    const double hue_shift = rng.uniform(-cfg.hue, cfg.hue);
    const bool do_blur = rng.unit() < cfg.blur_prob;
    int kernel = 0;
    double blur_sigma = 0.0;
    if (do_blur) {
        const int n_odd = (cfg.blur_kernel_max - cfg.blur_kernel_min) / 2 + 1;
        kernel = cfg.blur_kernel_min + 2 * rng.uniform_int(0, n_odd - 1);
        blur_sigma = rng.uniform(cfg.blur_sigma_lo, cfg.blur_sigma_hi);
    }

    ScalarField out = img;
    const size_t n = static_cast<size_t>(img.height) * img.width;
    if (img.channels == 3) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < static_cast<long long>(n); ++i) {
            double* px = out.data.data() + i * 3;
            double h, s, v;
            rgb_to_hsv(px[0], px[1], px[2], h, s, v);
            h = std::fmod(h + hue_shift + 1.0, 1.0);
            s = std::clamp(s * saturation, 0.0, 1.0);
            hsv_to_rgb(h, s, v, px[0], px[1], px[2]);
        }
    }
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(out.data.size()); ++i) {
        double v = out.data[i];
        v = (v - 0.5) * contrast + 0.5 + brightness;
        out.data[i] = std::clamp(v, 0.0, 1.0);
    }
    if (do_blur) {
        // Kernel size caps the truncation radius implied by sigma.
        const double sigma = std::min(blur_sigma, (kernel / 2) / 3.0 + 1e-9);
        ScalarField blurred(out.height, out.width, out.channels);
        kernels::gaussian_blur_omp(out.data.data(), out.height, out.width, out.channels,
                                   sigma, blurred.data.data());
        out = std::move(blurred);
    }
    return out;
}

Triplet build_triplet(const ScalarField& i, const ScalarField& j,
                      const TripletConfig& cfg, Rng& rng) {
    require(cfg.crop_to <= cfg.resize_to, "build_triplet: crop size exceeds resize size");
    require(i.channels == j.channels && i.channels > 0, "build_triplet: channel mismatch");
    require(i.height > 1 && i.width > 1 && j.height > 1 && j.width > 1,
            "build_triplet: degenerate input image");

    const int sr = cfg.resize_to, s = cfg.crop_to;
    const ScalarField i_r = resize_image(i, sr, sr);
    const ScalarField j_r = resize_image(j, sr, sr);
    const FlowField w = sample_warp(cfg.warp, sr, sr, rng);
    const WarpedScalar warped = warp(i_r, w);

    Triplet out;
    out.i = central_crop(i_r, s);
    out.j = central_crop(j_r, s);
    out.w_crop = central_crop(w, s);
    out.w_valid = central_crop(warped.valid, s);
    out.i_prime = appearance_jitter(central_crop(warped.field, s), cfg.jitter, rng);
    return out;
}

}  // namespace warpc
