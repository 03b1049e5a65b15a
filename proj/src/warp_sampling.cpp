// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.

#include "warpc/warp_sampling.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "warpc/kernels.hpp"

namespace warpc {

double HomographyParams::det() const {
    return h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) -
           h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0]) +
           h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
}

HomographyParams HomographyParams::inverse() const {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = h[i][j];
    Eigen::Matrix3d inv = m.inverse();
    inv /= inv(2, 2);
    HomographyParams out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.h[i][j] = inv(i, j);
    return out;
}

HomographyParams HomographyParams::then(const HomographyParams& after) const {
    Eigen::Matrix3d a, b;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            a(i, j) = h[i][j];
            b(i, j) = after.h[i][j];
        }
    Eigen::Matrix3d p = b * a;
    p /= p(2, 2);
    HomographyParams out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.h[i][j] = p(i, j);
    return out;
}

namespace {

constexpr std::array<Vec2, 4> kUnitCorners{{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}};

double draw(const SamplingScheme scheme, double range, Rng& rng) {
    return scheme == SamplingScheme::kUniform ? rng.uniform(-range, range)
                                              : rng.normal(0.0, range);
}

/// 4-point DLT: solve the 8x8 system for h normalized to h33 = 1.
bool solve_homography(const std::array<Vec2, 4>& src, const std::array<Vec2, 4>& dst,
                      HomographyParams& out) {
    Eigen::Matrix<double, 8, 8> a;
    Eigen::Matrix<double, 8, 1> b;
    for (int i = 0; i < 4; ++i) {
        const double x = src[i].x, y = src[i].y;
        const double u = dst[i].x, v = dst[i].y;
        a.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
        a.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
        b(2 * i) = u;
        b(2 * i + 1) = v;
    }
    Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(a);
    if (!lu.isInvertible()) return false;
    const Eigen::Matrix<double, 8, 1> sol = lu.solve(b);
    out.h = {{{sol(0), sol(1), sol(2)}, {sol(3), sol(4), sol(5)}, {sol(6), sol(7), 1.0}}};
    return std::abs(out.det()) > 1e-8;
}

/// A quadrilateral is accepted when consistently oriented (no fold-over).
bool quad_ok(const std::array<Vec2, 4>& q) {
    double sign = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Vec2 a = q[(i + 1) % 4] - q[i];
        const Vec2 b = q[(i + 2) % 4] - q[(i + 1) % 4];
        const double cross = a.x * b.y - a.y * b.x;
        if (std::abs(cross) < 1e-9) return false;
        if (sign == 0.0)
            sign = cross;
        else if (sign * cross < 0.0)
            return false;
    }
    return true;
}

}  // namespace

HomographyParams sample_homography(const WarpDistributionConfig& cfg, Rng& rng) {
    require(cfg.sigma_h >= 0.0 && cfg.sigma_h <= 1.0, "sample_homography: sigma_h outside [0,1]");
    for (int attempt = 0; attempt < 10; ++attempt) {
        std::array<Vec2, 4> jittered;
        bool moved = false;
        for (int i = 0; i < 4; ++i) {
            const Vec2 d{draw(cfg.scheme, cfg.sigma_h, rng), draw(cfg.scheme, cfg.sigma_h, rng)};
            jittered[i] = kUnitCorners[i] + d;
            moved = moved || d.x != 0.0 || d.y != 0.0;
        }
        if (!moved) return HomographyParams{};  // exact identity
        HomographyParams p;
        if (quad_ok(jittered) && solve_homography(kUnitCorners, jittered, p)) return p;
    }
    throw std::runtime_error("sample_homography: 10 degenerate draws, config pathological");
}

Vec2 TpsParams::apply(Vec2 p) const {
    double ox = ax[0] + ax[1] * p.x + ax[2] * p.y;
    double oy = ay[0] + ay[1] * p.x + ay[2] * p.y;
    for (int i = 0; i < 9; ++i) {
        const double r2 = (p - source[i]).norm2();
        if (r2 > 0.0) {
            const double u = r2 * std::log(r2);
            ox += wx[i] * u;
            oy += wy[i] * u;
        }
    }
    return {ox, oy};
}

namespace {

std::array<Vec2, 9> tps_grid() {
    std::array<Vec2, 9> g;
    int idx = 0;
    for (int gy = -1; gy <= 1; ++gy)
        for (int gx = -1; gx <= 1; ++gx) g[idx++] = {double(gx), double(gy)};
    return g;
}

bool fit_tps(TpsParams& p) {
    constexpr int n = 9;
    bool moved = false;
    for (int i = 0; i < n; ++i)
        if (!(p.target[i] == p.source[i])) moved = true;
    if (!moved) {  // exact identity interpolant
        p.wx.fill(0.0);
        p.wy.fill(0.0);
        p.ax = {0.0, 1.0, 0.0};
        p.ay = {0.0, 0.0, 1.0};
        return true;
    }
    Eigen::Matrix<double, n + 3, n + 3> sys = Eigen::Matrix<double, n + 3, n + 3>::Zero();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double r2 = (p.source[i] - p.source[j]).norm2();
            sys(i, j) = r2 > 0.0 ? r2 * std::log(r2) : 0.0;
        }
        sys(i, i) += 1e-9;  // ridge on the kernel block
        sys(i, n) = 1.0;
        sys(i, n + 1) = p.source[i].x;
        sys(i, n + 2) = p.source[i].y;
        sys(n, i) = 1.0;
        sys(n + 1, i) = p.source[i].x;
        sys(n + 2, i) = p.source[i].y;
    }
    Eigen::Matrix<double, n + 3, 2> rhs = Eigen::Matrix<double, n + 3, 2>::Zero();
    for (int i = 0; i < n; ++i) {
        rhs(i, 0) = p.target[i].x;
        rhs(i, 1) = p.target[i].y;
    }
    Eigen::FullPivLU<Eigen::Matrix<double, n + 3, n + 3>> lu(sys);
    if (!lu.isInvertible()) return false;
    const Eigen::Matrix<double, n + 3, 2> sol = lu.solve(rhs);
    for (int i = 0; i < n; ++i) {
        p.wx[i] = sol(i, 0);
        p.wy[i] = sol(i, 1);
    }
    for (int k = 0; k < 3; ++k) {
        p.ax[k] = sol(n + k, 0);
        p.ay[k] = sol(n + k, 1);
    }
    // Interpolation property: the fitted spline must pass through the targets.
    for (int i = 0; i < n; ++i) {
        const Vec2 got = p.apply(p.source[i]);
        if ((got - p.target[i]).norm() >= 1e-6) return false;
    }
    return true;
}

}  // namespace

TpsParams sample_tps(double sigma, SamplingScheme scheme, Rng& rng) {
    require(sigma >= 0.0 && sigma <= 1.0, "sample_tps: sigma outside [0,1]");
    for (int attempt = 0; attempt < 10; ++attempt) {
        TpsParams p;
        p.source = tps_grid();
        for (int i = 0; i < 9; ++i)
            p.target[i] = {p.source[i].x + draw(scheme, sigma, rng),
                           p.source[i].y + draw(scheme, sigma, rng)};
        if (fit_tps(p)) return p;
    }
    throw std::runtime_error("sample_tps: singular system after 10 draws");
}

std::array<double, 6> AffineParams::matrix() const {
    const double c = std::cos(rotation), s = std::sin(rotation);
    const double sh = std::tan(shear);
    // scale * rotation * shear
    const double a00 = scale * c, a01 = scale * -s;
    const double a10 = scale * s, a11 = scale * c;
    return {a00, a00 * sh + a01, translation.x, a10, a10 * sh + a11, translation.y};
}

Vec2 AffineParams::apply(Vec2 p) const {
    const auto m = matrix();
    return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
}

AffineParams sample_affine(const WarpDistributionConfig& cfg, Rng& rng) {
    AffineParams p;
    if (cfg.scheme == SamplingScheme::kUniform) {
        p.scale = rng.uniform(1.0 - cfg.tau, 1.0 + cfg.tau);
    } else {
        p.scale = rng.normal(1.0, cfg.tau);
        while (p.scale <= 0.0) p.scale = rng.normal(1.0, cfg.tau);
    }
    p.translation = {draw(cfg.scheme, cfg.t, rng), draw(cfg.scheme, cfg.t, rng)};
    p.rotation = draw(cfg.scheme, cfg.alpha, rng);
    p.shear = draw(cfg.scheme, cfg.alpha, rng);
    require(p.scale > 0.0, "sample_affine: non-positive scale");
    return p;
}

namespace {

template <typename Transform>
FlowField rasterize_with(const Transform& t, int h, int w) {
    require(h > 0 && w > 0, "rasterize: non-positive dims");
    FlowField f(h, w);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const Vec2 pn{2.0 * x / w - 1.0, 2.0 * y / h - 1.0};
            const Vec2 qn = t.apply(pn);
            // Displacement in normalized units, scaled back: an identity
            // transform rasterizes to exactly zero flow.
            f.at(y, x) = {(qn.x - pn.x) * w / 2.0, (qn.y - pn.y) * h / 2.0};
        }
    }
    return f;
}

}  // namespace

FlowField rasterize(const HomographyParams& p, int h, int w) { return rasterize_with(p, h, w); }
FlowField rasterize(const TpsParams& p, int h, int w) { return rasterize_with(p, h, w); }
FlowField rasterize(const AffineParams& p, int h, int w) { return rasterize_with(p, h, w); }

FlowField sample_elastic(const ElasticParams& p, int h, int w, Rng& rng) {
    require(p.magnitude_px >= 0.0 && p.region_count_max >= 0, "sample_elastic: bad params");
    FlowField eps(h, w);
    const int regions = p.region_count_min >= p.region_count_max
                            ? p.region_count_max
                            : rng.uniform_int(p.region_count_min, p.region_count_max);
    if (regions <= 0 || p.magnitude_px == 0.0) return eps;

    // Simard-style field: uniform noise in [-1,1], Gaussian-smoothed, peak
    // normalized to the requested magnitude.
    std::vector<double> noise(static_cast<size_t>(h) * w * 2);
    for (double& v : noise) v = rng.uniform(-1.0, 1.0);
    std::vector<double> smooth(noise.size());
    kernels::gaussian_blur_omp(noise.data(), h, w, 2, p.sigma_px, smooth.data());
    double peak = 0.0;
    for (size_t i = 0; i < smooth.size(); i += 2)
        peak = std::max(peak, std::hypot(smooth[i], smooth[i + 1]));
    const double gain = peak > 0.0 ? p.magnitude_px / peak : 0.0;

    const double spread_hi = p.spread_max_px > 0.0 ? p.spread_max_px : h / 8.0;
    std::vector<double> mask(static_cast<size_t>(h) * w, 0.0);
    for (int r = 0; r < regions; ++r) {
        const double cx = rng.uniform(0.0, w - 1.0);
        const double cy = rng.uniform(0.0, h - 1.0);
        const double spread = rng.uniform(std::min(p.spread_min_px, spread_hi), spread_hi);
#pragma omp parallel for schedule(static)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                const double g = 2.0 * std::exp(-0.5 * d2 / (spread * spread));
                mask[static_cast<size_t>(y) * w + x] += std::min(g, 1.0);
            }
    }

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            const double m = std::min(mask[i], 1.0);
            eps.at(y, x) = {gain * smooth[2 * i] * m, gain * smooth[2 * i + 1] * m};
        }
    return eps;
}

FlowField sample_warp(const WarpDistributionConfig& cfg, int h, int w, Rng& rng,
                      WarpFamily* chosen) {
    const double p0 = cfg.family_probs[0];
    const double p1 = cfg.family_probs[1];
    require(std::abs(p0 + p1 + cfg.family_probs[2] - 1.0) < 1e-9,
            "sample_warp: family probabilities must sum to 1");
    const double u = rng.unit();
    FlowField base;
    if (u < p0) {
        if (chosen) *chosen = WarpFamily::kHomography;
        base = rasterize(sample_homography(cfg, rng), h, w);
    } else if (u < p0 + p1) {
        if (chosen) *chosen = WarpFamily::kTps;
        base = rasterize(sample_tps(cfg.sigma_h, cfg.scheme, rng), h, w);
    } else {
        if (chosen) *chosen = WarpFamily::kAffineTps;
        const FlowField affine = rasterize(sample_affine(cfg, rng), h, w);
        const FlowField tps = rasterize(sample_tps(cfg.sigma_tps, cfg.scheme, rng), h, w);
        base = compose_flows(affine, tps).field;
    }
    if (cfg.elastic_enabled) {
        const FlowField eps = sample_elastic(cfg.elastic, h, w, rng);
        base = compose_flows(base, eps).field;
    }
    return base;
}

WarpDistributionConfig WarpDistributionConfig::stage1() { return WarpDistributionConfig{}; }

WarpDistributionConfig WarpDistributionConfig::stage2() {
    WarpDistributionConfig cfg;
    cfg.sigma_h = 0.4;
    cfg.sigma_tps = 0.26;
    cfg.elastic_enabled = true;
    return cfg;
}

std::string WarpDistributionConfig::to_json() const {
    nlohmann::json j;
    j["sigma_h"] = sigma_h;
    j["tau"] = tau;
    j["t"] = t;
    j["alpha"] = alpha;
    j["sigma_tps"] = sigma_tps;
    j["scheme"] = scheme == SamplingScheme::kUniform ? "uniform" : "gaussian";
    j["elastic_enabled"] = elastic_enabled;
    j["elastic"] = {{"sigma_px", elastic.sigma_px},
                    {"magnitude_px", elastic.magnitude_px},
                    {"region_count_min", elastic.region_count_min},
                    {"region_count_max", elastic.region_count_max},
                    {"spread_min_px", elastic.spread_min_px},
                    {"spread_max_px", elastic.spread_max_px}};
    j["family_probs"] = family_probs;
    return j.dump(2);
}

WarpDistributionConfig WarpDistributionConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("warp config: invalid JSON: ") + e.what());
    }
    WarpDistributionConfig cfg;
    try {
        if (j.contains("sigma_h")) cfg.sigma_h = j.at("sigma_h").get<double>();
        if (j.contains("tau")) cfg.tau = j.at("tau").get<double>();
        if (j.contains("t")) cfg.t = j.at("t").get<double>();
        if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
        if (j.contains("sigma_tps")) cfg.sigma_tps = j.at("sigma_tps").get<double>();
        if (j.contains("scheme")) {
            const std::string s = j.at("scheme").get<std::string>();
            if (s == "uniform")
                cfg.scheme = SamplingScheme::kUniform;
            else if (s == "gaussian")
                cfg.scheme = SamplingScheme::kGaussian;
            else
                throw std::invalid_argument("warp config: unknown scheme '" + s + "'");
        }
        if (j.contains("elastic_enabled")) cfg.elastic_enabled = j.at("elastic_enabled").get<bool>();
        if (j.contains("elastic")) {
            const auto& e = j.at("elastic");
            if (e.contains("sigma_px")) cfg.elastic.sigma_px = e.at("sigma_px").get<double>();
            if (e.contains("magnitude_px"))
                cfg.elastic.magnitude_px = e.at("magnitude_px").get<double>();
            if (e.contains("region_count_min"))
                cfg.elastic.region_count_min = e.at("region_count_min").get<int>();
            if (e.contains("region_count_max"))
                cfg.elastic.region_count_max = e.at("region_count_max").get<int>();
            if (e.contains("spread_min_px"))
                cfg.elastic.spread_min_px = e.at("spread_min_px").get<double>();
            if (e.contains("spread_max_px"))
                cfg.elastic.spread_max_px = e.at("spread_max_px").get<double>();
        }
        if (j.contains("family_probs")) {
            const auto probs = j.at("family_probs").get<std::vector<double>>();
            if (probs.size() != 3)
                throw std::invalid_argument("warp config: family_probs must have 3 entries");
            std::copy(probs.begin(), probs.end(), cfg.family_probs.begin());
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("warp config: bad field type: ") + e.what());
    }
    require(cfg.sigma_h >= 0.0 && cfg.sigma_h <= 1.0, "warp config: sigma_h outside [0,1]");
    return cfg;
}

WarpDistributionConfig WarpDistributionConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace warpc
