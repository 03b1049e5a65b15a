// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.
//
// End-to-end acceptance suite. Every check prints one verdict line; run the
// binary directly (or via ctest) to see the per-criterion results.

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fd_harness.hpp"
#include "oracles.hpp"
#include "warpc/flow_ops.hpp"
#include "warpc/io.hpp"
#include "warpc/losses.hpp"
#include "warpc/metrics.hpp"
#include "warpc/rng.hpp"
#include "warpc/toy.hpp"
#include "warpc/warp_sampling.hpp"

using namespace warpc;

namespace {

void verdict(int criterion, bool ok, const std::string& what) {
    std::printf("[criterion %2d] %s: %s\n", criterion, ok ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(ok, "criterion ", criterion, ": ", what);
}

FlowField smooth(int h, int w, double amp, Rng& rng) { return fdtest::smooth_flow(h, w, amp, rng); }

HomographyParams mild_h(Rng& rng, double sigma = 0.05) {
    WarpDistributionConfig cfg;
    cfg.sigma_h = sigma;
    return sample_homography(cfg, rng);
}

}  // namespace

TEST_CASE("criterion 1: composition matches the product homography") {
    bool ok = true;
    double worst = 0.0;
    for (int seed = 0; seed < 20; ++seed) {
        Rng rng(9100 + seed);
        const HomographyParams h1 = mild_h(rng);
        const HomographyParams h2 = mild_h(rng);
        const auto composed = compose_flows(rasterize(h1, 64, 64), rasterize(h2, 64, 64));
        const FlowField direct = rasterize(h1.then(h2), 64, 64);
        double err = 0.0;
        size_t n = 0;
        for (int y = 2; y < 62; ++y)
            for (int x = 2; x < 62; ++x)
                if (composed.valid.at(y, x)) {
                    err += (composed.field.at(y, x) - direct.at(y, x)).norm();
                    ++n;
                }
        const double aepe_px = err / n;
        worst = std::max(worst, aepe_px);
        ok = ok && aepe_px < 0.1;
    }
    std::printf("    compose vs analytic product, worst interior AEPE %.2e px\n", worst);
    verdict(1, ok, "compose_flows matches rasterized product homography, AEPE < 0.1 px");
}

TEST_CASE("criterion 2: W = 0 reduces the W-bipath to forward-backward exactly") {
    const LossConfig cfg;
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(9200 + trial);
        const FlowField a = smooth(24, 24, 3.0, rng);
        const FlowField b = smooth(24, 24, 3.0, rng);
        const LossValue wb = w_bipath_loss(a, b, FlowField(24, 24), cfg);
        const LossValue fb = forward_backward_loss(a, b, cfg);
        ok = ok && wb.scalar == fb.scalar && wb.valid_count == fb.valid_count;
        for (size_t i = 0; i < wb.residual.size() && ok; ++i)
            ok = wb.residual.data[i] == fb.residual.data[i] &&
                 wb.valid.data[i] == fb.valid.data[i];
    }
    verdict(2, ok, "w_bipath_loss(.., W=0) equals forward_backward_loss bit for bit");
}

TEST_CASE("criterion 3: constant mappings fool the I'J bipath but not the W-bipath") {
    const LossConfig cfg;
    bool ok = true;
    double worst_ipj = 0.0, best_wbp = 1e18;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(9300 + trial);
        const Vec2 c{rng.uniform(8, 56), rng.uniform(8, 56)};
        FlowField pred(64, 64);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x) pred.at(y, x) = {c.x - x, c.y - y};
        const FlowField w = smooth(64, 64, 3.0, rng);
        const LossValue deg = ipj_bipath_residual(pred, pred, w, cfg);
        const LossValue wbp = w_bipath_loss(pred, pred, w, cfg);
        worst_ipj = std::max(worst_ipj, deg.scalar);
        best_wbp = std::min(best_wbp, wbp.scalar);
        // Zero in exact arithmetic; floating point leaves a few ulps of the
        // coordinate magnitudes.
        ok = ok && deg.valid_count > 0 && deg.scalar < 1e-12 && wbp.scalar > 1.0;
    }
    std::printf("    ipj residual at constant mappings: max %.2e px; w-bipath min %.3f px\n",
                worst_ipj, best_wbp);
    verdict(3, ok, "constant mappings zero the ipj residual (< 1e-12 px) while w-bipath stays > 1 px");
}

TEST_CASE("criterion 4: ji bias delta respects the Jacobian bound") {
    const LossConfig cfg;
    bool bound_ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng(9400 + trial);
        const FlowField w = rasterize(sample_tps(0.08, SamplingScheme::kUniform, rng), 64, 64);
        const FlowField f_jip = smooth(64, 64, 2.0, rng);
        const FlowField f_ji = smooth(64, 64, 2.0, rng);
        const BiasBoundReport rep = ji_bias_bound_check(f_jip, f_ji, w, {2.0, 2.0}, cfg);
        bound_ok = bound_ok && rep.measured <= 1.1 * rep.bound + 1e-12;
    }
    Rng rng(9499);
    const FlowField w_t(32, 32, {4.0, -3.0});
    const BiasBoundReport rep =
        ji_bias_bound_check(smooth(32, 32, 2.0, rng), smooth(32, 32, 2.0, rng), w_t, {2, 2}, cfg);
    const bool translation_ok = rep.measured == 0.0 && rep.bound == 0.0;
    verdict(4, bound_ok && translation_ok,
            "measured ji delta <= 1.1x bound over 50 TPS warps; exactly 0 for translations");
}

TEST_CASE("criterion 5: analytic gradients match 64-bit central differences") {
    const LossId ids[] = {LossId::kWarpSupervision, LossId::kForwardBackward,
                          LossId::kIpjBipath,       LossId::kJiBipath,
                          LossId::kWBipath,         LossId::kWBipathVisibility,
                          LossId::kCycleI,          LossId::kCycleIPrime,
                          LossId::kCycleJ,          LossId::kWarpc,
                          LossId::kPhotometric};
    bool ok = true;
    double worst = 0.0;
    for (LossId id : ids) {
        for (int k = 0; k < 10; ++k) {
            LossConfig cfg = fdtest::config_variant(k);
            if (id == LossId::kPhotometric)
                cfg.photometric =
                    (k % 2 == 0) ? PhotometricKind::kCharbonnier : PhotometricKind::kSsim;
            const fdtest::Instance inst = fdtest::make_instance(id, cfg, 9500 + 31 * k);
            const auto [w, checked] = fdtest::fd_check(inst);
            worst = std::max(worst, w);
            ok = ok && w < 1e-4 && checked > 0;
        }
    }
    std::printf("    worst relative gradient error %.2e\n", worst);

    // Stop-gradient toggle: only the warping-flow component changes.
    const fdtest::Instance inst = fdtest::make_instance(LossId::kWBipath, LossConfig{}, 9551);
    LossConfig on = inst.cfg, off = inst.cfg;
    on.stop_gradient_through_warping_flow = true;
    off.stop_gradient_through_warping_flow = false;
    const LossGradient g_on = loss_gradient(LossId::kWBipath, inst.inputs(), on);
    const LossGradient g_off = loss_gradient(LossId::kWBipath, inst.inputs(), off);
    bool ji_same = true;
    for (size_t i = 0; i < g_on.find("f_ji")->size(); ++i)
        ji_same = ji_same && g_on.find("f_ji")->data[i] == g_off.find("f_ji")->data[i];
    double ipj_diff = 0.0;
    for (size_t i = 0; i < g_on.find("f_ipj")->size(); ++i)
        ipj_diff += (g_on.find("f_ipj")->data[i] - g_off.find("f_ipj")->data[i]).norm();
    verdict(5, ok && ji_same && ipj_diff > 1e-6,
            "every loss gradient matches finite differences < 1e-4; stop-gradient "
            "toggles only the warping-flow component");
}

TEST_CASE("criterion 6: visibility mask equals the per-pixel inequality oracle") {
    LossConfig cfg;  // defaults alpha1 = 0.025, alpha2 = 0.5
    REQUIRE(cfg.alpha1 == 0.025);
    REQUIRE(cfg.alpha2 == 0.5);
    Rng rng(9600);
    const int n = 48;
    const FlowField w = smooth(n, n, 1.5, rng);
    FlowField f_ipj = w;
    const FlowField f_ji(n, n);
    // Synthetic occluder: a block of pixels whose composed flow is wrong.
    for (int y = 14; y < 30; ++y)
        for (int x = 8; x < 36; ++x) f_ipj.at(y, x) += {rng.uniform(1.0, 5.0), rng.uniform(1.0, 5.0)};
    const VisibilityMask mask = visibility_mask(f_ipj, f_ji, w, cfg);

    bool ok = true;
    size_t flagged = 0;
    for (int y = 0; y < n && ok; ++y)
        for (int x = 0; x < n && ok; ++x) {
            const Vec2 pos{x + f_ipj.at(y, x).x, y + f_ipj.at(y, x).y};
            const auto warped = oracle::sample(f_ji, pos);
            if (!warped) {
                ok = mask.at(y, x) == 0;
                continue;
            }
            const Vec2 r = f_ipj.at(y, x) + *warped - w.at(y, x);
            const double rhs = cfg.alpha2 + cfg.alpha1 * (f_ipj.at(y, x).norm2() +
                                                          warped->norm2() + w.at(y, x).norm2());
            const bool expect = r.norm2() < rhs;
            ok = mask.at(y, x) == (expect ? 1 : 0);
            if (!expect) ++flagged;
        }
    verdict(6, ok && flagged > 100, "mask equals the inequality oracle exactly at the defaults");
}

TEST_CASE("criterion 7: adaptive balancing holds exactly and lambda carries no gradient") {
    bool ok = true;
    for (int trial = 0; trial < 10; ++trial) {
        Rng rng(9700 + trial);
        const FlowField w = smooth(24, 24, 2.0, rng);
        const FlowField f_ipj = smooth(24, 24, 2.0, rng);
        const FlowField f_ji = smooth(24, 24, 2.0, rng);
        const FlowField f_ipi = smooth(24, 24, 2.0, rng);
        const LossConfig cfg;
        const WarpcResult r = warpc_loss(f_ipj, f_ji, f_ipi, w, cfg);
        if (r.warp_sup_value > 0.0) {
            const double rel =
                std::abs(r.lambda * r.warp_sup_value - r.w_vis_value) /
                std::max(r.w_vis_value, 1e-300);
            ok = ok && rel < 1e-9;
        }
    }
    // Finite differences on the balanced total with lambda frozen agree with
    // the analytic gradient (verified by the criterion-5 harness for kWarpc);
    // here assert the lambda-is-constant convention directly on f_ipi.
    const fdtest::Instance inst = fdtest::make_instance(LossId::kWarpc, LossConfig{}, 9750);
    const auto [worst, checked] = fdtest::fd_check(inst);
    ok = ok && worst < 1e-4 && checked > 0;
    verdict(7, ok, "lambda * L_warp == L_W-vis to 1e-9; frozen-lambda FD matches the gradient");
}

TEST_CASE("criterion 8: desk-scale reproduction of the loss-analysis table") {
    toy::CompareConfig cfg;
    cfg.seeds = {101, 102, 103, 104, 105};
    cfg.image_size = 64;
    cfg.scene_strength = 1.0;
    cfg.master_seed = 17;
    cfg.train.steps = 400;
    cfg.train.grid_size = 8;
    cfg.train.lr_grid = {4.0, 16.0, 64.0};
    cfg.lr_grid_overrides[toy::Objective::kIpjBipath] = {64.0, 256.0, 1024.0};
    cfg.train.holdout_fraction = 0.25;
    cfg.train.init_bias = {2.5, 2.5};
    cfg.train.warp_sigma_h = 0.22;
    cfg.train.matcher_noise_px = 0.5;
    cfg.train.matcher_outlier_px = 4.7;
    cfg.train.matcher_outlier_count = 3;

    const toy::CompareReport rep = toy::compare_objectives(cfg);
    std::printf("%s", rep.table_text().c_str());
    const toy::CompareSummary& s = rep.summary;
    verdict(8, s.warpc_aepe_below_1 && s.w_bipath_aepe_below_1 && s.ipj_collapse_detected &&
                   s.ji_bias_exceeds_1px && s.w_bipath_bias_below_03 &&
                   s.fb_magnitude_below_10pct && s.warpc_leq_w_bipath_most_seeds,
            "(a) warpc & w-bipath < 1 px, (b) ipj collapse, (c) ji bias > 1 px vs "
            "w-bipath < 0.3 px, (d) fb < 10% magnitude, (e) warpc <= w-bipath on 4/5 seeds");
    // The cycle placement from the comparison contract, reported alongside.
    std::printf("    aepe ordering {warpc, w-bipath} < cycle-i' < failures: %s\n",
                s.ordering_ok ? "holds" : "violated");
}

TEST_CASE("criterion 9: sampler contracts") {
    bool ok = true;

    // sigma_H = 0: exactly zero flow.
    WarpDistributionConfig zero;
    zero.sigma_h = 0.0;
    Rng r1(9900);
    const FlowField fh = rasterize(sample_homography(zero, r1), 32, 32);
    for (const Vec2& v : fh.data) ok = ok && v.x == 0.0 && v.y == 0.0;

    // sigma = 0 TPS: exactly zero flow.
    Rng r2(9901);
    const FlowField ft = rasterize(sample_tps(0.0, SamplingScheme::kUniform, r2), 32, 32);
    for (const Vec2& v : ft.data) ok = ok && v.x == 0.0 && v.y == 0.0;

    // Identity affine: exactly zero flow.
    WarpDistributionConfig zaff = zero;
    zaff.tau = 0.0;
    zaff.t = 0.0;
    zaff.alpha = 0.0;
    Rng r3(9902);
    const FlowField fa = rasterize(sample_affine(zaff, r3), 32, 32);
    for (const Vec2& v : fa.data) ok = ok && v.x == 0.0 && v.y == 0.0;
    verdict(9, ok, "zero-range samplers rasterize to exactly zero flow");

    // TPS interpolation property.
    bool tps_ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng(9910 + trial);
        const TpsParams t = sample_tps(0.33, SamplingScheme::kUniform, rng);
        for (int i = 0; i < 9; ++i)
            tps_ok = tps_ok && (t.apply(t.source[i]) - t.target[i]).norm() < 1e-6;
    }
    verdict(9, tps_ok, "TPS reproduces its jittered control points to < 1e-6");

    // Determinism.
    const WarpDistributionConfig stage2 = WarpDistributionConfig::stage2();
    Rng a(4242), b(4242);
    const FlowField wa = sample_warp(stage2, 96, 96, a);
    const FlowField wb = sample_warp(stage2, 96, 96, b);
    bool det = true;
    for (size_t i = 0; i < wa.size(); ++i) det = det && wa.data[i] == wb.data[i];
    verdict(9, det, "fixed seeds give bit-identical warps");

    // Family frequencies within 3 sigma of equal thirds over 3000 draws.
    int counts[3] = {0, 0, 0};
    const int n = 3000;
    const WarpDistributionConfig stage1 = WarpDistributionConfig::stage1();
    for (int i = 0; i < n; ++i) {
        Rng rng(99000 + i);
        WarpFamily family;
        sample_warp(stage1, 8, 8, rng, &family);
        counts[static_cast<int>(family)]++;
    }
    const double sigma = std::sqrt(n / 3.0 * (2.0 / 3.0));
    bool freq_ok = true;
    for (int k = 0; k < 3; ++k) freq_ok = freq_ok && std::abs(counts[k] - n / 3.0) <= 3 * sigma;
    std::printf("    family counts %d / %d / %d (3 sigma = %.1f)\n", counts[0], counts[1],
                counts[2], 3 * sigma);
    verdict(9, freq_ok, "family frequencies within 3 sigma of equal thirds over 3000 draws");
}

TEST_CASE("criterion 10: metrics match brute force and .flo round-trips bit-exactly") {
    Rng rng(91000);
    // AEPE brute force.
    FlowField pred(32, 32), gt(32, 32);
    for (Vec2& v : pred.data) v = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
    for (Vec2& v : gt.data) v = {rng.uniform(-5, 5), rng.uniform(-5, 5)};
    ValidityMask mask(32, 32, true);
    for (size_t i = 0; i < mask.size(); i += 7) mask.data[i] = 0;
    double sum = 0;
    size_t n = 0;
    for (size_t i = 0; i < pred.size(); ++i)
        if (mask.data[i]) {
            sum += std::hypot(pred.data[i].x - gt.data[i].x, pred.data[i].y - gt.data[i].y);
            ++n;
        }
    const bool aepe_ok = std::abs(aepe(pred, gt, mask) - sum / n) < 1e-9 * (sum / n);

    // PCK brute force, exact counting.
    std::vector<Keypoint> kps;
    for (int i = 0; i < 100; ++i)
        kps.push_back({{rng.uniform(1, 30), rng.uniform(1, 30)},
                       {rng.uniform(0, 32), rng.uniform(0, 32)}});
    const std::vector<double> thresholds{1, 3, 5};
    const MetricReport rep = pck_dense(pred, kps, thresholds);
    std::vector<int> hits(3, 0);
    for (const Keypoint& kp : kps) {
        const auto d = oracle::sample(pred, kp.source);
        REQUIRE(d);
        const Vec2 p{kp.source.x + d->x, kp.source.y + d->y};
        for (size_t t = 0; t < thresholds.size(); ++t)
            if ((p - kp.truth).norm() <= thresholds[t]) ++hits[t];
    }
    bool pck_ok = rep.count == kps.size();
    for (size_t t = 0; t < thresholds.size(); ++t)
        pck_ok = pck_ok && rep.pck.at(thresholds[t]) == 100.0 * hits[t] / kps.size();

    // .flo write -> read -> write: bit-exact bytes.
    FlowField f(19, 27);
    for (Vec2& v : f.data)
        v = {static_cast<float>(rng.uniform(-200, 200)), static_cast<float>(rng.uniform(-200, 200))};
    const auto dir = std::filesystem::temp_directory_path();
    const std::string p1 = (dir / "warpc_acc1.flo").string();
    const std::string p2 = (dir / "warpc_acc2.flo").string();
    write_flo(f, p1);
    write_flo(read_flo(p1), p2);
    std::ifstream s1(p1, std::ios::binary), s2(p2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(s1)), {});
    const std::string b2((std::istreambuf_iterator<char>(s2)), {});
    const bool flo_ok = !b1.empty() && b1 == b2;
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);

    verdict(10, aepe_ok && pck_ok && flo_ok,
            "AEPE/PCK equal brute force; .flo write-read round trip is bit-exact");
}
