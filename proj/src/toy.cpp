// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.

#include "warpc/toy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "warpc/flow_ops.hpp"
#include "warpc/io.hpp"
#include "warpc/kernels.hpp"
#include "warpc/metrics.hpp"

namespace warpc::toy {

// ---------------------------------------------------------------------------
// Control grid
// ---------------------------------------------------------------------------

ControlGrid::ControlGrid(int grid_size, int h, int w, Vec2 init)
    : g_(grid_size), h_(h), w_(w), theta_(static_cast<size_t>(grid_size) * grid_size, init) {
    require(grid_size >= 2 && h >= 2 && w >= 2, "ControlGrid: degenerate sizes");
}

Vec2 ControlGrid::control_coord(int y, int x) const {
    return {static_cast<double>(x) * (g_ - 1) / (w_ - 1),
            static_cast<double>(y) * (g_ - 1) / (h_ - 1)};
}

FlowField ControlGrid::flow() const {
    FlowField f(h_, w_);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h_; ++y)
        for (int x = 0; x < w_; ++x) {
            double v[2];
            kernels::sample_bilinear(&theta_[0].x, g_, g_, 2, control_coord(y, x), v);
            f.at(y, x) = {v[0], v[1]};
        }
    return f;
}

void ControlGrid::apply_gradient(const FlowField& flow_grad, double lr) {
    require(flow_grad.height == h_ && flow_grad.width == w_,
            "ControlGrid::apply_gradient: dimension mismatch");
    std::vector<Vec2> grad(theta_.size(), Vec2{0, 0});
    std::vector<Vec2> pos(flow_grad.size());
    for (int y = 0; y < h_; ++y)
        for (int x = 0; x < w_; ++x)
            pos[static_cast<size_t>(y) * w_ + x] = control_coord(y, x);
    kernels::scatter_serial(&grad[0].x, g_, g_, 2, pos.data(), pos.size(),
                            &flow_grad.data[0].x, nullptr);
    for (size_t i = 0; i < theta_.size(); ++i) theta_[i] -= grad[i] * lr;
}

// ---------------------------------------------------------------------------
// Scenes
// ---------------------------------------------------------------------------

namespace {

ScalarField textured_noise(int h, int w, Rng& rng) {
    std::vector<double> n1(static_cast<size_t>(h) * w), n2(n1.size());
    for (double& v : n1) v = rng.uniform(0.0, 1.0);
    for (double& v : n2) v = rng.uniform(0.0, 1.0);
    std::vector<double> b1(n1.size()), b2(n1.size());
    kernels::gaussian_blur_omp(n1.data(), h, w, 1, 1.2, b1.data());
    kernels::gaussian_blur_omp(n2.data(), h, w, 1, 5.0, b2.data());
    ScalarField img(h, w, 1);
    for (size_t i = 0; i < b1.size(); ++i) img.data[i] = 0.6 * b1[i] + 0.4 * b2[i];
    const auto [mn, mx] = std::minmax_element(img.data.begin(), img.data.end());
    const double lo = *mn, span = std::max(*mx - lo, 1e-12);
    for (double& v : img.data) v = 0.05 + 0.9 * (v - lo) / span;
    return img;
}

size_t hull_count(const FlowField& f) {
    size_t n = 0;
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            const Vec2 p{x + f.at(y, x).x, y + f.at(y, x).y};
            if (p.x >= 0 && p.x <= f.width - 1 && p.y >= 0 && p.y <= f.height - 1) ++n;
        }
    return n;
}

}  // namespace

SyntheticScene make_scene(uint64_t seed, int h, int w, double strength) {
    require(h >= 8 && w >= 8 && strength >= 0.0, "make_scene: bad parameters");
    Rng rng(seed);
    SyntheticScene scene;
    scene.strength = strength;
    scene.image_i = textured_noise(h, w, rng);

    const double jitter = 0.3 * strength;
    const double shift = 0.15 * strength;
    if (jitter > 1.0) throw std::runtime_error("make_scene: excessive strength, <70% valid");
    WarpDistributionConfig hcfg;
    hcfg.sigma_h = jitter;
    bool found = false;
    for (int attempt = 0; attempt < 30 && !found; ++attempt) {
        HomographyParams g = sample_homography(hcfg, rng);
        g.h[0][2] += rng.uniform(-shift, shift);
        g.h[1][2] += rng.uniform(-shift, shift);
        const FlowField f_ji = rasterize(g, h, w);
        if (hull_count(f_ji) * 10 >= static_cast<size_t>(h) * w * 7) {
            scene.scene = g;
            scene.f_ji = f_ji;
            scene.f_ij = rasterize(g.inverse(), h, w);
            found = true;
        }
    }
    if (!found) throw std::runtime_error("make_scene: excessive strength, <70% valid");

    WarpedScalar wj = warp(scene.image_i, scene.f_ji);
    scene.image_j = std::move(wj.field);
    scene.valid = std::move(wj.valid);
    return scene;
}

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

std::vector<Objective> all_objectives() {
    return {Objective::kWarpSupervision, Objective::kIpjBipath, Objective::kJiBipath,
            Objective::kWBipath,         Objective::kCycleI,    Objective::kCycleIPrime,
            Objective::kCycleJ,          Objective::kWarpc,     Objective::kForwardBackward,
            Objective::kPhotometric};
}

Objective objective_from_string(const std::string& name) {
    if (name == "warp-supervision") return Objective::kWarpSupervision;
    if (name == "photometric") return Objective::kPhotometric;
    if (name == "forward-backward") return Objective::kForwardBackward;
    if (name == "ipj-bipath") return Objective::kIpjBipath;
    if (name == "ji-bipath") return Objective::kJiBipath;
    if (name == "w-bipath") return Objective::kWBipath;
    if (name == "cycle-i") return Objective::kCycleI;
    if (name == "cycle-i-prime") return Objective::kCycleIPrime;
    if (name == "cycle-j") return Objective::kCycleJ;
    if (name == "warpc") return Objective::kWarpc;
    throw std::invalid_argument("unknown objective: " + name);
}

std::string to_string(Objective o) {
    switch (o) {
        case Objective::kWarpSupervision: return "warp-supervision";
        case Objective::kPhotometric: return "photometric";
        case Objective::kForwardBackward: return "forward-backward";
        case Objective::kIpjBipath: return "ipj-bipath";
        case Objective::kJiBipath: return "ji-bipath";
        case Objective::kWBipath: return "w-bipath";
        case Objective::kCycleI: return "cycle-i";
        case Objective::kCycleIPrime: return "cycle-i-prime";
        case Objective::kCycleJ: return "cycle-j";
        case Objective::kWarpc: return "warpc";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

struct RunState {
    std::unique_ptr<ControlGrid> ij, ji, ipj, jip, self;
};

double mapping_variance(const FlowField& f) {
    const size_t n = f.size();
    double sx = 0, sy = 0;
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            sx += x + f.at(y, x).x;
            sy += y + f.at(y, x).y;
        }
    const double mx = sx / n, my = sy / n;
    double var = 0;
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            const double dx = x + f.at(y, x).x - mx;
            const double dy = y + f.at(y, x).y - my;
            var += dx * dx + dy * dy;
        }
    return var / n;
}

FlowField matcher_noise(int h, int w, double amp, Rng& rng) {
    const int g = 6;
    FlowField grid(g, g);
    for (Vec2& v : grid.data) v = {rng.uniform(-amp, amp), rng.uniform(-amp, amp)};
    FlowField f(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v[2];
            kernels::sample_bilinear(&grid.data[0].x, g, g, 2,
                                     {static_cast<double>(x) * (g - 1) / (w - 1),
                                      static_cast<double>(y) * (g - 1) / (h - 1)},
                                     v);
            f.at(y, x) = {v[0], v[1]};
        }
    return f;
}

/// Persistent matcher failures: a few blobs of large error at fixed
/// locations, the kind of region a visibility mask exists to reject.
FlowField outlier_field(int h, int w, double amp_px, int count, Rng& rng) {
    FlowField f(h, w);
    for (int b = 0; b < count; ++b) {
        const double cx = rng.uniform(0.0, w - 1.0);
        const double cy = rng.uniform(0.0, h - 1.0);
        const double spread = rng.uniform(3.0, 6.0);
        const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double amp = rng.uniform(0.6, 1.0) * amp_px;
        const Vec2 dir{amp * std::cos(ang), amp * std::sin(ang)};
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                const double g = std::exp(-0.5 * d2 / (spread * spread));
                if (g > 1e-3) f.at(y, x) += dir * g;
            }
    }
    return f;
}

/// One gradient-descent step. Returns the training loss value.
double objective_step(Objective obj, const SyntheticScene& scene, RunState& st,
                      const FlowField& w, const FlowField& winv, double lr,
                      const TrainOptions& opt, int step, Rng& noise_rng,
                      const FlowField& outliers) {
    const LossConfig& lc = opt.loss;
    auto add_noise = [&](FlowField f) {
        if (opt.matcher_noise_px > 0.0) {
            const FlowField eps =
                matcher_noise(f.height, f.width, opt.matcher_noise_px, noise_rng);
            for (size_t i = 0; i < f.size(); ++i) f.data[i] += eps.data[i];
        }
        if (outliers.size() == f.size())
            for (size_t i = 0; i < f.size(); ++i) f.data[i] += outliers.data[i];
        return f;
    };
    switch (obj) {
        case Objective::kWarpSupervision: {
            if (!opt.fresh_w) {  // debug mode: plain grid regressed on a fixed W
                const FlowField f = st.self->flow();
                LossInputs in;
                in.f_ipi = &f;
                in.w = &w;
                const LossGradient g = loss_gradient(LossId::kWarpSupervision, in, lc);
                st.self->apply_gradient(*g.find("f_ipi"), lr);
                return g.value;
            }
            const FlowField f_ipi = compose_flows(w, st.self->flow()).field;
            LossInputs in;
            in.f_ipi = &f_ipi;
            in.w = &w;
            const LossGradient g = loss_gradient(LossId::kWarpSupervision, in, lc);
            st.self->apply_gradient(warp_adjoint(*g.find("f_ipi"), w), lr);
            return g.value;
        }
        case Objective::kPhotometric: {
            const FlowField f_ij = st.ij->flow();
            LossInputs in;
            in.img_i = &scene.image_i;
            in.img_j = &scene.image_j;
            in.f_ij = &f_ij;
            const LossGradient g = loss_gradient(LossId::kPhotometric, in, lc);
            st.ij->apply_gradient(*g.find("f_ij"), lr);
            return g.value;
        }
        case Objective::kForwardBackward: {
            const FlowField f_ij = st.ij->flow();
            const FlowField f_ji = st.ji->flow();
            LossInputs in;
            in.f_ij = &f_ij;
            in.f_ji = &f_ji;
            const LossGradient g = loss_gradient(LossId::kForwardBackward, in, lc);
            st.ij->apply_gradient(*g.find("f_ij"), lr);
            st.ji->apply_gradient(*g.find("f_ji"), lr);
            return g.value;
        }
        case Objective::kIpjBipath: {
            const FlowField f_ipj = st.ipj->flow();
            const FlowField f_ij = st.ij->flow();
            LossInputs in;
            in.f_ipj = &f_ipj;
            in.f_ij = &f_ij;
            in.w = &w;
            const LossGradient g = loss_gradient(LossId::kIpjBipath, in, lc);
            st.ipj->apply_gradient(*g.find("f_ipj"), lr);
            st.ij->apply_gradient(*g.find("f_ij"), lr);
            return g.value;
        }
        case Objective::kJiBipath: {
            const FlowField f_jip = st.jip->flow();
            const FlowField f_ji = st.ji->flow();
            LossInputs in;
            in.f_jip = &f_jip;
            in.f_ji = &f_ji;
            in.w = &w;
            const LossGradient g = loss_gradient(LossId::kJiBipath, in, lc);
            st.jip->apply_gradient(*g.find("f_jip"), lr);
            st.ji->apply_gradient(*g.find("f_ji"), lr);
            return g.value;
        }
        case Objective::kWBipath: {
            const FlowField f_ipj = add_noise(compose_flows(w, scene.f_ij).field);
            const FlowField f_ji = st.ji->flow();
            LossInputs in;
            in.f_ipj = &f_ipj;
            in.f_ji = &f_ji;
            in.w = &w;
            const LossGradient g = loss_gradient(LossId::kWBipath, in, lc);
            st.ji->apply_gradient(*g.find("f_ji"), lr);
            return g.value;
        }
        case Objective::kWarpc: {
            // Staged schedule: the visibility mask needs a reasonable flow to
            // be meaningful, so the first half trains maskless.
            LossConfig staged = lc;
            if (step < opt.mask_after_step) staged.alpha2 = 1e9;
            const FlowField f_ipj = add_noise(compose_flows(w, scene.f_ij).field);
            const FlowField f_ji = st.ji->flow();
            const FlowField f_ipi = compose_flows(w, st.self->flow()).field;
            LossInputs in;
            in.f_ipj = &f_ipj;
            in.f_ji = &f_ji;
            in.f_ipi = &f_ipi;
            in.w = &w;
            const LossGradient g = loss_gradient(LossId::kWarpc, in, staged);
            st.ji->apply_gradient(*g.find("f_ji"), lr);
            st.self->apply_gradient(warp_adjoint(*g.find("f_ipi"), w), lr);
            return g.value;
        }
        case Objective::kCycleI: {
            const FlowField f_ij = st.ij->flow();
            const FlowField f_jip = st.jip->flow();
            LossInputs in;
            in.f_ij = &f_ij;
            in.f_jip = &f_jip;
            in.w = &w;
            const LossGradient g = loss_gradient(LossId::kCycleI, in, lc);
            st.ij->apply_gradient(*g.find("f_ij"), lr);
            st.jip->apply_gradient(*g.find("f_jip"), lr);
            return g.value;
        }
        case Objective::kCycleIPrime:
        case Objective::kCycleJ: {
            const FlowField f_ij = st.ij->flow();
            const FlowField f_jip = add_noise(compose_flows(scene.f_ji, winv).field);
            const bool prime = obj == Objective::kCycleIPrime;
            LossInputs in;
            in.f_ij = &f_ij;
            in.f_jip = &f_jip;
            in.w = &w;
            const LossGradient g =
                loss_gradient(prime ? LossId::kCycleIPrime : LossId::kCycleJ, in, lc);
            st.ij->apply_gradient(*g.find("f_ij"), lr);
            return g.value;
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

RunState make_state(Objective obj, int grid, int h, int w, Vec2 init) {
    RunState st;
    auto mk = [&] { return std::make_unique<ControlGrid>(grid, h, w, init); };
    switch (obj) {
        case Objective::kWarpSupervision: st.self = mk(); break;
        case Objective::kPhotometric: st.ij = mk(); break;
        case Objective::kForwardBackward: st.ij = mk(); st.ji = mk(); break;
        case Objective::kIpjBipath: st.ipj = mk(); st.ij = mk(); break;
        case Objective::kJiBipath: st.jip = mk(); st.ji = mk(); break;
        case Objective::kWBipath: st.ji = mk(); break;
        case Objective::kWarpc: st.ji = mk(); st.self = mk(); break;
        case Objective::kCycleI: st.ij = mk(); st.jip = mk(); break;
        case Objective::kCycleIPrime:
        case Objective::kCycleJ: st.ij = mk(); break;
    }
    return st;
}

struct CandidateRun {
    SceneRun run;
    FlowField reported;
    double final_training_loss = std::numeric_limits<double>::infinity();
};

CandidateRun run_one(Objective obj, const SyntheticScene& scene, const TrainOptions& opt,
                     double lr, uint64_t seed) {
    const int h = scene.image_i.height, w = scene.image_i.width;
    Rng rng(seed);

    ValidityMask holdout(h, w, false);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            holdout.at(y, x) = rng.unit() < opt.holdout_fraction ? 1 : 0;
    if (holdout.count() == 0) holdout = ValidityMask(h, w, true);

    RunState st = make_state(obj, opt.grid_size, h, w, opt.init_bias);

    WarpDistributionConfig wcfg;
    wcfg.sigma_h = opt.warp_sigma_h;
    wcfg.scheme = opt.warp_scheme;
    const bool needs_inverse = obj == Objective::kCycleIPrime || obj == Objective::kCycleJ;

    const FlowField outliers =
        opt.matcher_outlier_count > 0
            ? outlier_field(h, w, opt.matcher_outlier_px, opt.matcher_outlier_count, rng)
            : FlowField();

    CandidateRun cand;
    SceneRun& run = cand.run;
    run.seed = seed;
    run.chosen_lr = lr;
    run.curve.reserve(opt.steps);

    FlowField w_field, winv_field;
    for (int t = 0; t < opt.steps; ++t) {
        if (opt.fresh_w || t == 0) {
            const HomographyParams hp = sample_homography(wcfg, rng);
            w_field = rasterize(hp, h, w);
            if (needs_inverse) winv_field = rasterize(hp.inverse(), h, w);
        }
        const double loss =
            objective_step(obj, scene, st, w_field, winv_field, lr, opt, t, rng, outliers);
        run.curve.push_back(loss);
        if (!std::isfinite(loss)) {
            run.diverged = true;
            break;
        }
    }

    // Reported prediction: the trained real-pair flow. Warp supervision has
    // only the synthetic pair and is reported against the final W.
    FlowField truth;
    switch (obj) {
        case Objective::kWarpSupervision:
            cand.reported = opt.fresh_w ? compose_flows(w_field, st.self->flow()).field
                                        : st.self->flow();
            truth = w_field;
            break;
        case Objective::kPhotometric:
        case Objective::kIpjBipath:
        case Objective::kCycleI:
        case Objective::kCycleIPrime:
        case Objective::kCycleJ:
            cand.reported = st.ij->flow();
            truth = scene.f_ij;
            break;
        case Objective::kForwardBackward:
        case Objective::kJiBipath:
        case Objective::kWBipath:
        case Objective::kWarpc:
            cand.reported = st.ji->flow();
            truth = scene.f_ji;
            break;
    }

    // Statistics cover held-out pixels whose ground-truth correspondence is
    // in bounds; pixels with no in-frame match are never supervisable.
    ValidityMask report_mask(h, w, false);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Vec2 p{x + truth.at(y, x).x, y + truth.at(y, x).y};
            const bool in_hull = p.x >= 0 && p.x <= w - 1 && p.y >= 0 && p.y <= h - 1;
            report_mask.at(y, x) = (holdout.at(y, x) && in_hull) ? 1 : 0;
        }
    if (report_mask.count() == 0) report_mask = holdout;
    run.final_aepe = aepe(cand.reported, truth, report_mask);
    run.mean_bias = mean_bias(cand.reported, truth, report_mask);
    run.mapping_variance_init = mapping_variance(FlowField(h, w, opt.init_bias));
    run.mapping_variance_final = mapping_variance(cand.reported);
    double mp = 0, mg = 0;
    size_t n = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (report_mask.at(y, x)) {
                mp += cand.reported.at(y, x).norm();
                mg += truth.at(y, x).norm();
                ++n;
            }
    run.mean_pred_magnitude = mp / n;
    run.gt_magnitude = mg / n;

    const int tail = std::min<int>(5, static_cast<int>(run.curve.size()));
    if (!run.diverged && tail > 0) {
        double acc = 0;
        for (int k = 0; k < tail; ++k) acc += run.curve[run.curve.size() - 1 - k];
        cand.final_training_loss = acc / tail;
    }
    return cand;
}

uint64_t run_seed_for(uint64_t master, size_t scene_index) {
    return master * 1000003ULL + scene_index * 7919ULL + 1ULL;
}

}  // namespace

ExperimentReport train(Objective objective, const std::vector<SyntheticScene>& scenes,
                       const TrainOptions& opt, uint64_t master_seed) {
    require(!scenes.empty(), "train: no scenes");
    require(!opt.lr_grid.empty(), "train: empty lr grid");
    ExperimentReport rep;
    rep.objective = objective;
    for (size_t s = 0; s < scenes.size(); ++s) {
        const uint64_t seed = run_seed_for(master_seed, s);
        // Short probe runs pick the step size, then one full run at the
        // winner. Probes stay below the mask-on threshold so masked losses
        // never skew the comparison.
        TrainOptions full = opt;
        if (full.mask_after_step < 0) full.mask_after_step = full.steps / 2;
        double best_lr = full.lr_grid.front();
        if (full.lr_grid.size() > 1) {
            TrainOptions probe = full;
            probe.steps = std::min(full.steps, std::max(1, full.mask_after_step));
            double best_loss = std::numeric_limits<double>::infinity();
            for (double lr : full.lr_grid) {
                const CandidateRun cand = run_one(objective, scenes[s], probe, lr, seed);
                if (cand.final_training_loss < best_loss) {
                    best_loss = cand.final_training_loss;
                    best_lr = lr;
                }
            }
        }
        CandidateRun best = run_one(objective, scenes[s], full, best_lr, seed);
        rep.runs.push_back(std::move(best.run));
    }
    double aepe_sum = 0, bias_sum = 0, var_sum = 0, mag_sum = 0;
    for (const SceneRun& r : rep.runs) {
        aepe_sum += r.final_aepe;
        bias_sum += r.mean_bias.norm();
        var_sum += r.mapping_variance_final / std::max(r.mapping_variance_init, 1e-12);
        mag_sum += r.mean_pred_magnitude / std::max(r.gt_magnitude, 1e-12);
        rep.any_diverged = rep.any_diverged || r.diverged;
    }
    const double n = static_cast<double>(rep.runs.size());
    rep.mean_aepe = aepe_sum / n;
    rep.mean_abs_bias = bias_sum / n;
    rep.mean_variance_ratio = var_sum / n;
    rep.mean_magnitude_ratio = mag_sum / n;
    return rep;
}

// ---------------------------------------------------------------------------
// Comparison across objectives
// ---------------------------------------------------------------------------

const ExperimentReport* CompareReport::find(Objective o) const {
    for (const ExperimentReport& r : per_objective)
        if (r.objective == o) return &r;
    return nullptr;
}

CompareReport compare_objectives(const CompareConfig& cfg) {
    require(!cfg.seeds.empty(), "compare_objectives: seeds are mandatory");
    std::vector<SyntheticScene> scenes;
    scenes.reserve(cfg.seeds.size());
    for (uint64_t s : cfg.seeds)
        scenes.push_back(make_scene(s, cfg.image_size, cfg.image_size, cfg.scene_strength));

    CompareReport rep;
    for (Objective obj : cfg.objectives) {
        TrainOptions opt = cfg.train;
        if (const auto it = cfg.lr_grid_overrides.find(obj); it != cfg.lr_grid_overrides.end())
            opt.lr_grid = it->second;
        rep.per_objective.push_back(train(obj, scenes, opt, cfg.master_seed));
    }

    CompareSummary& s = rep.summary;
    const ExperimentReport* warpc = rep.find(Objective::kWarpc);
    const ExperimentReport* wbp = rep.find(Objective::kWBipath);
    const ExperimentReport* ipj = rep.find(Objective::kIpjBipath);
    const ExperimentReport* ji = rep.find(Objective::kJiBipath);
    const ExperimentReport* fb = rep.find(Objective::kForwardBackward);
    const ExperimentReport* ci = rep.find(Objective::kCycleI);
    const ExperimentReport* cip = rep.find(Objective::kCycleIPrime);

    if (warpc) s.warpc_aepe_below_1 = warpc->mean_aepe < 1.0;
    if (wbp) {
        s.w_bipath_aepe_below_1 = wbp->mean_aepe < 1.0;
        s.w_bipath_bias_below_03 = wbp->mean_abs_bias < 0.3;
    }
    if (ipj)
        s.ipj_collapse_detected =
            ipj->mean_variance_ratio < 0.05 || ipj->mean_aepe > 10.0;
    if (ji) s.ji_bias_exceeds_1px = ji->mean_abs_bias > 1.0;
    if (fb) s.fb_magnitude_below_10pct = fb->mean_magnitude_ratio < 0.10;
    if (warpc && wbp && warpc->runs.size() == wbp->runs.size()) {
        size_t leq = 0;
        for (size_t i = 0; i < warpc->runs.size(); ++i)
            if (warpc->runs[i].final_aepe <= wbp->runs[i].final_aepe) ++leq;
        s.warpc_leq_w_bipath_most_seeds = leq * 5 >= warpc->runs.size() * 4;
    }
    if (warpc && wbp && cip && ji && ipj && ci) {
        const double good = std::max(warpc->mean_aepe, wbp->mean_aepe);
        const double bad = std::min({ji->mean_aepe, ipj->mean_aepe, ci->mean_aepe});
        s.ordering_ok = good < cip->mean_aepe && cip->mean_aepe < bad;
    }

    if (cfg.dump_pngs && !cfg.dump_dir.empty()) {
        write_png(scenes[0].image_i, cfg.dump_dir + "/scene0_i.png");
        write_png(scenes[0].image_j, cfg.dump_dir + "/scene0_j.png");
        // Re-train scene 0 per objective at the chosen lr to dump warps.
        for (const ExperimentReport& er : rep.per_objective) {
            CandidateRun cand = run_one(er.objective, scenes[0], cfg.train,
                                        er.runs[0].chosen_lr,
                                        run_seed_for(cfg.master_seed, 0));
            const WarpedScalar wq = warp(scenes[0].image_i, cand.reported);
            write_png(wq.field,
                      cfg.dump_dir + "/scene0_warped_" + to_string(er.objective) + ".png");
        }
    }
    return rep;
}

std::string CompareReport::table_text() const {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-18s %10s %10s %10s %10s %9s\n", "objective",
                  "aepe(px)", "|bias|px", "var-ratio", "mag-ratio", "diverged");
    os << buf;
    os << std::string(72, '-') << "\n";
    for (const ExperimentReport& r : per_objective) {
        std::snprintf(buf, sizeof(buf), "%-18s %10.3f %10.3f %10.4f %10.3f %9s\n",
                      to_string(r.objective).c_str(), r.mean_aepe, r.mean_abs_bias,
                      r.mean_variance_ratio, r.mean_magnitude_ratio,
                      r.any_diverged ? "yes" : "no");
        os << buf;
    }
    os << std::string(72, '-') << "\n";
    auto line = [&](const char* name, bool ok) {
        std::snprintf(buf, sizeof(buf), "%-52s %s\n", name, ok ? "yes" : "no");
        os << buf;
    };
    line("warpc reaches aepe < 1 px", summary.warpc_aepe_below_1);
    line("w-bipath reaches aepe < 1 px", summary.w_bipath_aepe_below_1);
    line("ipj-bipath collapse detected", summary.ipj_collapse_detected);
    line("ji-bipath |mean bias| > 1 px", summary.ji_bias_exceeds_1px);
    line("w-bipath |mean bias| < 0.3 px", summary.w_bipath_bias_below_03);
    line("forward-backward magnitude < 10% of truth", summary.fb_magnitude_below_10pct);
    line("warpc <= w-bipath aepe on >= 4/5 seeds", summary.warpc_leq_w_bipath_most_seeds);
    line("aepe ordering {warpc,w-bipath} < cycle-i' < rest", summary.ordering_ok);
    return os.str();
}

std::string CompareReport::to_json() const {
    nlohmann::json j;
    nlohmann::json objs = nlohmann::json::array();
    for (const ExperimentReport& r : per_objective) {
        nlohmann::json o;
        o["objective"] = to_string(r.objective);
        o["mean_aepe"] = r.mean_aepe;
        o["mean_abs_bias"] = r.mean_abs_bias;
        o["mean_variance_ratio"] = r.mean_variance_ratio;
        o["mean_magnitude_ratio"] = r.mean_magnitude_ratio;
        o["any_diverged"] = r.any_diverged;
        nlohmann::json runs = nlohmann::json::array();
        for (const SceneRun& run : r.runs) {
            nlohmann::json rr;
            rr["seed"] = run.seed;
            rr["final_aepe"] = run.final_aepe;
            rr["mean_bias"] = {run.mean_bias.x, run.mean_bias.y};
            rr["mapping_variance_init"] = run.mapping_variance_init;
            rr["mapping_variance_final"] = run.mapping_variance_final;
            rr["mean_pred_magnitude"] = run.mean_pred_magnitude;
            rr["gt_magnitude"] = run.gt_magnitude;
            rr["chosen_lr"] = run.chosen_lr;
            rr["diverged"] = run.diverged;
            // Curve subsampled to keep reports small.
            nlohmann::json curve = nlohmann::json::array();
            const size_t stride = std::max<size_t>(1, run.curve.size() / 50);
            for (size_t i = 0; i < run.curve.size(); i += stride) curve.push_back(run.curve[i]);
            rr["curve"] = curve;
            runs.push_back(rr);
        }
        o["runs"] = runs;
        objs.push_back(o);
    }
    j["objectives"] = objs;
    j["summary"] = {
        {"warpc_aepe_below_1", summary.warpc_aepe_below_1},
        {"w_bipath_aepe_below_1", summary.w_bipath_aepe_below_1},
        {"ipj_collapse_detected", summary.ipj_collapse_detected},
        {"ji_bias_exceeds_1px", summary.ji_bias_exceeds_1px},
        {"w_bipath_bias_below_03", summary.w_bipath_bias_below_03},
        {"fb_magnitude_below_10pct", summary.fb_magnitude_below_10pct},
        {"warpc_leq_w_bipath_most_seeds", summary.warpc_leq_w_bipath_most_seeds},
        {"ordering_ok", summary.ordering_ok},
    };
    return j.dump(2);
}

CompareConfig CompareConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("experiment config: invalid JSON: ") + e.what());
    }
    CompareConfig cfg;
    if (!j.contains("seeds"))
        throw std::invalid_argument("experiment config: missing required field 'seeds'");
    try {
        cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
        if (cfg.seeds.empty())
            throw std::invalid_argument("experiment config: 'seeds' must be non-empty");
        if (j.contains("objectives")) {
            cfg.objectives.clear();
            for (const auto& name : j.at("objectives"))
                cfg.objectives.push_back(objective_from_string(name.get<std::string>()));
        }
        if (j.contains("image_size")) cfg.image_size = j.at("image_size").get<int>();
        if (j.contains("scene_strength")) cfg.scene_strength = j.at("scene_strength").get<double>();
        if (j.contains("master_seed")) cfg.master_seed = j.at("master_seed").get<uint64_t>();
        if (j.contains("steps")) cfg.train.steps = j.at("steps").get<int>();
        if (j.contains("lr_grid")) cfg.train.lr_grid = j.at("lr_grid").get<std::vector<double>>();
        if (j.contains("grid_size")) cfg.train.grid_size = j.at("grid_size").get<int>();
        if (j.contains("holdout_fraction"))
            cfg.train.holdout_fraction = j.at("holdout_fraction").get<double>();
        if (j.contains("init_bias")) {
            const auto b = j.at("init_bias").get<std::vector<double>>();
            if (b.size() != 2)
                throw std::invalid_argument("experiment config: init_bias must have 2 entries");
            cfg.train.init_bias = {b[0], b[1]};
        }
        if (j.contains("fresh_w")) cfg.train.fresh_w = j.at("fresh_w").get<bool>();
        if (j.contains("warp_sigma_h"))
            cfg.train.warp_sigma_h = j.at("warp_sigma_h").get<double>();
        if (j.contains("matcher_noise_px"))
            cfg.train.matcher_noise_px = j.at("matcher_noise_px").get<double>();
        if (j.contains("matcher_outlier_px"))
            cfg.train.matcher_outlier_px = j.at("matcher_outlier_px").get<double>();
        if (j.contains("matcher_outlier_count"))
            cfg.train.matcher_outlier_count = j.at("matcher_outlier_count").get<int>();
        if (j.contains("mask_after_step"))
            cfg.train.mask_after_step = j.at("mask_after_step").get<int>();
        if (j.contains("warp_scheme")) {
            const std::string s = j.at("warp_scheme").get<std::string>();
            if (s == "uniform")
                cfg.train.warp_scheme = SamplingScheme::kUniform;
            else if (s == "gaussian")
                cfg.train.warp_scheme = SamplingScheme::kGaussian;
            else
                throw std::invalid_argument("experiment config: unknown warp_scheme '" + s + "'");
        }
        if (j.contains("loss")) cfg.train.loss = LossConfig::from_json(j.at("loss").dump());
        if (j.contains("lr_grid_overrides"))
            for (const auto& [name, grid] : j.at("lr_grid_overrides").items())
                cfg.lr_grid_overrides[objective_from_string(name)] =
                    grid.get<std::vector<double>>();
        if (j.contains("dump_pngs")) cfg.dump_pngs = j.at("dump_pngs").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("experiment config: bad field type: ") + e.what());
    }
    return cfg;
}

CompareConfig CompareConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace warpc::toy
