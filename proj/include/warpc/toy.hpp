// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.
//
// Desk-scale gradient-descent experiments over the consistency-graph losses.
// Scenes are synthetic: a textured image I, a mild scene homography G with
// J = warp(I, flow(G)) and analytically exact ground-truth flows both ways.
//
// The trainable predictor is a small control grid per directed pair,
// bilinearly upsampled to the image. A static grid carries no image content,
// so for the objectives whose positive claims are under test the
// synthetic-pair-side flows are modeled as a converged matcher: frozen
// compositions of the scene truth with the per-step warp W (F_I'J = W o F_IJ,
// F_JI' = Winv o F_JI), optionally degraded by a smooth per-step accuracy
// floor and a few persistent failure blobs - the unreliable regions a
// visibility mask exists to reject. Objectives whose failure modes are under
// test (ipj-bipath collapse, ji-bipath bias, cycle-i, forward-backward) keep
// all predicted flows as free grids. Grids start at a common constant bias so
// bias retention versus correction is measurable. W is sampled as a
// homography each step (its exact inverse is needed for J -> I'). The
// balanced warpc objective trains staged like the full method: maskless
// until mask_after_step, visibility-masked afterwards.

#ifndef WARPC_TOY_HPP
#define WARPC_TOY_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "warpc/field.hpp"
#include "warpc/losses.hpp"
#include "warpc/rng.hpp"
#include "warpc/warp_sampling.hpp"

namespace warpc::toy {

/// g x g grid of 2D control values, bilinearly upsampled to h x w. The
/// upsampling is linear in the parameters; apply_gradient runs its adjoint.
class ControlGrid {
public:
    ControlGrid(int grid_size, int h, int w, Vec2 init);

    FlowField flow() const;
    void apply_gradient(const FlowField& flow_grad, double lr);

    int grid_size() const { return g_; }
    const std::vector<Vec2>& values() const { return theta_; }

private:
    Vec2 control_coord(int y, int x) const;  // pixel -> control-grid coords

    int g_, h_, w_;
    std::vector<Vec2> theta_;
};

struct SyntheticScene {
    ScalarField image_i;
    ScalarField image_j;
    HomographyParams scene;      // maps J coordinates to I coordinates
    FlowField f_ji;              // ground truth J -> I
    FlowField f_ij;              // ground truth I -> J
    ValidityMask valid;          // in-bounds pixels of J's construction
    double strength = 0.0;
};

/// Deterministic scene from seed; throws when no draw at this strength keeps
/// at least 70% of pixels valid.
SyntheticScene make_scene(uint64_t seed, int h, int w, double strength);

enum class Objective {
    kWarpSupervision,
    kPhotometric,
    kForwardBackward,
    kIpjBipath,
    kJiBipath,
    kWBipath,
    kCycleI,
    kCycleIPrime,
    kCycleJ,
    kWarpc,  // W-bipath with visibility mask + warp supervision
};

Objective objective_from_string(const std::string& name);
std::string to_string(Objective o);
std::vector<Objective> all_objectives();

struct TrainOptions {
    int steps = 400;
    std::vector<double> lr_grid = {4.0, 16.0, 64.0};
    int grid_size = 8;
    double holdout_fraction = 0.25;
    Vec2 init_bias{2.5, 2.5};
    bool fresh_w = true;       // false: fixed W and a plain grid, for debugging
    double warp_sigma_h = 0.15;
    SamplingScheme warp_scheme = SamplingScheme::kUniform;
    double matcher_noise_px = 0.0;  // accuracy floor of the idealized matcher
    double matcher_outlier_px = 0.0;   // amplitude of localized matcher failures
    int matcher_outlier_count = 0;     // failure blobs per step
    int mask_after_step = -1;       // warpc mask-on step; -1 means steps/2
    LossConfig loss;
};

struct SceneRun {
    uint64_t seed = 0;
    double final_aepe = 0.0;          // reported flow vs truth on held-out pixels
    Vec2 mean_bias{0, 0};             // reported flow minus truth
    double mapping_variance_init = 0.0;
    double mapping_variance_final = 0.0;
    double mean_pred_magnitude = 0.0;
    double gt_magnitude = 0.0;
    double chosen_lr = 0.0;
    bool diverged = false;
    std::vector<double> curve;        // training loss per step
};

struct ExperimentReport {
    Objective objective = Objective::kWBipath;
    std::vector<SceneRun> runs;
    double mean_aepe = 0.0;
    double mean_abs_bias = 0.0;
    double mean_variance_ratio = 0.0;   // final / init mapping variance
    double mean_magnitude_ratio = 0.0;  // predicted / ground-truth magnitude
    bool any_diverged = false;
};

/// Fixed-step gradient descent on the control grids; the learning rate is
/// picked from opt.lr_grid by final training loss. Divergence (NaN loss) is
/// reported, never clipped.
ExperimentReport train(Objective objective, const std::vector<SyntheticScene>& scenes,
                       const TrainOptions& opt, uint64_t master_seed);

struct CompareConfig {
    std::vector<Objective> objectives = all_objectives();
    std::vector<uint64_t> seeds;  // mandatory, one scene per seed
    int image_size = 64;
    double scene_strength = 1.0;
    TrainOptions train;
    // Per-objective 3-point grids; objectives not listed use train.lr_grid.
    std::map<Objective, std::vector<double>> lr_grid_overrides;
    uint64_t master_seed = 17;
    bool dump_pngs = false;
    std::string dump_dir;

    static CompareConfig from_json(const std::string& text);
    static CompareConfig load(const std::string& path);
};

struct CompareSummary {
    bool warpc_aepe_below_1 = false;
    bool w_bipath_aepe_below_1 = false;
    bool ipj_collapse_detected = false;      // variance < 5% of init or AEPE > 10
    bool ji_bias_exceeds_1px = false;
    bool w_bipath_bias_below_03 = false;
    bool fb_magnitude_below_10pct = false;
    bool warpc_leq_w_bipath_most_seeds = false;  // on >= 4 of 5 seeds
    bool ordering_ok = false;  // {warpc, w-bipath} < cycle-i' < {ji, ipj, cycle-i}
};

struct CompareReport {
    std::vector<ExperimentReport> per_objective;
    CompareSummary summary;

    std::string table_text() const;
    std::string to_json() const;
    const ExperimentReport* find(Objective o) const;
};

/// Runs train() for every configured objective with shared scenes and warp
/// sequences, then evaluates the qualitative failure/success signatures.
CompareReport compare_objectives(const CompareConfig& cfg);

}  // namespace warpc::toy

#endif  // WARPC_TOY_HPP
