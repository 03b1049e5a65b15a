// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.
//
// The warp-consistency loss family over the triplet (I, I', J) with known
// flow W = F_{I'->I}: photometric and forward-backward baselines, warp
// supervision, the three bipath residuals, cycle losses, the visibility
// mask, adaptive balancing, analytic gradients with the stop-gradient
// convention, and the bias-bound verifier for the JI bipath.
//
// Losses are means of per-pixel residual norms over valid pixels; an empty
// valid set yields value 0 with valid_count 0. Gradients vanish on masked
// and invalid pixels.

#ifndef WARPC_LOSSES_HPP
#define WARPC_LOSSES_HPP

#include <string>
#include <vector>

#include "warpc/field.hpp"
#include "warpc/flow_ops.hpp"

namespace warpc {

enum class Norm { kL2Vector, kL1 };
enum class PhotometricKind { kCharbonnier, kSsim };

struct LossConfig {
    Norm norm = Norm::kL2Vector;
    double alpha1 = 0.025;  // visibility mask sensitivity
    double alpha2 = 0.5;    // visibility mask base threshold
    bool stop_gradient_through_warping_flow = true;
    PhotometricKind photometric = PhotometricKind::kCharbonnier;
    double charbonnier_eps = 1e-3;

    std::string to_json() const;
    static LossConfig from_json(const std::string& text);
    static LossConfig load(const std::string& path);
};

struct LossValue {
    double scalar = 0.0;   // mean per-pixel residual norm over valid pixels
    FlowField residual;    // 2-channel residual; photometric stores (rho, 0)
    ValidityMask valid;    // pixels included in the mean
    size_t valid_count = 0;
};

using VisibilityMask = ValidityMask;

LossValue photometric_loss(const ScalarField& i, const ScalarField& j,
                           const FlowField& f_ij, const LossConfig& cfg);

/// || F_IJ + phi_{F_IJ}(F_JI) ||
LossValue forward_backward_loss(const FlowField& f_ij, const FlowField& f_ji,
                                const LossConfig& cfg);

/// || F_I'I - W || over all pixels (no warp, no validity shrinkage).
LossValue warp_supervision_loss(const FlowField& f_ipi, const FlowField& w,
                                const LossConfig& cfg);

/// || F_I'J - W - phi_W(F_IJ) ||
LossValue ipj_bipath_residual(const FlowField& f_ipj, const FlowField& f_ij,
                              const FlowField& w, const LossConfig& cfg);

/// || F_JI' + phi_{F_JI'}(W) - F_JI ||
LossValue ji_bipath_loss(const FlowField& f_jip, const FlowField& f_ji,
                         const FlowField& w, const LossConfig& cfg);

/// || F_I'J + phi_{F_I'J}(F_JI) - W ||
LossValue w_bipath_loss(const FlowField& f_ipj, const FlowField& f_ji,
                        const FlowField& w, const LossConfig& cfg);

/// Pixel true iff |r|^2 < alpha2 + alpha1 (|F_I'J|^2 + |phi(F_JI)|^2 + |W|^2),
/// intersected with warp validity. Strict inequality at the boundary.
VisibilityMask visibility_mask(const FlowField& f_ipj, const FlowField& f_ji,
                               const FlowField& w, const LossConfig& cfg);

/// W-bipath residual averaged over visibility-mask pixels only.
LossValue w_bipath_visibility_loss(const FlowField& f_ipj, const FlowField& f_ji,
                                   const FlowField& w, const LossConfig& cfg);

enum class CycleStart { kI, kIPrime, kJ };

/// Full-cycle composition residual versus the zero flow; validity is
/// intersected across both chained warps.
LossValue cycle_loss(CycleStart start, const FlowField& f_ij, const FlowField& f_jip,
                     const FlowField& w, const LossConfig& cfg);

struct WarpcResult {
    LossValue total;        // residual/valid of the visibility term
    double lambda = 0.0;    // L_W-vis / L_warp, constant in the gradient
    double w_vis_value = 0.0;
    double warp_sup_value = 0.0;
};

/// L = L_W-vis + lambda * L_warp with lambda = L_W-vis / L_warp (0 when
/// L_warp is 0). No gradient flows through lambda.
WarpcResult warpc_loss(const FlowField& f_ipj, const FlowField& f_ji,
                       const FlowField& f_ipi, const FlowField& w,
                       const LossConfig& cfg);

enum class LossId {
    kPhotometric,
    kForwardBackward,
    kWarpSupervision,
    kIpjBipath,
    kJiBipath,
    kWBipath,
    kWBipathVisibility,
    kCycleI,
    kCycleIPrime,
    kCycleJ,
    kWarpc,
};

LossId loss_id_from_string(const std::string& name);
std::string to_string(LossId id);

/// Flow arguments by role; losses use the subset they need.
struct LossInputs {
    const FlowField* f_ipj = nullptr;  // I' -> J
    const FlowField* f_ji = nullptr;   // J  -> I
    const FlowField* f_ij = nullptr;   // I  -> J
    const FlowField* f_jip = nullptr;  // J  -> I'
    const FlowField* f_ipi = nullptr;  // I' -> I
    const FlowField* w = nullptr;      // known synthetic warp
    const ScalarField* img_i = nullptr;
    const ScalarField* img_j = nullptr;
};

/// One gradient field per predicted-flow argument of the loss, keyed by the
/// role names of LossInputs ("f_ipj", "f_ji", ...). Carries the loss value
/// of the same forward pass.
struct LossGradient {
    std::vector<std::pair<std::string, FlowField>> args;
    double value = 0.0;
    size_t valid_count = 0;
    const FlowField* find(const std::string& name) const;
};

LossGradient loss_gradient(LossId id, const LossInputs& in, const LossConfig& cfg);

struct BiasBoundReport {
    double measured = 0.0;  // delta of the JI loss under a common bias b
    double bound = 0.0;     // || phi_{F_JI'}(DW b) || via central differences
    size_t common_valid = 0;
};

/// Bias sensitivity check: both predictions are biased by b and the loss
/// delta is compared against the first-order bound. Both sides are averaged
/// over the intersection of the biased and unbiased valid sets.
BiasBoundReport ji_bias_bound_check(const FlowField& f_jip, const FlowField& f_ji,
                                    const FlowField& w, Vec2 b, const LossConfig& cfg);

}  // namespace warpc

#endif  // WARPC_LOSSES_HPP
