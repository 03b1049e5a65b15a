// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.
//
// Core flow algebra: flow/mapping duality, bilinear warping with validity
// tracking, flow composition, cropping and resizing. All functions are pure;
// per-pixel loops run on the OpenMP lane with deterministic results.

#ifndef WARPC_FLOW_OPS_HPP
#define WARPC_FLOW_OPS_HPP

#include <utility>

#include "warpc/field.hpp"

namespace warpc {

/// M(x) = x + F(x). Rejects non-finite input.
MappingField flow_to_mapping(const FlowField& f);

/// F(x) = M(x) - x. Exact inverse of flow_to_mapping.
FlowField mapping_to_flow(const MappingField& m);

struct WarpedScalar {
    ScalarField field;
    ValidityMask valid;
};

struct WarpedFlow {
    FlowField field;
    ValidityMask valid;
};

/// phi_F(T)(x) = T(x + F(x)), bilinear, zero fill outside with validity false.
WarpedScalar warp(const ScalarField& t, const FlowField& f);
WarpedFlow warp(const FlowField& t, const FlowField& f);

/// F_13(x) = F_12(x) + warp(F_23, F_12)(x); validity from the warp.
WarpedFlow compose_flows(const FlowField& f12, const FlowField& f23);

/// Centered s x s window; odd remainders drop the extra row/column on the
/// bottom/right (offset = (dim - s) / 2).
ScalarField central_crop(const ScalarField& t, int s);
FlowField central_crop(const FlowField& f, int s);
ValidityMask central_crop(const ValidityMask& m, int s);

/// Bilinear resample of the grid, then u scaled by new_w/w and v by new_h/h.
FlowField resize_flow(const FlowField& f, int new_h, int new_w);

/// Adjoint of t -> warp(t, f).field: scatters the upstream gradient g
/// through the bilinear stencils at x + f(x). Out-of-hull samples (which
/// produced zero-filled output) contribute nothing.
FlowField warp_adjoint(const FlowField& g, const FlowField& f);

}  // namespace warpc

#endif  // WARPC_FLOW_OPS_HPP
