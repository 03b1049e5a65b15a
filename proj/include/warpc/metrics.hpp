// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.
//
// Evaluation metrics: average end-point error, percentage of correct
// keypoints, and the mean prediction bias.

#ifndef WARPC_METRICS_HPP
#define WARPC_METRICS_HPP

#include <map>
#include <string>
#include <vector>

#include "warpc/field.hpp"

namespace warpc {

struct Correspondence {
    Vec2 predicted;
    Vec2 truth;
};

struct MetricReport {
    double aepe = 0.0;
    std::map<double, double> pck;  // threshold -> percentage in [0, 100]
    size_t count = 0;

    std::string to_json() const;
};

/// Mean Euclidean flow error over valid pixels. Errors on an empty valid set.
double aepe(const FlowField& pred, const FlowField& truth, const ValidityMask& valid);

/// Percentage of correspondences with error <= T (inclusive) per threshold.
MetricReport pck(const std::vector<Correspondence>& pairs,
                 const std::vector<double>& thresholds);

/// Dense variant: predicted targets are keypoints displaced by a bilinear
/// sample of the flow; keypoints whose sample is out of bounds are skipped.
struct Keypoint {
    Vec2 source;  // location in the flow's frame
    Vec2 truth;   // ground-truth target
};
MetricReport pck_dense(const FlowField& flow, const std::vector<Keypoint>& keypoints,
                       const std::vector<double>& thresholds);

/// Mean of (pred - truth) over valid pixels. Errors on an empty valid set.
Vec2 mean_bias(const FlowField& pred, const FlowField& truth, const ValidityMask& valid);

/// Normalized-PCK helper: threshold = alpha * max(h_q, w_q).
double pck_threshold_for_alpha(double alpha, int query_h, int query_w);

/// CSV keypoint lists, one "x,y,x',y'" line per correspondence, pixel units.
std::vector<Keypoint> read_keypoints_csv(const std::string& path);
void write_keypoints_csv(const std::vector<Keypoint>& kps, const std::string& path);

}  // namespace warpc

#endif  // WARPC_METRICS_HPP
