// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.

#include "warpc/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "warpc/kernels.hpp"

namespace warpc {

double aepe(const FlowField& pred, const FlowField& truth, const ValidityMask& valid) {
    require(pred.same_shape(truth), "aepe: dimension mismatch");
    require(pred.height == valid.height && pred.width == valid.width,
            "aepe: mask dimension mismatch");
    const size_t n = valid.count();
    require(n > 0, "aepe: zero valid pixels");
    std::vector<double> buf(pred.size(), 0.0);
    const long long total = static_cast<long long>(pred.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < total; ++i)
        if (valid.data[i]) buf[i] = (pred.data[i] - truth.data[i]).norm();
    return kernels::sum_serial(buf.data(), buf.size()) / n;
}

MetricReport pck(const std::vector<Correspondence>& pairs,
                 const std::vector<double>& thresholds) {
    require(!pairs.empty(), "pck: empty correspondence list");
    MetricReport rep;
    rep.count = pairs.size();
    double err_sum = 0.0;
    std::vector<size_t> hits(thresholds.size(), 0);
    for (const Correspondence& c : pairs) {
        const double err = (c.predicted - c.truth).norm();
        err_sum += err;
        for (size_t t = 0; t < thresholds.size(); ++t)
            if (err <= thresholds[t]) ++hits[t];
    }
    rep.aepe = err_sum / pairs.size();
    for (size_t t = 0; t < thresholds.size(); ++t)
        rep.pck[thresholds[t]] = 100.0 * hits[t] / pairs.size();
    return rep;
}

MetricReport pck_dense(const FlowField& flow, const std::vector<Keypoint>& keypoints,
                       const std::vector<double>& thresholds) {
    require(!keypoints.empty(), "pck_dense: empty keypoint list");
    std::vector<Correspondence> pairs;
    pairs.reserve(keypoints.size());
    for (const Keypoint& kp : keypoints) {
        double d[2];
        if (!kernels::sample_bilinear(&flow.data[0].x, flow.height, flow.width, 2,
                                      kp.source, d))
            continue;
        pairs.push_back({{kp.source.x + d[0], kp.source.y + d[1]}, kp.truth});
    }
    require(!pairs.empty(), "pck_dense: no keypoint lands inside the flow grid");
    return pck(pairs, thresholds);
}

Vec2 mean_bias(const FlowField& pred, const FlowField& truth, const ValidityMask& valid) {
    require(pred.same_shape(truth), "mean_bias: dimension mismatch");
    const size_t n = valid.count();
    require(n > 0, "mean_bias: zero valid pixels");
    std::vector<double> bx(pred.size(), 0.0), by(pred.size(), 0.0);
    for (size_t i = 0; i < pred.size(); ++i)
        if (valid.data[i]) {
            const Vec2 d = pred.data[i] - truth.data[i];
            bx[i] = d.x;
            by[i] = d.y;
        }
    return {kernels::sum_serial(bx.data(), bx.size()) / n,
            kernels::sum_serial(by.data(), by.size()) / n};
}

double pck_threshold_for_alpha(double alpha, int query_h, int query_w) {
    return alpha * std::max(query_h, query_w);
}

std::vector<Keypoint> read_keypoints_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open keypoints: " + path);
    std::vector<Keypoint> kps;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        double x, y, xp, yp;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &x, &y, &xp, &yp) != 4)
            throw std::runtime_error("malformed keypoint line " + std::to_string(lineno) +
                                     " in " + path);
        kps.push_back({{x, y}, {xp, yp}});
    }
    return kps;
}

void write_keypoints_csv(const std::vector<Keypoint>& kps, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write keypoints: " + path);
    for (const Keypoint& kp : kps) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", kp.source.x,
                      kp.source.y, kp.truth.x, kp.truth.y);
        out << buf;
    }
}

std::string MetricReport::to_json() const {
    nlohmann::json j;
    j["aepe"] = aepe;
    j["count"] = count;
    nlohmann::json p = nlohmann::json::array();
    for (const auto& [t, pct] : pck)
        p.push_back({{"threshold", t}, {"percent", pct}});
    j["pck"] = p;
    return j.dump(2);
}

}  // namespace warpc
