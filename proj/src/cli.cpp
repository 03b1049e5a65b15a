// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.
//
// Thin command-line adapters over the library; no numerical logic lives here.

#include "warpc/cli.hpp"

#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "warpc/io.hpp"
#include "warpc/losses.hpp"
#include "warpc/metrics.hpp"
#include "warpc/toy.hpp"
#include "warpc/triplet.hpp"
#include "warpc/warp_sampling.hpp"

namespace warpc {

namespace {

namespace fs = std::filesystem;

/// Standard flow color wheel: hue from direction, saturation from magnitude.
ScalarField flow_preview(const FlowField& f) {
    double maxmag = 1e-9;
    for (const Vec2& v : f.data) maxmag = std::max(maxmag, v.norm());
    ScalarField img(f.height, f.width, 3);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) {
            const Vec2 v = f.at(y, x);
            const double mag = v.norm() / maxmag;
            const double hue = (std::atan2(v.y, v.x) + std::numbers::pi) /
                               (2.0 * std::numbers::pi) * 6.0;
            const int k = static_cast<int>(hue) % 6;
            const double fr = hue - std::floor(hue);
            const double p = 1.0 - mag, q = 1.0 - mag * fr, t = 1.0 - mag * (1.0 - fr);
            double r = 1, g = 1, b = 1;
            switch (k) {
                case 0: r = 1; g = t; b = p; break;
                case 1: r = q; g = 1; b = p; break;
                case 2: r = p; g = 1; b = t; break;
                case 3: r = p; g = q; b = 1; break;
                case 4: r = t; g = p; b = 1; break;
                default: r = 1; g = p; b = q; break;
            }
            img.at(y, x, 0) = r;
            img.at(y, x, 1) = g;
            img.at(y, x, 2) = b;
        }
    return img;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path);
    out << text;
}

struct EvalLossArgs {
    std::string loss;
    std::string f_ipj, f_ji, f_ij, f_jip, f_ipi, w, img_i, img_j;
    std::string config;
    std::string out;
    std::string dump_residual;
    std::string dump_grads;  // prefix
};

FlowField need_flo(const std::string& path, const char* flag) {
    if (path.empty())
        throw CLI::ValidationError(std::string("eval-loss: missing required flag ") + flag +
                                   " for this loss");
    return read_flo(path);
}

int cmd_eval_loss(const EvalLossArgs& a) {
    const LossId id = loss_id_from_string(a.loss);
    const LossConfig cfg = a.config.empty() ? LossConfig{} : LossConfig::load(a.config);

    std::optional<FlowField> f_ipj, f_ji, f_ij, f_jip, f_ipi, w;
    std::optional<ScalarField> img_i, img_j;
    LossInputs in;
    auto load_flow = [&](std::optional<FlowField>& slot, const std::string& path,
                         const char* flag) -> const FlowField* {
        slot = need_flo(path, flag);
        return &*slot;
    };

    LossValue value;
    std::optional<double> lambda;
    std::optional<double> w_vis, warp_sup;
    switch (id) {
        case LossId::kPhotometric:
            if (a.img_i.empty() || a.img_j.empty())
                throw CLI::ValidationError("eval-loss: photometric needs --i and --j");
            img_i = read_png(a.img_i);
            img_j = read_png(a.img_j);
            in.img_i = &*img_i;
            in.img_j = &*img_j;
            in.f_ij = load_flow(f_ij, a.f_ij, "--f-ij");
            value = photometric_loss(*img_i, *img_j, *f_ij, cfg);
            break;
        case LossId::kForwardBackward:
            in.f_ij = load_flow(f_ij, a.f_ij, "--f-ij");
            in.f_ji = load_flow(f_ji, a.f_ji, "--f-ji");
            value = forward_backward_loss(*f_ij, *f_ji, cfg);
            break;
        case LossId::kWarpSupervision:
            in.f_ipi = load_flow(f_ipi, a.f_ipi, "--f-ipi");
            in.w = load_flow(w, a.w, "--w");
            value = warp_supervision_loss(*f_ipi, *w, cfg);
            break;
        case LossId::kIpjBipath:
            in.f_ipj = load_flow(f_ipj, a.f_ipj, "--f-ipj");
            in.f_ij = load_flow(f_ij, a.f_ij, "--f-ij");
            in.w = load_flow(w, a.w, "--w");
            value = ipj_bipath_residual(*f_ipj, *f_ij, *w, cfg);
            break;
        case LossId::kJiBipath:
            in.f_jip = load_flow(f_jip, a.f_jip, "--f-ji-prime");
            in.f_ji = load_flow(f_ji, a.f_ji, "--f-ji");
            in.w = load_flow(w, a.w, "--w");
            value = ji_bipath_loss(*f_jip, *f_ji, *w, cfg);
            break;
        case LossId::kWBipath:
        case LossId::kWBipathVisibility:
            in.f_ipj = load_flow(f_ipj, a.f_ipj, "--f-ipj");
            in.f_ji = load_flow(f_ji, a.f_ji, "--f-ji");
            in.w = load_flow(w, a.w, "--w");
            value = id == LossId::kWBipath
                        ? w_bipath_loss(*f_ipj, *f_ji, *w, cfg)
                        : w_bipath_visibility_loss(*f_ipj, *f_ji, *w, cfg);
            break;
        case LossId::kCycleI:
        case LossId::kCycleIPrime:
        case LossId::kCycleJ: {
            in.f_ij = load_flow(f_ij, a.f_ij, "--f-ij");
            in.f_jip = load_flow(f_jip, a.f_jip, "--f-ji-prime");
            in.w = load_flow(w, a.w, "--w");
            const CycleStart start = id == LossId::kCycleI ? CycleStart::kI
                                     : id == LossId::kCycleIPrime ? CycleStart::kIPrime
                                                                  : CycleStart::kJ;
            value = cycle_loss(start, *f_ij, *f_jip, *w, cfg);
            break;
        }
        case LossId::kWarpc: {
            in.f_ipj = load_flow(f_ipj, a.f_ipj, "--f-ipj");
            in.f_ji = load_flow(f_ji, a.f_ji, "--f-ji");
            in.f_ipi = load_flow(f_ipi, a.f_ipi, "--f-ipi");
            in.w = load_flow(w, a.w, "--w");
            const WarpcResult r = warpc_loss(*f_ipj, *f_ji, *f_ipi, *w, cfg);
            value = r.total;
            lambda = r.lambda;
            w_vis = r.w_vis_value;
            warp_sup = r.warp_sup_value;
            break;
        }
    }

    nlohmann::json rep;
    rep["loss"] = a.loss;
    rep["scalar"] = value.scalar;
    rep["valid_count"] = value.valid_count;
    rep["lambda"] = lambda ? nlohmann::json(*lambda) : nlohmann::json(nullptr);
    if (w_vis) rep["w_vis"] = *w_vis;
    if (warp_sup) rep["warp_sup"] = *warp_sup;
    write_text(a.out, rep.dump(2) + "\n");

    if (!a.dump_residual.empty()) write_flo(value.residual, a.dump_residual);
    if (!a.dump_grads.empty()) {
        const LossGradient g = loss_gradient(id, in, cfg);
        for (const auto& [name, field] : g.args)
            write_flo(field, a.dump_grads + name + ".flo");
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    if (const char* threads = std::getenv("WARPC_THREADS")) {
        const int n = std::atoi(threads);
        if (n > 0) omp_set_num_threads(n);
    }

    CLI::App app{"dense-flow toolkit: synthetic warps, consistency losses, experiments"};
    app.require_subcommand(1);

    // gen-warp
    auto* gen = app.add_subcommand("gen-warp", "sample a synthetic warp to .flo + preview PNG");
    std::string gen_config, gen_out, gen_preview;
    uint64_t gen_seed = 0;
    int gen_h = 520, gen_w = 520;
    gen->add_option("--config", gen_config, "warp distribution JSON")->required();
    gen->add_option("--seed", gen_seed, "RNG seed")->required();
    gen->add_option("--out", gen_out, "output .flo path")->required();
    gen->add_option("--height", gen_h, "grid height");
    gen->add_option("--width", gen_w, "grid width");
    gen->add_option("--preview", gen_preview, "preview PNG path (default: out with .png)");

    // make-triplet
    auto* mk = app.add_subcommand("make-triplet", "build a training triplet directory");
    std::string mk_i, mk_j, mk_config, mk_out;
    uint64_t mk_seed = 0;
    int mk_resize = 750, mk_crop = 520;
    bool mk_nojitter = false;
    mk->add_option("--i", mk_i, "image I (PNG)")->required();
    mk->add_option("--j", mk_j, "image J (PNG)")->required();
    mk->add_option("--config", mk_config, "warp distribution JSON")->required();
    mk->add_option("--seed", mk_seed, "RNG seed")->required();
    mk->add_option("--out", mk_out, "output directory")->required();
    mk->add_option("--resize", mk_resize, "resize size s_r");
    mk->add_option("--crop", mk_crop, "crop size s");
    mk->add_flag("--no-jitter", mk_nojitter, "disable appearance jitter");

    // eval-loss
    auto* ev = app.add_subcommand("eval-loss", "evaluate a loss on stored fields");
    EvalLossArgs ea;
    ev->add_option("--loss", ea.loss, "loss id")->required();
    ev->add_option("--f-ipj", ea.f_ipj, "flow I'->J (.flo)");
    ev->add_option("--f-ji", ea.f_ji, "flow J->I (.flo)");
    ev->add_option("--f-ij", ea.f_ij, "flow I->J (.flo)");
    ev->add_option("--f-ji-prime", ea.f_jip, "flow J->I' (.flo)");
    ev->add_option("--f-ipi", ea.f_ipi, "flow I'->I (.flo)");
    ev->add_option("--w", ea.w, "known warp W (.flo)");
    ev->add_option("--i", ea.img_i, "image I (PNG), photometric only");
    ev->add_option("--j", ea.img_j, "image J (PNG), photometric only");
    ev->add_option("--config", ea.config, "loss config JSON");
    ev->add_option("--out", ea.out, "report JSON path")->required();
    ev->add_option("--dump-residual", ea.dump_residual, "residual .flo path");
    ev->add_option("--dump-grads", ea.dump_grads, "gradient .flo path prefix");

    // experiment
    auto* ex = app.add_subcommand("experiment", "run the objective-comparison experiments");
    std::string ex_config, ex_out;
    ex->add_option("--config", ex_config, "experiment config JSON")->required();
    ex->add_option("--out", ex_out, "output directory")->required();

    // metrics
    auto* me = app.add_subcommand("metrics", "AEPE/PCK from flows or keypoints");
    std::string me_pred, me_gt, me_mask, me_flow, me_kp, me_out, me_thresholds = "1,3,5";
    me->add_option("--pred", me_pred, "predicted flow (.flo)");
    me->add_option("--gt", me_gt, "ground-truth flow (.flo)");
    me->add_option("--mask", me_mask, "validity mask PNG");
    me->add_option("--flow", me_flow, "predicted flow for keypoint mode (.flo)");
    me->add_option("--keypoints", me_kp, "keypoints CSV (x,y,x',y')");
    me->add_option("--thresholds", me_thresholds, "comma-separated PCK thresholds");
    me->add_option("--out", me_out, "report JSON path")->required();

    // bias-check
    auto* bc = app.add_subcommand("bias-check", "JI-bipath bias bound check");
    std::string bc_jip, bc_ji, bc_w, bc_out, bc_config;
    double bc_bx = 2.0, bc_by = 2.0;
    bc->add_option("--f-ji-prime", bc_jip, "flow J->I' (.flo)")->required();
    bc->add_option("--f-ji", bc_ji, "flow J->I (.flo)")->required();
    bc->add_option("--w", bc_w, "known warp W (.flo)")->required();
    bc->add_option("--bx", bc_bx, "bias x (px)");
    bc->add_option("--by", bc_by, "bias y (px)");
    bc->add_option("--config", bc_config, "loss config JSON");
    bc->add_option("--out", bc_out, "report JSON path")->required();

    std::vector<const char*> argv;
    argv.push_back("warpc");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            const WarpDistributionConfig cfg = WarpDistributionConfig::load(gen_config);
            Rng rng(gen_seed);
            const FlowField w = sample_warp(cfg, gen_h, gen_w, rng);
            write_flo(w, gen_out);
            std::string preview = gen_preview;
            if (preview.empty())
                preview = fs::path(gen_out).replace_extension(".png").string();
            write_png(flow_preview(w), preview);
            return 0;
        }
        if (mk->parsed()) {
            TripletConfig cfg;
            cfg.warp = WarpDistributionConfig::load(mk_config);
            cfg.resize_to = mk_resize;
            cfg.crop_to = mk_crop;
            cfg.jitter.enabled = !mk_nojitter;
            const ScalarField i = read_png(mk_i);
            const ScalarField j = read_png(mk_j);
            Rng rng(mk_seed);
            const Triplet t = build_triplet(i, j, cfg, rng);
            fs::create_directories(mk_out);
            write_png(t.i, mk_out + "/i.png");
            write_png(t.i_prime, mk_out + "/i_prime.png");
            write_png(t.j, mk_out + "/j.png");
            write_flo(t.w_crop, mk_out + "/w.flo");
            write_mask_png(t.w_valid, mk_out + "/valid.png");
            return 0;
        }
        if (ev->parsed()) return cmd_eval_loss(ea);
        if (ex->parsed()) {
            toy::CompareConfig cfg = toy::CompareConfig::load(ex_config);
            fs::create_directories(ex_out);
            if (cfg.dump_pngs) cfg.dump_dir = ex_out;
            const toy::CompareReport rep = toy::compare_objectives(cfg);
            write_text(ex_out + "/report.json", rep.to_json() + "\n");
            write_text(ex_out + "/table.txt", rep.table_text());
            std::cout << rep.table_text();
            return 0;
        }
        if (me->parsed()) {
            std::vector<double> thresholds;
            std::stringstream ss(me_thresholds);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) thresholds.push_back(std::stod(tok));
            MetricReport rep;
            if (!me_pred.empty() || !me_gt.empty()) {
                if (me_pred.empty() || me_gt.empty())
                    throw CLI::ValidationError("metrics: flow mode needs --pred and --gt");
                const FlowField pred = read_flo(me_pred);
                const FlowField gt = read_flo(me_gt);
                ValidityMask valid = me_mask.empty()
                                         ? ValidityMask(pred.height, pred.width, true)
                                         : read_mask_png(me_mask);
                std::vector<Correspondence> pairs;
                for (int y = 0; y < pred.height; ++y)
                    for (int x = 0; x < pred.width; ++x)
                        if (valid.at(y, x))
                            pairs.push_back({{x + pred.at(y, x).x, y + pred.at(y, x).y},
                                             {x + gt.at(y, x).x, y + gt.at(y, x).y}});
                rep = pck(pairs, thresholds);
            } else if (!me_flow.empty() && !me_kp.empty()) {
                rep = pck_dense(read_flo(me_flow), read_keypoints_csv(me_kp), thresholds);
            } else {
                throw CLI::ValidationError(
                    "metrics: need either --pred/--gt or --flow/--keypoints");
            }
            write_text(me_out, rep.to_json() + "\n");
            return 0;
        }
        if (bc->parsed()) {
            const LossConfig cfg = bc_config.empty() ? LossConfig{} : LossConfig::load(bc_config);
            const BiasBoundReport rep = ji_bias_bound_check(
                read_flo(bc_jip), read_flo(bc_ji), read_flo(bc_w), {bc_bx, bc_by}, cfg);
            nlohmann::json j;
            j["measured"] = rep.measured;
            j["bound"] = rep.bound;
            j["common_valid"] = rep.common_valid;
            write_text(bc_out, j.dump(2) + "\n");
            return 0;
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace warpc
