// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.
//
// Compares the serial reference kernels against the OpenMP lane and checks
// the outputs stay bit-identical. Usage: bench_kernels [size] [reps]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <vector>

#include "warpc/field.hpp"
#include "warpc/kernels.hpp"
#include "warpc/rng.hpp"

using namespace warpc;

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm-up
    const auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double omp_ms, bool identical) {
    std::printf("%-22s serial %8.3f ms   omp %8.3f ms   speedup %4.2fx   %s\n", name,
                serial_ms, omp_ms, serial_ms / omp_ms, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 1024;
    const int reps = argc > 2 ? std::atoi(argv[2]) : 5;
    std::printf("grid %dx%d, %d reps, %d threads\n", n, n, reps, omp_get_max_threads());

    Rng rng(1);
    const size_t npix = static_cast<size_t>(n) * n;
    std::vector<double> src(npix * 2);
    for (double& v : src) v = rng.uniform(-20, 20);
    std::vector<Vec2> pos(npix);
    for (Vec2& p : pos) p = {rng.uniform(-5, n + 4), rng.uniform(-5, n + 4)};

    {
        std::vector<double> out_s(npix * 2), out_p(npix * 2);
        std::vector<uint8_t> val_s(npix), val_p(npix);
        const double ts = time_ms(
            [&] { kernels::gather_serial(src.data(), n, n, 2, pos.data(), npix,
                                         out_s.data(), val_s.data()); },
            reps);
        const double tp = time_ms(
            [&] { kernels::gather_omp(src.data(), n, n, 2, pos.data(), npix,
                                      out_p.data(), val_p.data()); },
            reps);
        report("bilinear gather", ts, tp, out_s == out_p && val_s == val_p);
    }
    {
        const int dn = n / 2 + 3;
        std::vector<double> out_s(static_cast<size_t>(dn) * dn * 2), out_p(out_s.size());
        const double ts = time_ms(
            [&] { kernels::resize_bilinear_serial(src.data(), n, n, 2, out_s.data(), dn, dn); },
            reps);
        const double tp = time_ms(
            [&] { kernels::resize_bilinear_omp(src.data(), n, n, 2, out_p.data(), dn, dn); },
            reps);
        report("bilinear resize", ts, tp, out_s == out_p);
    }
    {
        std::vector<double> out_s(npix * 2), out_p(npix * 2);
        const double ts = time_ms(
            [&] { kernels::gaussian_blur_serial(src.data(), n, n, 2, 2.0, out_s.data()); }, reps);
        const double tp = time_ms(
            [&] { kernels::gaussian_blur_omp(src.data(), n, n, 2, 2.0, out_p.data()); }, reps);
        report("gaussian blur", ts, tp, out_s == out_p);
    }
    return 0;
}
