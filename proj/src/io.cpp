// Copyright (c) 2026 the warpc authors.
// Licensed under the Apache License, Version 2.0.

#include "warpc/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

namespace warpc {

namespace {

constexpr float kFloMagic = 202021.25f;

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw IoError("cannot open file: " + path);
    return f;
}

}  // namespace

void write_flo(const FlowField& f, const std::string& path) {
    FilePtr fp = open_or_throw(path, "wb");
    const int32_t w = f.width, h = f.height;
    std::fwrite(&kFloMagic, sizeof(float), 1, fp.get());
    std::fwrite(&w, sizeof(int32_t), 1, fp.get());
    std::fwrite(&h, sizeof(int32_t), 1, fp.get());
    std::vector<float> row(static_cast<size_t>(w) * 2);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            row[2 * x + 0] = static_cast<float>(f.at(y, x).x);
            row[2 * x + 1] = static_cast<float>(f.at(y, x).y);
        }
        if (std::fwrite(row.data(), sizeof(float), row.size(), fp.get()) != row.size())
            throw IoError("short write to " + path);
    }
}

FlowField read_flo(const std::string& path) {
    FilePtr fp = open_or_throw(path, "rb");
    float magic = 0.0f;
    if (std::fread(&magic, sizeof(float), 1, fp.get()) != 1 || magic != kFloMagic)
        throw IoError("malformed .flo magic in " + path);
    int32_t w = 0, h = 0;
    if (std::fread(&w, sizeof(int32_t), 1, fp.get()) != 1 ||
        std::fread(&h, sizeof(int32_t), 1, fp.get()) != 1)
        throw IoError("truncated .flo header in " + path);
    if (w <= 0 || h <= 0 || w > 100000 || h > 100000)
        throw IoError("implausible .flo dimensions in " + path);
    FlowField f(h, w);
    std::vector<float> row(static_cast<size_t>(w) * 2);
    for (int y = 0; y < h; ++y) {
        if (std::fread(row.data(), sizeof(float), row.size(), fp.get()) != row.size())
            throw IoError("truncated .flo data in " + path);
        for (int x = 0; x < w; ++x)
            f.at(y, x) = {row[2 * x + 0], row[2 * x + 1]};
    }
    return f;
}

namespace {

uint8_t to_byte(double v) {
    return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

void write_png(const ScalarField& img, const std::string& path) {
    require(img.channels == 1 || img.channels == 3, "write_png: expected 1 or 3 channels");
    FilePtr fp = open_or_throw(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng failure writing " + path);
    }
    png_init_io(png, fp.get());
    const int color = img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
    png_set_IHDR(png, info, img.width, img.height, 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<uint8_t> row(static_cast<size_t>(img.width) * img.channels);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                row[static_cast<size_t>(x) * img.channels + c] = to_byte(img.at(y, x, c));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

ScalarField read_png(const std::string& path) {
    FilePtr fp = open_or_throw(path, "rb");
    uint8_t sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8))
        throw IoError("not a PNG file: " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng failure reading " + path);
    }
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    // Normalize everything to 8-bit gray or RGB.
    png_set_strip_16(png);
    png_set_packing(png);
    png_set_strip_alpha(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY &&
        png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    png_read_update_info(png, info);

    const int h = static_cast<int>(png_get_image_height(png, info));
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int c = static_cast<int>(png_get_channels(png, info));
    if (c != 1 && c != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("unsupported PNG channel count in " + path);
    }
    ScalarField img(h, w, c);
    std::vector<uint8_t> row(static_cast<size_t>(w) * c);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < w; ++x)
            for (int k = 0; k < c; ++k)
                img.at(y, x, k) = row[static_cast<size_t>(x) * c + k] / 255.0;
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_mask_png(const ValidityMask& m, const std::string& path) {
    ScalarField img(m.height, m.width, 1);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            img.at(y, x, 0) = m.at(y, x) ? 1.0 : 0.0;
    write_png(img, path);
}

ValidityMask read_mask_png(const std::string& path) {
    const ScalarField img = read_png(path);
    require(img.channels == 1, "mask PNG must be grayscale");
    ValidityMask m(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            m.at(y, x) = img.at(y, x, 0) > 0.5 ? 1 : 0;
    return m;
}

}  // namespace warpc
