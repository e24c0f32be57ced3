#pragma once

// Deterministic synthetic image corpus for the tests. Everything here is
// seeded, so expected values frozen in the tests stay valid across runs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dualex/image.hpp"

namespace testsupport {

inline double next_uniform(std::mt19937& rng) {
    return rng() * (1.0 / 4294967296.0);  // [0,1); avoids distribution portability issues
}

inline double next_uniform(std::mt19937& rng, double lo, double hi) {
    return lo + (hi - lo) * next_uniform(rng);
}

inline dualex::ScalarField random_field(int w, int h, std::uint32_t seed, double lo = 0.0,
                                        double hi = 1.0) {
    std::mt19937 rng(seed);
    dualex::ScalarField f(w, h);
    for (double& v : f.data) v = next_uniform(rng, lo, hi);
    return f;
}

inline dualex::RasterImage random_image(int w, int h, std::uint32_t seed, double lo = 0.0,
                                        double hi = 1.0) {
    std::mt19937 rng(seed);
    dualex::RasterImage img(w, h);
    for (double& v : img.data) v = next_uniform(rng, lo, hi);
    return img;
}

inline dualex::RasterImage constant_image(int w, int h, double r, double g, double b) {
    dualex::RasterImage img(w, h);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img.data[3 * i + 0] = r;
        img.data[3 * i + 1] = g;
        img.data[3 * i + 2] = b;
    }
    return img;
}

enum class Exposure { normal, under, over, mixed };

// Photo-like scene: smooth ramps, a few colored blobs, soft sinusoidal
// texture, a touch of noise, then an exposure shaping pass.
inline dualex::RasterImage synth_photo(int w, int h, std::uint32_t seed,
                                       Exposure kind = Exposure::normal) {
    std::mt19937 rng(seed);
    dualex::RasterImage img(w, h);

    double ramp_x[3], ramp_y[3], base[3];
    for (int c = 0; c < 3; ++c) {
        ramp_x[c] = next_uniform(rng, -0.3, 0.3);
        ramp_y[c] = next_uniform(rng, -0.3, 0.3);
        base[c] = next_uniform(rng, 0.3, 0.6);
    }

    struct Blob {
        double cx, cy, radius, amp[3];
    };
    std::vector<Blob> blobs;
    int n_blobs = 3 + static_cast<int>(rng() % 3);
    for (int i = 0; i < n_blobs; ++i) {
        Blob b;
        b.cx = next_uniform(rng) * w;
        b.cy = next_uniform(rng) * h;
        b.radius = next_uniform(rng, 0.12, 0.45) * std::min(w, h);
        for (int c = 0; c < 3; ++c) b.amp[c] = next_uniform(rng, -0.35, 0.45);
        blobs.push_back(b);
    }

    double fx = next_uniform(rng, 1.5, 4.0), fy = next_uniform(rng, 1.5, 4.0);
    double phase = next_uniform(rng, 0.0, 6.28), tex_amp = next_uniform(rng, 0.02, 0.06);

    for (int y = 0; y < h; ++y) {
        double* px = img.pixel(0, y);
        for (int x = 0; x < w; ++x, px += 3) {
            double u = w > 1 ? static_cast<double>(x) / (w - 1) : 0.0;
            double v = h > 1 ? static_cast<double>(y) / (h - 1) : 0.0;
            double tex = tex_amp * std::sin(6.28318 * fx * u + phase) * std::sin(6.28318 * fy * v);
            double noise = (next_uniform(rng) - 0.5) * 0.03;
            for (int c = 0; c < 3; ++c) {
                double val = base[c] + ramp_x[c] * u + ramp_y[c] * v + tex + noise;
                for (const Blob& b : blobs) {
                    double dx = x - b.cx, dy = y - b.cy;
                    val += b.amp[c] * std::exp(-(dx * dx + dy * dy) / (2.0 * b.radius * b.radius));
                }
                px[c] = val;
            }
        }
    }

    // exposure shaping
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        double v = std::clamp(img.data[i], 0.0, 1.0);
        switch (kind) {
            case Exposure::normal:
                v = 0.15 + 0.7 * v;
                break;
            case Exposure::under:
                v *= 0.3;
                break;
            case Exposure::over:
                v = 1.0 - 0.3 * (1.0 - v);
                break;
            case Exposure::mixed: {
                std::size_t row = (i / 3) / static_cast<std::size_t>(w);
                double t = h > 1 ? static_cast<double>(row) / (h - 1) : 0.5;
                double dark = v * 0.25, bright = 1.0 - 0.25 * (1.0 - v);
                v = (1.0 - t) * bright + t * dark;  // bright top, dark bottom
                break;
            }
        }
        img.data[i] = std::clamp(v, 0.0, 1.0);
    }
    return img;
}

/// At least 20 varied photos: every exposure condition, odd and even sizes.
inline std::vector<dualex::RasterImage> test_corpus() {
    struct Spec {
        int w, h;
        Exposure kind;
    };
    const Spec specs[] = {
        {64, 48, Exposure::under},  {48, 64, Exposure::over},   {37, 53, Exposure::mixed},
        {53, 37, Exposure::normal}, {80, 45, Exposure::under},  {45, 80, Exposure::over},
        {96, 72, Exposure::mixed},  {33, 65, Exposure::normal}, {65, 33, Exposure::under},
        {71, 71, Exposure::over},   {40, 40, Exposure::mixed},  {56, 88, Exposure::normal},
        {88, 56, Exposure::under},  {49, 49, Exposure::over},   {61, 43, Exposure::mixed},
        {43, 61, Exposure::normal}, {77, 58, Exposure::under},  {58, 77, Exposure::over},
        {36, 92, Exposure::mixed},  {92, 36, Exposure::under},  {31, 31, Exposure::over},
    };
    std::vector<dualex::RasterImage> corpus;
    std::uint32_t seed = 1000;
    for (const Spec& s : specs) corpus.push_back(synth_photo(s.w, s.h, seed++, s.kind));
    return corpus;
}

/// Five well-exposed reference scenes for the brightening checks.
inline std::vector<dualex::RasterImage> reference_corpus() {
    std::vector<dualex::RasterImage> refs;
    const int dims[5][2] = {{64, 48}, {57, 41}, {48, 48}, {72, 54}, {45, 63}};
    for (int i = 0; i < 5; ++i)
        refs.push_back(synth_photo(dims[i][0], dims[i][1], 2000 + i, Exposure::normal));
    return refs;
}

inline double mean_luma(const dualex::RasterImage& img) {
    dualex::ScalarField g = dualex::to_gray(img);
    double s = 0.0;
    for (double v : g.data) s += v;
    return s / g.size();
}

inline double rmse(const dualex::RasterImage& a, const dualex::RasterImage& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return std::sqrt(s / a.data.size());
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace testsupport
