#pragma once

#include <cstddef>
#include <vector>

#include "dualex/errors.hpp"

namespace dualex {

/// H×W×3 RGB raster, row-major, interleaved, values nominally in [0,1].
struct RasterImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    RasterImage() = default;
    RasterImage(int w, int h, double fill = 0.0);

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    double* pixel(int x, int y) { return data.data() + 3 * index(x, y); }
    const double* pixel(int x, int y) const { return data.data() + 3 * index(x, y); }
};

/// H×W single-channel map (illuminations, weights, quality maps).
struct ScalarField {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    ScalarField() = default;
    ScalarField(int w, int h, double fill = 0.0);

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    std::size_t size() const { return static_cast<std::size_t>(width) * height; }

    double& at(int x, int y) { return data[index(x, y)]; }
    double at(int x, int y) const { return data[index(x, y)]; }
};

inline bool same_size(const RasterImage& a, const RasterImage& b) {
    return a.width == b.width && a.height == b.height;
}
inline bool same_size(const ScalarField& a, const ScalarField& b) {
    return a.width == b.width && a.height == b.height;
}
inline bool same_size(const RasterImage& a, const ScalarField& b) {
    return a.width == b.width && a.height == b.height;
}

/// 1 - I, channelwise. Exact involution.
RasterImage invert(const RasterImage& img);

/// Clamp every channel to [0,1].
RasterImage clamp01(RasterImage img);

/// BT.601 luma: 0.299 R + 0.587 G + 0.114 B.
ScalarField to_gray(const RasterImage& img);

}  // namespace dualex
