#include "dualex/image.hpp"

#include <algorithm>

namespace dualex {

RasterImage::RasterImage(int w, int h, double fill) : width(w), height(h) {
    if (w < 1 || h < 1)
        throw ArgumentError("RasterImage dimensions must be at least 1x1");
    data.assign(3 * pixel_count(), fill);
}

ScalarField::ScalarField(int w, int h, double fill) : width(w), height(h) {
    if (w < 1 || h < 1)
        throw ArgumentError("ScalarField dimensions must be at least 1x1");
    data.assign(size(), fill);
}

RasterImage invert(const RasterImage& img) {
    RasterImage out = img;
    for (double& v : out.data) v = 1.0 - v;
    return out;
}

RasterImage clamp01(RasterImage img) {
    for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
    return img;
}

ScalarField to_gray(const RasterImage& img) {
    ScalarField out(img.width, img.height);
    const double* p = img.data.data();
    for (std::size_t i = 0; i < out.size(); ++i, p += 3)
        out.data[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    return out;
}

}  // namespace dualex
