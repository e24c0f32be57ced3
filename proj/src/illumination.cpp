#include "dualex/illumination.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace dualex {

void IlluminationParams::validate() const {
    if (lambda < 0.0) throw ArgumentError("lambda must be >= 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ArgumentError("gamma must be in (0, 1]");
    if (sigma <= 0.0) throw ArgumentError("sigma must be > 0");
    if (window < 3 || window % 2 == 0) throw ArgumentError("window must be an odd integer >= 3");
    if (eps <= 0.0) throw ArgumentError("eps must be > 0");
    if (illum_floor <= 0.0) throw ArgumentError("illum_floor must be > 0");
}

ScalarField initial_illumination(const RasterImage& img) {
    ScalarField out(img.width, img.height);
    const double* p = img.data.data();
    for (std::size_t i = 0; i < out.size(); ++i, p += 3)
        out.data[i] = std::max(p[0], std::max(p[1], p[2]));
    return out;
}

ScalarField forward_diff_x(const ScalarField& f) {
    ScalarField out(f.width, f.height);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x + 1 < f.width; ++x) out.at(x, y) = f.at(x + 1, y) - f.at(x, y);
    return out;
}

ScalarField forward_diff_y(const ScalarField& f) {
    ScalarField out(f.width, f.height);
    for (int y = 0; y + 1 < f.height; ++y)
        for (int x = 0; x < f.width; ++x) out.at(x, y) = f.at(x, y + 1) - f.at(x, y);
    return out;
}

ScalarField gaussian_affinity(double sigma, int window, bool squared) {
    if (sigma <= 0.0) throw ArgumentError("sigma must be > 0");
    if (window < 3 || window % 2 == 0) throw ArgumentError("window must be an odd integer >= 3");
    const int r = window / 2;
    const double denom = 2.0 * sigma * sigma;
    ScalarField k(window, window);
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            double d2 = static_cast<double>(dx) * dx + static_cast<double>(dy) * dy;
            double d = squared ? d2 : std::sqrt(d2);
            k.at(dx + r, dy + r) = std::exp(-d / denom);
        }
    return k;
}

ScalarField texture_weight(const ScalarField& dl, double sigma, int window, double eps,
                           bool squared) {
    if (eps <= 0.0) throw ArgumentError("eps must be > 0");
    const ScalarField kernel = gaussian_affinity(sigma, window, squared);
    const int r = window / 2;
    const int w = dl.width, h = dl.height;

    // prefix sums over the kernel give the cropped numerator in O(1) per pixel
    std::vector<double> prefix((window + 1) * (window + 1), 0.0);
    auto pre = [&](int row, int col) -> double& { return prefix[row * (window + 1) + col]; };
    for (int row = 0; row < window; ++row)
        for (int col = 0; col < window; ++col)
            pre(row + 1, col + 1) =
                kernel.at(col, row) + pre(row, col + 1) + pre(row + 1, col) - pre(row, col);

    ScalarField out(w, h);
    detail::parallel_rows(h, static_cast<std::size_t>(w) * h * window, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            for (int x = 0; x < w; ++x) {
                const int lo_dy = std::max(-r, -y), hi_dy = std::min(r, h - 1 - y);
                const int lo_dx = std::max(-r, -x), hi_dx = std::min(r, w - 1 - x);
                double num = pre(hi_dy + r + 1, hi_dx + r + 1) - pre(lo_dy + r, hi_dx + r + 1) -
                             pre(hi_dy + r + 1, lo_dx + r) + pre(lo_dy + r, lo_dx + r);
                double den = 0.0;
                for (int dy = lo_dy; dy <= hi_dy; ++dy) {
                    const double* krow = kernel.data.data() + (dy + r) * window + (lo_dx + r);
                    const double* frow = dl.data.data() + dl.index(x + lo_dx, y + dy);
                    for (int dx = lo_dx; dx <= hi_dx; ++dx) den += *krow++ * *frow++;
                }
                out.at(x, y) = num / (std::abs(den) + eps);
            }
        }
    });
    return out;
}

std::pair<ScalarField, ScalarField> smoothness_weights(const ScalarField& initial,
                                                       const IlluminationParams& params) {
    params.validate();
    ScalarField dlx = forward_diff_x(initial);
    ScalarField dly = forward_diff_y(initial);
    ScalarField wx =
        texture_weight(dlx, params.sigma, params.window, params.eps, params.squared_affinity);
    ScalarField wy =
        texture_weight(dly, params.sigma, params.window, params.eps, params.squared_affinity);
    for (std::size_t i = 0; i < wx.size(); ++i) wx.data[i] /= std::abs(dlx.data[i]) + params.eps;
    for (std::size_t i = 0; i < wy.size(); ++i) wy.data[i] /= std::abs(dly.data[i]) + params.eps;
    return {std::move(wx), std::move(wy)};
}

ScalarField estimate(const RasterImage& img, const IlluminationParams& params,
                     const SolverSettings& settings, SolveStats* stats) {
    params.validate();
    ScalarField initial = initial_illumination(img);
    auto [wx, wy] = smoothness_weights(initial, params);
    SparseSystem system = assemble(initial, wx, wy, params.lambda);
    ScalarField refined = solve_cg(system, settings, stats);

    // The exact minimizer obeys min L' <= L <= max L'; clip the solver's
    // leftover error so downstream stages can rely on the bound.
    auto [lo_it, hi_it] = std::minmax_element(initial.data.begin(), initial.data.end());
    const double lo = *lo_it, hi = *hi_it;
    for (double& v : refined.data) v = std::clamp(v, lo, hi);
    return refined;
}

RasterImage recover(const RasterImage& img, const ScalarField& illum, double gamma,
                    double illum_floor) {
    if (!same_size(img, illum)) throw ArgumentError("recover: image and illumination sizes differ");
    if (gamma <= 0.0) throw ArgumentError("gamma must be > 0");
    if (illum_floor <= 0.0) throw ArgumentError("illum_floor must be > 0");

    RasterImage out(img.width, img.height);
    detail::parallel_rows(img.height, img.pixel_count(), [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            const double* in = img.pixel(0, y);
            double* dst = out.pixel(0, y);
            const double* l = illum.data.data() + illum.index(0, y);
            for (int x = 0; x < img.width; ++x, in += 3, dst += 3) {
                double scale = 1.0 / std::pow(std::max(l[x], illum_floor), gamma);
                for (int c = 0; c < 3; ++c) dst[c] = std::clamp(in[c] * scale, 0.0, 1.0);
            }
        }
    });
    return out;
}

}  // namespace dualex
