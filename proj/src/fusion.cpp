#include "dualex/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parallel.hpp"

namespace dualex {

namespace {

// --- separable 5-tap [1 4 6 4 1]/16 machinery on interleaved planes ---

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

void blur5(const std::vector<double>& src, int w, int h, int ch, std::vector<double>& dst) {
    std::vector<double> tmp(src.size());
    const std::size_t elems = src.size();

    detail::parallel_rows(h, elems, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            const double* row = src.data() + static_cast<std::size_t>(y) * w * ch;
            double* out = tmp.data() + static_cast<std::size_t>(y) * w * ch;
            for (int x = 0; x < w; ++x) {
                const double* a = row + static_cast<std::size_t>(clampi(x - 2, 0, w - 1)) * ch;
                const double* b = row + static_cast<std::size_t>(clampi(x - 1, 0, w - 1)) * ch;
                const double* c = row + static_cast<std::size_t>(x) * ch;
                const double* d = row + static_cast<std::size_t>(clampi(x + 1, 0, w - 1)) * ch;
                const double* e = row + static_cast<std::size_t>(clampi(x + 2, 0, w - 1)) * ch;
                for (int k = 0; k < ch; ++k)
                    out[static_cast<std::size_t>(x) * ch + k] =
                        (a[k] + 4.0 * b[k] + 6.0 * c[k] + 4.0 * d[k] + e[k]) / 16.0;
            }
        }
    });

    const std::size_t stride = static_cast<std::size_t>(w) * ch;
    detail::parallel_rows(h, elems, [&](int y0, int y1) {
        for (int y = y0; y < y1; ++y) {
            const double* a = tmp.data() + stride * clampi(y - 2, 0, h - 1);
            const double* b = tmp.data() + stride * clampi(y - 1, 0, h - 1);
            const double* c = tmp.data() + stride * y;
            const double* d = tmp.data() + stride * clampi(y + 1, 0, h - 1);
            const double* e = tmp.data() + stride * clampi(y + 2, 0, h - 1);
            double* out = dst.data() + stride * y;
            for (std::size_t i = 0; i < stride; ++i)
                out[i] = (a[i] + 4.0 * b[i] + 6.0 * c[i] + 4.0 * d[i] + e[i]) / 16.0;
        }
    });
}

// blur + keep every other sample starting at index 0; ceil(n/2) output size
std::vector<double> downsample2(const std::vector<double>& src, int w, int h, int ch, int& dw,
                                int& dh) {
    std::vector<double> blurred(src.size());
    blur5(src, w, h, ch, blurred);
    dw = (w + 1) / 2;
    dh = (h + 1) / 2;
    std::vector<double> out(static_cast<std::size_t>(dw) * dh * ch);
    for (int y = 0; y < dh; ++y)
        for (int x = 0; x < dw; ++x)
            for (int k = 0; k < ch; ++k)
                out[(static_cast<std::size_t>(y) * dw + x) * ch + k] =
                    blurred[(static_cast<std::size_t>(2 * y) * w + 2 * x) * ch + k];
    return out;
}

// Zero-insertion followed by the doubled 5-tap kernel, folded so that each
// output sample reads the coarse grid directly with replicate borders:
//   even index 2i: (x[i-1] + 6 x[i] + x[i+1]) / 8
//   odd  index 2i+1: (x[i] + x[i+1]) / 2
// Doing it per axis keeps the operation separable and exact on constants.
void upsample_axis(const double* src, int n_coarse, double* dst, int n_fine, int stride_elems,
                   int ch, int lanes) {
    for (int j = 0; j < n_fine; ++j) {
        for (int lane = 0; lane < lanes; ++lane) {
            const double* s = src + lane * ch;
            double* d = dst + lane * ch;
            if (j % 2 == 0) {
                int i = j / 2;
                const double* a = s + static_cast<std::size_t>(clampi(i - 1, 0, n_coarse - 1)) * stride_elems;
                const double* b = s + static_cast<std::size_t>(i) * stride_elems;
                const double* c = s + static_cast<std::size_t>(clampi(i + 1, 0, n_coarse - 1)) * stride_elems;
                for (int k = 0; k < ch; ++k)
                    d[static_cast<std::size_t>(j) * stride_elems + k] =
                        (a[k] + 6.0 * b[k] + c[k]) / 8.0;
            } else {
                int i = j / 2;
                const double* a = s + static_cast<std::size_t>(i) * stride_elems;
                const double* b = s + static_cast<std::size_t>(clampi(i + 1, 0, n_coarse - 1)) * stride_elems;
                for (int k = 0; k < ch; ++k)
                    d[static_cast<std::size_t>(j) * stride_elems + k] = (a[k] + b[k]) / 2.0;
            }
        }
    }
}

// expand a coarse plane to an exact fine size (fw,fh) in {2c-1, 2c} per axis
std::vector<double> upsample2(const std::vector<double>& src, int cw, int chh, int ch, int fw,
                              int fh) {
    // horizontal: (cw,chh) -> (fw,chh). Lanes iterate rows; stride is ch.
    std::vector<double> horiz(static_cast<std::size_t>(fw) * chh * ch);
    for (int y = 0; y < chh; ++y)
        upsample_axis(src.data() + static_cast<std::size_t>(y) * cw * ch, cw,
                      horiz.data() + static_cast<std::size_t>(y) * fw * ch, fw, ch, ch, 1);
    // vertical: (fw,chh) -> (fw,fh). Lanes iterate columns; stride is fw*ch.
    std::vector<double> out(static_cast<std::size_t>(fw) * fh * ch);
    upsample_axis(horiz.data(), chh, out.data(), fh, fw * ch, ch, fw);
    return out;
}

void check_levels(int levels, int w, int h) {
    if (levels < 1) throw ArgumentError("pyramid depth must be at least 1");
    if (levels > auto_levels(w, h))
        throw ArgumentError("pyramid depth " + std::to_string(levels) + " exceeds the limit " +
                            std::to_string(auto_levels(w, h)) + " for " + std::to_string(w) + "x" +
                            std::to_string(h));
}

}  // namespace

void FusionParams::validate() const {
    if (beta_contrast < 0.0 || beta_saturation < 0.0 || beta_exposedness < 0.0)
        throw ArgumentError("fusion exponents must be >= 0");
    if (sigma_e <= 0.0) throw ArgumentError("sigma_e must be > 0");
    if (levels < 0) throw ArgumentError("levels must be >= 1, or 0 for auto");
}

ScalarField contrast_measure(const RasterImage& img) {
    ScalarField lum = to_gray(img);
    const int w = img.width, h = img.height;
    ScalarField out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double c = lum.at(x, y);
            double lap = lum.at(clampi(x - 1, 0, w - 1), y) + lum.at(clampi(x + 1, 0, w - 1), y) +
                         lum.at(x, clampi(y - 1, 0, h - 1)) + lum.at(x, clampi(y + 1, 0, h - 1)) -
                         4.0 * c;
            out.at(x, y) = std::abs(lap);
        }
    return out;
}

ScalarField saturation_measure(const RasterImage& img) {
    ScalarField out(img.width, img.height);
    const double* p = img.data.data();
    for (std::size_t i = 0; i < out.size(); ++i, p += 3) {
        double mean = (p[0] + p[1] + p[2]) / 3.0;
        double var = ((p[0] - mean) * (p[0] - mean) + (p[1] - mean) * (p[1] - mean) +
                      (p[2] - mean) * (p[2] - mean)) /
                     3.0;
        out.data[i] = std::sqrt(var);
    }
    return out;
}

ScalarField wellexposedness_measure(const RasterImage& img, double sigma_e) {
    if (sigma_e <= 0.0) throw ArgumentError("sigma_e must be > 0");
    const double denom = 2.0 * sigma_e * sigma_e;
    ScalarField out(img.width, img.height);
    const double* p = img.data.data();
    for (std::size_t i = 0; i < out.size(); ++i, p += 3) {
        double e = 1.0;
        for (int c = 0; c < 3; ++c) e *= std::exp(-(p[c] - 0.5) * (p[c] - 0.5) / denom);
        out.data[i] = e;
    }
    return out;
}

ScalarField visual_quality(const RasterImage& img, const FusionParams& params) {
    params.validate();
    ScalarField c = contrast_measure(img);
    ScalarField s = saturation_measure(img);
    ScalarField e = wellexposedness_measure(img, params.sigma_e);
    auto raise = [](ScalarField& f, double beta) {
        if (beta == 1.0) return;
        for (double& v : f.data) v = std::pow(v, beta);  // pow(0,0) == 1
    };
    raise(c, params.beta_contrast);
    raise(s, params.beta_saturation);
    raise(e, params.beta_exposedness);
    ScalarField out(img.width, img.height);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = c.data[i] * s.data[i] * e.data[i];
    return out;
}

QualityMaps winner_take_all(const std::vector<ScalarField>& quality) {
    if (quality.empty()) throw ArgumentError("winner_take_all: empty sequence");
    for (const auto& q : quality)
        if (!same_size(q, quality.front()))
            throw ArgumentError("winner_take_all: quality map dimensions differ");

    QualityMaps result;
    result.mode = MapMode::winner_take_all;
    const std::size_t n = quality.front().size();
    for (const auto& q : quality)
        result.maps.emplace_back(q.width, q.height, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;  // strict '>' keeps the lowest index on ties
        for (std::size_t k = 1; k < quality.size(); ++k)
            if (quality[k].data[i] > quality[best].data[i]) best = k;
        result.maps[best].data[i] = 1.0;
    }
    return result;
}

QualityMaps normalize_maps(const std::vector<ScalarField>& quality) {
    if (quality.empty()) throw ArgumentError("normalize_maps: empty sequence");
    for (const auto& q : quality)
        if (!same_size(q, quality.front()))
            throw ArgumentError("normalize_maps: quality map dimensions differ");

    QualityMaps result;
    result.mode = MapMode::normalized;
    result.maps = quality;
    const std::size_t n = quality.front().size();
    const double uniform = 1.0 / static_cast<double>(quality.size());
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (const auto& q : quality) sum += q.data[i];
        if (sum < 1e-12)
            for (auto& m : result.maps) m.data[i] = uniform;
        else
            for (auto& m : result.maps) m.data[i] /= sum;
    }
    return result;
}

int auto_levels(int width, int height) {
    int m = std::min(width, height);
    int floor_log2 = 0;
    while ((2 << floor_log2) <= m) ++floor_log2;  // floor(log2(m)) for m >= 1
    return std::max(1, floor_log2 - 1);
}

FieldPyramid gaussian_pyramid(const ScalarField& field, int levels) {
    check_levels(levels, field.width, field.height);
    FieldPyramid pyr;
    pyr.kind = PyramidKind::gaussian;
    pyr.levels.push_back(field);
    for (int i = 1; i < levels; ++i) {
        const ScalarField& prev = pyr.levels.back();
        int dw = 0, dh = 0;
        std::vector<double> down = downsample2(prev.data, prev.width, prev.height, 1, dw, dh);
        ScalarField next(dw, dh);
        next.data = std::move(down);
        pyr.levels.push_back(std::move(next));
    }
    return pyr;
}

ImagePyramid laplacian_pyramid(const RasterImage& img, int levels) {
    check_levels(levels, img.width, img.height);

    std::vector<RasterImage> gauss;
    gauss.push_back(img);
    for (int i = 1; i < levels; ++i) {
        const RasterImage& prev = gauss.back();
        int dw = 0, dh = 0;
        std::vector<double> down = downsample2(prev.data, prev.width, prev.height, 3, dw, dh);
        RasterImage next(dw, dh);
        next.data = std::move(down);
        gauss.push_back(std::move(next));
    }

    ImagePyramid pyr;
    pyr.kind = PyramidKind::laplacian;
    for (int i = 0; i + 1 < levels; ++i) {
        const RasterImage& fine = gauss[i];
        const RasterImage& coarse = gauss[i + 1];
        std::vector<double> up =
            upsample2(coarse.data, coarse.width, coarse.height, 3, fine.width, fine.height);
        RasterImage level(fine.width, fine.height);
        for (std::size_t j = 0; j < level.data.size(); ++j) level.data[j] = fine.data[j] - up[j];
        pyr.levels.push_back(std::move(level));
    }
    pyr.levels.push_back(std::move(gauss.back()));
    return pyr;
}

RasterImage collapse(const ImagePyramid& pyramid) {
    if (pyramid.kind != PyramidKind::laplacian)
        throw ArgumentError("collapse expects a laplacian pyramid");
    if (pyramid.levels.empty()) throw ArgumentError("collapse: empty pyramid");

    RasterImage acc = pyramid.levels.back();
    for (int i = static_cast<int>(pyramid.levels.size()) - 2; i >= 0; --i) {
        const RasterImage& fine = pyramid.levels[i];
        std::vector<double> up = upsample2(acc.data, acc.width, acc.height, 3, fine.width, fine.height);
        RasterImage next(fine.width, fine.height);
        for (std::size_t j = 0; j < next.data.size(); ++j) next.data[j] = fine.data[j] + up[j];
        acc = std::move(next);
    }
    return acc;
}

RasterImage blend_with_maps(const std::vector<RasterImage>& images, const QualityMaps& maps,
                            int levels) {
    if (images.empty()) throw ArgumentError("blend_with_maps: empty sequence");
    if (images.size() != maps.maps.size())
        throw ArgumentError("blend_with_maps: one map per image required");
    for (std::size_t k = 0; k < images.size(); ++k)
        if (!same_size(images[k], images.front()) || !same_size(images[k], maps.maps[k]))
            throw ArgumentError("blend_with_maps: dimensions differ across the sequence");

    const int w = images.front().width, h = images.front().height;
    if (levels == 0) levels = auto_levels(w, h);
    check_levels(levels, w, h);

    ImagePyramid fused;
    fused.kind = PyramidKind::laplacian;
    for (int l = 0; l < levels; ++l) fused.levels.emplace_back();

    for (std::size_t k = 0; k < images.size(); ++k) {
        FieldPyramid weight = gaussian_pyramid(maps.maps[k], levels);
        ImagePyramid lap = laplacian_pyramid(images[k], levels);
        for (int l = 0; l < levels; ++l) {
            RasterImage& level = lap.levels[l];
            const ScalarField& wmap = weight.levels[l];
            if (fused.levels[l].width == 0)
                fused.levels[l] = RasterImage(level.width, level.height, 0.0);
            RasterImage& acc = fused.levels[l];
            for (std::size_t i = 0; i < wmap.size(); ++i) {
                const double wv = wmap.data[i];
                acc.data[3 * i + 0] += wv * level.data[3 * i + 0];
                acc.data[3 * i + 1] += wv * level.data[3 * i + 1];
                acc.data[3 * i + 2] += wv * level.data[3 * i + 2];
            }
        }
    }
    return clamp01(collapse(fused));
}

RasterImage fuse(const ExposureTriplet& triplet, const FusionParams& params) {
    params.validate();
    if (!same_size(triplet.underexposure_corrected, triplet.original) ||
        !same_size(triplet.overexposure_corrected, triplet.original))
        throw ArgumentError("fuse: triplet dimensions differ");

    std::vector<RasterImage> sequence{triplet.underexposure_corrected,
                                      triplet.overexposure_corrected, triplet.original};
    std::vector<ScalarField> quality;
    quality.reserve(sequence.size());
    for (const RasterImage& img : sequence) quality.push_back(visual_quality(img, params));

    QualityMaps maps = params.mode == MapMode::winner_take_all ? winner_take_all(quality)
                                                               : normalize_maps(quality);
    return blend_with_maps(sequence, maps, params.levels);
}

}  // namespace dualex
