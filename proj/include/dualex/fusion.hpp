#pragma once

#include <vector>

#include "dualex/dual.hpp"
#include "dualex/image.hpp"

namespace dualex {

enum class MapMode { winner_take_all, normalized };
enum class PyramidKind { gaussian, laplacian };

/// Per-pixel blending weights for an image sequence. In winner_take_all mode
/// the maps are {0,1}-valued and sum to exactly 1 at every pixel; in
/// normalized mode they are fractions that sum to 1.
struct QualityMaps {
    std::vector<ScalarField> maps;
    MapMode mode = MapMode::winner_take_all;
};

/// Multi-level decomposition; level 0 is full resolution, each next level is
/// half size (ceil). A laplacian pyramid collapses back to the original.
struct ImagePyramid {
    PyramidKind kind = PyramidKind::gaussian;
    std::vector<RasterImage> levels;
};

struct FieldPyramid {
    PyramidKind kind = PyramidKind::gaussian;
    std::vector<ScalarField> levels;
};

struct FusionParams {
    double beta_contrast = 1.0;
    double beta_saturation = 1.0;
    double beta_exposedness = 1.0;
    double sigma_e = 0.2;  // well-exposedness spread around 0.5
    int levels = 0;        // pyramid depth; 0 = auto
    MapMode mode = MapMode::winner_take_all;

    void validate() const;
};

/// Absolute response of the 3x3 discrete Laplacian on the luma, replicate borders.
ScalarField contrast_measure(const RasterImage& img);

/// Per-pixel population standard deviation of (R,G,B).
ScalarField saturation_measure(const RasterImage& img);

/// Product over channels of exp(-(c-0.5)^2 / (2 sigma_e^2)).
ScalarField wellexposedness_measure(const RasterImage& img, double sigma_e);

/// C^bc * S^bs * E^be, pointwise.
ScalarField visual_quality(const RasterImage& img, const FusionParams& params);

/// Keep only the per-pixel argmax across the sequence; ties go to the lowest index.
QualityMaps winner_take_all(const std::vector<ScalarField>& quality);

/// Divide each map by the per-pixel sum; a vanishing sum (< 1e-12) becomes uniform 1/K.
QualityMaps normalize_maps(const std::vector<ScalarField>& quality);

/// Largest depth such that the coarsest level still has a few pixels:
/// floor(log2(min(w,h))) - 1, at least 1.
int auto_levels(int width, int height);

ImagePyramid laplacian_pyramid(const RasterImage& img, int levels);
FieldPyramid gaussian_pyramid(const ScalarField& field, int levels);

/// Exact inverse of laplacian_pyramid (no clamping).
RasterImage collapse(const ImagePyramid& pyramid);

/// Burt–Adelson blend: per level, sum over the sequence of the map's Gaussian
/// pyramid times the image's Laplacian pyramid; collapse and clamp to [0,1].
RasterImage blend_with_maps(const std::vector<RasterImage>& images, const QualityMaps& maps,
                            int levels);

/// Full fusion of an exposure triplet in the fixed sequence order
/// [underexposure_corrected, overexposure_corrected, original].
RasterImage fuse(const ExposureTriplet& triplet, const FusionParams& params);

}  // namespace dualex
