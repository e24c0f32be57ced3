#pragma once

#include "dualex/illumination.hpp"
#include "dualex/image.hpp"

namespace dualex {

/// The fusion input sequence: brightened, darkened, and original image.
struct ExposureTriplet {
    RasterImage underexposure_corrected;  // forward pass, never darker than the input
    RasterImage overexposure_corrected;   // reverse pass, never brighter than the input
    RasterImage original;
};

struct DualStats {
    SolveStats forward;
    SolveStats reverse;
    double forward_seconds = 0.0;
    double reverse_seconds = 0.0;
};

/// Brighten by dividing out the gamma-adjusted forward illumination.
RasterImage correct_underexposure(const RasterImage& img, const IlluminationParams& params,
                                  const SolverSettings& settings, SolveStats* stats = nullptr);

/// Darken by running the underexposure correction on the inverted image and
/// inverting back. Defined as exactly invert ∘ correct_underexposure ∘ invert.
RasterImage correct_overexposure(const RasterImage& img, const IlluminationParams& params,
                                 const SolverSettings& settings, SolveStats* stats = nullptr);

/// Run both passes (concurrently) and bundle the results with the input.
/// The optional fields receive the forward illumination and the reverse
/// illumination (that of the inverted input) for diagnostics.
ExposureTriplet make_triplet(const RasterImage& img, const IlluminationParams& params,
                             const SolverSettings& settings, DualStats* stats = nullptr,
                             ScalarField* forward_illum = nullptr,
                             ScalarField* reverse_illum = nullptr);

}  // namespace dualex
