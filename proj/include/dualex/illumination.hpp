#pragma once

#include <utility>

#include "dualex/image.hpp"
#include "dualex/solver.hpp"

namespace dualex {

struct IlluminationParams {
    double lambda = 0.15;       // smoothness weight
    double gamma = 0.6;         // brightening exponent applied at recovery
    double sigma = 3.0;         // Gaussian affinity spread, pixels
    int window = 15;            // side of the affinity window, odd
    double eps = 1e-3;          // stabilizer in the weight denominators
    double illum_floor = 1e-6;  // division guard at near-black pixels
    bool squared_affinity = false;  // use exp(-d^2/(2s^2)) instead of exp(-d/(2s^2))

    void validate() const;
};

/// Per-pixel maximum over RGB. Keeps recovery inside the gamut.
ScalarField initial_illumination(const RasterImage& img);

/// Forward difference along x: f(x+1,y) - f(x,y), zero in the last column.
ScalarField forward_diff_x(const ScalarField& f);
/// Forward difference along y: f(x,y+1) - f(x,y), zero in the last row.
ScalarField forward_diff_y(const ScalarField& f);

/// window x window kernel of exp(-D/(2 sigma^2)) where D is the Euclidean
/// distance from the window center (squared distance when `squared`).
ScalarField gaussian_affinity(double sigma, int window, bool squared = false);

/// Windowed-Gaussian texture/structure ratio for one derivative field:
///   T_p = sum_q G(p,q) / (|sum_q G(p,q) dl_q| + eps)
/// Windows crop at the image borders: both sums run over in-bounds q only.
ScalarField texture_weight(const ScalarField& dl, double sigma, int window, double eps,
                           bool squared = false);

/// Smoothness weights w = T / (|dL'| + eps) for both axes. Strictly positive.
std::pair<ScalarField, ScalarField> smoothness_weights(const ScalarField& initial,
                                                       const IlluminationParams& params);

/// Refined illumination: solve the weighted smoothing system seeded with the
/// max-channel map. The result is confined to [min L', max L'], hence [0,1].
ScalarField estimate(const RasterImage& img, const IlluminationParams& params,
                     const SolverSettings& settings, SolveStats* stats = nullptr);

/// I / max(L, floor)^gamma per channel, clamped to [0,1]. Never darkens.
RasterImage recover(const RasterImage& img, const ScalarField& illum, double gamma,
                    double illum_floor);

}  // namespace dualex
