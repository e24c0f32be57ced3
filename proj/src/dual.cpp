#include "dualex/dual.hpp"

#include <chrono>
#include <future>

namespace dualex {

namespace {

RasterImage correct_under_impl(const RasterImage& img, const IlluminationParams& params,
                               const SolverSettings& settings, SolveStats* stats,
                               ScalarField* illum_out) {
    ScalarField illum = estimate(img, params, settings, stats);
    RasterImage out = recover(img, illum, params.gamma, params.illum_floor);
    if (illum_out) *illum_out = std::move(illum);
    return out;
}

}  // namespace

RasterImage correct_underexposure(const RasterImage& img, const IlluminationParams& params,
                                  const SolverSettings& settings, SolveStats* stats) {
    return correct_under_impl(img, params, settings, stats, nullptr);
}

RasterImage correct_overexposure(const RasterImage& img, const IlluminationParams& params,
                                 const SolverSettings& settings, SolveStats* stats) {
    return invert(correct_under_impl(invert(img), params, settings, stats, nullptr));
}

ExposureTriplet make_triplet(const RasterImage& img, const IlluminationParams& params,
                             const SolverSettings& settings, DualStats* stats,
                             ScalarField* forward_illum, ScalarField* reverse_illum) {
    using clock = std::chrono::steady_clock;

    // The two passes are independent; run the reverse one on its own thread.
    auto reverse_task = std::async(std::launch::async, [&]() {
        auto t0 = clock::now();
        SolveStats s;
        RasterImage over =
            invert(correct_under_impl(invert(img), params, settings, &s, reverse_illum));
        double seconds = std::chrono::duration<double>(clock::now() - t0).count();
        return std::tuple<RasterImage, SolveStats, double>{std::move(over), s, seconds};
    });

    auto t0 = clock::now();
    SolveStats forward_stats;
    RasterImage under = correct_under_impl(img, params, settings, &forward_stats, forward_illum);
    double forward_seconds = std::chrono::duration<double>(clock::now() - t0).count();

    auto [over, reverse_stats, reverse_seconds] = reverse_task.get();
    if (stats) *stats = {forward_stats, reverse_stats, forward_seconds, reverse_seconds};
    return ExposureTriplet{std::move(under), std::move(over), img};
}

}  // namespace dualex
