#pragma once

#include <filesystem>

#include "dualex/image.hpp"

namespace dualex {

/// Read a PNG or JPEG file (detected by magic bytes) into a [0,1] RGB raster.
/// 8-bit samples map as v/255, 16-bit as v/65535. Grayscale is replicated to
/// RGB, palettes are expanded, alpha is dropped.
RasterImage load(const std::filesystem::path& path);

/// Write an 8-bit RGB PNG. Channels are encoded as round(v*255), round-half-up;
/// the caller is expected to clamp to [0,1] first.
void save(const RasterImage& img, const std::filesystem::path& path);

/// Write an 8-bit grayscale PNG with the same encoding rule. Used for
/// illumination and weight-map dumps.
void save_gray(const ScalarField& field, const std::filesystem::path& path);

}  // namespace dualex
