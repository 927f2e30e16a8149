#pragma once

#include <cstdint>
#include <vector>

#include "vignette/frame.hpp"

namespace vignette {

/// Identical frames (MSE 0) and near-identical ones both report this cap, so
/// the metric stays finite and monotone in error.
inline constexpr double kPsnrCapDb = 100.0;

/// PSNR pooled over every pixel of every frame pair: one global MSE, then
/// 10*log10(255^2 / MSE), capped at kPsnrCapDb.
double psnr(const std::vector<GrayFrame>& reference, const std::vector<GrayFrame>& test);

/// Saliency-weighted PSNR. Each pixel's squared error is weighted by
/// max(map, 1)/255 so unsalient regions still contribute a little; the
/// weighted mean feeds the same log transform and cap as psnr(). Pass one
/// map per frame, or a single map to weight every frame alike.
double ewpsnr(const std::vector<GrayFrame>& reference, const std::vector<GrayFrame>& test,
              const std::vector<GrayFrame>& weight_maps);

/// Fraction saved going from `original_bytes` to `new_bytes` (1 - new/orig);
/// negative when the result grew.
double bitrate_reduction(std::int64_t original_bytes, std::int64_t new_bytes);

}  // namespace vignette
