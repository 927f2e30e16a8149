#pragma once

#include <filesystem>
#include <vector>

#include "vignette/frame.hpp"

namespace vignette {

/// Loads one PGM per frame, in path order. All files must share dimensions.
FrameSaliencySequence load_map_sequence(const std::vector<std::filesystem::path>& paths);

/// Per-pixel maximum over all frames of the sequence.
SaliencyMap aggregate(const FrameSaliencySequence& seq);

/// Deterministic classical saliency: an isotropic Gaussian center prior
/// (sigma = 0.3 * min(w, h)) scaled by temporal contrast,
///
///   map_f(x, y) = normalize_0_255( prior(x, y) * (1 + |luma_f - luma_{f-1}| / 255) )
///
/// with each frame normalized so its maximum lands on 255. Frame 0 reuses
/// frame 1's temporal difference. Requires at least two frames.
FrameSaliencySequence generate_builtin(const std::vector<GrayFrame>& luma_frames);

/// Weighted blend of a stored map with an eye-tracker fixation map:
/// out = round(alpha * current + (1 - alpha) * fixation), rounding half away
/// from zero. alpha must lie in [0, 1]; dimensions must match.
SaliencyMap update_map(const SaliencyMap& current, const FixationMap& fixation, double alpha);

}  // namespace vignette
