#pragma once

#include <cstdint>
#include <vector>

namespace vignette {

/// 8-bit single-channel raster, row-major. Used for decoded luma planes,
/// saliency maps and fixation maps alike; all three share the same shape
/// rules (values 0-255, dimensions fixed at construction).
struct GrayFrame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> values;

  GrayFrame() = default;
  GrayFrame(int w, int h, std::uint8_t fill = 0);

  std::uint8_t at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }

  bool same_shape(const GrayFrame& other) const {
    return width == other.width && height == other.height;
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  bool operator==(const GrayFrame&) const = default;
};

using SaliencyMap = GrayFrame;
using FixationMap = GrayFrame;

/// Ordered per-frame saliency maps for one segment. All frames share the
/// sequence's dimensions; the sequence is never empty.
struct FrameSaliencySequence {
  int width = 0;
  int height = 0;
  std::vector<GrayFrame> frames;
};

/// Validates the shared-shape and non-emptiness invariants.
FrameSaliencySequence make_sequence(std::vector<GrayFrame> frames);

}  // namespace vignette
