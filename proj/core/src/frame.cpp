#include "vignette/frame.hpp"

#include <fmt/format.h>

#include "vignette/error.hpp"

namespace vignette {

GrayFrame::GrayFrame(int w, int h, std::uint8_t fill)
    : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {
  require(w > 0 && h > 0, "frame dimensions must be positive");
}

FrameSaliencySequence make_sequence(std::vector<GrayFrame> frames) {
  require(!frames.empty(), "saliency sequence must contain at least one frame");
  const int w = frames.front().width;
  const int h = frames.front().height;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].width != w || frames[i].height != h) {
      fail(fmt::format("frame {} is {}x{}, expected {}x{}", i, frames[i].width,
                       frames[i].height, w, h));
    }
  }
  return FrameSaliencySequence{w, h, std::move(frames)};
}

}  // namespace vignette
