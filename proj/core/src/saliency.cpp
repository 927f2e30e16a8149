#include "vignette/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>

#include "vignette/error.hpp"
#include "vignette/pgm.hpp"

namespace vignette {

FrameSaliencySequence load_map_sequence(const std::vector<std::filesystem::path>& paths) {
  require(!paths.empty(), "no saliency map files given");
  std::vector<GrayFrame> frames;
  frames.reserve(paths.size());
  for (const auto& p : paths) frames.push_back(read_pgm(p));
  return make_sequence(std::move(frames));
}

SaliencyMap aggregate(const FrameSaliencySequence& seq) {
  SaliencyMap out = seq.frames.front();
  for (std::size_t f = 1; f < seq.frames.size(); ++f) {
    const auto& frame = seq.frames[f];
    for (std::size_t i = 0; i < out.values.size(); ++i) {
      out.values[i] = std::max(out.values[i], frame.values[i]);
    }
  }
  return out;
}

namespace {

std::vector<double> center_prior(int w, int h) {
  const double cx = (w - 1) / 2.0;
  const double cy = (h - 1) / 2.0;
  const double sigma = 0.3 * std::min(w, h);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  std::vector<double> prior(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      prior[static_cast<std::size_t>(y) * w + x] = std::exp(-d2 * inv);
    }
  }
  return prior;
}

GrayFrame normalized_map(const std::vector<double>& raw, int w, int h) {
  const double peak = *std::max_element(raw.begin(), raw.end());
  GrayFrame map(w, h);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    map.values[i] = static_cast<std::uint8_t>(std::lround(255.0 * raw[i] / peak));
  }
  return map;
}

}  // namespace

FrameSaliencySequence generate_builtin(const std::vector<GrayFrame>& luma_frames) {
  require(luma_frames.size() >= 2, "builtin saliency needs at least two frames");
  const int w = luma_frames.front().width;
  const int h = luma_frames.front().height;
  for (const auto& f : luma_frames) {
    require(f.width == w && f.height == h, "luma frames must share dimensions");
  }

  const std::vector<double> prior = center_prior(w, h);
  const std::size_t n = prior.size();
  std::vector<GrayFrame> maps;
  maps.reserve(luma_frames.size());

  std::vector<double> raw(n);
  for (std::size_t f = 0; f < luma_frames.size(); ++f) {
    // Frame 0 has no predecessor; it reuses frame 1's temporal difference.
    const GrayFrame& cur = luma_frames[f == 0 ? 1 : f];
    const GrayFrame& prev = luma_frames[f == 0 ? 0 : f - 1];
    for (std::size_t i = 0; i < n; ++i) {
      const int diff = std::abs(static_cast<int>(cur.values[i]) - prev.values[i]);
      raw[i] = prior[i] * (1.0 + diff / 255.0);
    }
    maps.push_back(normalized_map(raw, w, h));
  }
  return make_sequence(std::move(maps));
}

SaliencyMap update_map(const SaliencyMap& current, const FixationMap& fixation, double alpha) {
  require(current.same_shape(fixation),
          fmt::format("map dimensions differ: {}x{} vs {}x{}", current.width, current.height,
                      fixation.width, fixation.height));
  require(alpha >= 0.0 && alpha <= 1.0, "alpha must lie in [0, 1]");

  SaliencyMap out(current.width, current.height);
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const double blended = alpha * current.values[i] + (1.0 - alpha) * fixation.values[i];
    out.values[i] = static_cast<std::uint8_t>(std::lround(blended));
  }
  return out;
}

}  // namespace vignette
