#include "vignette/tile.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "vignette/error.hpp"

namespace vignette {

double TileGrid::area_fraction(int t) const {
  const TileRect r = tile(t);
  const double frame_area = static_cast<double>(frame_width()) * frame_height();
  return (static_cast<double>(r.w) * r.h) / frame_area;
}

int TileGrid::tile_index_at(int x, int y) const {
  require(x >= 0 && x < frame_width() && y >= 0 && y < frame_height(),
          fmt::format("pixel ({}, {}) outside {}x{} frame", x, y, frame_width(), frame_height()));
  const auto row_it = std::upper_bound(row_bounds.begin(), row_bounds.end(), y);
  const auto col_it = std::upper_bound(col_bounds.begin(), col_bounds.end(), x);
  const int r = static_cast<int>(row_it - row_bounds.begin()) - 1;
  const int c = static_cast<int>(col_it - col_bounds.begin()) - 1;
  return r * cols + c;
}

namespace {

// Floor-uniform sizes, remainder on the leading tiles, interior boundaries
// rounded down to the next even offset.
std::vector<int> split_even(int extent, int parts) {
  const int base = extent / parts;
  const int rem = extent % parts;
  std::vector<int> bounds(static_cast<std::size_t>(parts) + 1, 0);
  for (int i = 0; i < parts; ++i) {
    bounds[i + 1] = bounds[i] + base + (i < rem ? 1 : 0);
  }
  for (int i = 1; i < parts; ++i) bounds[i] -= bounds[i] % 2;
  return bounds;
}

void validate_bounds(const std::vector<int>& bounds, int extent, const char* axis) {
  require(bounds.front() == 0 && bounds.back() == extent,
          fmt::format("{} boundaries must span [0, {}]", axis, extent));
  for (std::size_t i = 1; i < bounds.size(); ++i) {
    require(bounds[i] > bounds[i - 1], fmt::format("{} boundaries must strictly increase", axis));
    if (i + 1 < bounds.size()) {
      require(bounds[i] % 2 == 0, fmt::format("interior {} boundary must be even", axis));
    }
  }
}

}  // namespace

TileGrid make_uniform_grid(int frame_w, int frame_h, int rows, int cols) {
  require(frame_w > 0 && frame_h > 0, "frame dimensions must be positive");
  require(frame_w % 2 == 0 && frame_h % 2 == 0, "frame dimensions must be even");
  require(rows >= 1 && cols >= 1, "grid needs at least one row and column");
  require(rows <= frame_h / 2 && cols <= frame_w / 2, "more tiles than even pixel pairs");

  TileGrid grid;
  grid.rows = rows;
  grid.cols = cols;
  grid.row_bounds = split_even(frame_h, rows);
  grid.col_bounds = split_even(frame_w, cols);
  validate_bounds(grid.row_bounds, frame_h, "row");
  validate_bounds(grid.col_bounds, frame_w, "col");
  return grid;
}

GridEnumeration enumerate_configs(int frame_w, int frame_h, const TileLimits& limits) {
  require(frame_w > 0 && frame_h > 0 && frame_w % 2 == 0 && frame_h % 2 == 0,
          "frame dimensions must be positive and even");
  require(limits.min_rows >= 1 && limits.min_cols >= 1 && limits.max_tiles >= 1,
          "bad search limits");

  GridEnumeration out;
  for (int rows = limits.min_rows; rows <= limits.max_rows; ++rows) {
    for (int cols = limits.min_cols; cols <= limits.max_cols; ++cols) {
      if (rows * cols > limits.max_tiles) continue;
      if (rows > frame_h / 2 || cols > frame_w / 2) continue;
      TileGrid grid = make_uniform_grid(frame_w, frame_h, rows, cols);
      bool fits = true;
      for (int t = 0; t < grid.num_tiles() && fits; ++t) {
        const TileRect r = grid.tile(t);
        fits = r.w >= limits.min_tile_width && r.h >= limits.min_tile_height;
      }
      if (fits) out.grids.push_back(std::move(grid));
    }
  }
  if (out.grids.empty()) {
    out.grids.push_back(make_uniform_grid(frame_w, frame_h, 1, 1));
    out.fallback = true;
  }
  return out;
}

std::vector<std::uint8_t> tile_weights(const SaliencyMap& map, const TileGrid& grid) {
  require(map.width == grid.frame_width() && map.height == grid.frame_height(),
          fmt::format("saliency map is {}x{}, grid expects {}x{}", map.width, map.height,
                      grid.frame_width(), grid.frame_height()));
  std::vector<std::uint8_t> weights(static_cast<std::size_t>(grid.num_tiles()), 0);
  for (int t = 0; t < grid.num_tiles(); ++t) {
    const TileRect r = grid.tile(t);
    std::uint8_t w = 0;
    for (int y = r.y; y < r.y + r.h; ++y) {
      for (int x = r.x; x < r.x + r.w; ++x) {
        w = std::max(w, map.at(x, y));
      }
    }
    weights[t] = w;
  }
  return weights;
}

TileQualityMap map_bitrates(const TileGrid& grid, const std::vector<std::uint8_t>& weights,
                            int target_kbps, double floor_frac) {
  require(target_kbps >= 10, "target bitrate must be at least 10 kbps");
  require(floor_frac > 0.0 && floor_frac <= 1.0, "floor_frac must lie in (0, 1]");
  require(static_cast<int>(weights.size()) == grid.num_tiles(),
          "weight count must equal tile count");

  const double floor_kbps = std::round(floor_frac * target_kbps);
  TileQualityMap q;
  q.grid = grid;
  q.weights = weights;
  q.target_kbps = target_kbps;
  q.floor_frac = floor_frac;
  q.bitrates_kbps.reserve(weights.size());
  for (std::uint8_t w : weights) {
    const double b = floor_kbps + (w / 255.0) * (target_kbps - floor_kbps);
    q.bitrates_kbps.push_back(static_cast<int>(std::lround(b)));
  }
  return q;
}

}  // namespace vignette
