#pragma once

#include <cstdint>
#include <vector>

#include "vignette/frame.hpp"

namespace vignette {

struct TileRect {
  int x = 0, y = 0, w = 0, h = 0;
  bool operator==(const TileRect&) const = default;
};

/// Rectangular rows x cols partition of a frame. Boundaries are strictly
/// increasing pixel offsets starting at 0 and ending at the frame dimension;
/// interior boundaries are even so 4:2:0 chroma planes split cleanly.
struct TileGrid {
  int rows = 1;
  int cols = 1;
  std::vector<int> row_bounds;  // rows + 1 entries
  std::vector<int> col_bounds;  // cols + 1 entries

  int frame_width() const { return col_bounds.back(); }
  int frame_height() const { return row_bounds.back(); }
  int num_tiles() const { return rows * cols; }

  TileRect tile(int r, int c) const {
    return {col_bounds[c], row_bounds[r], col_bounds[c + 1] - col_bounds[c],
            row_bounds[r + 1] - row_bounds[r]};
  }
  TileRect tile(int t) const { return tile(t / cols, t % cols); }

  /// Fraction of the frame area covered by tile t (exact rational in double).
  double area_fraction(int t) const;

  /// Row-major index of the tile containing pixel (x, y).
  int tile_index_at(int x, int y) const;

  bool operator==(const TileGrid&) const = default;
};

/// Uniform split: floor-sized tiles with the remainder spread over the
/// leading tiles, then interior boundaries rounded down to even offsets.
/// Frame dimensions must be positive and even.
TileGrid make_uniform_grid(int frame_w, int frame_h, int rows, int cols);

/// Search-space limits for enumerate_configs. The minimum tile dimensions
/// default to the HEVC luma constraints.
struct TileLimits {
  int min_rows = 2;
  int max_rows = 10;
  int min_cols = 2;
  int max_cols = 10;
  int max_tiles = 50;
  int min_tile_width = 256;
  int min_tile_height = 64;
};

struct GridEnumeration {
  std::vector<TileGrid> grids;
  /// True when no configuration satisfied the limits and grids holds only
  /// the 1x1 baseline.
  bool fallback = false;
};

/// All grids with rows/cols inside the limits whose every tile meets the
/// minimum dimensions, ordered by rows ascending then cols ascending.
GridEnumeration enumerate_configs(int frame_w, int frame_h, const TileLimits& limits = {});

/// Per-tile weight = maximum saliency value inside the tile rectangle,
/// row-major. Map dimensions must match the grid's frame dimensions.
std::vector<std::uint8_t> tile_weights(const SaliencyMap& map, const TileGrid& grid);

/// Per-tile saliency weights and the bitrates assigned to them.
struct TileQualityMap {
  TileGrid grid;
  std::vector<std::uint8_t> weights;   // row-major, rows*cols
  std::vector<int> bitrates_kbps;      // row-major, rows*cols
  int target_kbps = 0;
  double floor_frac = 0.10;
};

/// Linear saliency-to-bitrate map: weight 255 lands exactly on target_kbps,
/// weight 0 exactly on round(floor_frac * target_kbps).
///
///   b_t = round(floor + (w_t / 255) * (target_kbps - floor))
///
/// target_kbps must be >= 10 and floor_frac in (0, 1].
TileQualityMap map_bitrates(const TileGrid& grid, const std::vector<std::uint8_t>& weights,
                            int target_kbps, double floor_frac = 0.10);

}  // namespace vignette
