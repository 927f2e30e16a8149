#include "vignette/search.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "vignette/error.hpp"
#include "internal/parallel.hpp"

namespace vignette {
namespace {

constexpr double kPeak = 255.0;

// True when `a` should replace `b` as the heuristic pick.
bool heuristic_better(const ConfigScore& a, const ConfigScore& b) {
  if (a.deviation != b.deviation) return a.deviation < b.deviation;
  if (a.grid.num_tiles() != b.grid.num_tiles()) return a.grid.num_tiles() < b.grid.num_tiles();
  if (a.grid.rows != b.grid.rows) return a.grid.rows < b.grid.rows;
  return a.grid.cols < b.grid.cols;
}

// True when `a` should replace `b` as the exhaustive pick.
bool exhaustive_better(const ConfigScore& a, const ConfigScore& b) {
  if (a.ewpsnr_db != b.ewpsnr_db) return a.ewpsnr_db > b.ewpsnr_db;
  if (a.size_bytes != b.size_bytes) return a.size_bytes < b.size_bytes;
  if (a.grid.num_tiles() != b.grid.num_tiles()) return a.grid.num_tiles() < b.grid.num_tiles();
  if (a.grid.rows != b.grid.rows) return a.grid.rows < b.grid.rows;
  return a.grid.cols < b.grid.cols;
}

// Sum of eye-tracking weights max(s,1)/255 over each tile. Every pixel keeps
// a nonzero weight so fully unsalient tiles still count toward the pool.
std::vector<double> tile_eye_weight_sums(const SaliencyMap& map, const TileGrid& grid) {
  std::vector<double> sums(static_cast<std::size_t>(grid.num_tiles()), 0.0);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const TileRect rect = grid.tile(r, c);
      double acc = 0.0;
      for (int y = rect.y; y < rect.y + rect.h; ++y) {
        for (int x = rect.x; x < rect.x + rect.w; ++x) {
          acc += std::max<int>(map.at(x, y), 1) / kPeak;
        }
      }
      sums[static_cast<std::size_t>(r * grid.cols + c)] = acc;
    }
  }
  return sums;
}

double pooled_db(std::span<const double> per_tile_psnr_db, std::span<const double> pool_weights) {
  double weight_sum = 0.0;
  double mse = 0.0;
  for (std::size_t t = 0; t < per_tile_psnr_db.size(); ++t) {
    weight_sum += pool_weights[t];
    mse += pool_weights[t] * kPeak * kPeak * std::pow(10.0, -per_tile_psnr_db[t] / 10.0);
  }
  require(weight_sum > 0.0, "pooling weights must not all be zero");
  return 10.0 * std::log10(kPeak * kPeak / (mse / weight_sum));
}

}  // namespace

std::string to_string(SearchMode mode) {
  return mode == SearchMode::heuristic ? "heuristic" : "exhaustive";
}

SearchMode parse_search_mode(const std::string& name) {
  if (name == "heuristic") return SearchMode::heuristic;
  if (name == "exhaustive") return SearchMode::exhaustive;
  fail(fmt::format("unknown search mode '{}' (expected heuristic or exhaustive)", name));
}

double motion_deviation(const std::vector<MotionField>& fields, const TileGrid& grid) {
  const std::size_t n = static_cast<std::size_t>(grid.num_tiles());
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  std::vector<std::int64_t> count(n, 0);
  for (const MotionField& field : fields) {
    require(field.frame_w == grid.frame_width() && field.frame_h == grid.frame_height(),
            fmt::format("motion field is {}x{}, grid is {}x{}", field.frame_w, field.frame_h,
                        grid.frame_width(), grid.frame_height()));
    for (const MotionVector& v : field.entries) {
      const auto t = static_cast<std::size_t>(grid.tile_index_at(v.block_x, v.block_y));
      const double mag = std::hypot(static_cast<double>(v.dx), static_cast<double>(v.dy));
      sum[t] += mag;
      sum_sq[t] += mag * mag;
      ++count[t];
    }
  }
  double total = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    if (count[t] < 2) continue;  // a lone vector has no spread
    const double k = static_cast<double>(count[t]);
    const double mean = sum[t] / k;
    const double variance = std::max(0.0, sum_sq[t] / k - mean * mean);
    total += std::sqrt(variance);
  }
  return total / static_cast<double>(n);
}

SearchResult heuristic_search(const std::vector<MotionField>& fields,
                              const std::vector<TileGrid>& candidates) {
  require(!candidates.empty(), "heuristic search needs at least one candidate grid");
  SearchResult result;
  result.mode = SearchMode::heuristic;
  result.per_config.reserve(candidates.size());
  for (const TileGrid& grid : candidates) {
    ConfigScore score;
    score.grid = grid;
    score.deviation = motion_deviation(fields, grid);
    score.size_bytes = 0;
    score.psnr_db = std::numeric_limits<double>::quiet_NaN();
    score.ewpsnr_db = std::numeric_limits<double>::quiet_NaN();
    result.per_config.push_back(std::move(score));
  }
  result.chosen = result.per_config.front();
  for (const ConfigScore& score : result.per_config) {
    if (heuristic_better(score, result.chosen)) result.chosen = score;
  }
  return result;
}

SearchResult exhaustive_search(const SegmentSource& segment, const SaliencyMap& map,
                               const std::vector<TileGrid>& candidates, int target_kbps,
                               double floor_frac, EncoderBackend& backend,
                               const std::filesystem::path& work_dir, int workers) {
  require(!candidates.empty(), "exhaustive search needs at least one candidate grid");
  require(backend.reports_quality(),
          "exhaustive search needs a backend that reports per-tile quality");
  require(map.width == segment.frame_w && map.height == segment.frame_h,
          fmt::format("saliency map is {}x{}, segment is {}x{}", map.width, map.height,
                      segment.frame_w, segment.frame_h));
  std::filesystem::create_directories(work_dir);

  SearchResult result;
  result.mode = SearchMode::exhaustive;
  result.per_config.resize(candidates.size());
  std::vector<EncodedSegment> encodes(candidates.size());

  const auto evaluate = [&](const TileGrid& grid, EncodedSegment& enc) {
    const std::vector<std::uint8_t> weights = tile_weights(map, grid);
    const TileQualityMap quality = map_bitrates(grid, weights, target_kbps, floor_frac);
    enc = backend.encode(segment, quality,
                         work_dir / fmt::format("cand_{}x{}", grid.rows, grid.cols));

    std::vector<double> areas(static_cast<std::size_t>(grid.num_tiles()));
    for (int t = 0; t < grid.num_tiles(); ++t) {
      areas[static_cast<std::size_t>(t)] = grid.area_fraction(t);
    }
    ConfigScore score;
    score.grid = grid;
    score.deviation = std::numeric_limits<double>::quiet_NaN();
    score.size_bytes = enc.total_size_bytes;
    score.psnr_db = frame_psnr_from_tiles(enc.per_tile_psnr_db, areas);
    score.ewpsnr_db = pooled_db(enc.per_tile_psnr_db, tile_eye_weight_sums(map, grid));
    return score;
  };

  detail::parallel_for(static_cast<int>(candidates.size()), workers, [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    const TileGrid& grid = candidates[idx];
    try {
      result.per_config[idx] = evaluate(grid, encodes[idx]);
    } catch (const Error& e) {
      fail(fmt::format("candidate {}x{}: {}", grid.rows, grid.cols, e.what()));
    }
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.per_config.size(); ++i) {
    if (exhaustive_better(result.per_config[i], result.per_config[best])) best = i;
  }
  result.chosen = result.per_config[best];
  result.chosen_encode = std::move(encodes[best]);
  return result;
}

}  // namespace vignette
