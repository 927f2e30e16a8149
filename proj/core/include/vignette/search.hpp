#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vignette/encoder.hpp"
#include "vignette/frame.hpp"
#include "vignette/motion.hpp"
#include "vignette/tile.hpp"

namespace vignette {

enum class SearchMode { heuristic, exhaustive };

std::string to_string(SearchMode mode);
SearchMode parse_search_mode(const std::string& name);

/// Mean over tiles of the population standard deviation of motion-vector
/// magnitudes whose block origin falls in the tile. Tiles holding fewer than
/// two vectors contribute zero. Low deviation means the grid's tiles align
/// with coherently moving regions.
double motion_deviation(const std::vector<MotionField>& fields, const TileGrid& grid);

/// Per-candidate evaluation record. Heuristic runs fill only `deviation`;
/// exhaustive runs fill the encode-derived fields and leave `deviation` NaN.
struct ConfigScore {
  TileGrid grid;
  double deviation = 0.0;
  std::int64_t size_bytes = 0;
  double psnr_db = 0.0;
  double ewpsnr_db = 0.0;
};

struct SearchResult {
  SearchMode mode = SearchMode::heuristic;
  ConfigScore chosen;
  std::vector<ConfigScore> per_config;  // candidate order preserved
  /// Exhaustive mode only: the winning candidate's encode, with files still
  /// under the search work_dir. Callers may move these into place instead of
  /// paying for one more encode; selection already cost one per candidate.
  std::optional<EncodedSegment> chosen_encode;
};

/// Picks the candidate with minimum motion deviation. Ties break toward
/// fewer tiles, then fewer rows, then fewer cols, so the result is a pure
/// function of the inputs.
SearchResult heuristic_search(const std::vector<MotionField>& fields,
                              const std::vector<TileGrid>& candidates);

/// Encodes the segment once per candidate (weights from `map`, bitrates from
/// the linear map at `target_kbps`) and picks the maximum saliency-weighted
/// PSNR. Ties break toward smaller encoded size, then fewer tiles, then
/// fewer rows, then fewer cols. Candidates are evaluated concurrently up to
/// `workers`; the choice is reduced in candidate order and is deterministic.
/// The backend must report per-tile quality (mock does; external does not).
SearchResult exhaustive_search(const SegmentSource& segment, const SaliencyMap& map,
                               const std::vector<TileGrid>& candidates, int target_kbps,
                               double floor_frac, EncoderBackend& backend,
                               const std::filesystem::path& work_dir, int workers = 1);

}  // namespace vignette
