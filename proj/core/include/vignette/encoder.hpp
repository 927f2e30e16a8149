#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vignette/frame.hpp"
#include "vignette/motion.hpp"
#include "vignette/tile.hpp"

namespace vignette {

/// Parameters of the deterministic mock rate-distortion model used for
/// hermetic runs. Sizes follow
///
///   size = sum_t b_t * 1000 * duration * A_t / 8
///        + header_bytes_per_tile * num_tiles
///        + boundary_cost_bytes * crossings
///
/// where A_t is the tile's area fraction and `crossings` counts motion
/// vectors whose origin and displaced endpoint land in different tiles.
/// Per-tile quality follows
///
///   psnr_t = clamp(psnr_min, psnr_max,
///                  psnr_base + psnr_slope * log2(b_t / (ref_rate * c_t)))
///
/// with c_t >= 1 a per-tile content complexity.
struct MockRDParams {
  double header_bytes_per_tile = 200.0;
  double boundary_cost_bytes = 8.0;
  double psnr_base_db = 30.0;
  double psnr_slope_db_per_octave = 3.0;
  double ref_rate_kbps = 250.0;
  double psnr_min_db = 20.0;
  double psnr_max_db = 50.0;
};

enum class EncoderKind { mock, external };

/// Placeholders every external command template must contain.
std::span<const std::string_view> required_placeholders();

struct EncoderProfile {
  EncoderKind kind = EncoderKind::mock;
  /// External only; expanded once per tile job.
  std::string command_template;
  /// Concurrent tile/candidate jobs; must stay >= 1.
  int worker_limit = 1;
  MockRDParams mock;
};

/// The logical CPU count (at least 1), the default worker_limit for
/// config-driven profiles.
int default_workers();

/// Rejects external profiles with missing placeholders and nonsensical
/// worker limits, before any subprocess can run.
void validate_profile(const EncoderProfile& profile);

/// One video segment as the orchestrator sees it: a source path for
/// external encoders plus whatever decoded state the pipeline has.
struct SegmentSource {
  std::filesystem::path path;
  int frame_w = 0;
  int frame_h = 0;
  double duration_s = 0.0;
  /// Decoded luma frames; may be empty when only an external encoder runs.
  std::vector<GrayFrame> frames;
  /// Motion fields driving the mock model's crossing/complexity terms and
  /// the heuristic search; may be empty.
  std::vector<MotionField> motion;
};

struct EncodedSegment {
  TileGrid grid;
  TileQualityMap quality;
  /// Container holding tile 0 (and, for the mock backend, the stub stream);
  /// perceptual metadata is embedded here.
  std::filesystem::path primary_path;
  /// Row-major per-tile outputs; index 0 aliases primary_path.
  std::vector<std::filesystem::path> tile_paths;
  std::vector<std::int64_t> per_tile_size_bytes;
  /// Authoritative segment size: real bytes for external encodes, the mock
  /// model's prediction otherwise.
  std::int64_t total_size_bytes = 0;
  /// NaN entries when the backend cannot measure quality (external).
  std::vector<double> per_tile_psnr_db;
};

struct MockEncodeResult {
  std::int64_t size_bytes = 0;
  std::vector<std::int64_t> per_tile_size_bytes;
  std::vector<double> per_tile_psnr_db;
};

/// Evaluates the mock model for one tiled encode. `complexity` must carry
/// one c_t >= 1 per tile (empty means all ones).
MockEncodeResult mock_encode(const TileQualityMap& quality, double duration_s,
                             std::span<const double> complexity, std::int64_t crossings,
                             const MockRDParams& params = {});

/// Pools per-tile PSNR into a frame value through the MSE domain:
/// mse_t = 255^2 * 10^(-psnr_t/10), PSNR = 10*log10(255^2 / sum A_t * mse_t).
/// Fractions must sum to 1 within 1e-12.
double frame_psnr_from_tiles(std::span<const double> per_tile_psnr_db,
                             std::span<const double> area_fractions);

/// Counts motion vectors whose origin tile differs from the tile containing
/// the displaced endpoint (endpoints leaving the frame count as crossings).
std::int64_t count_boundary_crossings(std::span<const MotionField> fields, const TileGrid& grid);

/// Per-tile complexity from motion: c_t = 1 + crossing_t / max(1, origins_t).
std::vector<double> motion_complexity(std::span<const MotionField> fields, const TileGrid& grid);

/// A tiled encode executor. Implementations must be safe to invoke from
/// multiple threads; invocations() counts encode() calls across all of them.
class EncoderBackend {
 public:
  virtual ~EncoderBackend() = default;

  /// Encodes every tile of `quality` for this segment. Artifacts are written
  /// under `output_stem` (primary container at "<stem>.mp4", extra tiles at
  /// "<stem>.tile<t>.mp4").
  EncodedSegment encode(const SegmentSource& segment, const TileQualityMap& quality,
                        const std::filesystem::path& output_stem);

  /// True when encode() fills per_tile_psnr_db with real values.
  virtual bool reports_quality() const = 0;

  std::int64_t invocations() const;

 protected:
  virtual EncodedSegment do_encode(const SegmentSource& segment, const TileQualityMap& quality,
                                   const std::filesystem::path& output_stem) = 0;

 private:
  std::atomic<std::int64_t> invocations_{0};
};

std::unique_ptr<EncoderBackend> make_backend(const EncoderProfile& profile);

/// Convenience wrapper: builds the backend for `profile` and encodes once.
EncodedSegment transcode_tiled(const SegmentSource& segment, const TileQualityMap& quality,
                               const EncoderProfile& profile,
                               const std::filesystem::path& output_stem);

}  // namespace vignette
