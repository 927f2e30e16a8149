#include "vignette/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <limits>
#include <thread>

#include "vignette/error.hpp"
#include "vignette/metadata.hpp"
#include "internal/parallel.hpp"

namespace vignette {

namespace {

constexpr std::string_view kPlaceholders[] = {
    "{input}", "{output}", "{bitrate_kbps}", "{crop_x}",
    "{crop_y}", "{crop_w}", "{crop_h}",      "{duration_s}",
};

constexpr double kPeak = 255.0;

std::string expand_template(std::string templ,
                            const std::vector<std::pair<std::string_view, std::string>>& subs) {
  for (const auto& [key, value] : subs) {
    for (std::size_t pos = templ.find(key); pos != std::string::npos;
         pos = templ.find(key, pos)) {
      templ.replace(pos, key.size(), value);
      pos += value.size();
    }
  }
  return templ;
}

// Tile evaluations are closed-form, so the mock never spawns workers; that
// keeps its output trivially identical for every worker_limit.
class MockBackend final : public EncoderBackend {
 public:
  explicit MockBackend(MockRDParams params) : params_(params) {}

  bool reports_quality() const override { return true; }

 protected:
  EncodedSegment do_encode(const SegmentSource& segment, const TileQualityMap& quality,
                           const std::filesystem::path& output_stem) override;

 private:
  MockRDParams params_;
};

class ExternalBackend final : public EncoderBackend {
 public:
  ExternalBackend(std::string command_template, int workers)
      : template_(std::move(command_template)), workers_(workers) {}

  bool reports_quality() const override { return false; }

 protected:
  EncodedSegment do_encode(const SegmentSource& segment, const TileQualityMap& quality,
                           const std::filesystem::path& output_stem) override;

 private:
  std::string template_;
  int workers_;
};

EncodedSegment MockBackend::do_encode(const SegmentSource& segment,
                                      const TileQualityMap& quality,
                                      const std::filesystem::path& output_stem) {
  const std::vector<double> complexity = motion_complexity(segment.motion, quality.grid);
  const std::int64_t crossings = count_boundary_crossings(segment.motion, quality.grid);
  MockEncodeResult mock = mock_encode(quality, segment.duration_s, complexity, crossings, params_);

  EncodedSegment out;
  out.grid = quality.grid;
  out.quality = quality;
  out.per_tile_size_bytes = std::move(mock.per_tile_size_bytes);
  out.per_tile_psnr_db = std::move(mock.per_tile_psnr_db);
  out.total_size_bytes = mock.size_bytes;

  // The stub container carries one deterministic record per tile in row-major
  // order, so byte-identical runs are byte-identical files.
  std::string payload;
  for (int t = 0; t < quality.grid.num_tiles(); ++t) {
    payload += fmt::format("tile={} kbps={} psnr={:.4f}\n", t, quality.bitrates_kbps[t],
                           out.per_tile_psnr_db[t]);
  }
  out.primary_path = output_stem;
  out.primary_path += ".mp4";
  write_stub_container(out.primary_path,
                       std::span(reinterpret_cast<const std::uint8_t*>(payload.data()),
                                 payload.size()));
  out.tile_paths.assign(static_cast<std::size_t>(quality.grid.num_tiles()), out.primary_path);
  return out;
}

EncodedSegment ExternalBackend::do_encode(const SegmentSource& segment,
                                          const TileQualityMap& quality,
                                          const std::filesystem::path& output_stem) {
  require(!segment.path.empty(), "external encodes need a segment source path");
  const TileGrid& grid = quality.grid;
  const int n = grid.num_tiles();

  std::vector<std::filesystem::path> outputs(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) {
    outputs[t] = output_stem;
    outputs[t] += (t == 0) ? ".mp4" : fmt::format(".tile{}.mp4", t);
  }

  detail::parallel_for(n, workers_, [&](int t) {
    const TileRect r = grid.tile(t);
    const std::string cmd = expand_template(
        template_, {{"{input}", segment.path.string()},
                    {"{output}", outputs[t].string()},
                    {"{bitrate_kbps}", std::to_string(quality.bitrates_kbps[t])},
                    {"{crop_x}", std::to_string(r.x)},
                    {"{crop_y}", std::to_string(r.y)},
                    {"{crop_w}", std::to_string(r.w)},
                    {"{crop_h}", std::to_string(r.h)},
                    {"{duration_s}", fmt::format("{:.3f}", segment.duration_s)}});
    const int rc = std::system(cmd.c_str());
    if (rc != 0) fail(fmt::format("encoder failed on tile {} (exit {}): {}", t, rc, cmd));
    require(std::filesystem::exists(outputs[t]),
            fmt::format("encoder produced no output for tile {}: {}", t, outputs[t].string()));
  });

  EncodedSegment out;
  out.grid = grid;
  out.quality = quality;
  out.primary_path = outputs.front();
  out.tile_paths = std::move(outputs);
  out.per_tile_psnr_db.assign(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::quiet_NaN());
  out.total_size_bytes = 0;
  for (const auto& p : out.tile_paths) {
    const auto sz = static_cast<std::int64_t>(std::filesystem::file_size(p));
    out.per_tile_size_bytes.push_back(sz);
    out.total_size_bytes += sz;
  }
  return out;
}

}  // namespace

std::span<const std::string_view> required_placeholders() { return kPlaceholders; }

int default_workers() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void validate_profile(const EncoderProfile& profile) {
  require(profile.worker_limit >= 1, "worker_limit must be at least 1");
  if (profile.kind == EncoderKind::external) {
    require(!profile.command_template.empty(), "external profile needs a command template");
    for (std::string_view key : kPlaceholders) {
      if (profile.command_template.find(key) == std::string::npos) {
        fail(fmt::format("encoder template is missing the {} placeholder", key));
      }
    }
  }
  const auto& m = profile.mock;
  require(m.header_bytes_per_tile > 0 && m.boundary_cost_bytes > 0 && m.psnr_base_db > 0 &&
              m.psnr_slope_db_per_octave > 0 && m.ref_rate_kbps > 0,
          "mock parameters must be positive");
  require(m.psnr_min_db < m.psnr_max_db, "mock PSNR clamp must have low < high");
}

MockEncodeResult mock_encode(const TileQualityMap& quality, double duration_s,
                             std::span<const double> complexity, std::int64_t crossings,
                             const MockRDParams& params) {
  const int n = quality.grid.num_tiles();
  require(duration_s > 0, "segment duration must be positive");
  require(crossings >= 0, "crossings must be nonnegative");
  require(complexity.empty() || static_cast<int>(complexity.size()) == n,
          "complexity must carry one entry per tile");

  MockEncodeResult out;
  double payload_bytes = 0.0;
  for (int t = 0; t < n; ++t) {
    const double c = complexity.empty() ? 1.0 : complexity[t];
    require(c >= 1.0, "tile complexity must be >= 1");
    const double area = quality.grid.area_fraction(t);
    const double tile_bytes = quality.bitrates_kbps[t] * 1000.0 * duration_s * area / 8.0;
    payload_bytes += tile_bytes;
    out.per_tile_size_bytes.push_back(
        static_cast<std::int64_t>(std::llround(tile_bytes + params.header_bytes_per_tile)));
    const double octaves = std::log2(quality.bitrates_kbps[t] / (params.ref_rate_kbps * c));
    const double psnr = params.psnr_base_db + params.psnr_slope_db_per_octave * octaves;
    out.per_tile_psnr_db.push_back(std::clamp(psnr, params.psnr_min_db, params.psnr_max_db));
  }
  out.size_bytes = static_cast<std::int64_t>(
      std::llround(payload_bytes + params.header_bytes_per_tile * n +
                   params.boundary_cost_bytes * static_cast<double>(crossings)));
  return out;
}

double frame_psnr_from_tiles(std::span<const double> per_tile_psnr_db,
                             std::span<const double> area_fractions) {
  require(per_tile_psnr_db.size() == area_fractions.size(),
          "per-tile PSNR and area fraction counts differ");
  require(!per_tile_psnr_db.empty(), "need at least one tile");
  double fraction_sum = 0.0;
  double mse = 0.0;
  for (std::size_t t = 0; t < per_tile_psnr_db.size(); ++t) {
    fraction_sum += area_fractions[t];
    mse += area_fractions[t] * kPeak * kPeak * std::pow(10.0, -per_tile_psnr_db[t] / 10.0);
  }
  require(std::abs(fraction_sum - 1.0) <= 1e-12, "tile area fractions must sum to 1");
  return 10.0 * std::log10(kPeak * kPeak / mse);
}

std::int64_t count_boundary_crossings(std::span<const MotionField> fields,
                                      const TileGrid& grid) {
  std::int64_t crossings = 0;
  for (const auto& field : fields) {
    for (const auto& v : field.entries) {
      const int from = grid.tile_index_at(v.block_x, v.block_y);
      const int ex = v.block_x + v.dx;
      const int ey = v.block_y + v.dy;
      const bool inside =
          ex >= 0 && ex < grid.frame_width() && ey >= 0 && ey < grid.frame_height();
      if (!inside || grid.tile_index_at(ex, ey) != from) ++crossings;
    }
  }
  return crossings;
}

std::vector<double> motion_complexity(std::span<const MotionField> fields, const TileGrid& grid) {
  const std::size_t n = static_cast<std::size_t>(grid.num_tiles());
  std::vector<std::int64_t> origins(n, 0), crossing(n, 0);
  for (const auto& field : fields) {
    for (const auto& v : field.entries) {
      const auto from = static_cast<std::size_t>(grid.tile_index_at(v.block_x, v.block_y));
      ++origins[from];
      const int ex = v.block_x + v.dx;
      const int ey = v.block_y + v.dy;
      const bool inside =
          ex >= 0 && ex < grid.frame_width() && ey >= 0 && ey < grid.frame_height();
      if (!inside || static_cast<std::size_t>(grid.tile_index_at(ex, ey)) != from) {
        ++crossing[from];
      }
    }
  }
  std::vector<double> complexity(n, 1.0);
  for (std::size_t t = 0; t < n; ++t) {
    complexity[t] = 1.0 + static_cast<double>(crossing[t]) /
                              static_cast<double>(std::max<std::int64_t>(1, origins[t]));
  }
  return complexity;
}

EncodedSegment EncoderBackend::encode(const SegmentSource& segment, const TileQualityMap& quality,
                                      const std::filesystem::path& output_stem) {
  require(quality.grid.frame_width() == segment.frame_w &&
              quality.grid.frame_height() == segment.frame_h,
          fmt::format("quality grid is {}x{}, segment is {}x{}", quality.grid.frame_width(),
                      quality.grid.frame_height(), segment.frame_w, segment.frame_h));
  invocations_.fetch_add(1, std::memory_order_relaxed);
  return do_encode(segment, quality, output_stem);
}

std::int64_t EncoderBackend::invocations() const {
  return invocations_.load(std::memory_order_relaxed);
}

std::unique_ptr<EncoderBackend> make_backend(const EncoderProfile& profile) {
  validate_profile(profile);
  if (profile.kind == EncoderKind::mock) {
    return std::make_unique<MockBackend>(profile.mock);
  }
  return std::make_unique<ExternalBackend>(profile.command_template, profile.worker_limit);
}

EncodedSegment transcode_tiled(const SegmentSource& segment, const TileQualityMap& quality,
                               const EncoderProfile& profile,
                               const std::filesystem::path& output_stem) {
  return make_backend(profile)->encode(segment, quality, output_stem);
}

}  // namespace vignette
