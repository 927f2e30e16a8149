#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "vignette/config.hpp"
#include "vignette/policy.hpp"
#include "vignette/search.hpp"
#include "vignette/tile.hpp"

namespace vignette {

enum class VideoState { baseline, vignette };

std::string to_string(VideoState state);
VideoState parse_video_state(const std::string& name);

/// One stored chunk of a video. File references are library-relative so a
/// library directory can be moved wholesale. `size_bytes` tracks the current
/// primary artifact: the split source until a transcode replaces it.
struct SegmentRecord {
  int index = 0;
  int frames = 0;  // 0 when the source container does not expose a count
  double duration_s = 0.0;
  int source_kbps = 0;
  int target_kbps = 0;  // 0 until a transcode assigns one
  std::int64_t size_bytes = 0;
  std::string source_file;
  std::string encoded_file;  // empty before any transcode
  std::string saliency_map;  // sidecar PGM; empty outside vignette state
  std::optional<TileGrid> grid;
  std::vector<std::uint8_t> weights;  // empty outside vignette state

  bool operator==(const SegmentRecord&) const = default;
};

struct VideoRecord {
  std::string id;
  std::string source_path;
  VideoState state = VideoState::baseline;
  std::int64_t popularity = 0;
  std::string source_kind;  // "y4m" or "mp4"
  int width = 0;
  int height = 0;
  int fps_num = 0;  // 0 when the container does not expose a frame rate
  int fps_den = 1;
  double duration_s = 0.0;
  std::vector<SegmentRecord> segments;

  std::int64_t total_size_bytes() const;

  bool operator==(const VideoRecord&) const = default;
};

struct LibraryManifest {
  std::string library_root;
  std::vector<VideoRecord> videos;

  VideoRecord* find(const std::string& id);
  const VideoRecord* find(const std::string& id) const;

  bool operator==(const LibraryManifest&) const = default;
};

inline constexpr int kManifestVersion = 1;

/// Stable-key JSON document carrying "manifest_version": 1. Optional fields
/// (grid, weights, paths) are omitted when absent, so serialize/deserialize
/// is lossless.
std::string manifest_to_json(const LibraryManifest& manifest);
LibraryManifest manifest_from_json(const std::string& text);

void save_manifest(const LibraryManifest& manifest, const std::filesystem::path& file);
LibraryManifest load_manifest(const std::filesystem::path& file);

/// Structural checks: unique video ids, valid states, and vignette-state
/// segments carrying grid, weights (one per tile), and a saliency sidecar.
void validate_manifest(const LibraryManifest& manifest);

struct ScheduledAction {
  std::string video_id;
  PolicyAction action = PolicyAction::vignette_transcode;
  int squeeze_target_kbps = 0;
  std::string reason;

  bool operator==(const ScheduledAction&) const = default;
};

/// Pure planning: no execution, no manifest mutation. capacity_pressure
/// fires when the library's total size exceeds the threshold and schedules
/// every eligible video in ascending-popularity order (ties by id);
/// popularity_decay schedules each video whose popularity sits below the
/// threshold. A video is eligible for vignette_transcode in baseline state
/// and for vignette_squeeze in vignette state with every segment target
/// above the squeeze target. Policies run in order; the first to claim a
/// video wins.
std::vector<ScheduledAction> apply_policies(const LibraryManifest& manifest,
                                            const std::vector<Policy>& policies);

struct VignetteOptions {
  int target_kbps = 0;             // 0: each segment's measured source bitrate
  std::optional<SearchMode> mode;  // unset: the config default
  /// "" or "builtin" generates maps from decoded frames; otherwise a
  /// directory holding one aggregated map per segment, seg_<index>.pgm.
  std::string saliency;
};

/// The video library: a root directory, its manifest, and the four-call
/// compression API. Calls serialize per video (concurrent calls on distinct
/// videos run in parallel); manifest saves are atomic.
class Library {
 public:
  /// Opens `root`, creating the directory and an empty manifest when absent.
  explicit Library(std::filesystem::path root, ToolkitConfig config = {});

  const std::filesystem::path& root() const { return root_; }
  const ToolkitConfig& config() const { return config_; }

  LibraryManifest snapshot() const;
  VideoRecord video(const std::string& id) const;

  /// Splits the source into keyframe-aligned segments of roughly
  /// `segment_len_s` seconds (0 uses the config default), copies them under
  /// `<root>/<id>/`, and registers a baseline-state record. An empty id
  /// defaults to the source filename stem.
  VideoRecord ingest(const std::filesystem::path& source, std::string id = "",
                     int segment_len_s = 0);

  /// Conventional single-quality transcode of every segment; produces no
  /// perceptual metadata and resets state to baseline.
  VideoRecord transcode(const std::string& id, int target_kbps);

  /// Per segment: resolve and persist a saliency map, pick a tile grid
  /// (heuristic or exhaustive), map bitrates, tile-encode, and embed the
  /// weights in the output container. Leaves the video in vignette state.
  VideoRecord vignette_transcode(const std::string& id, const VignetteOptions& opts = {});

  /// Re-encodes a vignette video at a strictly lower target using its
  /// existing grid and weights; refuses upward transcodes.
  VideoRecord vignette_squeeze(const std::string& id, int target_kbps);

  /// Blends each segment's stored map with the fixation map (alpha weighs
  /// the stored map), then re-runs search and encode at the current target.
  VideoRecord vignette_update(const std::string& id, const std::filesystem::path& fixation_map,
                              double alpha = 0.5);

  void set_popularity(const std::string& id, std::int64_t value);

  /// Runs the configuration search for one segment without committing
  /// anything; exhaustive-mode encodes land in a scratch directory.
  SearchResult search_segment(const std::string& id, int segment_index, SearchMode mode,
                              int target_kbps = 0);

 private:
  VideoRecord claimed_copy(const std::string& id) const;
  void commit(const VideoRecord& updated);
  std::mutex& claim(const std::string& id);

  std::filesystem::path root_;
  ToolkitConfig config_;
  LibraryManifest manifest_;
  mutable std::mutex manifest_mutex_;
  std::mutex claims_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> claims_;
};

}  // namespace vignette
