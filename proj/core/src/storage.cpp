#include "vignette/storage.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <tuple>
#include <utility>

#include <nlohmann/json.hpp>

#include "vignette/error.hpp"
#include "vignette/metadata.hpp"
#include "vignette/pgm.hpp"
#include "vignette/saliency.hpp"
#include "vignette/y4m.hpp"
#include "internal/fsutil.hpp"

namespace vignette {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string seg_file_name(int index, const char* suffix) {
  return fmt::format("seg_{}{}", index, suffix);
}

std::string library_relative(const std::string& id, const std::string& name) {
  return (fs::path(id) / name).generic_string();
}

bool valid_video_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '.' || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::string sniff_container_kind(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), fmt::format("cannot open {}", path.string()));
  char magic[9] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() == sizeof magic && std::string_view(magic, 9) == "YUV4MPEG2") return "y4m";
  scan_boxes(path);  // throws when the bytes are not a box sequence either
  return "mp4";
}

json grid_to_json(const TileGrid& grid) {
  return json{{"rows", grid.rows},
              {"cols", grid.cols},
              {"row_bounds", grid.row_bounds},
              {"col_bounds", grid.col_bounds}};
}

TileGrid grid_from_json(const json& j) {
  TileGrid grid;
  grid.rows = j.at("rows").get<int>();
  grid.cols = j.at("cols").get<int>();
  grid.row_bounds = j.at("row_bounds").get<std::vector<int>>();
  grid.col_bounds = j.at("col_bounds").get<std::vector<int>>();
  require(grid.rows >= 1 && grid.cols >= 1 &&
              grid.row_bounds.size() == static_cast<std::size_t>(grid.rows) + 1 &&
              grid.col_bounds.size() == static_cast<std::size_t>(grid.cols) + 1,
          "manifest grid has inconsistent bounds");
  return grid;
}

json segment_to_json(const SegmentRecord& seg) {
  json j{{"index", seg.index},
         {"frames", seg.frames},
         {"duration_s", seg.duration_s},
         {"source_kbps", seg.source_kbps},
         {"target_kbps", seg.target_kbps},
         {"size_bytes", seg.size_bytes},
         {"source_file", seg.source_file}};
  if (!seg.encoded_file.empty()) j["encoded_file"] = seg.encoded_file;
  if (!seg.saliency_map.empty()) j["saliency_map"] = seg.saliency_map;
  if (seg.grid.has_value()) j["grid"] = grid_to_json(*seg.grid);
  if (!seg.weights.empty()) j["weights"] = seg.weights;
  return j;
}

SegmentRecord segment_from_json(const json& j) {
  SegmentRecord seg;
  seg.index = j.at("index").get<int>();
  seg.frames = j.at("frames").get<int>();
  seg.duration_s = j.at("duration_s").get<double>();
  seg.source_kbps = j.at("source_kbps").get<int>();
  seg.target_kbps = j.at("target_kbps").get<int>();
  seg.size_bytes = j.at("size_bytes").get<std::int64_t>();
  seg.source_file = j.at("source_file").get<std::string>();
  if (j.contains("encoded_file")) seg.encoded_file = j.at("encoded_file").get<std::string>();
  if (j.contains("saliency_map")) seg.saliency_map = j.at("saliency_map").get<std::string>();
  if (j.contains("grid")) seg.grid = grid_from_json(j.at("grid"));
  if (j.contains("weights")) seg.weights = j.at("weights").get<std::vector<std::uint8_t>>();
  return seg;
}

json video_to_json(const VideoRecord& video) {
  json segments = json::array();
  for (const SegmentRecord& seg : video.segments) segments.push_back(segment_to_json(seg));
  return json{{"id", video.id},
              {"source_path", video.source_path},
              {"state", to_string(video.state)},
              {"popularity", video.popularity},
              {"source_kind", video.source_kind},
              {"width", video.width},
              {"height", video.height},
              {"fps_num", video.fps_num},
              {"fps_den", video.fps_den},
              {"duration_s", video.duration_s},
              {"segments", std::move(segments)}};
}

VideoRecord video_from_json(const json& j) {
  VideoRecord video;
  video.id = j.at("id").get<std::string>();
  video.source_path = j.at("source_path").get<std::string>();
  video.state = parse_video_state(j.at("state").get<std::string>());
  video.popularity = j.at("popularity").get<std::int64_t>();
  video.source_kind = j.at("source_kind").get<std::string>();
  video.width = j.at("width").get<int>();
  video.height = j.at("height").get<int>();
  video.fps_num = j.at("fps_num").get<int>();
  video.fps_den = j.at("fps_den").get<int>();
  video.duration_s = j.at("duration_s").get<double>();
  for (const json& seg : j.at("segments")) video.segments.push_back(segment_from_json(seg));
  return video;
}

bool policy_eligible(const VideoRecord& video, const Policy& policy) {
  if (policy.action == PolicyAction::vignette_transcode) {
    return video.state == VideoState::baseline;
  }
  if (video.state != VideoState::vignette) return false;
  return std::ranges::all_of(video.segments, [&](const SegmentRecord& seg) {
    return seg.target_kbps > policy.squeeze_target_kbps;
  });
}

}  // namespace

std::string to_string(VideoState state) {
  return state == VideoState::baseline ? "baseline" : "vignette";
}

VideoState parse_video_state(const std::string& name) {
  if (name == "baseline") return VideoState::baseline;
  if (name == "vignette") return VideoState::vignette;
  fail(fmt::format("unknown video state '{}'", name));
}

std::int64_t VideoRecord::total_size_bytes() const {
  std::int64_t total = 0;
  for (const SegmentRecord& seg : segments) total += seg.size_bytes;
  return total;
}

VideoRecord* LibraryManifest::find(const std::string& id) {
  for (VideoRecord& video : videos) {
    if (video.id == id) return &video;
  }
  return nullptr;
}

const VideoRecord* LibraryManifest::find(const std::string& id) const {
  return const_cast<LibraryManifest*>(this)->find(id);
}

std::string manifest_to_json(const LibraryManifest& manifest) {
  json videos = json::array();
  for (const VideoRecord& video : manifest.videos) videos.push_back(video_to_json(video));
  const json doc{{"manifest_version", kManifestVersion},
                 {"library_root", manifest.library_root},
                 {"videos", std::move(videos)}};
  return doc.dump(2) + "\n";
}

LibraryManifest manifest_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    const int version = doc.at("manifest_version").get<int>();
    require(version == kManifestVersion,
            fmt::format("manifest version {} is not supported (expected {})", version,
                        kManifestVersion));
    LibraryManifest manifest;
    manifest.library_root = doc.at("library_root").get<std::string>();
    for (const json& video : doc.at("videos")) {
      manifest.videos.push_back(video_from_json(video));
    }
    return manifest;
  } catch (const json::exception& e) {
    fail(fmt::format("malformed manifest: {}", e.what()));
  }
}

void save_manifest(const LibraryManifest& manifest, const fs::path& file) {
  detail::atomic_write_file(file, manifest_to_json(manifest));
}

LibraryManifest load_manifest(const fs::path& file) {
  require(fs::exists(file), fmt::format("no manifest at {}", file.string()));
  const std::vector<std::uint8_t> bytes = detail::read_file_bytes(file);
  return manifest_from_json(std::string(bytes.begin(), bytes.end()));
}

void validate_manifest(const LibraryManifest& manifest) {
  for (std::size_t i = 0; i < manifest.videos.size(); ++i) {
    const VideoRecord& video = manifest.videos[i];
    for (std::size_t k = 0; k < i; ++k) {
      require(manifest.videos[k].id != video.id,
              fmt::format("duplicate video id '{}'", video.id));
    }
    double duration_sum = 0.0;
    for (const SegmentRecord& seg : video.segments) {
      duration_sum += seg.duration_s;
      if (video.state == VideoState::vignette) {
        require(seg.grid.has_value() && !seg.weights.empty() && !seg.saliency_map.empty(),
                fmt::format("video '{}' segment {} is vignette-state but lacks grid, weights, "
                            "or saliency sidecar",
                            video.id, seg.index));
        require(static_cast<int>(seg.weights.size()) == seg.grid->num_tiles(),
                fmt::format("video '{}' segment {} has {} weights for {} tiles", video.id,
                            seg.index, seg.weights.size(), seg.grid->num_tiles()));
      }
    }
    const double frame_period =
        video.fps_num > 0 ? static_cast<double>(video.fps_den) / video.fps_num : 0.0;
    require(std::abs(duration_sum - video.duration_s) <= frame_period + 1e-9,
            fmt::format("video '{}' segment durations sum to {} but the video lasts {}",
                        video.id, duration_sum, video.duration_s));
  }
}

std::vector<ScheduledAction> apply_policies(const LibraryManifest& manifest,
                                            const std::vector<Policy>& policies) {
  std::vector<ScheduledAction> actions;
  std::vector<const VideoRecord*> claimed;
  const auto is_claimed = [&](const VideoRecord* v) {
    return std::ranges::find(claimed, v) != claimed.end();
  };
  const auto schedule = [&](const VideoRecord* video, const Policy& policy, std::string reason) {
    claimed.push_back(video);
    actions.push_back({video->id, policy.action, policy.squeeze_target_kbps, std::move(reason)});
  };

  for (const Policy& policy : policies) {
    validate_policy(policy);
    if (policy.kind == PolicyKind::capacity_pressure) {
      std::int64_t total = 0;
      for (const VideoRecord& video : manifest.videos) total += video.total_size_bytes();
      if (static_cast<double>(total) <= policy.threshold) continue;
      std::vector<const VideoRecord*> eligible;
      for (const VideoRecord& video : manifest.videos) {
        if (!is_claimed(&video) && policy_eligible(video, policy)) eligible.push_back(&video);
      }
      std::ranges::sort(eligible, [](const VideoRecord* a, const VideoRecord* b) {
        return std::tie(a->popularity, a->id) < std::tie(b->popularity, b->id);
      });
      for (const VideoRecord* video : eligible) {
        schedule(video, policy,
                 fmt::format("capacity_pressure: library holds {} bytes, threshold {:.0f}",
                             total, policy.threshold));
      }
    } else {
      for (const VideoRecord& video : manifest.videos) {
        if (is_claimed(&video) || !policy_eligible(video, policy)) continue;
        if (static_cast<double>(video.popularity) >= policy.threshold) continue;
        schedule(&video, policy,
                 fmt::format("popularity_decay: popularity {} below {}", video.popularity,
                             policy.threshold));
      }
    }
  }
  return actions;
}

namespace {

// Lazily resolved per-segment inputs shared by the transcode paths.
struct SegmentJob {
  const fs::path& root;
  const ToolkitConfig& config;
  const VideoRecord& video;
  const SegmentRecord& seg;

  std::optional<std::vector<GrayFrame>> decoded;

  const std::vector<GrayFrame>& frames() {
    if (!decoded.has_value()) {
      require(video.source_kind == "y4m",
              "decoding is only supported for y4m sources; supply external saliency maps "
              "and motion CSVs for other containers");
      decoded = read_y4m(root / seg.source_file).luma;
    }
    return *decoded;
  }

  std::vector<MotionField> motion() {
    const fs::path csv = root / video.id / seg_file_name(seg.index, ".mv.csv");
    if (fs::exists(csv)) return parse_motion_dump(csv, video.width, video.height);
    if (!config.motion_extractor.empty()) {
      return run_motion_extractor(config.motion_extractor, root / seg.source_file, video.width,
                                  video.height, root / ".tmp" / video.id);
    }
    if (video.source_kind == "y4m") return estimate_motion(frames());
    fail(fmt::format("no motion source: add {}, configure [motion] extractor, or use a y4m "
                     "source",
                     csv.string()));
  }

  // `choice` is "", "builtin", or a directory of per-segment maps.
  SaliencyMap saliency(const std::string& choice) {
    if (choice.empty() || choice == "builtin") {
      std::vector<GrayFrame> luma = frames();
      require(!luma.empty(), "segment has no frames");
      // A single-frame segment has no temporal contrast; duplicating the
      // frame reduces the generator to its pure center prior.
      if (luma.size() == 1) luma.push_back(luma.front());
      return aggregate(generate_builtin(luma));
    }
    const fs::path file = fs::path(choice) / fmt::format("seg_{}.pgm", seg.index);
    require(fs::exists(file), fmt::format("no saliency map at {}", file.string()));
    SaliencyMap map = read_pgm(file);
    require(map.width == video.width && map.height == video.height,
            fmt::format("saliency map {} is {}x{}, video is {}x{}", file.string(), map.width,
                        map.height, video.width, video.height));
    return map;
  }

  SegmentSource source(std::vector<MotionField> fields) const {
    return {root / seg.source_file, video.width, video.height, seg.duration_s, {},
            std::move(fields)};
  }
};

// Moves a search-scratch encode into its final stem. All backend outputs are
// named "<stem><suffix>", so renaming preserves the tile-file layout, and the
// winning selection encode becomes the production file without another
// encoder invocation.
EncodedSegment relocate_encoded(EncodedSegment enc, const fs::path& new_stem) {
  const std::string old_primary = enc.primary_path.string();
  require(old_primary.ends_with(".mp4"), "encoded primary file must end in .mp4");
  const std::string old_stem = old_primary.substr(0, old_primary.size() - 4);

  const auto relocated = [&](const fs::path& old_path) {
    const std::string s = old_path.string();
    require(s.starts_with(old_stem), fmt::format("unexpected encode output path {}", s));
    fs::path out = new_stem;
    out += s.substr(old_stem.size());
    return out;
  };

  std::set<std::string> moved;
  const auto move_once = [&](fs::path& path) {
    const fs::path target = relocated(path);
    if (moved.insert(path.string()).second) fs::rename(path, target);
    path = target;
  };
  move_once(enc.primary_path);
  for (fs::path& tile : enc.tile_paths) move_once(tile);
  return enc;
}

}  // namespace

Library::Library(fs::path root, ToolkitConfig config)
    : root_(std::move(root)), config_(std::move(config)) {
  validate_profile(config_.encoder);
  require(config_.floor_frac > 0 && config_.floor_frac <= 1, "floor_frac must be in (0, 1]");
  const fs::path file = root_ / "manifest.json";
  if (fs::exists(file)) {
    manifest_ = load_manifest(file);
    validate_manifest(manifest_);
  } else {
    fs::create_directories(root_);
    manifest_.library_root = root_.string();
    save_manifest(manifest_, file);
  }
}

LibraryManifest Library::snapshot() const {
  std::scoped_lock lock(manifest_mutex_);
  return manifest_;
}

VideoRecord Library::video(const std::string& id) const { return claimed_copy(id); }

VideoRecord Library::claimed_copy(const std::string& id) const {
  std::scoped_lock lock(manifest_mutex_);
  const VideoRecord* record = manifest_.find(id);
  require(record != nullptr, fmt::format("video '{}' not found", id));
  return *record;
}

void Library::commit(const VideoRecord& updated) {
  std::scoped_lock lock(manifest_mutex_);
  VideoRecord* record = manifest_.find(updated.id);
  require(record != nullptr, fmt::format("video '{}' not found", updated.id));
  *record = updated;
  save_manifest(manifest_, root_ / "manifest.json");
}

std::mutex& Library::claim(const std::string& id) {
  std::scoped_lock lock(claims_mutex_);
  std::unique_ptr<std::mutex>& slot = claims_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

VideoRecord Library::ingest(const fs::path& source, std::string id, int segment_len_s) {
  require(fs::exists(source), fmt::format("source {} not found", source.string()));
  if (id.empty()) id = source.stem().string();
  require(valid_video_id(id),
          fmt::format("video id '{}' may only use letters, digits, '.', '_', '-'", id));
  if (segment_len_s == 0) segment_len_s = config_.segment_len_s;
  require(segment_len_s >= 1, "segment length must be at least 1 second");

  std::scoped_lock claim_lock(claim(id));
  {
    std::scoped_lock lock(manifest_mutex_);
    require(manifest_.find(id) == nullptr,
            fmt::format("video '{}' is already in the library", id));
  }

  VideoRecord record;
  record.id = id;
  record.source_path = fs::absolute(source).string();
  record.source_kind = sniff_container_kind(source);
  fs::create_directories(root_ / id);

  if (record.source_kind == "y4m") {
    const Y4mInfo info = probe_y4m(source);
    require(info.frame_count > 0, "video has no frames");
    record.width = info.width;
    record.height = info.height;
    record.fps_num = info.fps_num;
    record.fps_den = info.fps_den;
    record.duration_s = info.duration_s();
    const int frames_per_segment =
        std::max(1, static_cast<int>(std::llround(segment_len_s * info.fps())));
    for (int first = 0, index = 0; first < info.frame_count;
         first += frames_per_segment, ++index) {
      const int count = std::min(frames_per_segment, info.frame_count - first);
      const std::string name = seg_file_name(index, ".src.y4m");
      const fs::path dst = root_ / id / name;
      split_y4m(source, dst, first, count);
      SegmentRecord seg;
      seg.index = index;
      seg.frames = count;
      seg.duration_s = count * static_cast<double>(info.fps_den) / info.fps_num;
      seg.size_bytes = static_cast<std::int64_t>(fs::file_size(dst));
      seg.source_kbps = std::max(
          1, static_cast<int>(std::llround(seg.size_bytes * 8.0 / 1000.0 / seg.duration_s)));
      seg.source_file = library_relative(id, name);
      record.segments.push_back(std::move(seg));
    }
  } else {
    const ContainerVideoInfo info = probe_container_video(source);
    require(info.duration_s > 0, "video has zero duration");
    record.width = info.width;
    record.height = info.height;
    record.fps_num = 0;
    record.fps_den = 1;
    record.duration_s = info.duration_s;
    const std::string name = seg_file_name(0, ".src.mp4");
    const fs::path dst = root_ / id / name;
    fs::copy_file(source, dst, fs::copy_options::overwrite_existing);
    SegmentRecord seg;
    seg.index = 0;
    seg.frames = 0;
    seg.duration_s = info.duration_s;
    seg.size_bytes = static_cast<std::int64_t>(fs::file_size(dst));
    seg.source_kbps = std::max(
        1, static_cast<int>(std::llround(seg.size_bytes * 8.0 / 1000.0 / seg.duration_s)));
    seg.source_file = library_relative(id, name);
    record.segments.push_back(std::move(seg));
  }

  std::scoped_lock lock(manifest_mutex_);
  require(manifest_.find(id) == nullptr, fmt::format("video '{}' is already in the library", id));
  manifest_.videos.push_back(record);
  save_manifest(manifest_, root_ / "manifest.json");
  return record;
}

VideoRecord Library::transcode(const std::string& id, int target_kbps) {
  std::scoped_lock claim_lock(claim(id));
  VideoRecord record = claimed_copy(id);
  const auto backend = make_backend(config_.encoder);
  const TileGrid grid = make_uniform_grid(record.width, record.height, 1, 1);
  for (SegmentRecord& seg : record.segments) {
    try {
      // The conventional baseline carries no motion terms: its mock size is
      // the pure rate * duration + header prediction.
      const TileQualityMap quality = map_bitrates(grid, {255}, target_kbps, config_.floor_frac);
      SegmentJob job{root_, config_, record, seg};
      const EncodedSegment enc =
          backend->encode(job.source({}), quality, root_ / id / fmt::format("seg_{}", seg.index));
      seg.target_kbps = target_kbps;
      seg.size_bytes = enc.total_size_bytes;
      seg.encoded_file = library_relative(id, seg_file_name(seg.index, ".mp4"));
      seg.grid.reset();
      seg.weights.clear();
      seg.saliency_map.clear();
    } catch (const Error& e) {
      fail(fmt::format("segment {}: {}", seg.index, e.what()));
    }
  }
  record.state = VideoState::baseline;
  commit(record);
  return record;
}

VideoRecord Library::vignette_transcode(const std::string& id, const VignetteOptions& opts) {
  std::scoped_lock claim_lock(claim(id));
  VideoRecord record = claimed_copy(id);
  const SearchMode mode = opts.mode.value_or(config_.search_mode);
  const GridEnumeration enumeration =
      enumerate_configs(record.width, record.height, config_.tiles);
  const auto backend = make_backend(config_.encoder);

  for (SegmentRecord& seg : record.segments) {
    try {
      SegmentJob job{root_, config_, record, seg};
      const SaliencyMap map = job.saliency(opts.saliency);
      const std::string sal_name = seg_file_name(seg.index, ".sal.pgm");
      write_pgm(root_ / id / sal_name, map);

      std::vector<MotionField> motion = job.motion();
      const int target = opts.target_kbps > 0 ? opts.target_kbps : seg.source_kbps;
      const fs::path stem = root_ / id / fmt::format("seg_{}", seg.index);

      TileGrid grid;
      EncodedSegment enc;
      if (mode == SearchMode::heuristic) {
        grid = heuristic_search(motion, enumeration.grids).chosen.grid;
        const std::vector<std::uint8_t> w = tile_weights(map, grid);
        enc = backend->encode(job.source(std::move(motion)),
                              map_bitrates(grid, w, target, config_.floor_frac), stem);
      } else {
        const fs::path scratch = root_ / ".tmp" / id / fmt::format("seg_{}_search", seg.index);
        SearchResult found =
            exhaustive_search(job.source(std::move(motion)), map, enumeration.grids, target,
                              config_.floor_frac, *backend, scratch,
                              config_.encoder.worker_limit);
        grid = found.chosen.grid;
        enc = relocate_encoded(std::move(*found.chosen_encode), stem);
        std::error_code ec;
        fs::remove_all(scratch, ec);
      }

      const std::vector<std::uint8_t> weights = tile_weights(map, grid);
      embed_in_container(enc.primary_path,
                         encode_metadata({kMetadataVersion, grid.rows, grid.cols, weights}));

      seg.target_kbps = target;
      seg.size_bytes = enc.total_size_bytes;
      seg.encoded_file = library_relative(id, seg_file_name(seg.index, ".mp4"));
      seg.saliency_map = library_relative(id, sal_name);
      seg.grid = grid;
      seg.weights = weights;
    } catch (const Error& e) {
      fail(fmt::format("segment {}: {}", seg.index, e.what()));
    }
  }
  record.state = VideoState::vignette;
  commit(record);
  return record;
}

VideoRecord Library::vignette_squeeze(const std::string& id, int target_kbps) {
  std::scoped_lock claim_lock(claim(id));
  VideoRecord record = claimed_copy(id);
  require(record.state == VideoState::vignette,
          fmt::format("video '{}' is in baseline state; vignette_squeeze needs a perceptual "
                      "transcode first",
                      id));
  for (const SegmentRecord& seg : record.segments) {
    require(target_kbps < seg.target_kbps,
            fmt::format("segment {}: squeeze target {} kbps is not below the current {} kbps "
                        "(downward-only rule)",
                        seg.index, target_kbps, seg.target_kbps));
  }

  const auto backend = make_backend(config_.encoder);
  for (SegmentRecord& seg : record.segments) {
    try {
      SegmentJob job{root_, config_, record, seg};
      const TileQualityMap quality =
          map_bitrates(*seg.grid, seg.weights, target_kbps, config_.floor_frac);
      const EncodedSegment enc = backend->encode(job.source(job.motion()), quality,
                                                 root_ / id / fmt::format("seg_{}", seg.index));
      embed_in_container(enc.primary_path, encode_metadata({kMetadataVersion, seg.grid->rows,
                                                            seg.grid->cols, seg.weights}));
      seg.target_kbps = target_kbps;
      seg.size_bytes = enc.total_size_bytes;
      seg.encoded_file = library_relative(id, seg_file_name(seg.index, ".mp4"));
    } catch (const Error& e) {
      fail(fmt::format("segment {}: {}", seg.index, e.what()));
    }
  }
  commit(record);
  return record;
}

VideoRecord Library::vignette_update(const std::string& id, const fs::path& fixation_map,
                                     double alpha) {
  std::scoped_lock claim_lock(claim(id));
  VideoRecord record = claimed_copy(id);
  require(record.state == VideoState::vignette,
          fmt::format("video '{}' is in baseline state; vignette_update needs a perceptual "
                      "transcode first",
                      id));
  const FixationMap fixation = read_pgm(fixation_map);
  require(fixation.width == record.width && fixation.height == record.height,
          fmt::format("fixation map is {}x{}, video is {}x{}", fixation.width, fixation.height,
                      record.width, record.height));

  const GridEnumeration enumeration =
      enumerate_configs(record.width, record.height, config_.tiles);
  const auto backend = make_backend(config_.encoder);

  for (SegmentRecord& seg : record.segments) {
    try {
      require(!seg.saliency_map.empty() && fs::exists(root_ / seg.saliency_map),
              "no stored saliency sidecar");
      const SaliencyMap current = read_pgm(root_ / seg.saliency_map);
      const SaliencyMap blended = update_map(current, fixation, alpha);
      write_pgm(root_ / seg.saliency_map, blended);

      SegmentJob job{root_, config_, record, seg};
      std::vector<MotionField> motion = job.motion();
      const int target = seg.target_kbps;
      const fs::path stem = root_ / id / fmt::format("seg_{}", seg.index);

      TileGrid grid;
      EncodedSegment enc;
      if (config_.search_mode == SearchMode::heuristic) {
        grid = heuristic_search(motion, enumeration.grids).chosen.grid;
        const std::vector<std::uint8_t> w = tile_weights(blended, grid);
        enc = backend->encode(job.source(std::move(motion)),
                              map_bitrates(grid, w, target, config_.floor_frac), stem);
      } else {
        const fs::path scratch = root_ / ".tmp" / id / fmt::format("seg_{}_search", seg.index);
        SearchResult found =
            exhaustive_search(job.source(std::move(motion)), blended, enumeration.grids, target,
                              config_.floor_frac, *backend, scratch,
                              config_.encoder.worker_limit);
        grid = found.chosen.grid;
        enc = relocate_encoded(std::move(*found.chosen_encode), stem);
        std::error_code ec;
        fs::remove_all(scratch, ec);
      }

      const std::vector<std::uint8_t> weights = tile_weights(blended, grid);
      embed_in_container(enc.primary_path,
                         encode_metadata({kMetadataVersion, grid.rows, grid.cols, weights}));

      seg.size_bytes = enc.total_size_bytes;
      seg.encoded_file = library_relative(id, seg_file_name(seg.index, ".mp4"));
      seg.grid = grid;
      seg.weights = weights;
    } catch (const Error& e) {
      fail(fmt::format("segment {}: {}", seg.index, e.what()));
    }
  }
  commit(record);
  return record;
}

void Library::set_popularity(const std::string& id, std::int64_t value) {
  require(value >= 0, "popularity must be nonnegative");
  std::scoped_lock claim_lock(claim(id));
  VideoRecord record = claimed_copy(id);
  record.popularity = value;
  commit(record);
}

SearchResult Library::search_segment(const std::string& id, int segment_index, SearchMode mode,
                                     int target_kbps) {
  const VideoRecord record = claimed_copy(id);
  require(segment_index >= 0 && segment_index < static_cast<int>(record.segments.size()),
          fmt::format("video '{}' has no segment {}", id, segment_index));
  const SegmentRecord& seg = record.segments[static_cast<std::size_t>(segment_index)];
  const GridEnumeration enumeration =
      enumerate_configs(record.width, record.height, config_.tiles);

  SegmentJob job{root_, config_, record, seg};
  std::vector<MotionField> motion = job.motion();
  if (mode == SearchMode::heuristic) return heuristic_search(motion, enumeration.grids);

  const SaliencyMap map = seg.saliency_map.empty() ? job.saliency("")
                                                   : read_pgm(root_ / seg.saliency_map);
  if (target_kbps == 0) {
    target_kbps = seg.target_kbps > 0 ? seg.target_kbps : seg.source_kbps;
  }
  const auto backend = make_backend(config_.encoder);
  const fs::path scratch = root_ / ".tmp" / id / fmt::format("seg_{}_search", segment_index);
  SearchResult result =
      exhaustive_search(job.source(std::move(motion)), map, enumeration.grids, target_kbps,
                        config_.floor_frac, *backend, scratch, config_.encoder.worker_limit);
  std::error_code ec;
  fs::remove_all(scratch, ec);
  return result;
}

}  // namespace vignette
