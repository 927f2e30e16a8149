#include "vignette/config.hpp"

#include <cstdlib>
#include <fmt/format.h>
#include <limits>
#include <set>

#include "vignette/error.hpp"
#include "vignette/toml.hpp"
#include "internal/fsutil.hpp"

namespace vignette {
namespace {

// Typed reader over one table that records which keys were touched, so the
// caller can reject leftovers (typos) by name.
class Cursor {
 public:
  Cursor(const TomlTable& table, std::string section) : table_(table), section_(std::move(section)) {}

  int get_int(const std::string& key, int fallback) {
    const TomlValue* v = take(key);
    if (!v) return fallback;
    const std::int64_t raw = v->as_int(qualify(key));
    require(raw >= std::numeric_limits<int>::min() && raw <= std::numeric_limits<int>::max(),
            fmt::format("{} is out of range", qualify(key)));
    return static_cast<int>(raw);
  }

  double get_double(const std::string& key, double fallback) {
    const TomlValue* v = take(key);
    return v ? v->as_double(qualify(key)) : fallback;
  }

  std::string get_string(const std::string& key, std::string fallback) {
    const TomlValue* v = take(key);
    return v ? v->as_string(qualify(key)) : std::move(fallback);
  }

  bool has(const std::string& key) const { return table_.find(key) != nullptr; }

  void finish() const {
    for (const auto& [key, value] : table_.entries) {
      if (!taken_.contains(key)) {
        fail(fmt::format("unknown key '{}' in [{}] (line {})", key, section_, value.line));
      }
    }
  }

 private:
  const TomlValue* take(const std::string& key) {
    taken_.insert(key);
    return table_.find(key);
  }

  std::string qualify(const std::string& key) const { return section_ + "." + key; }

  const TomlTable& table_;
  std::string section_;
  std::set<std::string> taken_;
};

void read_encoder(const TomlTable& table, ToolkitConfig& config) {
  Cursor c(table, "encoder");
  const std::string kind = c.get_string("kind", "mock");
  if (kind == "mock") {
    config.encoder.kind = EncoderKind::mock;
  } else if (kind == "external") {
    config.encoder.kind = EncoderKind::external;
  } else {
    fail(fmt::format("encoder.kind must be \"mock\" or \"external\", got \"{}\"", kind));
  }
  config.encoder.command_template = c.get_string("command", config.encoder.command_template);
  config.encoder.worker_limit = c.get_int("workers", config.encoder.worker_limit);
  c.finish();
}

// Config-driven profiles default to one job per logical CPU; the in-memory
// EncoderProfile default stays serial so hermetic API use is deterministic.
void seed_default_workers(ToolkitConfig& config) {
  config.encoder.worker_limit = default_workers();
}

void read_mock(const TomlTable& table, MockRDParams& mock) {
  Cursor c(table, "encoder.mock");
  mock.header_bytes_per_tile = c.get_double("header_bytes_per_tile", mock.header_bytes_per_tile);
  mock.boundary_cost_bytes = c.get_double("boundary_cost_bytes", mock.boundary_cost_bytes);
  mock.psnr_base_db = c.get_double("psnr_base_db", mock.psnr_base_db);
  mock.psnr_slope_db_per_octave =
      c.get_double("psnr_slope_db_per_octave", mock.psnr_slope_db_per_octave);
  mock.ref_rate_kbps = c.get_double("ref_rate_kbps", mock.ref_rate_kbps);
  mock.psnr_min_db = c.get_double("psnr_min_db", mock.psnr_min_db);
  mock.psnr_max_db = c.get_double("psnr_max_db", mock.psnr_max_db);
  c.finish();
}

void read_tiles(const TomlTable& table, TileLimits& tiles) {
  Cursor c(table, "tiles");
  tiles.min_rows = c.get_int("min_rows", tiles.min_rows);
  tiles.max_rows = c.get_int("max_rows", tiles.max_rows);
  tiles.min_cols = c.get_int("min_cols", tiles.min_cols);
  tiles.max_cols = c.get_int("max_cols", tiles.max_cols);
  tiles.max_tiles = c.get_int("max_tiles", tiles.max_tiles);
  tiles.min_tile_width = c.get_int("min_tile_width", tiles.min_tile_width);
  tiles.min_tile_height = c.get_int("min_tile_height", tiles.min_tile_height);
  c.finish();
}

void read_transcode(const TomlTable& table, ToolkitConfig& config) {
  Cursor c(table, "transcode");
  config.search_mode = parse_search_mode(c.get_string("mode", to_string(config.search_mode)));
  config.floor_frac = c.get_double("floor_frac", config.floor_frac);
  config.segment_len_s = c.get_int("segment_len_s", config.segment_len_s);
  c.finish();
}

void read_motion(const TomlTable& table, ToolkitConfig& config) {
  Cursor c(table, "motion");
  config.motion_extractor = c.get_string("extractor", config.motion_extractor);
  c.finish();
}

Policy read_policy(const TomlTable& table, std::size_t index) {
  const std::string section = fmt::format("policy #{}", index + 1);
  Cursor c(table, section);
  Policy p;
  p.kind = parse_policy_kind(c.get_string("kind", ""));
  p.threshold = c.get_double("threshold", 0);
  p.action = parse_policy_action(c.get_string("action", ""));
  p.squeeze_target_kbps = c.get_int("squeeze_target_kbps", 0);
  c.finish();
  validate_policy(p);
  return p;
}

}  // namespace

ToolkitConfig parse_config(const std::string& text, const std::string& origin) {
  const TomlDocument doc = parse_toml(text, origin);
  require(doc.root.entries.empty(),
          fmt::format("{}: top-level keys are not recognized; use a [section]", origin));

  ToolkitConfig config;
  seed_default_workers(config);
  std::set<std::string> known;
  const auto section = [&](const char* name) -> const TomlTable* {
    known.insert(name);
    const auto it = doc.tables.find(name);
    return it == doc.tables.end() ? nullptr : &it->second;
  };

  if (const TomlTable* t = section("encoder")) read_encoder(*t, config);
  if (const TomlTable* t = section("encoder.mock")) read_mock(*t, config.encoder.mock);
  if (const TomlTable* t = section("tiles")) read_tiles(*t, config.tiles);
  if (const TomlTable* t = section("transcode")) read_transcode(*t, config);
  if (const TomlTable* t = section("motion")) read_motion(*t, config);

  for (const auto& [name, tables] : doc.tables) {
    require(known.contains(name), fmt::format("{}: unknown section [{}]", origin, name));
  }
  for (const auto& [name, tables] : doc.arrays) {
    require(name == "policy", fmt::format("{}: unknown array section [[{}]]", origin, name));
    for (std::size_t i = 0; i < tables.size(); ++i) {
      config.policies.push_back(read_policy(tables[i], i));
    }
  }

  require(config.floor_frac > 0 && config.floor_frac <= 1,
          "transcode.floor_frac must be in (0, 1]");
  require(config.segment_len_s >= 1, "transcode.segment_len_s must be at least 1");
  validate_profile(config.encoder);
  return config;
}

ToolkitConfig load_config(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file)) {
    ToolkitConfig config;
    seed_default_workers(config);
    return config;
  }
  const std::vector<std::uint8_t> bytes = detail::read_file_bytes(file);
  return parse_config(std::string(bytes.begin(), bytes.end()), file.string());
}

void apply_env_overrides(ToolkitConfig& config) {
  const char* encoder = std::getenv("VIGNETTE_ENCODER");
  if (encoder != nullptr && *encoder != '\0') {
    config.encoder.kind = EncoderKind::external;
    config.encoder.command_template = encoder;
    validate_profile(config.encoder);
  }
}

}  // namespace vignette
