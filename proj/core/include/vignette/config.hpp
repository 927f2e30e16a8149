#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vignette/encoder.hpp"
#include "vignette/policy.hpp"
#include "vignette/search.hpp"
#include "vignette/tile.hpp"

namespace vignette {

/// Everything the tools read from `vignette.toml`. Defaults describe the
/// hermetic setup: mock encoder, built-in motion estimation, heuristic
/// search, 12-second segments, 10% bitrate floor.
struct ToolkitConfig {
  EncoderProfile encoder;
  TileLimits tiles;
  SearchMode search_mode = SearchMode::heuristic;
  double floor_frac = 0.10;
  int segment_len_s = 12;
  /// Motion extractor command with {input} and {output} placeholders; empty
  /// selects the built-in block matcher.
  std::string motion_extractor;
  std::vector<Policy> policies;
};

/// Parses config text. Unknown sections and keys are errors so typos fail
/// loudly; `origin` names the source in diagnostics.
ToolkitConfig parse_config(const std::string& text, const std::string& origin = "<config>");

/// Reads `<file>`; a missing file yields the defaults.
ToolkitConfig load_config(const std::filesystem::path& file);

/// Applies environment overrides: a nonempty VIGNETTE_ENCODER switches the
/// profile to the external encoder with that command template.
void apply_env_overrides(ToolkitConfig& config);

}  // namespace vignette
