#pragma once

#include <filesystem>

#include "vignette/frame.hpp"

namespace vignette {

/// Reads a binary PGM ("P5", maxval 255). Comments and arbitrary header
/// whitespace are accepted; any other magic or maxval is rejected.
GrayFrame read_pgm(const std::filesystem::path& path);

/// Writes a binary PGM ("P5", maxval 255). The write is atomic
/// (temp file + rename).
void write_pgm(const std::filesystem::path& path, const GrayFrame& frame);

}  // namespace vignette
