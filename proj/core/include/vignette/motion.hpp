#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vignette/frame.hpp"

namespace vignette {

struct MotionVector {
  int block_x = 0;
  int block_y = 0;
  int dx = 0;
  int dy = 0;
  bool operator==(const MotionVector&) const = default;
};

/// Block motion vectors for one frame; entries may be empty (still frame).
struct MotionField {
  int frame_index = 0;
  int frame_w = 0;
  int frame_h = 0;
  std::vector<MotionVector> entries;
};

/// Parses the motion CSV format: header `frame,block_x,block_y,dx,dy`, one
/// integer row per vector. Rows must be grouped or sorted by frame index;
/// one MotionField is produced per frame index present, entries in file
/// order. Block origins outside the frame are rejected with the offending
/// line number.
std::vector<MotionField> parse_motion_dump(const std::filesystem::path& path, int frame_w,
                                           int frame_h);

/// Writes the CSV form accepted by parse_motion_dump.
void write_motion_dump(const std::filesystem::path& path, const std::vector<MotionField>& fields);

/// Minimal diamond-free exhaustive block matcher over luma frames: for each
/// block of `block` pixels, searches +-radius for the minimum-SAD offset in
/// the previous frame. Deterministic; intended as the built-in motion source
/// when no external extractor output is configured. Zero-difference blocks
/// produce no vector.
std::vector<MotionField> estimate_motion(const std::vector<GrayFrame>& luma_frames,
                                         int block = 16, int radius = 4);

/// Runs an external motion extractor command. The template must contain
/// `{input}` and `{output}`; the command is expected to write the motion CSV
/// to {output}.
std::vector<MotionField> run_motion_extractor(const std::string& command_template,
                                              const std::filesystem::path& input, int frame_w,
                                              int frame_h,
                                              const std::filesystem::path& work_dir);

}  // namespace vignette
