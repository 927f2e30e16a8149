#pragma once

#include <filesystem>
#include <vector>

#include "vignette/frame.hpp"

namespace vignette {

/// Header of a YUV4MPEG2 stream; chroma is identified but only luma is kept
/// by the reader.
struct Y4mInfo {
  int width = 0;
  int height = 0;
  int fps_num = 30;
  int fps_den = 1;
  std::string colorspace = "420";  // normalized tag: mono, 420, 422, 444
  int frame_count = 0;

  double fps() const { return static_cast<double>(fps_num) / fps_den; }
  double duration_s() const { return frame_count * static_cast<double>(fps_den) / fps_num; }
};

struct Y4mVideo {
  Y4mInfo info;
  std::vector<GrayFrame> luma;
};

/// Parses the stream header and counts frames without loading pixel data.
Y4mInfo probe_y4m(const std::filesystem::path& path);

/// Loads luma planes for every frame (chroma planes are skipped).
Y4mVideo read_y4m(const std::filesystem::path& path);

/// Writes a monochrome Y4M ("Cmono") stream from luma frames.
void write_y4m_mono(const std::filesystem::path& path, const std::vector<GrayFrame>& frames,
                    int fps_num = 30, int fps_den = 1);

/// Copies frames [first, first+count) of src into dst as a standalone Y4M,
/// preserving the source header and chroma planes byte-for-byte.
void split_y4m(const std::filesystem::path& src, const std::filesystem::path& dst, int first,
               int count);

}  // namespace vignette
