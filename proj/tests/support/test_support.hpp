// Shared helpers for the test binaries: unique scratch directories,
// synthetic clip/map builders, and small file utilities. Everything here is
// deterministic so tests can assert byte-identical artifacts.
#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "vignette/error.hpp"
#include "vignette/frame.hpp"
#include "vignette/y4m.hpp"

namespace vtest {

namespace fs = std::filesystem;

/// Unique directory under the system temp root, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    const auto id = counter.fetch_add(1);
    path_ = fs::temp_directory_path() /
            ("vignette-test-" + std::to_string(::getpid()) + "-" + std::to_string(id));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::vector<std::uint8_t> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  vignette::require(in.good(), "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  vignette::require(out.good(), "cannot write " + path.string());
}

inline vignette::GrayFrame constant_map(int w, int h, std::uint8_t v) {
  return vignette::GrayFrame(w, h, v);
}

/// Frame whose pixel values come from painter(x, y).
inline vignette::GrayFrame painted_frame(int w, int h,
                                         const std::function<int(int, int)>& painter) {
  vignette::GrayFrame f(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      f.at(x, y) = static_cast<std::uint8_t>(std::clamp(painter(x, y), 0, 255));
    }
  }
  return f;
}

/// Frames of a bright square over a dark background, moving `step` pixels
/// right per frame. The workhorse synthetic clip for pipeline tests.
inline std::vector<vignette::GrayFrame> moving_square_frames(int w, int h, int count,
                                                             int square = 40, int step = 4) {
  std::vector<vignette::GrayFrame> frames;
  frames.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int x0 = 10 + i * step;
    const int y0 = h / 3;
    frames.push_back(painted_frame(w, h, [&](int x, int y) {
      const bool inside = x >= x0 && x < x0 + square && y >= y0 && y < y0 + square;
      return inside ? 220 : 40;
    }));
  }
  return frames;
}

/// Writes a 4:2:0 Y4M with neutral chroma so container-level code sees the
/// most common colorspace tag.
inline void write_y4m_420(const fs::path& path, const std::vector<vignette::GrayFrame>& frames,
                          int fps_num = 24, int fps_den = 1) {
  vignette::require(!frames.empty(), "no frames");
  const int w = frames.front().width;
  const int h = frames.front().height;
  vignette::require(w % 2 == 0 && h % 2 == 0, "4:2:0 needs even dimensions");
  std::ofstream out(path, std::ios::binary);
  out << "YUV4MPEG2 W" << w << " H" << h << " F" << fps_num << ":" << fps_den
      << " Ip A1:1 C420jpeg\n";
  const std::string chroma(static_cast<std::size_t>(w / 2) * (h / 2), '\x80');
  for (const vignette::GrayFrame& f : frames) {
    out << "FRAME\n";
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size()));
    out << chroma << chroma;
  }
  vignette::require(out.good(), "cannot write " + path.string());
}

inline std::mt19937 seeded_rng(std::uint32_t seed) { return std::mt19937(seed); }

}  // namespace vtest
