#include "vignette/pgm.hpp"

#include <cctype>
#include <fstream>

#include "internal/fsutil.hpp"
#include "vignette/error.hpp"

namespace vignette {
namespace {

// Skips whitespace and '#' comment lines, then reads one unsigned decimal.
int read_header_int(std::istream& in, const std::string& what) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  require(c != EOF && std::isdigit(c), "invalid PGM header: missing " + what);
  long value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    require(value <= 1'000'000'000, "PGM header value out of range");
    c = in.get();
  }
  if (c != EOF) in.unget();
  return static_cast<int>(value);
}

}  // namespace

GrayFrame read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open " + path.string());

  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  require(in.good() && m0 == 'P' && m1 == '5', path.string() + ": not a binary PGM (P5)");

  const int width = read_header_int(in, "width");
  const int height = read_header_int(in, "height");
  const int maxval = read_header_int(in, "maxval");
  require(width > 0 && height > 0, path.string() + ": bad PGM dimensions");
  require(maxval == 255, path.string() + ": unsupported PGM maxval (need 255)");
  in.get();  // single whitespace byte before the raster

  GrayFrame frame(width, height);
  in.read(reinterpret_cast<char*>(frame.values.data()),
          static_cast<std::streamsize>(frame.values.size()));
  require(in.gcount() == static_cast<std::streamsize>(frame.values.size()),
          path.string() + ": truncated PGM raster");
  return frame;
}

void write_pgm(const std::filesystem::path& path, const GrayFrame& frame) {
  require(frame.width > 0 && frame.height > 0, "cannot write empty frame");
  std::string header = "P5\n" + std::to_string(frame.width) + " " +
                       std::to_string(frame.height) + "\n255\n";
  std::vector<std::uint8_t> bytes;
  bytes.reserve(header.size() + frame.values.size());
  bytes.insert(bytes.end(), header.begin(), header.end());
  bytes.insert(bytes.end(), frame.values.begin(), frame.values.end());
  detail::atomic_write_file(path, bytes);
}

}  // namespace vignette
