#include "vignette/y4m.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "internal/fsutil.hpp"
#include "vignette/error.hpp"

namespace vignette {
namespace {

struct Layout {
  Y4mInfo info;
  std::string header_line;  // without trailing newline
  std::size_t frame_bytes = 0;
};

std::size_t chroma_bytes(const std::string& cs, std::size_t luma) {
  if (cs == "mono") return 0;
  if (cs == "420") return luma / 2;
  if (cs == "422") return luma;
  if (cs == "444") return luma * 2;
  fail("unsupported Y4M colorspace: " + cs);
}

int parse_int(std::string_view s, const std::string& what) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && p == s.data() + s.size() && v > 0, "bad Y4M " + what);
  return v;
}

Layout parse_header(std::istream& in, const std::string& name) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), name + ": empty file");
  require(line.rfind("YUV4MPEG2", 0) == 0, name + ": not a YUV4MPEG2 stream");

  Layout lay;
  lay.header_line = line;
  std::istringstream fields(line.substr(9));
  std::string tok;
  while (fields >> tok) {
    switch (tok[0]) {
      case 'W': lay.info.width = parse_int(std::string_view(tok).substr(1), "width"); break;
      case 'H': lay.info.height = parse_int(std::string_view(tok).substr(1), "height"); break;
      case 'F': {
        auto colon = tok.find(':');
        require(colon != std::string::npos, name + ": bad frame-rate tag");
        lay.info.fps_num = parse_int(std::string_view(tok).substr(1, colon - 1), "fps");
        lay.info.fps_den = parse_int(std::string_view(tok).substr(colon + 1), "fps");
        break;
      }
      case 'C': {
        std::string cs = tok.substr(1);
        if (cs == "mono") lay.info.colorspace = "mono";
        else if (cs.rfind("420", 0) == 0) lay.info.colorspace = "420";
        else if (cs.rfind("422", 0) == 0) lay.info.colorspace = "422";
        else if (cs.rfind("444", 0) == 0) lay.info.colorspace = "444";
        else fail(name + ": unsupported colorspace " + cs);
        break;
      }
      default: break;  // interlacing / aspect tags are irrelevant here
    }
  }
  require(lay.info.width > 0 && lay.info.height > 0, name + ": missing W/H tags");
  const std::size_t luma = static_cast<std::size_t>(lay.info.width) * lay.info.height;
  lay.frame_bytes = luma + chroma_bytes(lay.info.colorspace, luma);
  return lay;
}

// Reads the "FRAME..." marker line; returns false at EOF.
bool read_frame_marker(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) return false;
  require(line.rfind("FRAME", 0) == 0, name + ": corrupt frame marker");
  return true;
}

}  // namespace

Y4mInfo probe_y4m(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open " + path.string());
  Layout lay = parse_header(in, path.string());
  while (read_frame_marker(in, path.string())) {
    in.seekg(static_cast<std::streamoff>(lay.frame_bytes), std::ios::cur);
    require(!in.fail(), path.string() + ": truncated frame payload");
    ++lay.info.frame_count;
  }
  return lay.info;
}

Y4mVideo read_y4m(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open " + path.string());
  Layout lay = parse_header(in, path.string());

  Y4mVideo video;
  const std::size_t luma = static_cast<std::size_t>(lay.info.width) * lay.info.height;
  const std::size_t skip = lay.frame_bytes - luma;
  while (read_frame_marker(in, path.string())) {
    GrayFrame frame(lay.info.width, lay.info.height);
    in.read(reinterpret_cast<char*>(frame.values.data()), static_cast<std::streamsize>(luma));
    require(in.gcount() == static_cast<std::streamsize>(luma),
            path.string() + ": truncated luma plane");
    if (skip > 0) {
      in.seekg(static_cast<std::streamoff>(skip), std::ios::cur);
      require(!in.fail(), path.string() + ": truncated chroma planes");
    }
    video.luma.push_back(std::move(frame));
  }
  require(!video.luma.empty(), path.string() + ": stream has no frames");
  lay.info.frame_count = static_cast<int>(video.luma.size());
  video.info = lay.info;
  return video;
}

void write_y4m_mono(const std::filesystem::path& path, const std::vector<GrayFrame>& frames,
                    int fps_num, int fps_den) {
  require(!frames.empty(), "cannot write empty Y4M");
  require(fps_num > 0 && fps_den > 0, "bad frame rate");
  const int w = frames.front().width;
  const int h = frames.front().height;
  std::string head =
      fmt::format("YUV4MPEG2 W{} H{} F{}:{} Ip A1:1 Cmono\n", w, h, fps_num, fps_den);
  std::vector<std::uint8_t> bytes(head.begin(), head.end());
  for (const auto& f : frames) {
    require(f.width == w && f.height == h, "Y4M frames must share dimensions");
    static constexpr char kMarker[] = "FRAME\n";
    bytes.insert(bytes.end(), kMarker, kMarker + 6);
    bytes.insert(bytes.end(), f.values.begin(), f.values.end());
  }
  detail::atomic_write_file(path, bytes);
}

void split_y4m(const std::filesystem::path& src, const std::filesystem::path& dst, int first,
               int count) {
  require(first >= 0 && count > 0, "bad frame range");
  std::ifstream in(src, std::ios::binary);
  require(in.good(), "cannot open " + src.string());
  Layout lay = parse_header(in, src.string());

  std::ofstream out(dst, std::ios::binary | std::ios::trunc);
  require(out.good(), "cannot create " + dst.string());
  out << lay.header_line << '\n';

  std::vector<char> payload(lay.frame_bytes);
  int index = 0;
  int copied = 0;
  std::string marker;
  while (copied < count && std::getline(in, marker)) {
    require(marker.rfind("FRAME", 0) == 0, src.string() + ": corrupt frame marker");
    if (index >= first) {
      in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
      require(in.gcount() == static_cast<std::streamsize>(payload.size()),
              src.string() + ": truncated frame payload");
      out << marker << '\n';
      out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
      ++copied;
    } else {
      in.seekg(static_cast<std::streamoff>(lay.frame_bytes), std::ios::cur);
      require(!in.fail(), src.string() + ": truncated frame payload");
    }
    ++index;
  }
  require(copied == count,
          fmt::format("{}: frame range [{}, {}) out of bounds", src.string(), first,
                      first + count));
  require(out.good(), "short write to " + dst.string());
}

}  // namespace vignette
