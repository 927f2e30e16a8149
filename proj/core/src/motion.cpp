#include "vignette/motion.hpp"

#include <charconv>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>

#include "vignette/error.hpp"

namespace vignette {
namespace {

int parse_field(std::string_view text, int line_no, const char* name) {
  int v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) {
    fail(fmt::format("motion CSV line {}: bad {} value '{}'", line_no, name, std::string(text)));
  }
  return v;
}

}  // namespace

std::vector<MotionField> parse_motion_dump(const std::filesystem::path& path, int frame_w,
                                           int frame_h) {
  std::ifstream in(path);
  require(in.good(), "cannot open " + path.string());

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), path.string() + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "frame,block_x,block_y,dx,dy",
          path.string() + ": unexpected header '" + line + "'");

  std::vector<MotionField> fields;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    int values[5];
    std::string_view rest = line;
    for (int i = 0; i < 5; ++i) {
      const auto comma = rest.find(',');
      const bool last = (i == 4);
      if (last != (comma == std::string_view::npos)) {
        fail(fmt::format("motion CSV line {}: expected 5 comma-separated fields", line_no));
      }
      static constexpr const char* kNames[] = {"frame", "block_x", "block_y", "dx", "dy"};
      values[i] = parse_field(last ? rest : rest.substr(0, comma), line_no, kNames[i]);
      if (!last) rest.remove_prefix(comma + 1);
    }

    const auto [frame, bx, by, dx, dy] = std::tuple(values[0], values[1], values[2], values[3],
                                                    values[4]);
    if (frame < 0) fail(fmt::format("motion CSV line {}: negative frame index", line_no));
    if (bx < 0 || bx >= frame_w || by < 0 || by >= frame_h) {
      fail(fmt::format("motion CSV line {}: block ({}, {}) outside {}x{} frame", line_no, bx, by,
                       frame_w, frame_h));
    }
    if (fields.empty() || fields.back().frame_index != frame) {
      fields.push_back(MotionField{frame, frame_w, frame_h, {}});
    }
    fields.back().entries.push_back(MotionVector{bx, by, dx, dy});
  }
  return fields;
}

void write_motion_dump(const std::filesystem::path& path,
                       const std::vector<MotionField>& fields) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), "cannot create " + path.string());
  out << "frame,block_x,block_y,dx,dy\n";
  for (const auto& f : fields) {
    for (const auto& v : f.entries) {
      out << f.frame_index << ',' << v.block_x << ',' << v.block_y << ',' << v.dx << ',' << v.dy
          << '\n';
    }
  }
  require(out.good(), "short write to " + path.string());
}

std::vector<MotionField> estimate_motion(const std::vector<GrayFrame>& luma_frames, int block,
                                         int radius) {
  require(block >= 2 && radius >= 1, "bad block matcher parameters");
  require(luma_frames.size() >= 2, "motion estimation needs at least two frames");
  const int w = luma_frames.front().width;
  const int h = luma_frames.front().height;

  auto sad = [&](const GrayFrame& cur, const GrayFrame& prev, int bx, int by, int bw, int bh,
                 int ox, int oy) -> long {
    long acc = 0;
    for (int y = 0; y < bh; ++y) {
      for (int x = 0; x < bw; ++x) {
        acc += std::abs(static_cast<int>(cur.at(bx + x, by + y)) -
                        prev.at(bx + x + ox, by + y + oy));
      }
    }
    return acc;
  };

  std::vector<MotionField> fields;
  for (std::size_t f = 1; f < luma_frames.size(); ++f) {
    const GrayFrame& cur = luma_frames[f];
    const GrayFrame& prev = luma_frames[f - 1];
    require(cur.width == w && cur.height == h, "luma frames must share dimensions");

    MotionField field{static_cast<int>(f), w, h, {}};
    for (int by = 0; by + block <= h; by += block) {
      for (int bx = 0; bx + block <= w; bx += block) {
        if (sad(cur, prev, bx, by, block, block, 0, 0) == 0) continue;  // static block
        long best = -1;
        int best_dx = 0, best_dy = 0;
        for (int oy = -radius; oy <= radius; ++oy) {
          for (int ox = -radius; ox <= radius; ++ox) {
            if (bx + ox < 0 || by + oy < 0 || bx + ox + block > w || by + oy + block > h) continue;
            const long cost = sad(cur, prev, bx, by, block, block, ox, oy);
            if (best < 0 || cost < best) {
              best = cost;
              best_dx = ox;
              best_dy = oy;
            }
          }
        }
        // The vector points from the matched source block to this block.
        field.entries.push_back(MotionVector{bx, by, -best_dx, -best_dy});
      }
    }
    fields.push_back(std::move(field));
  }
  return fields;
}

std::vector<MotionField> run_motion_extractor(const std::string& command_template,
                                              const std::filesystem::path& input, int frame_w,
                                              int frame_h,
                                              const std::filesystem::path& work_dir) {
  require(command_template.find("{input}") != std::string::npos &&
              command_template.find("{output}") != std::string::npos,
          "motion extractor template needs {input} and {output} placeholders");
  std::filesystem::create_directories(work_dir);
  const std::filesystem::path csv = work_dir / (input.stem().string() + ".mv.csv");

  std::string cmd = command_template;
  auto substitute = [&cmd](const std::string& key, const std::string& value) {
    for (std::size_t pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos)) {
      cmd.replace(pos, key.size(), value);
      pos += value.size();
    }
  };
  substitute("{input}", input.string());
  substitute("{output}", csv.string());

  const int rc = std::system(cmd.c_str());
  require(rc == 0, fmt::format("motion extractor failed (exit {}): {}", rc, cmd));
  return parse_motion_dump(csv, frame_w, frame_h);
}

}  // namespace vignette
