#include "vignette/metadata.hpp"

#include <cstring>
#include <fmt/format.h>
#include <fstream>
#include <limits>

#include "vignette/error.hpp"
#include "internal/fsutil.hpp"

namespace vignette {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'V', 'G', 'N', 'T'};

// Box header + usertype: size(4) type(4) largesize(8) usertype(16). The
// payload must keep the total box size below 2^32 so the plain-size path
// would also have worked; we always write largesize for uniformity.
constexpr std::uint64_t kUuidHeaderSize = 4 + 4 + 8 + 16;
constexpr std::uint64_t kMaxPayload = (std::uint64_t{1} << 32) - kUuidHeaderSize - 1;

std::uint8_t xor_bytes(std::span<const std::uint8_t> bytes) {
  std::uint8_t acc = 0;
  for (std::uint8_t b : bytes) acc ^= b;
  return acc;
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

std::uint64_t read_u64(const std::uint8_t* p) {
  return (std::uint64_t{read_u32(p)} << 32) | read_u32(p + 4);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
  put_u32(out, static_cast<std::uint32_t>(v));
}

std::vector<std::uint8_t> make_saliency_box(std::span<const std::uint8_t> payload) {
  std::vector<std::uint8_t> box;
  box.reserve(kUuidHeaderSize + payload.size());
  put_u32(box, 1);  // size==1 selects the largesize field
  box.push_back('u');
  box.push_back('u');
  box.push_back('i');
  box.push_back('d');
  put_u64(box, kUuidHeaderSize + payload.size());
  box.insert(box.end(), kSaliencyUserType.begin(), kSaliencyUserType.end());
  box.insert(box.end(), payload.begin(), payload.end());
  return box;
}

}  // namespace

std::vector<std::uint8_t> encode_metadata(const PerceptualMetadata& m) {
  require(m.version == kMetadataVersion,
          fmt::format("unsupported metadata version {}", m.version));
  require(m.rows >= 1 && m.rows <= 255, fmt::format("metadata rows {} out of 1..255", m.rows));
  require(m.cols >= 1 && m.cols <= 255, fmt::format("metadata cols {} out of 1..255", m.cols));
  const std::size_t expect = static_cast<std::size_t>(m.rows) * static_cast<std::size_t>(m.cols);
  require(m.weights.size() == expect,
          fmt::format("metadata carries {} weights for a {}x{} grid", m.weights.size(), m.rows,
                      m.cols));

  std::vector<std::uint8_t> out;
  out.reserve(8 + expect);
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(m.version);
  out.push_back(static_cast<std::uint8_t>(m.rows));
  out.push_back(static_cast<std::uint8_t>(m.cols));
  out.insert(out.end(), m.weights.begin(), m.weights.end());
  out.push_back(xor_bytes(out));
  return out;
}

PerceptualMetadata decode_metadata(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= 9, fmt::format("metadata blob of {} bytes is shorter than the "
                                         "9-byte minimum",
                                         bytes.size()));
  require(std::memcmp(bytes.data(), kMagic.data(), 4) == 0, "metadata magic is not VGNT");
  PerceptualMetadata m;
  m.version = bytes[4];
  require(m.version == kMetadataVersion,
          fmt::format("unsupported metadata version {}", m.version));
  m.rows = bytes[5];
  m.cols = bytes[6];
  require(m.rows >= 1, "metadata rows is zero");
  require(m.cols >= 1, "metadata cols is zero");
  const std::size_t expect = 8 + static_cast<std::size_t>(m.rows) * m.cols;
  require(bytes.size() == expect,
          fmt::format("metadata blob is {} bytes; a {}x{} grid needs {}", bytes.size(), m.rows,
                      m.cols, expect));
  require(xor_bytes(bytes.first(bytes.size() - 1)) == bytes.back(),
          "metadata checksum mismatch");
  m.weights.assign(bytes.begin() + 7, bytes.end() - 1);
  return m;
}

std::vector<BoxSpan> scan_boxes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), fmt::format("cannot open container {}", path.string()));
  in.seekg(0, std::ios::end);
  const std::uint64_t file_size = static_cast<std::uint64_t>(in.tellg());

  std::vector<BoxSpan> boxes;
  std::uint64_t pos = 0;
  while (pos < file_size) {
    require(file_size - pos >= 8,
            fmt::format("{}: truncated box header at offset {}", path.string(), pos));
    std::uint8_t hdr[16];
    in.seekg(static_cast<std::streamoff>(pos));
    in.read(reinterpret_cast<char*>(hdr), 8);
    require(in.good(), fmt::format("{}: read failed at offset {}", path.string(), pos));

    BoxSpan box;
    box.offset = pos;
    std::memcpy(box.type.data(), hdr + 4, 4);
    std::uint64_t size = read_u32(hdr);
    box.header_size = 8;
    if (size == 1) {
      require(file_size - pos >= 16,
              fmt::format("{}: truncated largesize at offset {}", path.string(), pos));
      in.read(reinterpret_cast<char*>(hdr + 8), 8);
      require(in.good(), fmt::format("{}: read failed at offset {}", path.string(), pos));
      size = read_u64(hdr + 8);
      box.header_size = 16;
    } else if (size == 0) {
      // Open-ended final box: extends to end of file.
      size = file_size - pos;
      box.open_ended = true;
    }
    require(size >= box.header_size,
            fmt::format("{}: box at offset {} declares size {} below its header", path.string(),
                        pos, size));
    require(size <= file_size - pos,
            fmt::format("{}: box at offset {} overruns the file", path.string(), pos));
    box.size = size;

    if (std::memcmp(box.type.data(), "uuid", 4) == 0) {
      require(size >= box.header_size + 16,
              fmt::format("{}: uuid box at offset {} too small for a usertype", path.string(),
                          pos));
      in.seekg(static_cast<std::streamoff>(pos + box.header_size));
      in.read(reinterpret_cast<char*>(box.usertype.data()), 16);
      require(in.good(), fmt::format("{}: read failed at offset {}", path.string(), pos));
      box.has_usertype = true;
      box.header_size += 16;
    }
    boxes.push_back(box);
    pos += size;
  }
  return boxes;
}

void embed_in_container(const std::filesystem::path& path,
                        std::span<const std::uint8_t> payload) {
  require(payload.size() <= kMaxPayload,
          fmt::format("metadata payload of {} bytes exceeds the {}-byte box limit",
                      payload.size(), kMaxPayload));
  const std::vector<BoxSpan> boxes = scan_boxes(path);
  for (const BoxSpan& b : boxes) {
    // An open-ended box absorbs anything appended after it, so a trailing
    // metadata box would silently become part of it instead of a sibling.
    require(!b.open_ended,
            fmt::format("{}: final box is open-ended (size 0); cannot append metadata",
                        path.string()));
  }

  const std::vector<std::uint8_t> src = detail::read_file_bytes(path);
  std::vector<std::uint8_t> dst;
  dst.reserve(src.size() + kUuidHeaderSize + payload.size());
  for (const BoxSpan& b : boxes) {
    if (b.is_saliency_box()) continue;
    dst.insert(dst.end(), src.begin() + static_cast<std::ptrdiff_t>(b.offset),
               src.begin() + static_cast<std::ptrdiff_t>(b.offset + b.size));
  }
  const std::vector<std::uint8_t> box = make_saliency_box(payload);
  dst.insert(dst.end(), box.begin(), box.end());
  detail::atomic_write_file(path, dst);
}

std::optional<std::vector<std::uint8_t>> extract_from_container(
    const std::filesystem::path& path) {
  const std::vector<BoxSpan> boxes = scan_boxes(path);
  for (const BoxSpan& b : boxes) {
    if (!b.is_saliency_box()) continue;
    std::ifstream in(path, std::ios::binary);
    require(in.good(), fmt::format("cannot open container {}", path.string()));
    in.seekg(static_cast<std::streamoff>(b.offset + b.header_size));
    std::vector<std::uint8_t> payload(b.size - b.header_size);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
    require(in.good(), fmt::format("{}: payload read failed", path.string()));
    return payload;
  }
  return std::nullopt;
}

namespace {

struct ChildBox {
  std::array<char, 4> type{};
  std::span<const std::uint8_t> body;
};

// Children of one box body. Container bodies use plain 32-bit sizes here;
// largesize children are accepted too.
std::vector<ChildBox> child_boxes(std::span<const std::uint8_t> body,
                                  const std::filesystem::path& path) {
  std::vector<ChildBox> out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    require(body.size() - pos >= 8,
            fmt::format("{}: truncated child box header", path.string()));
    std::uint64_t size = read_u32(body.data() + pos);
    std::uint64_t header = 8;
    if (size == 1) {
      require(body.size() - pos >= 16,
              fmt::format("{}: truncated child largesize", path.string()));
      size = read_u64(body.data() + pos + 8);
      header = 16;
    } else if (size == 0) {
      size = body.size() - pos;
    }
    require(size >= header && size <= body.size() - pos,
            fmt::format("{}: child box overruns its parent", path.string()));
    ChildBox child;
    std::memcpy(child.type.data(), body.data() + pos + 4, 4);
    child.body = body.subspan(pos + header, size - header);
    out.push_back(child);
    pos += size;
  }
  return out;
}

const ChildBox* find_child(const std::vector<ChildBox>& children, const char* type) {
  for (const ChildBox& c : children) {
    if (std::memcmp(c.type.data(), type, 4) == 0) return &c;
  }
  return nullptr;
}

}  // namespace

ContainerVideoInfo probe_container_video(const std::filesystem::path& path) {
  const std::vector<BoxSpan> boxes = scan_boxes(path);
  const BoxSpan* moov = nullptr;
  for (const BoxSpan& b : boxes) {
    if (std::memcmp(b.type.data(), "moov", 4) == 0) {
      moov = &b;
      break;
    }
  }
  require(moov != nullptr, fmt::format("{}: no movie header (moov) box", path.string()));

  std::ifstream in(path, std::ios::binary);
  require(in.good(), fmt::format("cannot open container {}", path.string()));
  std::vector<std::uint8_t> body(moov->size - moov->header_size);
  in.seekg(static_cast<std::streamoff>(moov->offset + moov->header_size));
  in.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(body.size()));
  require(in.good(), fmt::format("{}: moov read failed", path.string()));

  const std::vector<ChildBox> children = child_boxes(body, path);
  const ChildBox* mvhd = find_child(children, "mvhd");
  require(mvhd != nullptr, fmt::format("{}: moov has no mvhd", path.string()));
  require(mvhd->body.size() >= 4, fmt::format("{}: mvhd too small", path.string()));

  ContainerVideoInfo info;
  const std::uint8_t version = mvhd->body[0];
  if (version == 1) {
    require(mvhd->body.size() >= 4 + 8 + 8 + 4 + 8,
            fmt::format("{}: mvhd v1 too small", path.string()));
    const std::uint32_t timescale = read_u32(mvhd->body.data() + 4 + 16);
    const std::uint64_t duration = read_u64(mvhd->body.data() + 4 + 20);
    require(timescale > 0, fmt::format("{}: mvhd timescale is zero", path.string()));
    info.duration_s = static_cast<double>(duration) / timescale;
  } else {
    require(mvhd->body.size() >= 4 + 4 + 4 + 4 + 4,
            fmt::format("{}: mvhd v0 too small", path.string()));
    const std::uint32_t timescale = read_u32(mvhd->body.data() + 4 + 8);
    const std::uint32_t duration = read_u32(mvhd->body.data() + 4 + 12);
    require(timescale > 0, fmt::format("{}: mvhd timescale is zero", path.string()));
    info.duration_s = static_cast<double>(duration) / timescale;
  }

  // First trak whose tkhd carries nonzero pixel dimensions is the video
  // track; width/height are 16.16 fixed point at the end of tkhd.
  for (const ChildBox& trak : children) {
    if (std::memcmp(trak.type.data(), "trak", 4) != 0) continue;
    const std::vector<ChildBox> trak_children = child_boxes(trak.body, path);
    const ChildBox* tkhd = find_child(trak_children, "tkhd");
    if (tkhd == nullptr || tkhd->body.size() < 4) continue;
    const std::size_t fixed_fields = tkhd->body[0] == 1 ? 32 : 20;
    const std::size_t width_off = 4 + fixed_fields + 8 + 8 + 36;
    if (tkhd->body.size() < width_off + 8) continue;
    const int w = static_cast<int>(read_u32(tkhd->body.data() + width_off) >> 16);
    const int h = static_cast<int>(read_u32(tkhd->body.data() + width_off + 4) >> 16);
    if (w > 0 && h > 0) {
      info.width = w;
      info.height = h;
      break;
    }
  }
  require(info.width > 0 && info.height > 0,
          fmt::format("{}: no video track with pixel dimensions", path.string()));
  return info;
}

void write_sidecar(const std::filesystem::path& path, std::span<const std::uint8_t> payload) {
  detail::atomic_write_file(path, payload.data(), payload.size());
}

std::optional<std::vector<std::uint8_t>> read_sidecar(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  return detail::read_file_bytes(path);
}

void write_stub_container(const std::filesystem::path& path,
                          std::span<const std::uint8_t> mdat_payload) {
  std::vector<std::uint8_t> out;
  out.reserve(24 + 8 + mdat_payload.size());
  // ftyp: major brand isom, minor version 0, compatible brands isom + iso2.
  put_u32(out, 24);
  for (char c : {'f', 't', 'y', 'p', 'i', 's', 'o', 'm'}) {
    out.push_back(static_cast<std::uint8_t>(c));
  }
  put_u32(out, 0);
  for (char c : {'i', 's', 'o', 'm', 'i', 's', 'o', '2'}) {
    out.push_back(static_cast<std::uint8_t>(c));
  }
  // mdat with the payload.
  require(mdat_payload.size() <= std::numeric_limits<std::uint32_t>::max() - 8,
          "stub payload too large");
  put_u32(out, static_cast<std::uint32_t>(8 + mdat_payload.size()));
  for (char c : {'m', 'd', 'a', 't'}) out.push_back(static_cast<std::uint8_t>(c));
  out.insert(out.end(), mdat_payload.begin(), mdat_payload.end());
  detail::atomic_write_file(path, out);
}

}  // namespace vignette
