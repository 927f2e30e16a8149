#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace vignette {

/// The saliency record carried in or alongside a container. Serialized form:
///
///   bytes 0..3   ASCII "VGNT"
///   byte  4      version (currently 1)
///   byte  5      rows  (1..255)
///   byte  6      cols  (1..255)
///   bytes 7..    rows*cols tile weights, row-major
///   last byte    XOR of all preceding bytes
///
/// so the serialized size is exactly 8 + rows*cols bytes.
struct PerceptualMetadata {
  std::uint8_t version = 1;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> weights;

  bool operator==(const PerceptualMetadata&) const = default;
};

inline constexpr std::uint8_t kMetadataVersion = 1;

std::vector<std::uint8_t> encode_metadata(const PerceptualMetadata& m);

/// Inverse of encode_metadata; rejects bad magic, unsupported versions,
/// length mismatches and checksum failures.
PerceptualMetadata decode_metadata(std::span<const std::uint8_t> bytes);

/// usertype of the appended top-level `uuid` box (16 ASCII bytes).
inline constexpr std::array<std::uint8_t, 16> kSaliencyUserType = {
    'v', 'g', 'n', 't', '-', 's', 'a', 'l', 'i', 'e', 'n', 'c', 'y', '-', 'v', '1'};

/// One top-level ISO-BMFF box as found by scan_boxes.
struct BoxSpan {
  std::uint64_t offset = 0;      // absolute file offset of the box
  std::uint64_t size = 0;        // full box size including header
  std::uint64_t header_size = 8; // 8, or 16 with a largesize, +16 for uuid
  std::array<char, 4> type{};
  bool open_ended = false;       // declared size 0: extends to end of file
  bool has_usertype = false;
  std::array<std::uint8_t, 16> usertype{};

  bool is_saliency_box() const { return has_usertype && usertype == kSaliencyUserType; }
};

/// Walks the top-level box sequence (32-bit sizes, 64-bit largesize, and a
/// final size-0 to-end-of-file box are all accepted). Throws on structures
/// that cannot be a box sequence.
std::vector<BoxSpan> scan_boxes(const std::filesystem::path& path);

/// Rewrites `path` so it carries exactly one Vignette uuid box holding
/// `payload`: prior Vignette boxes are dropped, every other box is copied
/// byte-identically and in order, and the new box is appended last. The
/// replacement is atomic (temp file + rename).
void embed_in_container(const std::filesystem::path& path, std::span<const std::uint8_t> payload);

/// Payload of the Vignette uuid box, or nullopt when the container carries
/// none (absence is not an error).
std::optional<std::vector<std::uint8_t>> extract_from_container(
    const std::filesystem::path& path);

/// Sidecar form for non-MP4 content: the raw bitstring in a `.vgnt` file.
void write_sidecar(const std::filesystem::path& path, std::span<const std::uint8_t> payload);
std::optional<std::vector<std::uint8_t>> read_sidecar(const std::filesystem::path& path);

/// Presentation facts read from a container's movie header and first video
/// track header (duration from mvhd, pixel dimensions from tkhd).
struct ContainerVideoInfo {
  double duration_s = 0.0;
  int width = 0;
  int height = 0;
};

ContainerVideoInfo probe_container_video(const std::filesystem::path& path);

/// Writes a minimal box sequence (ftyp + mdat with the given payload) — the
/// mock encoder's stand-in for a real stream, and a parseable embed target.
void write_stub_container(const std::filesystem::path& path,
                          std::span<const std::uint8_t> mdat_payload);

}  // namespace vignette
