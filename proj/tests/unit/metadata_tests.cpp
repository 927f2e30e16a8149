#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <doctest.h>

#include "test_support.hpp"
#include "vignette/error.hpp"
#include "vignette/metadata.hpp"

using namespace vignette;
using vtest::TempDir;

namespace {

void u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void u64be(std::vector<std::uint8_t>& out, std::uint64_t v) {
  u32be(out, static_cast<std::uint32_t>(v >> 32));
  u32be(out, static_cast<std::uint32_t>(v));
}

void ascii(std::vector<std::uint8_t>& out, const std::string& s) {
  out.insert(out.end(), s.begin(), s.end());
}

// Plain 32-bit-size box.
std::vector<std::uint8_t> box(const std::string& type, const std::vector<std::uint8_t>& body) {
  std::vector<std::uint8_t> out;
  u32be(out, static_cast<std::uint32_t>(8 + body.size()));
  ascii(out, type);
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

// Box carried through the 64-bit largesize field.
std::vector<std::uint8_t> large_box(const std::string& type,
                                    const std::vector<std::uint8_t>& body) {
  std::vector<std::uint8_t> out;
  u32be(out, 1);
  ascii(out, type);
  u64be(out, 16 + body.size());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

void append(std::vector<std::uint8_t>& dst, const std::vector<std::uint8_t>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  vtest::spit(path, std::string(bytes.begin(), bytes.end()));
}

PerceptualMetadata random_metadata(std::mt19937& rng, int max_dim) {
  std::uniform_int_distribution<int> dim(1, max_dim), w(0, 255);
  PerceptualMetadata m;
  m.rows = dim(rng);
  m.cols = dim(rng);
  m.weights.resize(static_cast<std::size_t>(m.rows) * m.cols);
  for (auto& v : m.weights) v = static_cast<std::uint8_t>(w(rng));
  return m;
}

}  // namespace

TEST_SUITE("metadata codec") {
  TEST_CASE("encodes the documented byte layout with an XOR trailer") {
    PerceptualMetadata m;
    m.rows = 1;
    m.cols = 2;
    m.weights = {3, 5};
    // Checksum by hand: 'V'^'G'^'N'^'T' = 0x0B, then ^1^1^2^3^5 = 0x0F.
    const std::vector<std::uint8_t> want{'V', 'G', 'N', 'T', 1, 1, 2, 3, 5, 0x0F};
    CHECK(encode_metadata(m) == want);
    CHECK(decode_metadata(want) == m);
  }

  TEST_CASE("round-trips arbitrary grids at the exact serialized size") {
    std::mt19937 rng(555);
    for (int trial = 0; trial < 300; ++trial) {
      const PerceptualMetadata m = random_metadata(rng, 30);
      const auto bytes = encode_metadata(m);
      CHECK(bytes.size() == 8 + static_cast<std::size_t>(m.rows) * m.cols);
      CHECK(decode_metadata(bytes) == m);
    }
    // Extremes of the one-byte dimension fields.
    PerceptualMetadata big;
    big.rows = big.cols = 255;
    big.weights.assign(255 * 255, 77);
    CHECK(decode_metadata(encode_metadata(big)) == big);
    PerceptualMetadata tiny;
    tiny.rows = tiny.cols = 1;
    tiny.weights = {0};
    CHECK(encode_metadata(tiny).size() == 9);
  }

  TEST_CASE("rejects unencodable records") {
    PerceptualMetadata m;
    m.rows = 0;
    m.cols = 2;
    CHECK_THROWS_WITH_AS(encode_metadata(m), doctest::Contains("rows 0 out of 1..255"), Error);
    m.rows = 256;
    CHECK_THROWS_WITH_AS(encode_metadata(m), doctest::Contains("rows 256 out of 1..255"), Error);
    m.rows = 2;
    m.weights = {1, 2, 3};
    CHECK_THROWS_WITH_AS(encode_metadata(m),
                         doctest::Contains("carries 3 weights for a 2x2 grid"), Error);
    m.weights = {1, 2, 3, 4};
    m.version = 2;
    CHECK_THROWS_WITH_AS(encode_metadata(m), doctest::Contains("unsupported metadata version 2"),
                         Error);
  }

  TEST_CASE("rejects malformed blobs") {
    PerceptualMetadata m;
    m.rows = 2;
    m.cols = 3;
    m.weights = {10, 20, 30, 40, 50, 60};
    const auto good = encode_metadata(m);

    CHECK_THROWS_WITH_AS(decode_metadata(std::vector<std::uint8_t>{1, 2, 3}),
                         doctest::Contains("shorter than the 9-byte minimum"), Error);

    auto bad = good;
    bad[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_metadata(bad), doctest::Contains("magic is not VGNT"), Error);

    bad = good;
    bad.pop_back();  // length no longer matches the grid
    CHECK_THROWS_WITH_AS(decode_metadata(bad), doctest::Contains("2x3 grid needs 14"), Error);

    bad = good;
    bad.back() ^= 0xFF;
    CHECK_THROWS_WITH_AS(decode_metadata(bad), doctest::Contains("checksum mismatch"), Error);
  }

  TEST_CASE("every single-byte corruption is rejected") {
    std::mt19937 rng(556);
    const PerceptualMetadata m = random_metadata(rng, 6);
    const auto good = encode_metadata(m);
    for (std::size_t i = 0; i < good.size(); ++i) {
      for (std::uint8_t flip : {std::uint8_t{0x01}, std::uint8_t{0x80}}) {
        auto bad = good;
        bad[i] ^= flip;
        CHECK_THROWS_AS(decode_metadata(bad), Error);
      }
    }
  }
}

TEST_SUITE("box scanning") {
  TEST_CASE("walks plain, largesize and open-ended boxes") {
    TempDir dir;
    std::vector<std::uint8_t> file;
    append(file, box("ftyp", std::vector<std::uint8_t>(16, 0)));        // 24 bytes
    append(file, large_box("skip", {1, 2, 3, 4}));                      // 20 bytes
    std::vector<std::uint8_t> tail;
    u32be(tail, 0);  // open-ended: runs to end of file
    ascii(tail, "mdat");
    tail.push_back(9);
    tail.push_back(9);
    append(file, tail);
    const auto path = dir / "seq.mp4";
    write_bytes(path, file);

    const auto boxes = scan_boxes(path);
    REQUIRE(boxes.size() == 3);
    CHECK(boxes[0].offset == 0);
    CHECK(boxes[0].size == 24);
    CHECK(boxes[0].header_size == 8);
    CHECK(std::string(boxes[0].type.begin(), boxes[0].type.end()) == "ftyp");
    CHECK_FALSE(boxes[0].open_ended);

    CHECK(boxes[1].offset == 24);
    CHECK(boxes[1].size == 20);
    CHECK(boxes[1].header_size == 16);
    CHECK(std::string(boxes[1].type.begin(), boxes[1].type.end()) == "skip");

    CHECK(boxes[2].offset == 44);
    CHECK(boxes[2].size == 10);
    CHECK(boxes[2].open_ended);
  }

  TEST_CASE("reads uuid usertypes") {
    TempDir dir;
    std::vector<std::uint8_t> foreign_body(16, 0xAB);  // some other usertype
    foreign_body.push_back(7);
    std::vector<std::uint8_t> file = box("uuid", foreign_body);
    const auto path = dir / "u.mp4";
    write_bytes(path, file);

    const auto boxes = scan_boxes(path);
    REQUIRE(boxes.size() == 1);
    CHECK(boxes[0].has_usertype);
    CHECK(boxes[0].header_size == 24);  // 8 + 16-byte usertype
    CHECK_FALSE(boxes[0].is_saliency_box());
  }

  TEST_CASE("rejects sequences that cannot be boxes") {
    TempDir dir;
    const auto path = dir / "bad.mp4";

    write_bytes(path, {1, 2, 3, 4, 5});
    CHECK_THROWS_WITH_AS(scan_boxes(path), doctest::Contains("truncated box header at offset 0"),
                         Error);

    std::vector<std::uint8_t> overrun;
    u32be(overrun, 100);
    ascii(overrun, "mdat");
    write_bytes(path, overrun);
    CHECK_THROWS_WITH_AS(scan_boxes(path), doctest::Contains("overruns the file"), Error);

    std::vector<std::uint8_t> tiny;
    u32be(tiny, 4);
    ascii(tiny, "mdat");
    write_bytes(path, tiny);
    CHECK_THROWS_WITH_AS(scan_boxes(path), doctest::Contains("declares size 4 below its header"),
                         Error);

    std::vector<std::uint8_t> shortlarge;
    u32be(shortlarge, 1);
    ascii(shortlarge, "mdat");
    write_bytes(path, shortlarge);
    CHECK_THROWS_WITH_AS(scan_boxes(path), doctest::Contains("truncated largesize"), Error);

    std::vector<std::uint8_t> small_uuid = box("uuid", {1, 2, 3});
    write_bytes(path, small_uuid);
    CHECK_THROWS_WITH_AS(scan_boxes(path), doctest::Contains("too small for a usertype"), Error);

    CHECK_THROWS_WITH_AS(scan_boxes(dir / "absent.mp4"), doctest::Contains("cannot open"), Error);
  }
}

TEST_SUITE("container embedding") {
  TEST_CASE("appends exactly one saliency box and keeps prior bytes intact") {
    TempDir dir;
    const auto path = dir / "clip.mp4";
    const std::string payload = "sample mdat payload";
    write_stub_container(path, std::span(reinterpret_cast<const std::uint8_t*>(payload.data()),
                                         payload.size()));
    const auto original = vtest::slurp(path);

    PerceptualMetadata m;
    m.rows = 2;
    m.cols = 2;
    m.weights = {255, 0, 128, 64};
    embed_in_container(path, encode_metadata(m));

    const auto embedded = vtest::slurp(path);
    REQUIRE(embedded.size() > original.size());
    CHECK(std::equal(original.begin(), original.end(), embedded.begin()));

    const auto boxes = scan_boxes(path);
    REQUIRE(boxes.size() == 3);
    CHECK(boxes.back().is_saliency_box());
    CHECK(boxes.back().header_size == 32);  // largesize uuid: 16 + usertype

    const auto extracted = extract_from_container(path);
    REQUIRE(extracted.has_value());
    CHECK(decode_metadata(*extracted) == m);
  }

  TEST_CASE("re-embedding replaces the box instead of stacking") {
    TempDir dir;
    const auto path = dir / "clip.mp4";
    write_stub_container(path, {});
    const auto original = vtest::slurp(path);

    PerceptualMetadata first;
    first.rows = first.cols = 1;
    first.weights = {9};
    PerceptualMetadata second;
    second.rows = 1;
    second.cols = 3;
    second.weights = {1, 2, 3};
    embed_in_container(path, encode_metadata(first));
    embed_in_container(path, encode_metadata(second));

    int saliency_boxes = 0;
    for (const auto& b : scan_boxes(path)) saliency_boxes += b.is_saliency_box() ? 1 : 0;
    CHECK(saliency_boxes == 1);
    CHECK(decode_metadata(*extract_from_container(path)) == second);

    const auto embedded = vtest::slurp(path);
    CHECK(std::equal(original.begin(), original.end(), embedded.begin()));
  }

  TEST_CASE("copies foreign boxes bit-identically, largesize included") {
    TempDir dir;
    const auto path = dir / "clip.mp4";
    std::vector<std::uint8_t> file;
    append(file, box("ftyp", std::vector<std::uint8_t>(8, 1)));
    std::vector<std::uint8_t> foreign(16, 0xCD);
    foreign.push_back(42);
    append(file, box("uuid", foreign));                     // foreign usertype survives
    append(file, large_box("mdat", {5, 6, 7, 8, 9}));       // 64-bit size survives
    write_bytes(path, file);

    PerceptualMetadata m;
    m.rows = m.cols = 1;
    m.weights = {200};
    embed_in_container(path, encode_metadata(m));

    const auto embedded = vtest::slurp(path);
    REQUIRE(embedded.size() == file.size() + 32 + 9);  // uuid header + blob
    CHECK(std::equal(file.begin(), file.end(), embedded.begin()));
    CHECK(decode_metadata(*extract_from_container(path)) == m);
  }

  TEST_CASE("refuses open-ended containers and absent boxes read as nullopt") {
    TempDir dir;
    const auto path = dir / "open.mp4";
    std::vector<std::uint8_t> file;
    u32be(file, 0);
    ascii(file, "mdat");
    file.push_back(1);
    write_bytes(path, file);
    CHECK_THROWS_WITH_AS(embed_in_container(path, std::vector<std::uint8_t>{1, 2, 3}),
                         doctest::Contains("open-ended"), Error);

    write_stub_container(dir / "plain.mp4", {});
    CHECK_FALSE(extract_from_container(dir / "plain.mp4").has_value());
  }
}

TEST_SUITE("metadata sidecar") {
  TEST_CASE("round-trips and reports absence as nullopt") {
    TempDir dir;
    PerceptualMetadata m;
    m.rows = 3;
    m.cols = 2;
    m.weights = {0, 50, 100, 150, 200, 250};
    const auto bytes = encode_metadata(m);
    write_sidecar(dir / "seg.vgnt", bytes);
    const auto back = read_sidecar(dir / "seg.vgnt");
    REQUIRE(back.has_value());
    CHECK(*back == bytes);
    CHECK(decode_metadata(*back) == m);
    CHECK_FALSE(read_sidecar(dir / "missing.vgnt").has_value());
  }
}

TEST_SUITE("stub container") {
  TEST_CASE("is byte-exact and scannable") {
    TempDir dir;
    const auto path = dir / "stub.mp4";
    const std::string payload = "abc";
    write_stub_container(path, std::span(reinterpret_cast<const std::uint8_t*>(payload.data()),
                                         payload.size()));

    std::vector<std::uint8_t> want;
    u32be(want, 24);
    ascii(want, "ftypisom");
    u32be(want, 0);
    ascii(want, "isomiso2");
    u32be(want, 11);
    ascii(want, "mdatabc");
    CHECK(vtest::slurp(path) == want);

    const auto boxes = scan_boxes(path);
    REQUIRE(boxes.size() == 2);
    CHECK(std::string(boxes[0].type.begin(), boxes[0].type.end()) == "ftyp");
    CHECK(boxes[0].size == 24);
    CHECK(std::string(boxes[1].type.begin(), boxes[1].type.end()) == "mdat");
    CHECK(boxes[1].size == 11);
  }
}

TEST_SUITE("container probe") {
  std::vector<std::uint8_t> mvhd_v0(std::uint32_t timescale, std::uint32_t duration) {
    std::vector<std::uint8_t> body;
    u32be(body, 0);         // version 0 + flags
    u32be(body, 0);         // creation
    u32be(body, 0);         // modification
    u32be(body, timescale);
    u32be(body, duration);
    body.resize(body.size() + 80, 0);  // rate..next_track_id, irrelevant here
    return box("mvhd", body);
  }

  std::vector<std::uint8_t> mvhd_v1(std::uint32_t timescale, std::uint64_t duration) {
    std::vector<std::uint8_t> body;
    body.push_back(1);                 // version 1
    body.insert(body.end(), 3, 0);     // flags
    u64be(body, 0);                    // creation
    u64be(body, 0);                    // modification
    u32be(body, timescale);
    u64be(body, duration);
    body.resize(body.size() + 80, 0);
    return box("mvhd", body);
  }

  std::vector<std::uint8_t> tkhd(int version, int width, int height) {
    std::vector<std::uint8_t> body;
    body.push_back(static_cast<std::uint8_t>(version));
    body.insert(body.end(), 3, 0);                        // flags
    body.resize(body.size() + (version == 1 ? 32 : 20), 0);  // ids/durations
    body.resize(body.size() + 8 + 8 + 36, 0);             // reserved + matrix
    u32be(body, static_cast<std::uint32_t>(width) << 16);   // 16.16 fixed point
    u32be(body, static_cast<std::uint32_t>(height) << 16);
    return box("trak", box("tkhd", body));
  }

  TEST_CASE("reads version 0 headers") {
    TempDir dir;
    const auto path = dir / "v0.mp4";
    std::vector<std::uint8_t> moov_body = mvhd_v0(1000, 12500);
    append(moov_body, tkhd(0, 640, 360));
    std::vector<std::uint8_t> file = box("ftyp", std::vector<std::uint8_t>(16, 0));
    append(file, box("moov", moov_body));
    write_bytes(path, file);

    const ContainerVideoInfo info = probe_container_video(path);
    CHECK(info.duration_s == doctest::Approx(12.5));
    CHECK(info.width == 640);
    CHECK(info.height == 360);
  }

  TEST_CASE("reads version 1 headers and skips dimensionless tracks") {
    TempDir dir;
    const auto path = dir / "v1.mp4";
    std::vector<std::uint8_t> moov_body = mvhd_v1(90000, 315000);
    append(moov_body, tkhd(1, 0, 0));        // audio-like track: no pixels
    append(moov_body, tkhd(1, 1920, 1080));  // the video track
    std::vector<std::uint8_t> file = box("moov", moov_body);
    write_bytes(path, file);

    const ContainerVideoInfo info = probe_container_video(path);
    CHECK(info.duration_s == doctest::Approx(3.5));
    CHECK(info.width == 1920);
    CHECK(info.height == 1080);
  }

  TEST_CASE("rejects containers without presentation facts") {
    TempDir dir;
    write_stub_container(dir / "nomoov.mp4", {});
    CHECK_THROWS_WITH_AS(probe_container_video(dir / "nomoov.mp4"),
                         doctest::Contains("no movie header"), Error);

    write_bytes(dir / "nomvhd.mp4", box("moov", box("free", {})));
    CHECK_THROWS_WITH_AS(probe_container_video(dir / "nomvhd.mp4"),
                         doctest::Contains("moov has no mvhd"), Error);

    std::vector<std::uint8_t> moov_body = mvhd_v0(1000, 1000);
    write_bytes(dir / "notrak.mp4", box("moov", moov_body));
    CHECK_THROWS_WITH_AS(probe_container_video(dir / "notrak.mp4"),
                         doctest::Contains("no video track"), Error);

    std::vector<std::uint8_t> zerots = mvhd_v0(0, 1000);
    append(zerots, tkhd(0, 16, 16));
    write_bytes(dir / "zerots.mp4", box("moov", zerots));
    CHECK_THROWS_WITH_AS(probe_container_video(dir / "zerots.mp4"),
                         doctest::Contains("timescale is zero"), Error);
  }
}
