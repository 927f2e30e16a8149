// Drives the installed `vignette` binary as a subprocess and checks exit
// codes, the key=value report contract, and the --json mirror. The binary
// path arrives via the VIGNETTE_CLI_PATH compile definition.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "test_support.hpp"
#include "vignette/cost.hpp"
#include "vignette/metadata.hpp"
#include "vignette/motion.hpp"
#include "vignette/pgm.hpp"
#include "vignette/storage.hpp"

using namespace vignette;
using doctest::Approx;
using vtest::TempDir;

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string text_of(const std::vector<std::uint8_t>& bytes) {
  return {bytes.begin(), bytes.end()};
}

/// Runs the CLI through the shell, capturing stdout/stderr. `env` is a shell
/// variable-assignment prefix such as "VIGNETTE_ENCODER='...'".
CliResult run_cli(const TempDir& dir, const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const fs::path out_file = dir / ("cli_out_" + std::to_string(counter) + ".txt");
  const fs::path err_file = dir / ("cli_err_" + std::to_string(counter) + ".txt");
  ++counter;

  ::unsetenv("VIGNETTE_ENCODER");  // only the explicit prefix may set it
  std::string command;
  if (!env.empty()) command += env + " ";
  command += std::string("\"") + VIGNETTE_CLI_PATH + "\" " + args;
  command += " > \"" + out_file.string() + "\" 2> \"" + err_file.string() + "\"";

  const int raw = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = text_of(vtest::slurp(out_file));
  result.err = text_of(vtest::slurp(err_file));
  return result;
}

std::vector<std::pair<std::string, std::string>> kv_rows(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> rows;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    REQUIRE_MESSAGE(eq != std::string::npos, "not a key=value row: ", line);
    rows.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return rows;
}

bool has_field(const std::string& text, const std::string& key) {
  for (const auto& [k, v] : kv_rows(text)) {
    if (k == key) return true;
  }
  return false;
}

std::string field(const std::string& text, const std::string& key) {
  for (const auto& [k, v] : kv_rows(text)) {
    if (k == key) return v;
  }
  FAIL("missing key ", key, " in:\n", text);
  return {};
}

std::string join_weights(const std::vector<std::uint8_t>& weights) {
  std::string out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(weights[i]);
  }
  return out;
}

fs::path write_clip(const TempDir& dir, const std::string& name, int w, int h, int frames) {
  const fs::path path = dir / name;
  vtest::write_y4m_420(path, vtest::moving_square_frames(w, h, frames));
  return path;
}

/// Vector magnitudes constant inside each 64-pixel band of a 512x192 frame,
/// so the heuristic uniquely prefers the 3x2 candidate.
void write_banded_motion(const fs::path& csv) {
  MotionField f;
  f.frame_index = 1;
  f.frame_w = 512;
  f.frame_h = 192;
  for (const int x : {64, 320}) {
    for (int i = 0; i < 6; ++i) {
      f.entries.push_back({x, 32 * i, 2 + 4 * (i / 2), 0});
    }
  }
  write_motion_dump(csv, {f});
}

/// ingest + banded motion + vtranscode at 500 kbps; returns the library root.
fs::path perceptual_library(const TempDir& dir, const std::string& name) {
  const fs::path lib = dir / name;
  const fs::path clip = write_clip(dir, name + "_clip.y4m", 512, 192, 6);
  CliResult r = run_cli(dir, "--library \"" + lib.string() + "\" ingest \"" + clip.string() +
                                 "\" --id clip --segment-len 1");
  REQUIRE(r.exit_code == 0);
  write_banded_motion(lib / "clip" / "seg_0.mv.csv");
  r = run_cli(dir, "--library \"" + lib.string() + "\" vtranscode clip --target-kbps 500");
  REQUIRE_MESSAGE(r.exit_code == 0, r.err);
  return lib;
}

}  // namespace

TEST_SUITE("cli basics") {
  TEST_CASE("usage errors exit 2 and never print a report") {
    TempDir dir;
    const CliResult none = run_cli(dir, "");
    CHECK(none.exit_code == 2);
    CHECK(none.err.starts_with("vignette: "));
    CHECK(none.out.empty());

    CHECK(run_cli(dir, "bogus").exit_code == 2);
    CHECK(run_cli(dir, "transcode clip").exit_code == 2);  // missing --target-kbps
  }

  TEST_CASE("help exits 0") {
    TempDir dir;
    const CliResult help = run_cli(dir, "--help");
    CHECK(help.exit_code == 0);
    CHECK(help.out.find("Saliency-tiled video compression toolkit") != std::string::npos);
  }

  TEST_CASE("domain errors exit 1 with the vignette prefix") {
    TempDir dir;
    const fs::path lib = dir / "lib";
    const CliResult missing =
        run_cli(dir, "--library \"" + lib.string() + "\" transcode nope --target-kbps 100");
    CHECK(missing.exit_code == 1);
    CHECK(missing.err == "vignette: video 'nope' not found\n");
    CHECK(missing.out.empty());

    const CliResult bad_file = run_cli(dir, "inspect \"" + (dir / "gone.mp4").string() + "\"");
    CHECK(bad_file.exit_code == 1);
    CHECK(bad_file.err.find("not found") != std::string::npos);
  }
}

TEST_SUITE("cli pipeline") {
  TEST_CASE("ingest, vtranscode, inspect, squeeze, and transcode flow end-to-end") {
    TempDir dir;
    const fs::path lib = dir / "lib";
    const fs::path clip = write_clip(dir, "clip.y4m", 512, 192, 6);

    const CliResult ingest = run_cli(
        dir, "--library \"" + lib.string() + "\" ingest \"" + clip.string() +
                 "\" --segment-len 1");
    REQUIRE_MESSAGE(ingest.exit_code == 0, ingest.err);
    CHECK(field(ingest.out, "id") == "clip");
    CHECK(field(ingest.out, "state") == "baseline");
    CHECK(field(ingest.out, "source_kind") == "y4m");
    CHECK(field(ingest.out, "width") == "512");
    CHECK(field(ingest.out, "height") == "192");
    CHECK(field(ingest.out, "segments") == "1");
    CHECK(field(ingest.out, "segment.0.duration_s") == "0.25");
    CHECK(has_field(ingest.out, "segment.0.source_kbps"));
    CHECK(!has_field(ingest.out, "segment.0.target_kbps"));
    CHECK(!has_field(ingest.out, "segment.0.grid"));

    write_banded_motion(lib / "clip" / "seg_0.mv.csv");
    const CliResult vt =
        run_cli(dir, "--library \"" + lib.string() + "\" vtranscode clip --target-kbps 500");
    REQUIRE_MESSAGE(vt.exit_code == 0, vt.err);
    CHECK(field(vt.out, "state") == "vignette");
    CHECK(field(vt.out, "segment.0.grid") == "3x2");
    CHECK(field(vt.out, "segment.0.target_kbps") == "500");
    const auto size_500 = std::stoll(field(vt.out, "segment.0.size_bytes"));
    CHECK(size_500 > 0);

    const std::vector<std::uint8_t> weights =
        load_manifest(lib / "manifest.json").find("clip")->segments[0].weights;
    const CliResult inspect =
        run_cli(dir, "inspect \"" + (lib / "clip" / "seg_0.mp4").string() + "\"");
    REQUIRE(inspect.exit_code == 0);
    CHECK(field(inspect.out, "saliency") == "present");
    CHECK(field(inspect.out, "version") == "1");
    CHECK(field(inspect.out, "rows") == "3");
    CHECK(field(inspect.out, "cols") == "2");
    CHECK(field(inspect.out, "weights") == join_weights(weights));

    const CliResult up = run_cli(dir, "--library \"" + lib.string() + "\" squeeze clip "
                                      "--target-kbps 600");
    CHECK(up.exit_code == 1);
    CHECK(up.err.find("not below the current 500 kbps") != std::string::npos);

    const CliResult squeeze =
        run_cli(dir, "--library \"" + lib.string() + "\" squeeze clip --target-kbps 300");
    REQUIRE_MESSAGE(squeeze.exit_code == 0, squeeze.err);
    CHECK(field(squeeze.out, "state") == "vignette");
    CHECK(field(squeeze.out, "segment.0.grid") == "3x2");
    CHECK(field(squeeze.out, "segment.0.target_kbps") == "300");
    CHECK(std::stoll(field(squeeze.out, "segment.0.size_bytes")) < size_500);

    const CliResult flat =
        run_cli(dir, "--library \"" + lib.string() + "\" transcode clip --target-kbps 250");
    REQUIRE_MESSAGE(flat.exit_code == 0, flat.err);
    CHECK(field(flat.out, "state") == "baseline");
    CHECK(!has_field(flat.out, "segment.0.grid"));

    const CliResult bare =
        run_cli(dir, "inspect \"" + (lib / "clip" / "seg_0.mp4").string() + "\"");
    REQUIRE(bare.exit_code == 0);
    CHECK(field(bare.out, "saliency") == "absent");
  }

  TEST_CASE("identical inputs produce byte-identical artifacts") {
    TempDir dir;
    const fs::path lib_a = perceptual_library(dir, "a");
    const fs::path lib_b = perceptual_library(dir, "b");
    CHECK(vtest::slurp(lib_a / "clip" / "seg_0.mp4") ==
          vtest::slurp(lib_b / "clip" / "seg_0.mp4"));

    const std::string inspect_args = "inspect \"" + (lib_a / "clip" / "seg_0.mp4").string() + "\"";
    const CliResult first = run_cli(dir, inspect_args);
    const CliResult second = run_cli(dir, inspect_args);
    CHECK(first.exit_code == 0);
    CHECK(first.out == second.out);
  }

  TEST_CASE("update blends fixations through the cli") {
    TempDir dir;
    const fs::path lib = perceptual_library(dir, "lib");
    write_pgm(dir / "fix.pgm",
              vtest::painted_frame(512, 192, [](int x, int) { return x < 256 ? 255 : 0; }));

    const CliResult update =
        run_cli(dir, "--library \"" + lib.string() + "\" update clip --fixation \"" +
                         (dir / "fix.pgm").string() + "\" --alpha 0.25");
    REQUIRE_MESSAGE(update.exit_code == 0, update.err);
    CHECK(field(update.out, "state") == "vignette");
    CHECK(field(update.out, "segment.0.target_kbps") == "500");
  }

  TEST_CASE("the search subcommand reports candidates") {
    TempDir dir;
    const fs::path lib = dir / "lib";
    const fs::path clip = write_clip(dir, "clip.y4m", 512, 192, 6);
    REQUIRE(run_cli(dir, "--library \"" + lib.string() + "\" ingest \"" + clip.string() +
                             "\" --segment-len 1")
                .exit_code == 0);
    write_banded_motion(lib / "clip" / "seg_0.mv.csv");

    const CliResult heuristic = run_cli(dir, "--library \"" + lib.string() + "\" search clip");
    REQUIRE_MESSAGE(heuristic.exit_code == 0, heuristic.err);
    CHECK(field(heuristic.out, "id") == "clip");
    CHECK(field(heuristic.out, "segment") == "0");
    CHECK(field(heuristic.out, "mode") == "heuristic");
    CHECK(field(heuristic.out, "chosen") == "3x2");
    CHECK(field(heuristic.out, "candidates") == "2");
    CHECK(field(heuristic.out, "config.0.grid") == "2x2");
    CHECK(field(heuristic.out, "config.1.grid") == "3x2");
    CHECK(field(heuristic.out, "config.1.deviation") == "0");
    CHECK(std::stod(field(heuristic.out, "config.0.deviation")) > 0.0);

    const CliResult exhaustive = run_cli(
        dir, "--library \"" + lib.string() + "\" search clip --mode exhaustive "
             "--target-kbps 500");
    REQUIRE_MESSAGE(exhaustive.exit_code == 0, exhaustive.err);
    CHECK(field(exhaustive.out, "mode") == "exhaustive");
    CHECK(std::stoll(field(exhaustive.out, "config.0.size_bytes")) > 0);
    CHECK(has_field(exhaustive.out, "config.1.ewpsnr_db"));

    const CliResult bad =
        run_cli(dir, "--library \"" + lib.string() + "\" search clip --mode quick");
    CHECK(bad.exit_code == 1);
    CHECK(bad.err.find("unknown search mode 'quick'") != std::string::npos);
  }
}

TEST_SUITE("cli config and env") {
  TEST_CASE("configs are read from the library directory") {
    TempDir dir;
    const fs::path lib = dir / "lib";
    fs::create_directories(lib);
    vtest::spit(lib / "vignette.toml",
                "[[policy]]\n"
                "kind = \"popularity_decay\"\n"
                "threshold = 50\n"
                "action = \"vignette_transcode\"\n");

    const fs::path clip = write_clip(dir, "clip.y4m", 64, 64, 4);
    REQUIRE(run_cli(dir, "--library \"" + lib.string() + "\" ingest \"" + clip.string() +
                             "\" --segment-len 1")
                .exit_code == 0);

    const CliResult plan = run_cli(dir, "--library \"" + lib.string() + "\" policy apply");
    REQUIRE_MESSAGE(plan.exit_code == 0, plan.err);
    CHECK(field(plan.out, "policies") == "1");
    CHECK(field(plan.out, "actions") == "1");
    CHECK(field(plan.out, "action.0.video") == "clip");
    CHECK(field(plan.out, "action.0.action") == "vignette_transcode");
    CHECK(field(plan.out, "action.0.reason").find("popularity_decay") != std::string::npos);

    Library(lib).set_popularity("clip", 99);  // no longer below the threshold
    const CliResult quiet = run_cli(dir, "--library \"" + lib.string() + "\" policy apply");
    REQUIRE(quiet.exit_code == 0);
    CHECK(field(quiet.out, "actions") == "0");
  }

  TEST_CASE("an explicit --config wins and must exist") {
    TempDir dir;
    const fs::path lib = dir / "lib";
    const fs::path clip = write_clip(dir, "clip.y4m", 64, 64, 4);
    REQUIRE(run_cli(dir, "--library \"" + lib.string() + "\" ingest \"" + clip.string() +
                             "\" --segment-len 1")
                .exit_code == 0);

    vtest::spit(dir / "other.toml",
                "[[policy]]\n"
                "kind = \"popularity_decay\"\n"
                "threshold = 10\n"
                "action = \"vignette_transcode\"\n");
    const CliResult plan =
        run_cli(dir, "--library \"" + lib.string() + "\" --config \"" +
                         (dir / "other.toml").string() + "\" policy apply");
    REQUIRE_MESSAGE(plan.exit_code == 0, plan.err);
    CHECK(field(plan.out, "policies") == "1");

    const CliResult gone = run_cli(dir, "--library \"" + lib.string() + "\" --config \"" +
                                            (dir / "absent.toml").string() + "\" policy apply");
    CHECK(gone.exit_code == 1);
    CHECK(gone.err.find("not found") != std::string::npos);

    vtest::spit(lib / "vignette.toml", "nonsense\n");
    const CliResult broken = run_cli(dir, "--library \"" + lib.string() + "\" policy apply");
    CHECK(broken.exit_code == 1);
    CHECK(broken.err.find("expected 'key = value'") != std::string::npos);
  }

  TEST_CASE("the encoder environment override reaches every subcommand") {
    TempDir dir;
    const fs::path lib = dir / "lib";
    const fs::path clip = write_clip(dir, "clip.y4m", 64, 64, 4);

    const CliResult invalid =
        run_cli(dir, "--library \"" + lib.string() + "\" ingest \"" + clip.string() + "\"",
                "VIGNETTE_ENCODER='enc {input}'");
    CHECK(invalid.exit_code == 1);
    CHECK(invalid.err.find("is missing the {output} placeholder") != std::string::npos);

    REQUIRE(run_cli(dir, "--library \"" + lib.string() + "\" ingest \"" + clip.string() +
                             "\" --segment-len 1")
                .exit_code == 0);

    // A fake external encoder: copies a prepared stub container into place.
    // The trailing comment satisfies the placeholder contract.
    write_stub_container(dir / "stub.mp4", {});
    const std::string fake =
        "VIGNETTE_ENCODER='cp \"" + (dir / "stub.mp4").string() +
        "\" \"{output}\" # {input} {bitrate_kbps} {crop_x} {crop_y} {crop_w} {crop_h} "
        "{duration_s}'";
    const CliResult external = run_cli(
        dir, "--library \"" + lib.string() + "\" transcode clip --target-kbps 100", fake);
    REQUIRE_MESSAGE(external.exit_code == 0, external.err);
    // External encodes report real file sizes, not the mock prediction.
    CHECK(std::stoll(field(external.out, "segment.0.size_bytes")) ==
          static_cast<std::int64_t>(fs::file_size(dir / "stub.mp4")));
    CHECK(vtest::slurp(lib / "clip" / "seg_0.mp4") == vtest::slurp(dir / "stub.mp4"));
  }
}

TEST_SUITE("cli cost and metrics") {
  TEST_CASE("cost breakeven reports the documented defaults") {
    TempDir dir;
    const CliResult r = run_cli(dir, "cost breakeven");
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    CHECK(field(r.out, "breakeven_views") == "1861444445");
    CHECK(std::stod(field(r.out, "breakeven_views_exact")) ==
          Approx(1861444444.444444).epsilon(1e-9));
    CHECK(field(r.out, "param.num_videos") == "1000000");
    CHECK(field(r.out, "param.compressed_fraction") == "0.1");
    int params = 0;
    for (const auto& [key, value] : kv_rows(r.out)) {
      if (key.starts_with("param.")) ++params;
    }
    CHECK(params == 10);
  }

  TEST_CASE("cost parameters can be overridden") {
    TempDir dir;
    CostParams expected;
    set_param(expected, "horizon_months", 12);
    set_param(expected, "vignette_compute_multiplier", 4);

    const CliResult r = run_cli(
        dir, "cost breakeven --param horizon_months=12 --param vignette_compute_multiplier=4");
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    CHECK(std::stoll(field(r.out, "breakeven_views")) == breakeven_views(expected));
    CHECK(std::stod(field(r.out, "breakeven_views_exact")) ==
          Approx(breakeven_views_exact(expected)).epsilon(1e-9));

    CHECK(run_cli(dir, "cost breakeven --param snack=1").err.find(
              "unknown cost parameter 'snack'") != std::string::npos);
    CHECK(run_cli(dir, "cost breakeven --param horizon_months").err.find(
              "--param needs key=value") != std::string::npos);
    CHECK(run_cli(dir, "cost breakeven --param horizon_months=abc").err.find(
              "is not a number") != std::string::npos);
  }

  TEST_CASE("cost sweeps land in a CSV") {
    TempDir dir;
    const fs::path csv = dir / "sweep.csv";
    const CliResult r = run_cli(
        dir, "cost breakeven --sweep \"" + csv.string() + "\" --sweep-steps 5");
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    CHECK(field(r.out, "sweep_file") == csv.string());

    const std::string text = text_of(vtest::slurp(csv));
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      lines.push_back(text.substr(start, end - start));
      start = end + 1;
    }
    REQUIRE(lines.size() == 6);  // header + 5 rows
    CHECK(lines[0] == "views,baseline_cost,vignette_cost");
    CHECK(lines[1].starts_with("0,"));
  }

  TEST_CASE("metrics reports psnr, ewpsnr, and size deltas") {
    TempDir dir;
    std::vector<GrayFrame> ref_frames(2, vtest::constant_map(32, 32, 100));
    std::vector<GrayFrame> out_frames(2, vtest::constant_map(32, 32, 101));
    vtest::write_y4m_420(dir / "ref.y4m", ref_frames);
    vtest::write_y4m_420(dir / "out.y4m", out_frames);
    write_pgm(dir / "flat.pgm", vtest::constant_map(32, 32, 255));

    const CliResult r = run_cli(
        dir, "metrics --ref \"" + (dir / "ref.y4m").string() + "\" --out \"" +
                 (dir / "out.y4m").string() + "\" --saliency \"" + (dir / "flat.pgm").string() +
                 "\"");
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    CHECK(field(r.out, "frames") == "2");
    const double psnr_db = std::stod(field(r.out, "psnr_db"));
    CHECK(psnr_db == Approx(20.0 * std::log10(255.0)).epsilon(1e-12));
    CHECK(std::stod(field(r.out, "ewpsnr_db")) == Approx(psnr_db).epsilon(1e-9));
    CHECK(field(r.out, "bitrate_reduction") == "0");  // same container bytes

    const CliResult missing = run_cli(
        dir, "metrics --ref \"" + (dir / "gone.y4m").string() + "\" --out \"" +
                 (dir / "out.y4m").string() + "\"");
    CHECK(missing.exit_code == 1);
  }
}

TEST_SUITE("cli json") {
  TEST_CASE("json output mirrors the text rows in order") {
    TempDir dir;
    const fs::path lib = perceptual_library(dir, "lib");
    const std::string args = "inspect \"" + (lib / "clip" / "seg_0.mp4").string() + "\"";

    const CliResult text = run_cli(dir, args);
    const CliResult json = run_cli(dir, "--json " + args);
    REQUIRE(text.exit_code == 0);
    REQUIRE(json.exit_code == 0);

    const auto doc = nlohmann::ordered_json::parse(json.out);
    const auto rows = kv_rows(text.out);
    REQUIRE(doc.size() == rows.size());
    std::size_t i = 0;
    for (const auto& [key, value] : doc.items()) {
      CHECK(key == rows[i].first);
      ++i;
    }
    CHECK(doc["saliency"] == "present");
    CHECK(doc["rows"] == 3);
    CHECK(doc["cols"] == 2);
    CHECK(doc["weights"] == field(text.out, "weights"));
  }

  TEST_CASE("json numbers keep their native types") {
    TempDir dir;
    const CliResult r = run_cli(dir, "--json cost breakeven");
    REQUIRE_MESSAGE(r.exit_code == 0, r.err);
    const auto doc = nlohmann::ordered_json::parse(r.out);
    CHECK(doc["breakeven_views"].is_number_integer());
    CHECK(doc["breakeven_views"] == 1861444445);
    CHECK(doc["breakeven_views_exact"].is_number_float());
    CHECK(doc["breakeven_views_exact"].get<double>() ==
          Approx(1861444444.444444).epsilon(1e-9));
    CHECK(doc["param.compressed_fraction"] == 0.1);
  }
}
