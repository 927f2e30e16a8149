// Command-line front-end for the perceptual compression toolkit. Every
// subcommand reports line-oriented `key=value` pairs (or the same fields as
// a JSON object with --json) and exits 0 on success, 1 on domain errors,
// 2 on usage errors.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vignette/config.hpp"
#include "vignette/cost.hpp"
#include "vignette/error.hpp"
#include "vignette/metadata.hpp"
#include "vignette/metrics.hpp"
#include "vignette/pgm.hpp"
#include "vignette/search.hpp"
#include "vignette/storage.hpp"
#include "vignette/y4m.hpp"

namespace fs = std::filesystem;

namespace {

// Ordered key/value report; the JSON form carries exactly the text fields
// with native number/bool types.
class Report {
 public:
  void add(std::string key, std::string value) { rows_.emplace_back(std::move(key), std::move(value)); }
  void add(std::string key, const char* value) { add(std::move(key), std::string(value)); }
  void add(std::string key, std::int64_t value) { rows_.emplace_back(std::move(key), value); }
  void add(std::string key, int value) { add(std::move(key), static_cast<std::int64_t>(value)); }
  void add(std::string key, double value) { rows_.emplace_back(std::move(key), value); }
  void add(std::string key, bool value) { rows_.emplace_back(std::move(key), value); }

  void print(bool as_json) const {
    if (as_json) {
      nlohmann::ordered_json doc;
      for (const auto& [key, value] : rows_) {
        std::visit([&](const auto& v) { doc[key] = v; }, value);
      }
      std::cout << doc.dump(2) << "\n";
      return;
    }
    for (const auto& [key, value] : rows_) {
      std::visit(
          [&](const auto& v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, bool>) {
              std::cout << key << "=" << (v ? "true" : "false") << "\n";
            } else {
              std::cout << fmt::format("{}={}\n", key, v);
            }
          },
          value);
    }
  }

 private:
  using Value = std::variant<std::string, std::int64_t, double, bool>;
  std::vector<std::pair<std::string, Value>> rows_;
};

std::string grid_label(const vignette::TileGrid& grid) {
  return fmt::format("{}x{}", grid.rows, grid.cols);
}

std::string join_weights(const std::vector<std::uint8_t>& weights) {
  std::string out;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(weights[i]);
  }
  return out;
}

struct GlobalArgs {
  fs::path library = "library";
  fs::path config_file;  // empty: <library>/vignette.toml when present
  bool json = false;
  int workers = 0;  // 0: config value, which itself defaults to all CPUs
};

vignette::ToolkitConfig effective_config(const GlobalArgs& args) {
  fs::path file = args.config_file;
  if (file.empty()) {
    file = args.library / "vignette.toml";
  } else {
    vignette::require(fs::exists(file), fmt::format("config file {} not found", file.string()));
  }
  vignette::ToolkitConfig config = vignette::load_config(file);
  vignette::apply_env_overrides(config);
  if (args.workers > 0) config.encoder.worker_limit = args.workers;
  return config;
}

vignette::Library open_library(const GlobalArgs& args) {
  return vignette::Library(args.library, effective_config(args));
}

void report_video(Report& report, const vignette::VideoRecord& video) {
  report.add("id", video.id);
  report.add("state", to_string(video.state));
  report.add("source_kind", video.source_kind);
  report.add("width", video.width);
  report.add("height", video.height);
  report.add("duration_s", video.duration_s);
  report.add("segments", static_cast<std::int64_t>(video.segments.size()));
  for (const vignette::SegmentRecord& seg : video.segments) {
    const std::string prefix = fmt::format("segment.{}", seg.index);
    report.add(prefix + ".duration_s", seg.duration_s);
    report.add(prefix + ".size_bytes", seg.size_bytes);
    if (seg.target_kbps > 0) {
      report.add(prefix + ".target_kbps", seg.target_kbps);
    } else {
      report.add(prefix + ".source_kbps", seg.source_kbps);
    }
    if (seg.grid.has_value()) report.add(prefix + ".grid", grid_label(*seg.grid));
  }
  report.add("total_size_bytes", video.total_size_bytes());
}

double parse_number(const std::string& text, const std::string& what) {
  double value = 0.0;
  const auto [ptr, err] = std::from_chars(text.data(), text.data() + text.size(), value);
  vignette::require(err == std::errc{} && ptr == text.data() + text.size(),
                    fmt::format("{} '{}' is not a number", what, text));
  return value;
}

void run_inspect(const fs::path& file, Report& report) {
  vignette::require(fs::exists(file), fmt::format("{} not found", file.string()));
  std::optional<std::vector<std::uint8_t>> payload;
  if (file.extension() == ".vgnt") {
    payload = vignette::read_sidecar(file);
  } else {
    payload = vignette::extract_from_container(file);
  }
  report.add("file", file.string());
  if (!payload.has_value()) {
    report.add("saliency", "absent");
    return;
  }
  const vignette::PerceptualMetadata meta = vignette::decode_metadata(*payload);
  report.add("saliency", "present");
  report.add("bytes", static_cast<std::int64_t>(payload->size()));
  report.add("version", static_cast<std::int64_t>(meta.version));
  report.add("rows", meta.rows);
  report.add("cols", meta.cols);
  report.add("weights", join_weights(meta.weights));
}

void run_metrics(const fs::path& ref, const fs::path& out, const fs::path& saliency,
                 Report& report) {
  const vignette::Y4mVideo a = vignette::read_y4m(ref);
  const vignette::Y4mVideo b = vignette::read_y4m(out);
  report.add("ref", ref.string());
  report.add("out", out.string());
  report.add("frames", static_cast<std::int64_t>(a.luma.size()));
  report.add("psnr_db", vignette::psnr(a.luma, b.luma));
  if (!saliency.empty()) {
    const vignette::SaliencyMap map = vignette::read_pgm(saliency);
    report.add("ewpsnr_db", vignette::ewpsnr(a.luma, b.luma, {map}));
  }
  const auto ref_bytes = static_cast<std::int64_t>(fs::file_size(ref));
  const auto out_bytes = static_cast<std::int64_t>(fs::file_size(out));
  report.add("ref_bytes", ref_bytes);
  report.add("out_bytes", out_bytes);
  report.add("bitrate_reduction", vignette::bitrate_reduction(ref_bytes, out_bytes));
}

void report_search(Report& report, const vignette::SearchResult& result) {
  report.add("mode", to_string(result.mode));
  report.add("chosen", grid_label(result.chosen.grid));
  report.add("candidates", static_cast<std::int64_t>(result.per_config.size()));
  for (std::size_t i = 0; i < result.per_config.size(); ++i) {
    const vignette::ConfigScore& score = result.per_config[i];
    const std::string prefix = fmt::format("config.{}", i);
    report.add(prefix + ".grid", grid_label(score.grid));
    if (result.mode == vignette::SearchMode::heuristic) {
      report.add(prefix + ".deviation", score.deviation);
    } else {
      report.add(prefix + ".size_bytes", score.size_bytes);
      report.add(prefix + ".psnr_db", score.psnr_db);
      report.add(prefix + ".ewpsnr_db", score.ewpsnr_db);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  GlobalArgs args;
  Report report;

  CLI::App app{"Saliency-tiled video compression toolkit and library manager"};
  app.require_subcommand(1);
  app.add_option("--library", args.library, "Library root directory")
      ->default_str("library");
  app.add_option("--config", args.config_file,
                 "Config file (default: <library>/vignette.toml)");
  app.add_flag("--json", args.json, "Emit the report as a JSON object");
  app.add_option("--workers", args.workers,
                 "Parallel encode jobs (default: all logical CPUs)");

  // ingest
  fs::path ingest_source;
  std::string ingest_id;
  int ingest_segment_len = 0;
  CLI::App* ingest = app.add_subcommand("ingest", "Split a video into library segments");
  ingest->add_option("source", ingest_source, "Video file (y4m or mp4)")->required();
  ingest->add_option("--id", ingest_id, "Video id (default: source filename stem)");
  ingest->add_option("--segment-len", ingest_segment_len, "Segment length in seconds");
  ingest->callback([&] {
    report_video(report, open_library(args).ingest(ingest_source, ingest_id,
                                                   ingest_segment_len));
  });

  // transcode
  std::string transcode_id;
  int transcode_target = 0;
  CLI::App* transcode =
      app.add_subcommand("transcode", "Conventional single-quality transcode");
  transcode->add_option("id", transcode_id, "Video id")->required();
  transcode->add_option("--target-kbps", transcode_target, "Target bitrate")->required();
  transcode->callback([&] {
    report_video(report, open_library(args).transcode(transcode_id, transcode_target));
  });

  // vtranscode
  std::string vt_id;
  vignette::VignetteOptions vt_opts;
  std::string vt_mode;
  CLI::App* vtranscode =
      app.add_subcommand("vtranscode", "Perceptual tiled transcode with saliency metadata");
  vtranscode->add_option("id", vt_id, "Video id")->required();
  vtranscode->add_option("--target-kbps", vt_opts.target_kbps,
                         "Target bitrate (default: each segment's source bitrate)");
  vtranscode->add_option("--mode", vt_mode, "heuristic or exhaustive (default: config)");
  vtranscode->add_option("--saliency", vt_opts.saliency,
                         "'builtin' or a directory of per-segment maps (seg_<i>.pgm)");
  vtranscode->callback([&] {
    if (!vt_mode.empty()) vt_opts.mode = vignette::parse_search_mode(vt_mode);
    report_video(report, open_library(args).vignette_transcode(vt_id, vt_opts));
  });

  // squeeze
  std::string squeeze_id;
  int squeeze_target = 0;
  CLI::App* squeeze = app.add_subcommand("squeeze", "Re-encode at a strictly lower target");
  squeeze->add_option("id", squeeze_id, "Video id")->required();
  squeeze->add_option("--target-kbps", squeeze_target, "New target bitrate")->required();
  squeeze->callback([&] {
    report_video(report, open_library(args).vignette_squeeze(squeeze_id, squeeze_target));
  });

  // update
  std::string update_id;
  fs::path update_fixation;
  double update_alpha = 0.5;
  CLI::App* update = app.add_subcommand("update", "Blend eye-tracker fixations and re-encode");
  update->add_option("id", update_id, "Video id")->required();
  update->add_option("--fixation", update_fixation, "Fixation map (PGM)")->required();
  update->add_option("--alpha", update_alpha, "Weight of the stored map [0,1]");
  update->callback([&] {
    report_video(report,
                 open_library(args).vignette_update(update_id, update_fixation, update_alpha));
  });

  // inspect
  fs::path inspect_file;
  CLI::App* inspect = app.add_subcommand("inspect", "Dump a file's saliency metadata");
  inspect->add_option("file", inspect_file, "Container (.mp4) or sidecar (.vgnt)")->required();
  inspect->callback([&] { run_inspect(inspect_file, report); });

  // search
  std::string search_id;
  int search_segment = 0;
  std::string search_mode = "heuristic";
  int search_target = 0;
  CLI::App* search = app.add_subcommand("search", "Report the tile-configuration search");
  search->add_option("id", search_id, "Video id")->required();
  search->add_option("--segment", search_segment, "Segment index (default 0)");
  search->add_option("--mode", search_mode, "heuristic or exhaustive");
  search->add_option("--target-kbps", search_target, "Target bitrate for exhaustive scoring");
  search->callback([&] {
    vignette::Library lib = open_library(args);
    report.add("id", search_id);
    report.add("segment", search_segment);
    report_search(report, lib.search_segment(search_id, search_segment,
                                             vignette::parse_search_mode(search_mode),
                                             search_target));
  });

  // metrics
  fs::path metrics_ref, metrics_out, metrics_saliency;
  CLI::App* metrics = app.add_subcommand("metrics", "PSNR / eye-weighted PSNR between videos");
  metrics->add_option("--ref", metrics_ref, "Reference video (y4m)")->required();
  metrics->add_option("--out", metrics_out, "Processed video (y4m)")->required();
  metrics->add_option("--saliency", metrics_saliency, "Saliency map (PGM) for EWPSNR");
  metrics->callback([&] { run_metrics(metrics_ref, metrics_out, metrics_saliency, report); });

  // cost breakeven
  CLI::App* cost = app.add_subcommand("cost", "Data-center cost model");
  cost->require_subcommand(1);
  std::vector<std::string> cost_params;
  fs::path cost_sweep;
  int cost_sweep_steps = 50;
  CLI::App* breakeven = cost->add_subcommand("breakeven", "Views where the pipelines cost the same");
  breakeven->add_option("--param", cost_params, "Override, e.g. --param horizon_months=12");
  breakeven->add_option("--sweep", cost_sweep, "Write a views,baseline,vignette CSV here");
  breakeven->add_option("--sweep-steps", cost_sweep_steps, "Rows in the sweep CSV");
  breakeven->callback([&] {
    vignette::CostParams params;
    for (const std::string& entry : cost_params) {
      const auto eq = entry.find('=');
      vignette::require(eq != std::string::npos,
                        fmt::format("--param needs key=value, got '{}'", entry));
      vignette::set_param(params, entry.substr(0, eq),
                          parse_number(entry.substr(eq + 1), "--param value"));
    }
    for (const auto& [key, value] : vignette::param_table(params)) {
      report.add("param." + key, value);
    }
    const double exact = vignette::breakeven_views_exact(params);
    report.add("breakeven_views", vignette::breakeven_views(params));
    report.add("breakeven_views_exact", exact);
    if (!cost_sweep.empty()) {
      const double hi = exact > 0 ? 2.0 * exact : 1e6;
      std::ofstream out(cost_sweep, std::ios::binary);
      vignette::require(out.good(), fmt::format("cannot write {}", cost_sweep.string()));
      out << vignette::sweep_csv(params, 0.0, hi, cost_sweep_steps);
      report.add("sweep_file", cost_sweep.string());
    }
  });

  // policy apply
  CLI::App* policy = app.add_subcommand("policy", "Compression trigger policies");
  policy->require_subcommand(1);
  CLI::App* apply = policy->add_subcommand("apply", "Plan actions from the config's policies");
  apply->callback([&] {
    const vignette::ToolkitConfig config = effective_config(args);
    vignette::Library lib(args.library, config);
    const std::vector<vignette::ScheduledAction> actions =
        vignette::apply_policies(lib.snapshot(), config.policies);
    report.add("policies", static_cast<std::int64_t>(config.policies.size()));
    report.add("actions", static_cast<std::int64_t>(actions.size()));
    for (std::size_t i = 0; i < actions.size(); ++i) {
      const std::string prefix = fmt::format("action.{}", i);
      report.add(prefix + ".video", actions[i].video_id);
      report.add(prefix + ".action", to_string(actions[i].action));
      if (actions[i].action == vignette::PolicyAction::vignette_squeeze) {
        report.add(prefix + ".target_kbps", actions[i].squeeze_target_kbps);
      }
      report.add(prefix + ".reason", actions[i].reason);
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "vignette: " << e.what() << "\n";
    return 2;
  } catch (const vignette::Error& e) {
    std::cerr << "vignette: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "vignette: " << e.what() << "\n";
    return 1;
  }

  report.print(args.json);
  return 0;
}
