// Microbenchmarks for the compute-bound paths: saliency generation and
// aggregation, tile weighting, the bitrate map, the mock rate model, quality
// metrics, and both ends of the configuration search. All inputs are
// deterministic so runs are comparable.

#include <cstdint>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "vignette/encoder.hpp"
#include "vignette/metadata.hpp"
#include "vignette/metrics.hpp"
#include "vignette/motion.hpp"
#include "vignette/saliency.hpp"
#include "vignette/search.hpp"
#include "vignette/tile.hpp"

using namespace vignette;

namespace {

GrayFrame noise_frame(int w, int h, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  GrayFrame frame(w, h);
  for (auto& v : frame.values) v = static_cast<std::uint8_t>(byte(rng));
  return frame;
}

std::vector<MotionField> lattice_motion(int w, int h) {
  MotionField field;
  field.frame_index = 1;
  field.frame_w = w;
  field.frame_h = h;
  for (int y = 8; y < h; y += 32)
    for (int x = 8; x < w; x += 32) field.entries.push_back({x, y, x < w / 2 ? 6 : -4, 1});
  return {field};
}

void bm_metadata_round_trip(benchmark::State& state) {
  PerceptualMetadata meta;
  meta.rows = 7;
  meta.cols = 7;
  meta.weights.assign(49, 0);
  for (int i = 0; i < 49; ++i) meta.weights[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(5 * i);
  for (auto _ : state) {
    const auto bytes = encode_metadata(meta);
    benchmark::DoNotOptimize(decode_metadata(bytes));
  }
}
BENCHMARK(bm_metadata_round_trip);

void bm_builtin_saliency(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  const int h = w * 9 / 16;
  const std::vector<GrayFrame> frames = {noise_frame(w, h, 1), noise_frame(w, h, 2),
                                         noise_frame(w, h, 3)};
  for (auto _ : state) benchmark::DoNotOptimize(generate_builtin(frames));
  state.SetItemsProcessed(state.iterations() * 3);
}
BENCHMARK(bm_builtin_saliency)->Arg(640)->Arg(1280);

void bm_aggregate(benchmark::State& state) {
  std::vector<GrayFrame> frames;
  for (std::uint32_t f = 0; f < 8; ++f) frames.push_back(noise_frame(1280, 720, f));
  const FrameSaliencySequence seq = make_sequence(std::move(frames));
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(seq));
}
BENCHMARK(bm_aggregate);

void bm_tile_weights(benchmark::State& state) {
  const SaliencyMap map = noise_frame(1920, 1080, 7);
  const TileGrid grid = make_uniform_grid(1920, 1080, 5, 5);
  for (auto _ : state) benchmark::DoNotOptimize(tile_weights(map, grid));
}
BENCHMARK(bm_tile_weights);

void bm_map_bitrates(benchmark::State& state) {
  const TileGrid grid = make_uniform_grid(1920, 1080, 5, 5);
  std::vector<std::uint8_t> weights(25);
  for (int i = 0; i < 25; ++i) weights[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(10 * i);
  for (auto _ : state) benchmark::DoNotOptimize(map_bitrates(grid, weights, 6000, 0.10));
}
BENCHMARK(bm_map_bitrates);

void bm_mock_encode(benchmark::State& state) {
  const TileGrid grid = make_uniform_grid(1920, 1080, 7, 7);
  std::vector<std::uint8_t> weights(49);
  for (int i = 0; i < 49; ++i) weights[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(5 * i);
  const TileQualityMap quality = map_bitrates(grid, weights, 6000, 0.10);
  const std::vector<MotionField> motion = lattice_motion(1920, 1080);
  const std::vector<double> complexity = motion_complexity(motion, grid);
  const std::int64_t crossings = count_boundary_crossings(motion, grid);
  for (auto _ : state) benchmark::DoNotOptimize(mock_encode(quality, 4.0, complexity, crossings));
}
BENCHMARK(bm_mock_encode);

void bm_psnr(benchmark::State& state) {
  const std::vector<GrayFrame> ref = {noise_frame(1280, 720, 11)};
  std::vector<GrayFrame> test = ref;
  test[0].values[0] ^= 1;
  for (auto _ : state) benchmark::DoNotOptimize(psnr(ref, test));
  state.SetBytesProcessed(state.iterations() * 1280 * 720);
}
BENCHMARK(bm_psnr);

void bm_ewpsnr(benchmark::State& state) {
  const std::vector<GrayFrame> ref = {noise_frame(1280, 720, 11)};
  std::vector<GrayFrame> test = ref;
  test[0].values[0] ^= 1;
  const std::vector<GrayFrame> maps = {noise_frame(1280, 720, 12)};
  for (auto _ : state) benchmark::DoNotOptimize(ewpsnr(ref, test, maps));
  state.SetBytesProcessed(state.iterations() * 1280 * 720);
}
BENCHMARK(bm_ewpsnr);

void bm_motion_deviation(benchmark::State& state) {
  const std::vector<MotionField> motion = lattice_motion(1920, 1080);
  const TileGrid grid = make_uniform_grid(1920, 1080, 5, 5);
  for (auto _ : state) benchmark::DoNotOptimize(motion_deviation(motion, grid));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(motion[0].entries.size()));
}
BENCHMARK(bm_motion_deviation);

void bm_heuristic_search(benchmark::State& state) {
  const std::vector<MotionField> motion = lattice_motion(1920, 1080);
  const GridEnumeration enumeration = enumerate_configs(1920, 1080);
  for (auto _ : state) benchmark::DoNotOptimize(heuristic_search(motion, enumeration.grids));
}
BENCHMARK(bm_heuristic_search);

void bm_enumerate_configs(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_configs(1920, 1080));
}
BENCHMARK(bm_enumerate_configs);

}  // namespace

BENCHMARK_MAIN();
