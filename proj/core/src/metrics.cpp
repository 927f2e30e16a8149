#include "vignette/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "vignette/error.hpp"

namespace vignette {
namespace {

constexpr double kPeak = 255.0;

void check_pair(const std::vector<GrayFrame>& reference, const std::vector<GrayFrame>& test) {
  require(!reference.empty(), "need at least one frame");
  require(reference.size() == test.size(),
          fmt::format("reference has {} frames, test has {}", reference.size(), test.size()));
  for (std::size_t i = 0; i < reference.size(); ++i) {
    require(reference[i].same_shape(test[i]),
            fmt::format("frame {} shapes differ: {}x{} vs {}x{}", i, reference[i].width,
                        reference[i].height, test[i].width, test[i].height));
  }
}

double db_from_mse(double mse) {
  if (mse <= 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(kPeak * kPeak / mse));
}

}  // namespace

double psnr(const std::vector<GrayFrame>& reference, const std::vector<GrayFrame>& test) {
  check_pair(reference, test);
  double error_sum = 0.0;
  std::int64_t pixels = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const auto& a = reference[i].values;
    const auto& b = test[i].values;
    for (std::size_t p = 0; p < a.size(); ++p) {
      const double e = static_cast<double>(a[p]) - static_cast<double>(b[p]);
      error_sum += e * e;
    }
    pixels += reference[i].pixel_count();
  }
  return db_from_mse(error_sum / static_cast<double>(pixels));
}

double ewpsnr(const std::vector<GrayFrame>& reference, const std::vector<GrayFrame>& test,
              const std::vector<GrayFrame>& weight_maps) {
  check_pair(reference, test);
  require(weight_maps.size() == reference.size() || weight_maps.size() == 1,
          fmt::format("need 1 or {} weight maps, got {}", reference.size(), weight_maps.size()));
  double weighted_error = 0.0;
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const GrayFrame& map = weight_maps.size() == 1 ? weight_maps[0] : weight_maps[i];
    require(map.same_shape(reference[i]),
            fmt::format("weight map {} shape differs from frame {}",
                        weight_maps.size() == 1 ? 0 : i, i));
    const auto& a = reference[i].values;
    const auto& b = test[i].values;
    const auto& w = map.values;
    for (std::size_t p = 0; p < a.size(); ++p) {
      const double weight = std::max<int>(w[p], 1) / kPeak;
      const double e = static_cast<double>(a[p]) - static_cast<double>(b[p]);
      weighted_error += weight * e * e;
      weight_sum += weight;
    }
  }
  return db_from_mse(weighted_error / weight_sum);
}

double bitrate_reduction(std::int64_t original_bytes, std::int64_t new_bytes) {
  require(original_bytes > 0, "original size must be positive");
  require(new_bytes >= 0, "new size must be nonnegative");
  return 1.0 - static_cast<double>(new_bytes) / static_cast<double>(original_bytes);
}

}  // namespace vignette
