#include "vignette/cost.hpp"

#include <cmath>
#include <fmt/format.h>

#include "vignette/error.hpp"

namespace vignette {
namespace {

using Field = double CostParams::*;

struct NamedField {
  const char* name;
  Field field;
};

constexpr NamedField kFields[] = {
    {"num_videos", &CostParams::num_videos},
    {"video_size_gb", &CostParams::video_size_gb},
    {"variants", &CostParams::variants},
    {"total_storage_gb", &CostParams::total_storage_gb},
    {"storage_price_per_gb_month", &CostParams::storage_price_per_gb_month},
    {"transfer_price_per_gb", &CostParams::transfer_price_per_gb},
    {"baseline_transcode_cost_per_video", &CostParams::baseline_transcode_cost_per_video},
    {"vignette_compute_multiplier", &CostParams::vignette_compute_multiplier},
    {"compressed_fraction", &CostParams::compressed_fraction},
    {"horizon_months", &CostParams::horizon_months},
};

}  // namespace

void validate_params(const CostParams& p) {
  for (const NamedField& f : kFields) {
    require(p.*f.field > 0, fmt::format("cost parameter {} must be positive", f.name));
  }
  require(p.compressed_fraction < 1,
          fmt::format("compressed_fraction {} must be below 1", p.compressed_fraction));
}

std::vector<std::pair<std::string, double>> param_table(const CostParams& p) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(std::size(kFields));
  for (const NamedField& f : kFields) out.emplace_back(f.name, p.*f.field);
  return out;
}

void set_param(CostParams& p, const std::string& key, double value) {
  for (const NamedField& f : kFields) {
    if (key == f.name) {
      p.*f.field = value;
      return;
    }
  }
  fail(fmt::format("unknown cost parameter '{}'", key));
}

CostBreakdown system_cost(const CostParams& p, double views, bool vignette) {
  validate_params(p);
  require(views >= 0, "views must be nonnegative");
  const double frac = vignette ? p.compressed_fraction : 1.0;
  CostBreakdown out;
  out.compute = p.num_videos * p.baseline_transcode_cost_per_video *
                (vignette ? p.vignette_compute_multiplier : 1.0);
  out.storage = p.total_storage_gb * frac * p.storage_price_per_gb_month * p.horizon_months;
  out.transfer = views * p.video_size_gb * frac * p.transfer_price_per_gb;
  return out;
}

double breakeven_views_exact(const CostParams& p) {
  validate_params(p);
  const double compute_delta = p.num_videos * p.baseline_transcode_cost_per_video *
                               (p.vignette_compute_multiplier - 1.0);
  const double storage_savings = p.total_storage_gb * (1.0 - p.compressed_fraction) *
                                 p.storage_price_per_gb_month * p.horizon_months;
  const double denom =
      (1.0 - p.compressed_fraction) * p.video_size_gb * p.transfer_price_per_gb;
  require(denom != 0.0, "per-view transfer savings are zero; the cost lines never cross");
  return std::max(0.0, (compute_delta - storage_savings) / denom);
}

std::int64_t breakeven_views(const CostParams& p) {
  return static_cast<std::int64_t>(std::ceil(breakeven_views_exact(p)));
}

std::string sweep_csv(const CostParams& p, double views_min, double views_max, int steps) {
  require(steps >= 2, "a sweep needs at least two points");
  require(views_min >= 0 && views_max > views_min, "need 0 <= views_min < views_max");
  std::string out = "views,baseline_cost,vignette_cost\n";
  for (int i = 0; i < steps; ++i) {
    const double v = views_min + (views_max - views_min) * i / (steps - 1);
    out += fmt::format("{:.0f},{:.2f},{:.2f}\n", v, system_cost(p, v, false).total(),
                       system_cost(p, v, true).total());
  }
  return out;
}

}  // namespace vignette
