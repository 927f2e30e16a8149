#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace vignette {

/// Data-center cost inputs. Defaults describe a million-video library of
/// 10 MB clips (each available in 100 variants, ~500 TB total), S3-class
/// storage and egress pricing, a perceptual transcode at 5x the baseline
/// cost, and perceptual output at 10% of the original size.
struct CostParams {
  double num_videos = 1e6;
  double video_size_gb = 0.01;
  double variants = 100;
  double total_storage_gb = 5e5;
  double storage_price_per_gb_month = 0.023;
  double transfer_price_per_gb = 0.05;
  double baseline_transcode_cost_per_video = 0.212;
  double vignette_compute_multiplier = 5;
  double compressed_fraction = 0.10;
  double horizon_months = 1;
};

void validate_params(const CostParams& p);

/// Ordered (name, value) view of every field; the same names work as
/// set_param keys, so CLI overrides and the printed table stay in sync.
std::vector<std::pair<std::string, double>> param_table(const CostParams& p);

void set_param(CostParams& p, const std::string& key, double value);

struct CostBreakdown {
  double compute = 0.0;
  double storage = 0.0;
  double transfer = 0.0;

  double total() const { return compute + storage + transfer; }
};

/// Cost of serving `views` views over the horizon. With `vignette` set, the
/// per-video transcode costs `vignette_compute_multiplier` times more while
/// storage and transfer shrink to `compressed_fraction` of baseline.
CostBreakdown system_cost(const CostParams& p, double views, bool vignette);

/// Closed form for where the two cost lines cross:
///   (ΔCompute − ΔStorageSavings) / ((1 − compressed_fraction) ·
///    video_size_gb · transfer_price_per_gb)
/// floored at 0. Throws when the denominator vanishes (the lines are
/// parallel and never cross).
double breakeven_views_exact(const CostParams& p);

/// Smallest whole view count at which the perceptual pipeline is no more
/// expensive than baseline.
std::int64_t breakeven_views(const CostParams& p);

/// CSV ("views,baseline_cost,vignette_cost" header plus `steps` rows with
/// views evenly spaced over [views_min, views_max]) for plotting the two
/// cost curves around the break-even point.
std::string sweep_csv(const CostParams& p, double views_min, double views_max, int steps);

}  // namespace vignette
