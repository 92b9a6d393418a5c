#pragma once

#include <limits>
#include <string>
#include <vector>

#include "core/tensor.h"

namespace stvsr {
namespace metrics {

struct MetricOptions {
  bool psnr_on_luma = false;     // default RGB
  bool ssim_per_channel = false; // default BT.601 luma
  bool ie_global_rms = false;    // default per-channel RMSE averaged
};

// Both frames are quantized to 8 bits (round half up) before comparison.
// Returns +inf when the quantized frames are identical.
double psnr(const Tensor<float>& a, const Tensor<float>& b,
            const MetricOptions& opt = MetricOptions());

// Standard single-scale SSIM: 11x11 Gaussian window sigma 1.5, K1=0.01,
// K2=0.03, dynamic range 255, mean over valid windows. Throws ConfigError for
// images smaller than the window.
double ssim(const Tensor<float>& a, const Tensor<float>& b,
            const MetricOptions& opt = MetricOptions());

// Interpolation error: RMS difference on the 0..255 scale.
double interp_error(const Tensor<float>& a, const Tensor<float>& b,
                    const MetricOptions& opt = MetricOptions());

// One evaluation protocol row (one frame of one sample).
struct MetricRow {
  std::string id;
  double psnr = 0, ssim = 0, ie = 0;
};

struct GroupSummary {
  std::string group;  // st_vsr | s_vsr | t_vsr
  double psnr = 0, ssim = 0, ie = 0;
  int count = 0;
};

GroupSummary summarize(const std::string& group, const std::vector<MetricRow>& rows);

// CSV with one row per (group, frame) plus aggregate rows; `table` renders the
// aligned PSNR/SSIM/IE triples per group.
std::string report_csv(const std::vector<std::pair<std::string, std::vector<MetricRow>>>& groups);
std::string report_table(const std::vector<GroupSummary>& summaries,
                         const std::string& dataset, int scale, int units,
                         int64_t param_count);

}  // namespace metrics
}  // namespace stvsr
