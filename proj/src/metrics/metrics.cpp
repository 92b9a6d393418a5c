#include "metrics/metrics.h"

#include <cmath>
#include <sstream>
#include <vector>

namespace stvsr {
namespace metrics {

namespace {

// frame -> per-channel 0..255 quantized doubles
std::vector<std::vector<double>> quantize255(const Tensor<float>& t) {
  const Shape& s = t.shape;
  std::vector<std::vector<double>> out(size_t(s.c));
  for (int c = 0; c < s.c; ++c) {
    out[size_t(c)].resize(size_t(s.h) * s.w);
    const float* p = t.plane(0, c);
    for (int64_t i = 0; i < int64_t(s.h) * s.w; ++i) {
      double v = std::min(1.0, std::max(0.0, double(p[i])));
      out[size_t(c)][size_t(i)] = std::floor(v * 255.0 + 0.5);
    }
  }
  return out;
}

// BT.601 luma from quantized RGB planes
std::vector<double> luma601(const std::vector<std::vector<double>>& ch) {
  if (ch.size() == 1) return ch[0];
  std::vector<double> y(ch[0].size());
  for (size_t i = 0; i < y.size(); ++i)
    y[i] = 0.299 * ch[0][i] + 0.587 * ch[1][i] + 0.114 * ch[2][i];
  return y;
}

void check_comparable(const Tensor<float>& a, const Tensor<float>& b, const char* what) {
  if (a.shape != b.shape)
    throw ConfigError(std::string(what) + ": shape mismatch " + a.shape.str() + " vs " +
                      b.shape.str());
  if (a.shape.n != 1) throw ConfigError(std::string(what) + ": expects single frames");
}

std::vector<double> gaussian_window(int size, double sigma) {
  std::vector<double> w(static_cast<size_t>(size));
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    double d = i - (size - 1) / 2.0;
    w[size_t(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += w[size_t(i)];
  }
  for (double& x : w) x /= sum;
  return w;
}

// separable valid-window filter: [h, w] -> [h-size+1, w-size+1]
std::vector<double> filter_valid(const std::vector<double>& img, int h, int w,
                                 const std::vector<double>& win) {
  const int size = int(win.size());
  const int oh = h - size + 1, ow = w - size + 1;
  std::vector<double> tmp(size_t(h) * ow), out(size_t(oh) * ow);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < size; ++k) acc += win[size_t(k)] * img[size_t(y) * w + x + k];
      tmp[size_t(y) * ow + x] = acc;
    }
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < size; ++k) acc += win[size_t(k)] * tmp[size_t(y + k) * ow + x];
      out[size_t(y) * ow + x] = acc;
    }
  return out;
}

double ssim_plane(const std::vector<double>& x, const std::vector<double>& y, int h, int w) {
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  constexpr double kL = 255.0;
  constexpr double kC1 = (0.01 * kL) * (0.01 * kL);
  constexpr double kC2 = (0.03 * kL) * (0.03 * kL);
  if (h < kWin || w < kWin)
    throw ConfigError("ssim: image smaller than the 11x11 window");
  auto win = gaussian_window(kWin, kSigma);
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  auto mu_x = filter_valid(x, h, w, win);
  auto mu_y = filter_valid(y, h, w, win);
  auto m_xx = filter_valid(xx, h, w, win);
  auto m_yy = filter_valid(yy, h, w, win);
  auto m_xy = filter_valid(xy, h, w, win);
  double acc = 0.0;
  for (size_t i = 0; i < mu_x.size(); ++i) {
    double sx = m_xx[i] - mu_x[i] * mu_x[i];
    double sy = m_yy[i] - mu_y[i] * mu_y[i];
    double sxy = m_xy[i] - mu_x[i] * mu_y[i];
    double num = (2.0 * mu_x[i] * mu_y[i] + kC1) * (2.0 * sxy + kC2);
    double den = (mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + kC1) * (sx + sy + kC2);
    acc += num / den;
  }
  return acc / double(mu_x.size());
}

}  // namespace

double psnr(const Tensor<float>& a, const Tensor<float>& b, const MetricOptions& opt) {
  check_comparable(a, b, "psnr");
  auto qa = quantize255(a), qb = quantize255(b);
  double se = 0.0;
  int64_t count = 0;
  if (opt.psnr_on_luma) {
    auto ya = luma601(qa), yb = luma601(qb);
    for (size_t i = 0; i < ya.size(); ++i) {
      double d = (ya[i] - yb[i]) / 255.0;
      se += d * d;
    }
    count = int64_t(ya.size());
  } else {
    for (size_t c = 0; c < qa.size(); ++c)
      for (size_t i = 0; i < qa[c].size(); ++i) {
        double d = (qa[c][i] - qb[c][i]) / 255.0;
        se += d * d;
      }
    count = int64_t(qa.size()) * int64_t(qa[0].size());
  }
  double mse = se / double(count);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Tensor<float>& a, const Tensor<float>& b, const MetricOptions& opt) {
  check_comparable(a, b, "ssim");
  auto qa = quantize255(a), qb = quantize255(b);
  const int h = a.shape.h, w = a.shape.w;
  if (!opt.ssim_per_channel) return ssim_plane(luma601(qa), luma601(qb), h, w);
  double acc = 0.0;
  for (size_t c = 0; c < qa.size(); ++c) acc += ssim_plane(qa[c], qb[c], h, w);
  return acc / double(qa.size());
}

double interp_error(const Tensor<float>& a, const Tensor<float>& b,
                    const MetricOptions& opt) {
  check_comparable(a, b, "interp_error");
  auto qa = quantize255(a), qb = quantize255(b);
  if (opt.ie_global_rms) {
    double se = 0.0;
    int64_t count = 0;
    for (size_t c = 0; c < qa.size(); ++c) {
      for (size_t i = 0; i < qa[c].size(); ++i) {
        double d = qa[c][i] - qb[c][i];
        se += d * d;
      }
      count += int64_t(qa[c].size());
    }
    return std::sqrt(se / double(count));
  }
  double acc = 0.0;
  for (size_t c = 0; c < qa.size(); ++c) {
    double se = 0.0;
    for (size_t i = 0; i < qa[c].size(); ++i) {
      double d = qa[c][i] - qb[c][i];
      se += d * d;
    }
    acc += std::sqrt(se / double(qa[c].size()));
  }
  return acc / double(qa.size());
}

GroupSummary summarize(const std::string& group, const std::vector<MetricRow>& rows) {
  GroupSummary s;
  s.group = group;
  s.count = int(rows.size());
  for (const auto& r : rows) {
    s.psnr += r.psnr;
    s.ssim += r.ssim;
    s.ie += r.ie;
  }
  if (s.count > 0) {
    s.psnr /= s.count;
    s.ssim /= s.count;
    s.ie /= s.count;
  }
  return s;
}

std::string report_csv(
    const std::vector<std::pair<std::string, std::vector<MetricRow>>>& groups) {
  std::ostringstream os;
  os << "group,id,psnr,ssim,ie\n";
  os.precision(10);
  for (const auto& [group, rows] : groups) {
    for (const auto& r : rows)
      os << group << "," << r.id << "," << r.psnr << "," << r.ssim << "," << r.ie << "\n";
    GroupSummary s = summarize(group, rows);
    os << group << ",aggregate," << s.psnr << "," << s.ssim << "," << s.ie << "\n";
  }
  return os.str();
}

std::string report_table(const std::vector<GroupSummary>& summaries,
                         const std::string& dataset, int scale, int units,
                         int64_t param_count) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %-16s %5s %3s %10s %8s %8s %8s\n", "group",
                "dataset", "scale", "M", "params(M)", "PSNR", "SSIM", "IE");
  os << line;
  for (const auto& s : summaries) {
    std::snprintf(line, sizeof(line), "%-8s %-16s %5d %3d %10.2f %8.3f %8.4f %8.3f\n",
                  s.group.c_str(), dataset.c_str(), scale, units,
                  double(param_count) / 1e6, s.psnr, s.ssim, s.ie);
    os << line;
  }
  return os.str();
}

}  // namespace metrics
}  // namespace stvsr
