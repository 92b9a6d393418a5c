#include "data/dataset.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "core/rng.h"
#include "data/bicubic.h"
#include "data/png_io.h"

namespace fs = std::filesystem;

namespace stvsr {
namespace data {

// ---- Vimeo-style loader --------------------------------------------------------

VimeoDataset::VimeoDataset(const std::string& root, const std::string& split_list,
                           bool abort_on_error)
    : root_(root) {
  std::ifstream in(split_list);
  if (!in) throw ConfigError("VimeoDataset: cannot open split list '" + split_list + "'");
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    bool ok = true;
    for (int f = 1; f <= 3; ++f) {
      fs::path p = fs::path(root_) / "sequences" / line / ("im" + std::to_string(f) + ".png");
      if (!fs::exists(p)) {
        std::string msg = "missing frame '" + p.string() + "'";
        if (abort_on_error) throw ItemError(msg);
        errors_.push_back(msg);
        std::cerr << "[data] skipping " << line << ": " << msg << "\n";
        ok = false;
        break;
      }
    }
    if (ok) entries_.push_back(line);
  }
}

Triplet VimeoDataset::get(size_t i) const {
  const std::string& entry = entries_.at(i);
  Triplet t;
  t.source_id = entry;
  for (int f = 0; f < 3; ++f) {
    fs::path p = fs::path(root_) / "sequences" / entry / ("im" + std::to_string(f + 1) + ".png");
    try {
      t.frames[f] = read_png(p.string());
    } catch (const ConfigError& e) {
      throw ItemError(e.what());
    }
    if (f > 0 && t.frames[f].shape != t.frames[0].shape)
      throw ItemError("triplet '" + entry + "': frame dims differ");
  }
  return t;
}

// ---- synthetic scenes ------------------------------------------------------------

namespace {

inline double shape_alpha(const SceneShape& sh, double py, double px, double y, double x) {
  double dy = y - py, dx = x - px;
  switch (sh.kind) {
    case SceneShape::rect: {
      double d = std::max(std::fabs(dy) - sh.size_y * 0.5, std::fabs(dx) - sh.size_x * 0.5);
      return std::clamp(0.5 - d, 0.0, 1.0);
    }
    case SceneShape::disc:
    case SceneShape::grating: {
      double d = std::sqrt(dy * dy + dx * dx) - sh.size_y;
      return std::clamp(0.5 - d, 0.0, 1.0);
    }
  }
  return 0.0;
}

}  // namespace

Tensor<float> render_scene(const Scene& scene, double t, int h, int w) {
  Tensor<float> out(Shape::chw(3, h, w));
  out.domain = ValueDomain::pixel_unit;
  std::vector<double> px(scene.shapes.size()), py(scene.shapes.size());
  for (size_t i = 0; i < scene.shapes.size(); ++i) {
    py[i] = scene.shapes[i].cy + scene.vy * t;
    px[i] = scene.shapes[i].cx + scene.vx * t;
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double rgb[3];
      for (int c = 0; c < 3; ++c)
        rgb[c] = std::clamp(scene.bg0[c] + scene.bg_gy[c] * (double(y) / h) +
                                scene.bg_gx[c] * (double(x) / w),
                            0.0, 1.0);
      for (size_t i = 0; i < scene.shapes.size(); ++i) {
        const SceneShape& sh = scene.shapes[i];
        double a = shape_alpha(sh, py[i], px[i], y, x);
        if (a <= 0.0) continue;
        double modv = 1.0;
        if (sh.kind == SceneShape::grating) {
          double uy = std::sin(sh.angle) * sh.freq, ux = std::cos(sh.angle) * sh.freq;
          // the pattern rides with the shape
          modv = 0.5 + 0.5 * std::sin(2.0 * M_PI * (uy * (y - py[i]) + ux * (x - px[i])) + sh.phase);
        }
        for (int c = 0; c < 3; ++c) rgb[c] = a * sh.color[c] * modv + (1.0 - a) * rgb[c];
      }
      for (int c = 0; c < 3; ++c)
        out.at(0, c, y, x) = float(std::clamp(rgb[c], 0.0, 1.0));
    }
  return out;
}

Scene random_scene(uint64_t seed, int h, int w) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Scene sc;
  for (int c = 0; c < 3; ++c) {
    sc.bg0[c] = 0.1 + 0.4 * uni(rng);
    sc.bg_gy[c] = -0.3 + 0.6 * uni(rng);
    sc.bg_gx[c] = -0.3 + 0.6 * uni(rng);
  }
  double speed = 4.0 * uni(rng);
  double dir = 2.0 * M_PI * uni(rng);
  sc.vy = speed * std::sin(dir);
  sc.vx = speed * std::cos(dir);
  int count = 2 + int(uni(rng) * 3.0);  // 2..4 shapes
  for (int i = 0; i < count; ++i) {
    SceneShape sh;
    double kind = uni(rng);
    sh.kind = kind < 0.4 ? SceneShape::disc : (kind < 0.8 ? SceneShape::rect : SceneShape::grating);
    sh.cy = (0.15 + 0.7 * uni(rng)) * h;
    sh.cx = (0.15 + 0.7 * uni(rng)) * w;
    sh.size_y = (0.06 + 0.18 * uni(rng)) * std::min(h, w);
    sh.size_x = (0.06 + 0.18 * uni(rng)) * std::min(h, w);
    sh.freq = 0.08 + 0.25 * uni(rng);
    sh.phase = 2.0 * M_PI * uni(rng);
    sh.angle = 2.0 * M_PI * uni(rng);
    for (int c = 0; c < 3; ++c) sh.color[c] = 0.2 + 0.8 * uni(rng);
    sc.shapes.push_back(sh);
  }
  return sc;
}

SynthDataset::SynthDataset(size_t count, int h, int w, uint64_t seed)
    : count_(count), h_(h), w_(w), seed_(seed) {
  if (h < 32 || w < 32 || h % 8 != 0 || w % 8 != 0)
    throw ConfigError("SynthDataset: dims must be >= 32 and divisible by 8");
}

Scene SynthDataset::scene(size_t i) const {
  return random_scene(derive_seed(seed_, "synth-scene", i), h_, w_);
}

Triplet SynthDataset::get(size_t i) const {
  Scene sc = scene(i);
  Triplet t;
  t.source_id = "synth/" + std::to_string(i);
  t.frames[0] = render_scene(sc, 0.0, h_, w_);
  t.frames[1] = render_scene(sc, 0.5, h_, w_);
  t.frames[2] = render_scene(sc, 1.0, h_, w_);
  return t;
}

void materialize(const TripletSource& src, const std::string& root,
                 const std::string& list_name) {
  fs::create_directories(fs::path(root) / "sequences");
  std::ofstream list(fs::path(root) / list_name);
  if (!list) throw ConfigError("materialize: cannot write list in '" + root + "'");
  char seq[16], clip[16];
  for (size_t i = 0; i < src.size(); ++i) {
    std::snprintf(seq, sizeof(seq), "%05zu", i / 1000 + 1);
    std::snprintf(clip, sizeof(clip), "%04zu", i % 1000 + 1);
    std::string entry = std::string(seq) + "/" + clip;
    fs::path dir = fs::path(root) / "sequences" / entry;
    fs::create_directories(dir);
    Triplet t = src.get(i);
    for (int f = 0; f < 3; ++f)
      write_png((dir / ("im" + std::to_string(f + 1) + ".png")).string(), t.frames[f]);
    list << entry << "\n";
  }
}

// ---- sample construction ---------------------------------------------------------

TrainSample make_train_sample(const Triplet& t, int scale) {
  const Shape& s = t.frames[0].shape;
  if (s.h % scale != 0 || s.w % scale != 0)
    throw ConfigError("make_train_sample: frame dims " + s.str() +
                      " not divisible by scale " + std::to_string(scale));
  TrainSample out;
  out.scale = scale;
  out.id = t.source_id;
  out.hr_gt0 = t.frames[0];
  out.hr_gt_mid = t.frames[1];
  out.hr_gt1 = t.frames[2];
  out.lr0 = degrade_bicubic(t.frames[0], scale);
  out.lr_gt_mid = degrade_bicubic(t.frames[1], scale);
  out.lr1 = degrade_bicubic(t.frames[2], scale);
  return out;
}

TrainSample apply_augment(const TrainSample& s, bool hflip, bool vflip, bool treverse) {
  TrainSample out = s;
  if (treverse) {
    std::swap(out.lr0, out.lr1);
    std::swap(out.hr_gt0, out.hr_gt1);
  }
  auto apply = [&](Tensor<float>& t) {
    if (hflip) t = flip_horizontal(t);
    if (vflip) t = flip_vertical(t);
  };
  apply(out.lr0);
  apply(out.lr1);
  apply(out.lr_gt_mid);
  apply(out.hr_gt0);
  apply(out.hr_gt_mid);
  apply(out.hr_gt1);
  return out;
}

TrainSample augment(const TrainSample& s, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  bool hflip = coin(rng);
  bool vflip = coin(rng);
  bool treverse = coin(rng);
  return apply_augment(s, hflip, vflip, treverse);
}

namespace {

void copy_crop(const Tensor<float>& src, Tensor<float>& dst, int item, int oy, int ox) {
  const Shape& ds = dst.shape;
  for (int c = 0; c < ds.c; ++c)
    for (int y = 0; y < ds.h; ++y)
      std::copy_n(src.plane(0, c) + int64_t(oy + y) * src.shape.w + ox, ds.w,
                  dst.plane(item, c) + int64_t(y) * ds.w);
}

}  // namespace

Batch make_batch(const std::vector<TrainSample>& samples, int patch, std::mt19937_64& rng) {
  if (samples.empty()) throw ConfigError("make_batch: empty sample list");
  const Shape& lrs = samples[0].lr0.shape;
  const int scale = samples[0].scale;
  for (const auto& s : samples) {
    if (s.lr0.shape != lrs || s.scale != scale)
      throw ConfigError("make_batch: samples must share LR dims and scale");
  }
  int ph = patch > 0 ? patch : lrs.h;
  int pw = patch > 0 ? patch : lrs.w;
  if (ph > lrs.h || pw > lrs.w)
    throw ConfigError("make_batch: patch " + std::to_string(patch) + " exceeds LR dims " +
                      lrs.str());

  const int n = int(samples.size());
  Batch b;
  b.scale = scale;
  b.lr0 = Tensor<float>(Shape(n, 3, ph, pw));
  b.lr1 = Tensor<float>(Shape(n, 3, ph, pw));
  b.lr_gt_mid = Tensor<float>(Shape(n, 3, ph, pw));
  b.hr_gt0 = Tensor<float>(Shape(n, 3, ph * scale, pw * scale));
  b.hr_gt_mid = Tensor<float>(Shape(n, 3, ph * scale, pw * scale));
  b.hr_gt1 = Tensor<float>(Shape(n, 3, ph * scale, pw * scale));
  b.crops.resize(size_t(n));
  for (int i = 0; i < n; ++i) {
    CropInfo ci;
    if (ph < lrs.h) ci.y = int(rng() % uint64_t(lrs.h - ph + 1));
    if (pw < lrs.w) ci.x = int(rng() % uint64_t(lrs.w - pw + 1));
    b.crops[size_t(i)] = ci;
    copy_crop(samples[size_t(i)].lr0, b.lr0, i, ci.y, ci.x);
    copy_crop(samples[size_t(i)].lr1, b.lr1, i, ci.y, ci.x);
    copy_crop(samples[size_t(i)].lr_gt_mid, b.lr_gt_mid, i, ci.y, ci.x);
    copy_crop(samples[size_t(i)].hr_gt0, b.hr_gt0, i, ci.y * scale, ci.x * scale);
    copy_crop(samples[size_t(i)].hr_gt_mid, b.hr_gt_mid, i, ci.y * scale, ci.x * scale);
    copy_crop(samples[size_t(i)].hr_gt1, b.hr_gt1, i, ci.y * scale, ci.x * scale);
  }
  return b;
}

}  // namespace data
}  // namespace stvsr
