#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "core/tensor.h"

namespace stvsr {
namespace data {

// Error tied to one dataset item (missing frame, bad decode). Carries the path.
class ItemError : public std::runtime_error {
 public:
  explicit ItemError(const std::string& msg) : std::runtime_error(msg) {}
};

// Three RGB frames at times 0, 0.5, 1 with identical dims, values in [0,1].
struct Triplet {
  Tensor<float> frames[3];
  std::string source_id;
};

// One training example: degraded endpoints, LR ground-truth middle frame, and
// the three HR ground truths.
struct TrainSample {
  Tensor<float> lr0, lr1, lr_gt_mid;
  Tensor<float> hr_gt0, hr_gt_mid, hr_gt1;
  int scale = 1;
  std::string id;
};

struct CropInfo {
  int y = 0, x = 0;  // LR-space offset; HR offset is scale * this
};

struct Batch {
  Tensor<float> lr0, lr1, lr_gt_mid;        // [n, 3, h, w]
  Tensor<float> hr_gt0, hr_gt_mid, hr_gt1;  // [n, 3, h*s, w*s]
  int scale = 1;
  std::vector<CropInfo> crops;
};

// ---- sources -----------------------------------------------------------------

class TripletSource {
 public:
  virtual ~TripletSource() = default;
  virtual size_t size() const = 0;
  virtual Triplet get(size_t i) const = 0;
  virtual std::string name() const = 0;
};

// Vimeo-style triplet tree: root/sequences/<seq>/<clip>/im{1,2,3}.png with a
// newline-separated `<seq>/<clip>` split list. Entries whose frames are
// missing are reported: with abort_on_error they throw at construction,
// otherwise they are logged, recorded in errors() and skipped.
class VimeoDataset : public TripletSource {
 public:
  VimeoDataset(const std::string& root, const std::string& split_list,
               bool abort_on_error = false);
  size_t size() const override { return entries_.size(); }
  Triplet get(size_t i) const override;
  std::string name() const override { return root_; }
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::string root_;
  std::vector<std::string> entries_;
  std::vector<std::string> errors_;
};

// ---- synthetic scenes ----------------------------------------------------------

struct SceneShape {
  enum Kind { rect, disc, grating } kind = disc;
  double cy = 0, cx = 0;    // center at t = 0, in pixels
  double size_y = 8, size_x = 8;  // rect extents; discs/gratings use size_y as radius
  double freq = 0.15, phase = 0, angle = 0;  // grating parameters
  double color[3] = {1, 1, 1};
};

// One scene with a per-triplet velocity shared by every shape (|v| <= 4 px per
// frame interval); the background gradient is static.
struct Scene {
  double bg0[3] = {0, 0, 0};
  double bg_gy[3] = {0, 0, 0};
  double bg_gx[3] = {0, 0, 0};
  double vy = 0, vx = 0;
  std::vector<SceneShape> shapes;
};

// Antialiased analytic render of the scene at time t (shapes displaced by v*t).
Tensor<float> render_scene(const Scene& scene, double t, int h, int w);
Scene random_scene(uint64_t seed, int h, int w);

class SynthDataset : public TripletSource {
 public:
  // h, w >= 32 and divisible by 8
  SynthDataset(size_t count, int h, int w, uint64_t seed);
  size_t size() const override { return count_; }
  Triplet get(size_t i) const override;
  std::string name() const override { return "synth"; }
  Scene scene(size_t i) const;

 private:
  size_t count_;
  int h_, w_;
  uint64_t seed_;
};

// Writes a synthetic set to the on-disk triplet layout (sequences tree plus a
// split list) so the file-based loader can be exercised on it.
void materialize(const TripletSource& src, const std::string& root,
                 const std::string& list_name = "tri_list.txt");

// ---- sample construction -------------------------------------------------------

TrainSample make_train_sample(const Triplet& t, int scale);

// Each coin is independent with p = 0.5: horizontal flip, vertical flip,
// temporal reversal (endpoints swapped everywhere, middle frames kept).
TrainSample apply_augment(const TrainSample& s, bool hflip, bool vflip, bool treverse);
TrainSample augment(const TrainSample& s, std::mt19937_64& rng);

// Co-located random LR/HR crops of `patch` LR pixels (0 = full frame), stacked
// into batch tensors. Crop offsets are recorded.
Batch make_batch(const std::vector<TrainSample>& samples, int patch, std::mt19937_64& rng);

}  // namespace data
}  // namespace stvsr
