#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "data/bicubic.h"
#include "data/dataset.h"
#include "data/png_io.h"
#include "oracles.h"
#include "test_util.h"

using namespace stvsr;
using namespace stvsr::data;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("stvsr_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// intensity centroid of channel 0 above a threshold
std::pair<double, double> centroid(const Tensor<float>& img, float thresh) {
  double sy = 0, sx = 0, mass = 0;
  for (int y = 0; y < img.shape.h; ++y)
    for (int x = 0; x < img.shape.w; ++x) {
      float v = img.at(0, 0, y, x);
      if (v > thresh) {
        sy += y * double(v);
        sx += x * double(v);
        mass += v;
      }
    }
  return {sy / mass, sx / mass};
}

}  // namespace

TEST_CASE("png round trip preserves 8-bit content exactly") {
  fs::path dir = temp_dir("png");
  Tensor<float> img(Shape::chw(3, 9, 13));
  auto rng = make_rng(3);
  for (float& v : img.v) v = float(rng() % 256) / 255.0f;
  write_png((dir / "a.png").string(), img);
  Tensor<float> back = read_png((dir / "a.png").string());
  CHECK(back.shape == img.shape);
  CHECK(max_abs_diff(back, img) < 1e-7);
}

TEST_CASE("read_png errors carry the path") {
  CHECK_THROWS_WITH_AS(read_png("/nonexistent/im2.png"),
                       doctest::Contains("/nonexistent/im2.png"), ConfigError);
}

TEST_CASE("bicubic degrade: identity at scale 1, constants preserved, clamped") {
  Tensor<float> img = random_uniform<float>(Shape::chw(3, 8, 8), 5, 0.0f, 1.0f);
  Tensor<float> same = degrade_bicubic(img, 1);
  CHECK(max_abs_diff(same, img) < 1e-6);

  Tensor<float> c = Tensor<float>::full(Shape::chw(3, 16, 16), 0.431f);
  Tensor<float> dn = degrade_bicubic(c, 4);
  CHECK(dn.shape == Shape::chw(3, 4, 4));
  for (float v : dn.v) CHECK(v == doctest::Approx(0.431f).epsilon(1e-6));

  for (float v : degrade_bicubic(random_uniform<float>(Shape::chw(3, 16, 16), 6, 0.0f, 1.0f), 2).v) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("bicubic degrade matches the naive separable oracle") {
  // 8x8 linear ramp
  Tensor<double> ramp(Shape::chw(1, 8, 8));
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) ramp.at(0, 0, y, x) = (y * 8 + x) / 63.0;
  Tensor<double> got = degrade_bicubic(ramp, 2);
  Tensor<double> ref = oracle::bicubic_downscale(ramp, 2);
  CHECK(max_abs_diff(got, ref) < 1e-5);

  for (uint64_t seed = 10; seed < 16; ++seed) {
    Tensor<double> img = random_uniform<double>(Shape::chw(3, 16, 12), seed, 0.0, 1.0);
    CHECK(max_abs_diff(degrade_bicubic(img, 4), oracle::bicubic_downscale(img, 4)) < 1e-5);
    CHECK(max_abs_diff(degrade_bicubic(img, 2), oracle::bicubic_downscale(img, 2)) < 1e-5);
  }
}

TEST_CASE("bicubic degrade rejects non-divisible dims") {
  Tensor<float> img(Shape::chw(3, 9, 8));
  CHECK_THROWS_AS(degrade_bicubic(img, 2), ConfigError);
}

TEST_CASE("synthetic: zero velocity gives three identical frames") {
  Scene sc = random_scene(123, 64, 64);
  sc.vy = sc.vx = 0.0;
  Tensor<float> f0 = render_scene(sc, 0.0, 64, 64);
  Tensor<float> f1 = render_scene(sc, 0.5, 64, 64);
  Tensor<float> f2 = render_scene(sc, 1.0, 64, 64);
  CHECK(bitwise_equal(f0, f1));
  CHECK(bitwise_equal(f0, f2));
}

TEST_CASE("synthetic: disc at (10,10) with v=(2,4) has middle-frame center (11,12)") {
  Scene sc;
  sc.vy = 2.0;
  sc.vx = 4.0;
  SceneShape disc;
  disc.kind = SceneShape::disc;
  disc.cy = 10;
  disc.cx = 10;
  disc.size_y = 5;
  disc.color[0] = disc.color[1] = disc.color[2] = 1.0;
  sc.shapes.push_back(disc);
  Tensor<float> mid = render_scene(sc, 0.5, 32, 32);
  auto [cy, cx] = centroid(mid, 0.5f);
  CHECK(cy == doctest::Approx(11.0).epsilon(0.02));
  CHECK(cx == doctest::Approx(12.0).epsilon(0.02));
}

TEST_CASE("synthetic: fixed seed reproduces the stream bitwise; |v| <= 4") {
  SynthDataset a(5, 64, 64, 42), b(5, 64, 64, 42);
  for (size_t i = 0; i < a.size(); ++i) {
    Triplet ta = a.get(i), tb = b.get(i);
    for (int f = 0; f < 3; ++f) CHECK(bitwise_equal(ta.frames[f], tb.frames[f]));
    Scene sc = a.scene(i);
    CHECK(std::sqrt(sc.vy * sc.vy + sc.vx * sc.vx) <= 4.0 + 1e-12);
  }
}

TEST_CASE("synthetic middle frame is the half-displacement render, not the frame average") {
  SynthDataset ds(8, 64, 64, 7);
  bool found_moving = false;
  for (size_t i = 0; i < ds.size(); ++i) {
    Scene sc = ds.scene(i);
    if (std::hypot(sc.vy, sc.vx) < 1.0) continue;
    found_moving = true;
    Triplet t = ds.get(i);
    Tensor<float> avg = t.frames[0];
    for (int64_t j = 0; j < avg.numel(); ++j)
      avg.v[size_t(j)] = 0.5f * (t.frames[0].v[size_t(j)] + t.frames[2].v[size_t(j)]);
    // the analytic middle frame must differ from endpoint averaging
    CHECK(max_abs_diff(t.frames[1], avg) > 0.05);
    // and must equal re-rendering at t = 0.5
    CHECK(bitwise_equal(t.frames[1], render_scene(sc, 0.5, 64, 64)));
  }
  CHECK(found_moving);
}

TEST_CASE("synthetic rejects bad dims") {
  CHECK_THROWS_AS(SynthDataset(1, 24, 64, 1), ConfigError);
  CHECK_THROWS_AS(SynthDataset(1, 64, 60, 1), ConfigError);
}

TEST_CASE("materialize then load through the file-based pipeline") {
  fs::path dir = temp_dir("mat");
  SynthDataset src(3, 32, 32, 9);
  materialize(src, dir.string());
  VimeoDataset loaded(dir.string(), (dir / "tri_list.txt").string());
  REQUIRE(loaded.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    Triplet orig = src.get(i);
    Triplet back = loaded.get(i);
    // on-disk frames are 8-bit quantized
    for (int f = 0; f < 3; ++f)
      CHECK(max_abs_diff(orig.frames[f], back.frames[f]) < 0.5f / 255.0f + 1e-6f);
  }
}

TEST_CASE("vimeo loader: empty list, missing frame, strict mode") {
  fs::path dir = temp_dir("vimeo");
  {
    std::ofstream list(dir / "empty.txt");
  }
  VimeoDataset empty(dir.string(), (dir / "empty.txt").string());
  CHECK(empty.size() == 0);

  // one valid clip, one clip missing im2.png
  Tensor<float> img = Tensor<float>::full(Shape::chw(3, 32, 32), 0.5f);
  fs::create_directories(dir / "sequences/00001/0001");
  fs::create_directories(dir / "sequences/00001/0002");
  for (int f = 1; f <= 3; ++f)
    write_png((dir / "sequences/00001/0001" / ("im" + std::to_string(f) + ".png")).string(), img);
  write_png((dir / "sequences/00001/0002/im1.png").string(), img);
  write_png((dir / "sequences/00001/0002/im3.png").string(), img);
  {
    std::ofstream list(dir / "list.txt");
    list << "00001/0001\n00001/0002\n";
  }
  VimeoDataset lenient(dir.string(), (dir / "list.txt").string(), false);
  CHECK(lenient.size() == 1);
  REQUIRE(lenient.errors().size() == 1);
  CHECK(lenient.errors()[0].find("im2.png") != std::string::npos);
  CHECK_THROWS_WITH_AS(VimeoDataset(dir.string(), (dir / "list.txt").string(), true),
                       doctest::Contains("im2.png"), ItemError);
}

TEST_CASE("448x256 frames load as [3,256,448]") {
  fs::path dir = temp_dir("vimeo_res");
  Tensor<float> img = random_uniform<float>(Shape::chw(3, 256, 448), 17, 0.0f, 1.0f);
  fs::create_directories(dir / "sequences/00001/0001");
  for (int f = 1; f <= 3; ++f)
    write_png((dir / "sequences/00001/0001" / ("im" + std::to_string(f) + ".png")).string(), img);
  std::ofstream(dir / "list.txt") << "00001/0001\n";
  VimeoDataset ds(dir.string(), (dir / "list.txt").string());
  Triplet t = ds.get(0);
  CHECK(t.frames[0].shape == Shape::chw(3, 256, 448));
}

TEST_CASE("augment: all-off identity, temporal involution, flip definition") {
  SynthDataset ds(1, 64, 64, 21);
  TrainSample s = make_train_sample(ds.get(0), 2);

  TrainSample off = apply_augment(s, false, false, false);
  CHECK(bitwise_equal(off.lr0, s.lr0));
  CHECK(bitwise_equal(off.hr_gt_mid, s.hr_gt_mid));

  TrainSample twice = apply_augment(apply_augment(s, false, false, true), false, false, true);
  CHECK(bitwise_equal(twice.lr0, s.lr0));
  CHECK(bitwise_equal(twice.lr1, s.lr1));
  CHECK(bitwise_equal(twice.hr_gt0, s.hr_gt0));

  TrainSample hf2 = apply_augment(apply_augment(s, true, false, false), true, false, false);
  CHECK(bitwise_equal(hf2.hr_gt1, s.hr_gt1));
  TrainSample vf2 = apply_augment(apply_augment(s, false, true, false), false, true, false);
  CHECK(bitwise_equal(vf2.lr_gt_mid, s.lr_gt_mid));

  // coordinate-indexed flip check: pixel (y, c) moves to column W-1-c
  Tensor<float> idx(Shape::chw(1, 4, 6));
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) idx.at(0, 0, y, x) = float(y * 10 + x);
  Tensor<float> flipped = flip_horizontal(idx);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x)
      CHECK(flipped.at(0, 0, y, x) == doctest::Approx(float(y * 10 + (5 - x))));

  // temporal reversal swaps endpoints in LR and HR, keeps middles
  TrainSample rev = apply_augment(s, false, false, true);
  CHECK(bitwise_equal(rev.lr0, s.lr1));
  CHECK(bitwise_equal(rev.lr1, s.lr0));
  CHECK(bitwise_equal(rev.hr_gt0, s.hr_gt1));
  CHECK(bitwise_equal(rev.hr_gt_mid, s.hr_gt_mid));
}

TEST_CASE("make_batch: shapes, co-located crops, determinism, errors") {
  SynthDataset ds(4, 64, 64, 31);
  std::vector<TrainSample> samples;
  for (size_t i = 0; i < 4; ++i) samples.push_back(make_train_sample(ds.get(i), 4));

  auto rng1 = make_rng(77);
  Batch b = make_batch(samples, 8, rng1);
  CHECK(b.lr0.shape == Shape(4, 3, 8, 8));
  CHECK(b.hr_gt_mid.shape == Shape(4, 3, 32, 32));
  REQUIRE(b.crops.size() == 4);
  // crop content matches the source at the recorded offset, HR co-located
  for (int i = 0; i < 4; ++i) {
    const CropInfo& ci = b.crops[size_t(i)];
    CHECK(b.lr0.at(i, 1, 0, 0) == samples[size_t(i)].lr0.at(0, 1, ci.y, ci.x));
    CHECK(b.hr_gt0.at(i, 2, 0, 0) == samples[size_t(i)].hr_gt0.at(0, 2, ci.y * 4, ci.x * 4));
  }

  auto rng2 = make_rng(77);
  Batch b2 = make_batch(samples, 8, rng2);
  for (size_t i = 0; i < 4; ++i) {
    CHECK(b2.crops[i].y == b.crops[i].y);
    CHECK(b2.crops[i].x == b.crops[i].x);
  }
  CHECK(bitwise_equal(b2.lr1, b.lr1));

  // full-frame passthrough
  auto rng3 = make_rng(78);
  Batch full = make_batch(samples, 0, rng3);
  CHECK(full.lr0.shape == Shape(4, 3, 16, 16));
  for (int64_t i = 0; i < samples[0].lr0.numel(); ++i)
    CHECK(full.lr0.v[size_t(i)] == samples[0].lr0.v[size_t(i)]);

  auto rng4 = make_rng(79);
  CHECK_THROWS_AS(make_batch(samples, 17, rng4), ConfigError);
}

TEST_CASE("grayscale PNG loads replicated to 3 channels") {
  fs::path dir = temp_dir("gray");
  Tensor<float> g(Shape::chw(1, 8, 8));
  for (int i = 0; i < 64; ++i) g.v[size_t(i)] = float(i) / 63.0f;
  write_png((dir / "g.png").string(), g);  // single channel goes out replicated
  Tensor<float> back = read_png((dir / "g.png").string());
  CHECK(back.shape == Shape::chw(3, 8, 8));
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      CHECK(back.at(0, 0, y, x) == back.at(0, 1, y, x));
      CHECK(back.at(0, 1, y, x) == back.at(0, 2, y, x));
    }
}

TEST_CASE("upscale_bicubic inverts dims and preserves constants") {
  Tensor<float> c = Tensor<float>::full(Shape::chw(3, 8, 8), 0.25f);
  Tensor<float> up = upscale_bicubic(c, 4);
  CHECK(up.shape == Shape::chw(3, 32, 32));
  for (float v : up.v) CHECK(v == doctest::Approx(0.25f).epsilon(1e-6));
}
