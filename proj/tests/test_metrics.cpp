#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "metrics/metrics.h"
#include "model/loss.h"
#include "oracles.h"
#include "test_util.h"

using namespace stvsr;
using namespace stvsr::metrics;
using namespace testutil;

namespace {

std::vector<std::vector<double>> to255(const Tensor<float>& t) {
  std::vector<std::vector<double>> out(size_t(t.shape.c));
  for (int c = 0; c < t.shape.c; ++c) {
    const float* p = t.plane(0, c);
    for (int64_t i = 0; i < int64_t(t.shape.h) * t.shape.w; ++i) {
      double v = std::min(1.0, std::max(0.0, double(p[i])));
      out[size_t(c)].push_back(std::floor(v * 255.0 + 0.5));
    }
  }
  return out;
}

std::vector<double> luma(const std::vector<std::vector<double>>& ch) {
  std::vector<double> y(ch[0].size());
  for (size_t i = 0; i < y.size(); ++i)
    y[i] = 0.299 * ch[0][i] + 0.587 * ch[1][i] + 0.114 * ch[2][i];
  return y;
}

}  // namespace

TEST_CASE("psnr: sentinel, 1/255 uniform difference, checkerboard") {
  Tensor<float> a = random_uniform<float>(Shape::chw(3, 16, 16), 1, 0.0f, 1.0f);
  CHECK(std::isinf(psnr(a, a)));

  Tensor<float> b(Shape::chw(3, 16, 16));
  Tensor<float> c(Shape::chw(3, 16, 16));
  for (int64_t i = 0; i < b.numel(); ++i) {
    b.v[size_t(i)] = 100.0f / 255.0f;
    c.v[size_t(i)] = 101.0f / 255.0f;
  }
  CHECK(psnr(b, c) == doctest::Approx(20.0 * std::log10(255.0)).epsilon(1e-9));

  // checkerboard 0/1 against all-zero: MSE = 0.5
  Tensor<float> cb(Shape::chw(1, 8, 8)), z(Shape::chw(1, 8, 8));
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) cb.at(0, 0, y, x) = float((x + y) % 2);
  CHECK(psnr(cb, z) == doctest::Approx(10.0 * std::log10(2.0)).epsilon(1e-9));
}

TEST_CASE("psnr shape mismatch is a configuration error") {
  Tensor<float> a(Shape::chw(3, 8, 8)), b(Shape::chw(3, 8, 9));
  CHECK_THROWS_AS(psnr(a, b), ConfigError);
}

TEST_CASE("ssim: identity, anticorrelation sign, symmetry") {
  Tensor<float> a = random_uniform<float>(Shape::chw(3, 24, 24), 3, 0.0f, 1.0f);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  // binary image vs its complement anticorrelates
  Tensor<float> bin(Shape::chw(3, 16, 16)), inv(Shape::chw(3, 16, 16));
  auto rng = make_rng(4);
  for (int64_t i = 0; i < bin.numel(); ++i) {
    float v = float(rng() % 2);
    bin.v[size_t(i)] = v;
    inv.v[size_t(i)] = 1.0f - v;
  }
  CHECK(ssim(bin, inv) < 0.0);

  Tensor<float> b = random_uniform<float>(Shape::chw(3, 24, 24), 5, 0.0f, 1.0f);
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-9));
}

TEST_CASE("ssim matches the naive sliding-window oracle on 32x32 pairs") {
  for (uint64_t seed = 10; seed < 14; ++seed) {
    Tensor<float> a = random_uniform<float>(Shape::chw(3, 32, 32), seed, 0.0f, 1.0f);
    Tensor<float> b = random_uniform<float>(Shape::chw(3, 32, 32), seed + 50, 0.0f, 1.0f);
    double ref = oracle::ssim_direct(luma(to255(a)), luma(to255(b)), 32, 32);
    CHECK(ssim(a, b) == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("ssim rejects images smaller than the window") {
  Tensor<float> a(Shape::chw(3, 10, 16)), b(Shape::chw(3, 10, 16));
  CHECK_THROWS_AS(ssim(a, b), ConfigError);
}

TEST_CASE("interp_error: zero, uniform one-level difference, naive oracle") {
  Tensor<float> a = random_uniform<float>(Shape::chw(3, 12, 12), 21, 0.0f, 1.0f);
  CHECK(interp_error(a, a) == 0.0);

  Tensor<float> b(Shape::chw(3, 12, 12)), c(Shape::chw(3, 12, 12));
  for (int64_t i = 0; i < b.numel(); ++i) {
    b.v[size_t(i)] = 40.0f / 255.0f;
    c.v[size_t(i)] = 41.0f / 255.0f;
  }
  CHECK(interp_error(b, c) == doctest::Approx(1.0).epsilon(1e-12));

  for (uint64_t seed = 30; seed < 34; ++seed) {
    Tensor<float> x = random_uniform<float>(Shape::chw(3, 16, 16), seed, 0.0f, 1.0f);
    Tensor<float> y = random_uniform<float>(Shape::chw(3, 16, 16), seed + 1, 0.0f, 1.0f);
    CHECK(interp_error(x, y) ==
          doctest::Approx(oracle::ie_direct(to255(x), to255(y))).epsilon(1e-9));
  }
}

TEST_CASE("psnr and interp_error are monotone links of MSE") {
  // increasing uniform 8-bit error level: PSNR falls, IE rises
  Tensor<float> base(Shape::chw(3, 16, 16));
  for (int64_t i = 0; i < base.numel(); ++i) base.v[size_t(i)] = 80.0f / 255.0f;
  double prev_psnr = std::numeric_limits<double>::infinity();
  double prev_ie = -1.0;
  for (int level = 1; level <= 8; ++level) {
    Tensor<float> other = base;
    for (int64_t i = 0; i < other.numel(); ++i) other.v[size_t(i)] += float(level) / 255.0f;
    double p = psnr(base, other), ie = interp_error(base, other);
    CHECK(p < prev_psnr);
    CHECK(ie > prev_ie);
    prev_psnr = p;
    prev_ie = ie;
  }
}

// ---- Charbonnier / weighted total loss ----

namespace {

model::Outputs<double> outputs_from(const Tensor<double>& lt, const Tensor<double>& ht,
                                    const Tensor<double>& h0, const Tensor<double>& h1) {
  model::Outputs<double> o;
  o.lt = make_leaf(lt, true);
  o.ht = make_leaf(ht, true);
  o.h0 = make_leaf(h0, true);
  o.h1 = make_leaf(h1, true);
  return o;
}

}  // namespace

TEST_CASE("charbonnier: rho(0) = omega, scalar formula") {
  Tensor<double> z = Tensor<double>::zeros(Shape(1, 3, 8, 8));
  Var<double> v = ops::charbonnier(make_leaf(z), z, 1e-3);
  CHECK(v->value.v[0] == doctest::Approx(1e-3).epsilon(1e-12));

  Tensor<double> x = Tensor<double>::full(Shape(1, 1, 1, 1), 3e-3);
  Var<double> s = ops::charbonnier(make_leaf(x), Tensor<double>::zeros(Shape(1, 1, 1, 1)), 1e-3);
  CHECK(s->value.v[0] == doctest::Approx(std::sqrt(1e-5)).epsilon(1e-12));
}

TEST_CASE("total loss on perfect outputs equals 3e-3; weights act linearly") {
  Tensor<double> lt = random_uniform<double>(Shape(2, 3, 8, 8), 41, 0.0, 1.0);
  Tensor<double> hr = random_uniform<double>(Shape(2, 3, 16, 16), 42, 0.0, 1.0);
  model::Outputs<double> out = outputs_from(lt, hr, hr, hr);
  Var<double> loss = model::total_loss(out, lt, hr, hr, hr);
  CHECK(loss->value.v[0] == doctest::Approx(3e-3).epsilon(1e-12));

  // doubling the H_t weight doubles exactly that term
  Tensor<double> ht_pred = random_uniform<double>(Shape(2, 3, 16, 16), 43, 0.0, 1.0);
  model::Outputs<double> out2 = outputs_from(lt, ht_pred, hr, hr);
  model::LossWeights w1, w2;
  w2.w_ht = 2.0;
  double l1 = model::total_loss(out2, lt, hr, hr, hr, w1)->value.v[0];
  double l2 = model::total_loss(out2, lt, hr, hr, hr, w2)->value.v[0];
  double ht_term = ops::charbonnier(make_leaf(ht_pred), hr, 1e-3)->value.v[0];
  CHECK(l2 - l1 == doctest::Approx(ht_term).epsilon(1e-12));
}

TEST_CASE("total loss matches a hand-computed weighted sum exactly") {
  Tensor<double> lt(Shape(1, 1, 2, 2)), gt_lt(Shape(1, 1, 2, 2));
  lt.v = {0.5, 0.25, 0.0, 1.0};
  gt_lt.v = {0.25, 0.25, 0.5, 1.0};
  Tensor<double> h = Tensor<double>::full(Shape(1, 1, 2, 2), 0.75);
  Tensor<double> gt_h = Tensor<double>::full(Shape(1, 1, 2, 2), 0.5);
  model::Outputs<double> out = outputs_from(lt, h, h, h);
  double loss = model::total_loss(out, gt_lt, gt_h, gt_h, gt_h)->value.v[0];
  auto rho = [](double x) { return std::sqrt(x * x + 1e-6); };
  double lt_term = (rho(0.25) + rho(0.0) + rho(-0.5) + rho(0.0)) / 4.0;
  double h_term = rho(0.25);
  double expect = 1.0 * lt_term + 1.0 * h_term + 0.5 * h_term + 0.5 * h_term;
  CHECK(loss == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("gradcheck: total loss on 4x4 tensors (double, tight)") {
  Tensor<double> lt = random_uniform<double>(Shape(1, 3, 4, 4), 51, 0.0, 1.0);
  Tensor<double> hr = random_uniform<double>(Shape(1, 3, 8, 8), 52, 0.0, 1.0);
  Tensor<double> gl = random_uniform<double>(Shape(1, 3, 4, 4), 53, 0.0, 1.0);
  Tensor<double> gh = random_uniform<double>(Shape(1, 3, 8, 8), 54, 0.0, 1.0);
  auto build = [&](std::vector<Var<double>>& l) {
    model::Outputs<double> o;
    o.lt = l[0];
    o.ht = l[1];
    o.h0 = l[2];
    o.h1 = l[3];
    return model::total_loss(o, gl, gh, gh, gh);
  };
  CHECK(gradcheck<double>(build, {lt, hr, hr, hr}, 1e-6, 40, 55) < 1e-6);
}

TEST_CASE("loss weights must be positive") {
  model::LossWeights w;
  w.w_h0 = 0.0;
  CHECK_THROWS_AS(w.validate(), ConfigError);
}

TEST_CASE("report table carries dataset, scale, M and parameter count") {
  GroupSummary g{"st_vsr", 30.0, 0.9, 5.0, 4};
  std::string table = report_table({g}, "synth", 4, 6, 11100000);
  CHECK(table.find("PSNR") != std::string::npos);
  CHECK(table.find("SSIM") != std::string::npos);
  CHECK(table.find("IE") != std::string::npos);
  CHECK(table.find("11.10") != std::string::npos);
  CHECK(table.find("synth") != std::string::npos);
}
