#include "model/network.h"

#include <cmath>
#include <filesystem>

#include "data/png_io.h"

namespace stvsr {
namespace model {

template <typename T>
FusionInterp<T> FusionInterp<T>::make(ParamStore<T>& ps, const std::string& name,
                                      const ModelConfig& cfg) {
  FusionInterp<T> f;
  const int c = cfg.channels;
  f.c1 = Conv2dLayer<T>::make(ps, name + ".c1", 2 * c, c, 3, 1, 1);
  f.c2 = Conv2dLayer<T>::make(ps, name + ".c2", c, c, 3, 1, 1);
  f.c3 = Conv2dLayer<T>::make(ps, name + ".c3", c, c, 3, 1, 1);
  return f;
}

template <typename T>
Var<T> FusionInterp<T>::operator()(Var<T> feat0, Var<T> feat1) const {
  Var<T> x = ops::leaky_relu(c1(ops::concat_c<T>({feat0, feat1})), T(kLeakySlope));
  x = ops::leaky_relu(c2(x), T(kLeakySlope));
  return c3(x);
}

template <typename T>
PlainUnit<T> PlainUnit<T>::make(ParamStore<T>& ps, const std::string& name, int c,
                                int n_blocks) {
  PlainUnit<T> u;
  for (int i = 0; i < n_blocks; ++i)
    u.blocks.push_back(FusionResblock<T>::make(ps, name + ".frb" + std::to_string(i), c));
  return u;
}

template <typename T>
VarTriplet<T> PlainUnit<T>::operator()(VarTriplet<T> t) const {
  for (const auto& b : blocks) t = b(t);
  return t;
}

// ---- parameter accounting ------------------------------------------------------

namespace {

int64_t conv_params(int ic, int oc, int k) { return int64_t(oc) * ic * k * k + oc; }

int64_t frb_params(int c) { return conv_params(3 * c, 3 * c, 1) + 3 * conv_params(c, c, 3); }

int64_t scale_up_params(int c, int n) { return n * frb_params(c) + conv_params(c, c, 1); }

int64_t scale_down_params(int c, int n) { return conv_params(c, c, 4) + n * frb_params(c); }

int64_t cycle_params(const ModelConfig& cfg) {
  const int c = cfg.channels, n = cfg.fusion_resblocks;
  int64_t upu = 2 * scale_up_params(c, n) + scale_down_params(c, n);
  int64_t dpu = 2 * scale_down_params(c, n) + scale_up_params(c, n);
  return cfg.units * upu + (cfg.units - 1) * dpu;
}

int64_t fe_params(const ModelConfig& cfg) {
  return conv_params(3, cfg.channels, 3) +
         cfg.fe_resblocks * 2 * conv_params(cfg.channels, cfg.channels, 3);
}

int64_t fti_params(const ModelConfig& cfg) {
  const int c = cfg.channels;
  const int per_dir = (2 + (cfg.use_modulation ? 1 : 0)) * cfg.taps() * cfg.deform_groups;
  int64_t pyr = (cfg.pyramid_levels - 1) * conv_params(c, c, 3);
  pyr += cfg.pyramid_levels *
         (conv_params(2 * c, c, 3) + conv_params(c, c, 3) + conv_params(c, 2 * per_dir, 3));
  int64_t deform = 2 * conv_params(c, c, cfg.kernel);
  int64_t blend = 2 * conv_params(c, 1, 3);
  return pyr + deform + blend;
}

int64_t ffi_params(const ModelConfig& cfg) {
  const int c = cfg.channels;
  return conv_params(2 * c, c, 3) + 2 * conv_params(c, c, 3);
}

int rec_stage_count(const ModelConfig& cfg, bool hr_input_at_2x) {
  int remaining = cfg.scale / (hr_input_at_2x ? 2 : 1);
  int n = 0;
  while (remaining > 1) {
    remaining /= 2;
    ++n;
  }
  return n;
}

int64_t rec_params(const ModelConfig& cfg, int reps, bool hr_input_at_2x) {
  const int c = cfg.channels;
  int64_t p = conv_params(reps * c, c, 3) + conv_params(c, 3, 3);  // HR fuse + out
  p += rec_stage_count(cfg, hr_input_at_2x) * conv_params(c, 4 * c, 3);
  p += conv_params(reps * c, c, 3) + conv_params(c, 3, 3);  // LR fuse + out
  return p;
}

int64_t plain_chain_params(const ModelConfig& cfg, int blocks_per_unit) {
  return int64_t(cfg.units - 1) * blocks_per_unit * frb_params(cfg.channels);
}

}  // namespace

int choose_plain_blocks(const ModelConfig& cfg) {
  ModelConfig full = cfg;
  full.variant = 'd';
  const int64_t target = count_params(full);
  const int64_t fixed = fe_params(cfg) + fti_params(cfg) + rec_params(cfg, cfg.units, false);
  int best = 1;
  int64_t best_err = -1;
  for (int nb = 1; nb <= 128; ++nb) {
    int64_t total = fixed + plain_chain_params(cfg, nb);
    int64_t err = std::llabs(total - target);
    if (best_err < 0 || err < best_err) {
      best_err = err;
      best = nb;
    }
  }
  return best;
}

int64_t count_params(const ModelConfig& cfg) {
  cfg.validate();
  switch (cfg.variant) {
    case 'a':
      return fe_params(cfg) + ffi_params(cfg) + rec_params(cfg, 1, false);
    case 'b':
      return fe_params(cfg) + fti_params(cfg) + rec_params(cfg, 1, false);
    case 'c': {
      int nb = cfg.plain_blocks > 0 ? cfg.plain_blocks : choose_plain_blocks(cfg);
      return fe_params(cfg) + fti_params(cfg) + plain_chain_params(cfg, nb) +
             rec_params(cfg, cfg.units, false);
    }
    default:
      return fe_params(cfg) + fti_params(cfg) + cycle_params(cfg) +
             rec_params(cfg, cfg.units, true);
  }
}

// ---- network --------------------------------------------------------------------

template <typename T>
Network<T>::Network(const ModelConfig& cfg, uint64_t param_seed)
    : cfg_(cfg), store_(param_seed) {
  cfg_.validate();
  fe_ = FeatureExtractor<T>::make(store_, "fe", cfg_);
  if (cfg_.variant == 'a') {
    ffi_.emplace(FusionInterp<T>::make(store_, "ffi", cfg_));
  } else {
    fti_.emplace(FtiNet<T>::make(store_, "fti", cfg_));
  }
  switch (cfg_.variant) {
    case 'a':
    case 'b':
      rec_.emplace(Reconstruction<T>::make(store_, "rec", cfg_, 1, false));
      break;
    case 'c': {
      plain_blocks_ = cfg_.plain_blocks > 0 ? cfg_.plain_blocks : choose_plain_blocks(cfg_);
      for (int i = 0; i + 1 < cfg_.units; ++i)
        plain_.push_back(PlainUnit<T>::make(store_, "pp" + std::to_string(i + 1),
                                            cfg_.channels, plain_blocks_));
      rec_.emplace(Reconstruction<T>::make(store_, "rec", cfg_, cfg_.units, false));
      break;
    }
    default:
      cycle_.emplace(MutualCycle<T>::make(store_, "cycle", cfg_));
      rec_.emplace(Reconstruction<T>::make(store_, "rec", cfg_, cfg_.units, true));
      break;
  }
}

template <typename T>
Outputs<T> Network<T>::forward(Var<T> lr0, Var<T> lr1) const {
  check_same_shape(lr0->value, lr1->value, "Network::forward");
  const Shape& s = lr0->value.shape;
  if (s.c != 3) throw ConfigError("Network::forward: inputs must be RGB, got " + s.str());

  Var<T> f0 = fe_(lr0);
  Var<T> f1 = fe_(lr1);
  Var<T> lt0 = ffi_ ? (*ffi_)(f0, f1) : (*fti_)(f0, f1);
  VarTriplet<T> l0{f0, lt0, f1};

  Outputs<T> out;
  if (cfg_.variant == 'd') {
    CycleOut<T> cy = (*cycle_)(l0);
    out.hr_reps = cy.hr_reps;
    out.lr_reps = cy.lr_reps;
    out.trace = std::move(cy.trace);
    auto hr = rec_->reconstruct_hr(out.hr_reps);
    out.h0 = hr[0];
    out.ht = hr[1];
    out.h1 = hr[2];
    out.lt = rec_->reconstruct_lr(out.lr_reps);
  } else {
    std::vector<VarTriplet<T>> reps{l0};
    for (const auto& unit : plain_) reps.push_back(unit(reps.back()));
    out.lr_reps = reps;
    auto hr = rec_->reconstruct_hr(reps);
    out.h0 = hr[0];
    out.ht = hr[1];
    out.h1 = hr[2];
    out.lt = rec_->reconstruct_lr(reps);
  }
  return out;
}

// ---- trace dump -------------------------------------------------------------------

namespace {

void write_mean_map(const Tensor<float>& t, const std::string& path) {
  const Shape& s = t.shape;
  Tensor<float> mean(Shape::chw(1, s.h, s.w));
  for (int c = 0; c < s.c; ++c) {
    const float* p = t.plane(0, c);
    float* m = mean.plane(0, 0);
    for (int64_t i = 0; i < int64_t(s.h) * s.w; ++i) m[i] += p[i] / float(s.c);
  }
  float lo = mean.min(), hi = mean.max();
  float range = hi - lo > 1e-12f ? hi - lo : 1.0f;
  for (float& x : mean.v) x = (x - lo) / range;
  data::write_png(path, mean);
}

void dump_triplet(const VarTriplet<float>& t, const std::string& stem) {
  write_mean_map(t.f0->value, stem + "_t0.png");
  write_mean_map(t.ft->value, stem + "_tt.png");
  write_mean_map(t.f1->value, stem + "_t1.png");
}

}  // namespace

void dump_trace(const ProjectionTrace<float>& trace, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (size_t m = 0; m < trace.upu.size(); ++m) {
    std::string base = dir + "/upu" + std::to_string(m + 1);
    dump_triplet(trace.upu[m].u, base + "_u");
    dump_triplet(trace.upu[m].e, base + "_e");
    dump_triplet(trace.upu[m].h, base + "_h");
  }
  for (size_t m = 0; m < trace.dpu.size(); ++m) {
    std::string base = dir + "/dpu" + std::to_string(m + 1);
    dump_triplet(trace.dpu[m].d, base + "_d");
    dump_triplet(trace.dpu[m].e_hr, base + "_e");
    dump_triplet(trace.dpu[m].l, base + "_l");
  }
}

template struct FusionInterp<float>;
template struct FusionInterp<double>;
template struct PlainUnit<float>;
template struct PlainUnit<double>;
template class Network<float>;
template class Network<double>;

}  // namespace model
}  // namespace stvsr
