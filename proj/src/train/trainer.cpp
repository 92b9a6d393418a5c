#include "train/trainer.h"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "data/bicubic.h"

namespace fs = std::filesystem;

namespace stvsr {
namespace train {

DataSpec parse_data_spec(const std::string& arg) {
  DataSpec spec;
  if (arg.rfind("synth:", 0) == 0) {
    spec.kind = DataSpec::Kind::synth;
    std::string rest = arg.substr(6);
    size_t colon = rest.find(':');
    std::string count_str = colon == std::string::npos ? rest : rest.substr(0, colon);
    try {
      spec.count = std::stoull(count_str);
    } catch (...) {
      throw ConfigError("data: bad synth count in '" + arg + "'");
    }
    if (spec.count == 0) throw ConfigError("data: synth count must be positive");
    if (colon != std::string::npos) {
      std::string dims = rest.substr(colon + 1);
      size_t x = dims.find('x');
      if (x == std::string::npos)
        throw ConfigError("data: synth dims must look like 96x96, got '" + dims + "'");
      try {
        spec.hr_h = std::stoi(dims.substr(0, x));
        spec.hr_w = std::stoi(dims.substr(x + 1));
      } catch (...) {
        throw ConfigError("data: bad synth dims in '" + arg + "'");
      }
    }
  } else {
    spec.kind = DataSpec::Kind::dir;
    spec.root = arg;
  }
  return spec;
}

std::unique_ptr<data::TripletSource> open_source(const DataSpec& spec,
                                                 const model::ModelConfig& cfg,
                                                 uint64_t seed, bool abort_on_error) {
  if (spec.kind == DataSpec::Kind::synth) {
    int h = spec.hr_h > 0 ? spec.hr_h : 32 * cfg.scale;
    int w = spec.hr_w > 0 ? spec.hr_w : 32 * cfg.scale;
    return std::make_unique<data::SynthDataset>(spec.count, h, w, seed);
  }
  std::string list = spec.list;
  if (list.empty()) {
    for (const char* cand : {"tri_list.txt", "tri_trainlist.txt", "tri_testlist.txt"}) {
      fs::path p = fs::path(spec.root) / cand;
      if (fs::exists(p)) {
        list = p.string();
        break;
      }
    }
    if (list.empty())
      throw ConfigError("data: no split list found under '" + spec.root + "'");
  }
  return std::make_unique<data::VimeoDataset>(spec.root, list, abort_on_error);
}

double EvalResult::aggregate(const std::string& group, char metric) const {
  for (const auto& s : summaries) {
    if (s.group != group) continue;
    switch (metric) {
      case 'p': return s.psnr;
      case 's': return s.ssim;
      default: return s.ie;
    }
  }
  throw ConfigError("EvalResult: no group '" + group + "'");
}

namespace {

double triplet_rms(const model::VarTriplet<float>& t) {
  double se = 0.0;
  int64_t count = 0;
  for (const Var<float>* f : {&t.f0, &t.ft, &t.f1}) {
    for (float x : (*f)->value.v) se += double(x) * double(x);
    count += (*f)->value.numel();
  }
  return std::sqrt(se / double(count));
}

}  // namespace

EvalResult evaluate(const model::Network<float>& net, const data::TripletSource& src,
                    const metrics::MetricOptions& mopt) {
  const int scale = net.config().scale;
  EvalResult res;
  std::vector<metrics::MetricRow> st, sv, tv;
  std::vector<double> err_acc;
  size_t err_count = 0;
  for (size_t i = 0; i < src.size(); ++i) {
    data::Triplet trip = src.get(i);
    data::TrainSample s = data::make_train_sample(trip, scale);
    Var<float> lr0 = make_leaf(s.lr0);
    Var<float> lr1 = make_leaf(s.lr1);
    model::Outputs<float> out = net.forward(lr0, lr1);
    st.push_back({s.id, metrics::psnr(out.ht->value, s.hr_gt_mid, mopt),
                  metrics::ssim(out.ht->value, s.hr_gt_mid, mopt),
                  metrics::interp_error(out.ht->value, s.hr_gt_mid, mopt)});
    sv.push_back({s.id, metrics::psnr(out.h0->value, s.hr_gt0, mopt),
                  metrics::ssim(out.h0->value, s.hr_gt0, mopt),
                  metrics::interp_error(out.h0->value, s.hr_gt0, mopt)});
    tv.push_back({s.id, metrics::psnr(out.lt->value, s.lr_gt_mid, mopt),
                  metrics::ssim(out.lt->value, s.lr_gt_mid, mopt),
                  metrics::interp_error(out.lt->value, s.lr_gt_mid, mopt)});
    if (!out.trace.upu.empty()) {
      if (err_acc.empty()) err_acc.assign(out.trace.upu.size(), 0.0);
      for (size_t m = 0; m < out.trace.upu.size(); ++m)
        err_acc[m] += triplet_rms(out.trace.upu[m].e);
      ++err_count;
    }
  }
  res.groups = {{"st_vsr", st}, {"s_vsr", sv}, {"t_vsr", tv}};
  for (const auto& [g, rows] : res.groups)
    res.summaries.push_back(metrics::summarize(g, rows));
  if (err_count > 0)
    for (double a : err_acc) res.unit_err_rms.push_back(a / double(err_count));
  return res;
}

namespace {

struct CsvFmt {
  static std::string num(double v) {
    if (std::isinf(v)) return "inf";
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
  }
};

std::vector<data::TrainSample> load_samples(const data::TripletSource& src, int scale) {
  std::vector<data::TrainSample> samples(src.size());
  // per-item work is independent; order in the vector is fixed by index
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < int64_t(src.size()); ++i)
    samples[size_t(i)] = data::make_train_sample(src.get(size_t(i)), scale);
  return samples;
}

void validate_geometry(const model::ModelConfig& cfg, const Shape& lr_shape, int patch) {
  const int div = 1 << (cfg.pyramid_levels - 1);
  const int ph = patch > 0 ? patch : lr_shape.h;
  const int pw = patch > 0 ? patch : lr_shape.w;
  if (ph % div != 0 || pw % div != 0)
    throw ConfigError("train: LR patch " + std::to_string(ph) + "x" + std::to_string(pw) +
                      " must be divisible by 2^(pyramid_levels-1)=" + std::to_string(div));
}

struct TrainLoop {
  const model::RunConfig& rc;
  const data::TripletSource& train_src;
  const data::TripletSource* val_src;
  int val_every;
  model::Network<float>& net;
  Adamax<float>& opt;
  int64_t step = 0;
  int epoch = 0;
  double best_val_psnr = -1.0;

  TrainResult run() {
    const model::TrainOptions& topt = rc.train;
    const std::string& out_dir = topt.out_dir;
    std::vector<data::TrainSample> samples = load_samples(train_src, rc.model.scale);
    validate_geometry(rc.model, samples[0].lr0.shape, topt.patch);

    TrainResult result;
    std::ostringstream csv;
    csv << "epoch,step,loss,psnr_ht,ssim_ht,ie_ht,psnr_h0,psnr_lt,lr\n";

    const int n = int(samples.size());
    const int batch = std::max(1, topt.batch);
    const int64_t max_steps = topt.max_steps > 0 ? topt.max_steps
                                                 : int64_t(rc.schedule.total_epochs) *
                                                       ((n + batch - 1) / batch);
    bool done = false;
    for (; !done && epoch < rc.schedule.total_epochs + (topt.max_steps > 0 ? 1 << 20 : 0);
         ++epoch) {
      std::vector<int> order(static_cast<size_t>(n));
      std::iota(order.begin(), order.end(), 0);
      auto shuffle_rng = make_rng(derive_seed(topt.seed, "shuffle", uint64_t(epoch)));
      std::shuffle(order.begin(), order.end(), shuffle_rng);

      double epoch_loss = 0.0;
      int epoch_steps = 0;
      for (int start = 0; start < n && !done; start += batch) {
        std::vector<data::TrainSample> items;
        for (int j = start; j < std::min(n, start + batch); ++j) {
          const data::TrainSample& base = samples[size_t(order[size_t(j)])];
          auto aug_rng = make_rng(
              derive_seed(topt.seed, "aug", uint64_t(epoch), uint64_t(order[size_t(j)])));
          items.push_back(data::augment(base, aug_rng));
        }
        auto crop_rng = make_rng(derive_seed(topt.seed, "crop", uint64_t(step)));
        data::Batch b = data::make_batch(items, topt.patch, crop_rng);

        model::Outputs<float> out =
            net.forward(make_leaf(b.lr0), make_leaf(b.lr1));
        Var<float> loss = model::total_loss(out, b.lr_gt_mid, b.hr_gt_mid, b.hr_gt0, b.hr_gt1);
        double loss_v = double(loss->value.v[0]);
        if (!std::isfinite(loss_v))
          throw TrainAbort("training loss is non-finite at step " + std::to_string(step));
        backward(loss);
        opt.step(net.params(), float(model::lr_at(rc.schedule, epoch)));
        net.params().zero_grads();

        result.step_losses.push_back(loss_v);
        epoch_loss += loss_v;
        ++epoch_steps;
        ++step;
        if (step >= max_steps) done = true;
      }
      if (epoch_steps == 0) break;

      double psnr_ht = NAN, ssim_ht = NAN, ie_ht = NAN, psnr_h0 = NAN, psnr_lt = NAN;
      bool ran_val = false;
      if (val_src && val_every > 0 && ((epoch + 1) % val_every == 0 || done)) {
        EvalResult ev = evaluate(net, *val_src);
        psnr_ht = ev.aggregate("st_vsr", 'p');
        ssim_ht = ev.aggregate("st_vsr", 's');
        ie_ht = ev.aggregate("st_vsr", 'i');
        psnr_h0 = ev.aggregate("s_vsr", 'p');
        psnr_lt = ev.aggregate("t_vsr", 'p');
        ran_val = true;
      }
      csv << epoch << "," << step << "," << CsvFmt::num(epoch_loss / epoch_steps) << ","
          << (ran_val ? CsvFmt::num(psnr_ht) : "") << ","
          << (ran_val ? CsvFmt::num(ssim_ht) : "") << ","
          << (ran_val ? CsvFmt::num(ie_ht) : "") << ","
          << (ran_val ? CsvFmt::num(psnr_h0) : "") << ","
          << (ran_val ? CsvFmt::num(psnr_lt) : "") << ","
          << CsvFmt::num(model::lr_at(rc.schedule, epoch)) << "\n";
      std::cerr << "[train] epoch " << epoch << " step " << step
                << " loss " << epoch_loss / epoch_steps;
      if (ran_val) std::cerr << " val_psnr_ht " << psnr_ht;
      std::cerr << "\n";

      bool improved = ran_val && psnr_ht > best_val_psnr;
      if (improved) best_val_psnr = psnr_ht;
      if (!out_dir.empty()) {
        CheckpointMeta meta{rc, epoch, step, best_val_psnr};
        save_checkpoint(out_dir + "/last", net, opt, meta);
        result.last_dir = out_dir + "/last";
        if (topt.keep_epoch_checkpoints)
          save_checkpoint(out_dir + "/epoch_" + std::to_string(epoch), net, opt, meta);
        if (improved) {
          save_checkpoint(out_dir + "/best", net, opt, meta);
          result.best_dir = out_dir + "/best";
        }
      }
    }
    result.csv = csv.str();
    result.best_val_psnr = best_val_psnr;
    result.steps = step;
    result.epochs = epoch;
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      std::ofstream log(fs::path(out_dir) / "train_log.csv");
      log << result.csv;
      std::ofstream cfg_out(fs::path(out_dir) / "config.txt");
      cfg_out << model::run_config_to_text(rc);
    }
    return result;
  }
};

}  // namespace

TrainResult train(const model::RunConfig& rc, const data::TripletSource& train_src,
                  const data::TripletSource* val_src, int val_every) {
  rc.model.validate();
  rc.schedule.validate();
  if (train_src.size() == 0) throw ConfigError("train: dataset is empty");
  model::Network<float> net(rc.model, derive_seed(rc.train.seed, "params"));
  Adamax<float> opt;
  TrainLoop loop{rc, train_src, val_src, val_every, net, opt};
  return loop.run();
}

TrainResult train_resume(const std::string& ckpt_dir, const data::TripletSource& train_src,
                         const data::TripletSource* val_src, int val_every,
                         const std::string& out_dir, int override_max_steps) {
  LoadedCheckpoint ck = load_checkpoint(ckpt_dir);
  model::RunConfig rc = ck.meta.config;
  if (!out_dir.empty()) rc.train.out_dir = out_dir;
  if (override_max_steps >= 0) rc.train.max_steps = override_max_steps;
  rc.model.validate();
  model::Network<float> net(rc.model, derive_seed(rc.train.seed, "params"));
  Adamax<float> opt;
  restore(ck, net, opt);
  TrainLoop loop{rc, train_src, val_src, val_every, net, opt};
  loop.step = ck.meta.step;
  loop.epoch = ck.meta.epoch + 1;
  loop.best_val_psnr = ck.meta.best_val_psnr;
  return loop.run();
}

std::vector<std::string> dead_params(model::Network<float>& net,
                                     const data::TripletSource& src,
                                     const model::RunConfig& rc, int batches,
                                     int warmup_steps) {
  std::vector<data::TrainSample> samples = load_samples(src, rc.model.scale);
  Adamax<float> opt;
  for (int w = 0; w < warmup_steps; ++w) {
    std::vector<data::TrainSample> items;
    auto pick_rng = make_rng(derive_seed(rc.train.seed, "deadwarm", uint64_t(w)));
    for (int j = 0; j < rc.train.batch; ++j)
      items.push_back(samples[pick_rng() % samples.size()]);
    auto crop_rng = make_rng(derive_seed(rc.train.seed, "deadwarmcrop", uint64_t(w)));
    data::Batch b = data::make_batch(items, rc.train.patch, crop_rng);
    model::Outputs<float> out = net.forward(make_leaf(b.lr0), make_leaf(b.lr1));
    Var<float> loss = model::total_loss(out, b.lr_gt_mid, b.hr_gt_mid, b.hr_gt0, b.hr_gt1);
    backward(loss);
    opt.step(net.params(), float(rc.schedule.base_lr));
    net.params().zero_grads();
  }
  std::map<std::string, bool> seen;
  for (const auto& [name, p] : net.params().all()) seen[name] = false;
  for (int bidx = 0; bidx < batches; ++bidx) {
    std::vector<data::TrainSample> items;
    auto pick_rng = make_rng(derive_seed(rc.train.seed, "deadpick", uint64_t(bidx)));
    for (int j = 0; j < rc.train.batch; ++j)
      items.push_back(samples[pick_rng() % samples.size()]);
    auto crop_rng = make_rng(derive_seed(rc.train.seed, "deadcrop", uint64_t(bidx)));
    data::Batch b = data::make_batch(items, rc.train.patch, crop_rng);
    model::Outputs<float> out = net.forward(make_leaf(b.lr0), make_leaf(b.lr1));
    Var<float> loss = model::total_loss(out, b.lr_gt_mid, b.hr_gt_mid, b.hr_gt0, b.hr_gt1);
    backward(loss);
    for (const auto& [name, p] : net.params().all()) {
      if (!p->has_grad) continue;
      for (float g : p->grad.v)
        if (g != 0.0f) {
          seen[name] = true;
          break;
        }
    }
    net.params().zero_grads();
  }
  std::vector<std::string> dead;
  for (const auto& [name, hit] : seen)
    if (!hit) dead.push_back(name);
  return dead;
}

double baseline_psnr_ht(const data::TripletSource& src, int scale) {
  double acc = 0.0;
  for (size_t i = 0; i < src.size(); ++i) {
    data::Triplet trip = src.get(i);
    data::TrainSample s = data::make_train_sample(trip, scale);
    Tensor<float> avg = s.lr0;
    for (int64_t j = 0; j < avg.numel(); ++j)
      avg.v[size_t(j)] = 0.5f * (s.lr0.v[size_t(j)] + s.lr1.v[size_t(j)]);
    Tensor<float> up = data::upscale_bicubic(avg, scale);
    acc += metrics::psnr(up, s.hr_gt_mid);
  }
  return acc / double(src.size());
}

}  // namespace train
}  // namespace stvsr
