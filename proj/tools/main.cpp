#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "data/png_io.h"
#include "train/ablation.h"

namespace fs = std::filesystem;
using namespace stvsr;

namespace {

struct CommonFlags {
  std::string config_file;
  std::string data;
  std::string list;
  std::string out;
  std::string val_data;
  int scale = 0;
  int channels = 0;
  int units = 0;
  int epochs = 0;
  int steps = -1;
  int batch = 0;
  int patch = -1;
  double lr = 0.0;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string variant;
  int val_every = 1;
  bool strict_data = false;
};

void add_model_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_file, "config file (key = value lines)");
  cmd->add_option("--scale", f.scale, "super-resolution factor {2,4,8}");
  cmd->add_option("--channels", f.channels, "feature channels C");
  cmd->add_option("--units,-M", f.units, "projection units M");
  cmd->add_option("--variant", f.variant, "model variant a|b|c|d");
}

void add_train_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--epochs", f.epochs, "total epochs");
  cmd->add_option("--steps", f.steps, "hard step budget (0 = by epochs)");
  cmd->add_option("--batch", f.batch, "batch size");
  cmd->add_option("--patch", f.patch, "LR patch for random crops (0 = full frame)");
  cmd->add_option("--lr", f.lr, "base learning rate");
  cmd->add_option("--val-data", f.val_data, "validation data spec");
  cmd->add_option("--val-every", f.val_every, "validate every K epochs (0 = off)");
  cmd->add_flag("--strict-data", f.strict_data, "abort on unreadable dataset items");
}

model::RunConfig build_config(const CommonFlags& f) {
  model::RunConfig rc;
  if (!f.config_file.empty()) rc = model::load_run_config(f.config_file);
  if (f.scale > 0) rc.model.scale = f.scale;
  if (f.channels > 0) rc.model.channels = f.channels;
  if (f.units > 0) rc.model.units = f.units;
  if (!f.variant.empty()) {
    if (f.variant.size() != 1) throw ConfigError("--variant must be one of a,b,c,d");
    rc.model.variant = f.variant[0];
  }
  if (f.epochs > 0) rc.schedule.total_epochs = f.epochs;
  if (f.steps >= 0) rc.train.max_steps = f.steps;
  if (f.batch > 0) rc.train.batch = f.batch;
  if (f.patch >= 0) rc.train.patch = f.patch;
  if (f.lr > 0) rc.schedule.base_lr = f.lr;
  if (f.seed_set) rc.train.seed = f.seed;
  rc.train.out_dir = f.out;
  rc.train.data_abort_on_error = f.strict_data;
  rc.model.validate();
  rc.schedule.validate();
  return rc;
}

std::unique_ptr<data::TripletSource> open_train_source(const CommonFlags& f,
                                                       const model::RunConfig& rc,
                                                       std::string materialize_dir) {
  train::DataSpec spec = train::parse_data_spec(f.data);
  if (!f.list.empty()) spec.list = f.list;
  auto src = train::open_source(spec, rc.model, derive_seed(rc.train.seed, "train-data"),
                                rc.train.data_abort_on_error);
  if (!materialize_dir.empty()) {
    if (spec.kind != train::DataSpec::Kind::synth)
      throw ConfigError("--materialize requires synthetic data");
    std::cerr << "[data] materializing " << src->size() << " triplets to "
              << materialize_dir << "\n";
    data::materialize(*src, materialize_dir);
    return std::make_unique<data::VimeoDataset>(materialize_dir,
                                                materialize_dir + "/tri_list.txt",
                                                rc.train.data_abort_on_error);
  }
  return src;
}

std::unique_ptr<data::TripletSource> open_val_source(const CommonFlags& f,
                                                     const model::RunConfig& rc) {
  if (!f.val_data.empty()) {
    train::DataSpec spec = train::parse_data_spec(f.val_data);
    return train::open_source(spec, rc.model, derive_seed(rc.train.seed, "val-data"),
                              rc.train.data_abort_on_error);
  }
  // fixed held-out synthetic split, dims matching the training spec
  train::DataSpec spec = train::parse_data_spec(f.data);
  train::DataSpec val;
  val.kind = train::DataSpec::Kind::synth;
  val.count = size_t(rc.train.val_triplets);
  val.hr_h = spec.hr_h;
  val.hr_w = spec.hr_w;
  return train::open_source(val, rc.model, derive_seed(rc.train.seed, "val-data"), false);
}

int cmd_train(const CommonFlags& f, const std::string& materialize_dir,
              const std::string& resume_dir) {
  model::RunConfig rc = build_config(f);
  if (f.out.empty()) throw ConfigError("train: --out is required");
  auto src = open_train_source(f, rc, materialize_dir);
  std::unique_ptr<data::TripletSource> val;
  if (f.val_every > 0) val = open_val_source(f, rc);
  train::TrainResult result;
  if (!resume_dir.empty())
    result = train::train_resume(resume_dir, *src, val.get(), f.val_every, f.out, f.steps);
  else
    result = train::train(rc, *src, val.get(), f.val_every);
  std::cerr << "[train] done: " << result.steps << " steps, checkpoints in " << f.out
            << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt, const CommonFlags& f, const std::string& report,
             const std::string& out_file) {
  train::LoadedCheckpoint ck = train::load_checkpoint(ckpt);
  if (f.scale > 0 && f.scale != ck.meta.config.model.scale)
    throw ConfigError("eval: checkpoint was trained for scale " +
                      std::to_string(ck.meta.config.model.scale) + ", requested " +
                      std::to_string(f.scale));
  model::Network<float> net(ck.meta.config.model,
                            derive_seed(ck.meta.config.train.seed, "params"));
  train::Adamax<float> opt;
  train::restore(ck, net, opt);

  train::DataSpec spec = train::parse_data_spec(f.data);
  if (!f.list.empty()) spec.list = f.list;
  auto src = train::open_source(spec, ck.meta.config.model,
                                derive_seed(ck.meta.config.train.seed, "val-data"),
                                f.strict_data);
  train::EvalResult ev = train::evaluate(net, *src);

  std::string text;
  if (report == "csv") {
    text = metrics::report_csv(ev.groups);
  } else if (report == "table") {
    text = metrics::report_table(ev.summaries, src->name(), ck.meta.config.model.scale,
                                 ck.meta.config.model.units, net.params().total_params());
  } else {
    throw ConfigError("eval: --report must be csv or table");
  }
  if (!ev.unit_err_rms.empty()) {
    text += "unit_err_rms";
    for (double e : ev.unit_err_rms) text += "," + std::to_string(e);
    text += "\n";
  }
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    if (!out) throw ConfigError("eval: cannot write '" + out_file + "'");
    out << text;
  } else {
    std::cout << text;
  }
  return 0;
}

int cmd_infer(const std::string& ckpt, const std::string& frame0, const std::string& frame1,
              const std::string& out_dir, const std::string& trace_dir) {
  train::LoadedCheckpoint ck = train::load_checkpoint(ckpt);
  model::Network<float> net(ck.meta.config.model,
                            derive_seed(ck.meta.config.train.seed, "params"));
  train::Adamax<float> opt;
  train::restore(ck, net, opt);

  Tensor<float> f0 = data::read_png(frame0);
  Tensor<float> f1 = data::read_png(frame1);
  if (f0.shape != f1.shape)
    throw ConfigError("infer: input frames differ in size: " + f0.shape.str() + " vs " +
                      f1.shape.str());
  model::Outputs<float> out = net.forward(make_leaf(f0), make_leaf(f1));

  fs::create_directories(out_dir);
  data::write_png(out_dir + "/H0.png", out.h0->value);
  data::write_png(out_dir + "/Ht.png", out.ht->value);
  data::write_png(out_dir + "/H1.png", out.h1->value);
  data::write_png(out_dir + "/Lt.png", out.lt->value);
  if (!trace_dir.empty()) model::dump_trace(out.trace, trace_dir);
  return 0;
}

int cmd_ablate(const CommonFlags& f, const std::string& variants, const std::string& sweep) {
  model::RunConfig rc = build_config(f);
  if (variants.empty() == sweep.empty())
    throw ConfigError("ablate: pass exactly one of --variants or --sweep-m");
  if (f.out.empty()) throw ConfigError("ablate: --out is required");

  std::vector<train::AblationRow> rows;
  if (!variants.empty()) {
    auto src = open_train_source(f, rc, "");
    auto val = open_val_source(f, rc);
    rows = train::run_variants(variants, rc, *src, *val);
  } else {
    std::vector<int> ms;
    std::stringstream ss(sweep);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) ms.push_back(std::stoi(tok));
    if (ms.empty()) throw ConfigError("ablate: --sweep-m needs unit counts");
    std::unique_ptr<data::TripletSource> src, val;
    if (rc.train.max_steps > 0) {
      src = open_train_source(f, rc, "");
      val = open_val_source(f, rc);
    }
    rows = train::sweep_units(ms, rc, src.get(), val.get());
  }
  std::string csv = train::ablation_csv(rows);
  fs::create_directories(f.out);
  std::ofstream out(fs::path(f.out) / "ablation.csv");
  out << csv;
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatial-temporal video super-resolution toolkit"};
  app.require_subcommand(1);

  CommonFlags tf, ef, af;
  std::string materialize_dir, resume_dir;
  std::string eval_ckpt, eval_report = "table", eval_out;
  std::string infer_ckpt, infer_f0, infer_f1, infer_out, infer_trace;
  std::string ab_variants, ab_sweep;

  CLI::App* t = app.add_subcommand("train", "train a model");
  add_model_flags(t, tf);
  add_train_flags(t, tf);
  t->add_option("--data", tf.data, "training data: dir or synth:N[:HxW]")->required();
  t->add_option("--list", tf.list, "split list file for directory data");
  t->add_option("--out", tf.out, "output directory")->required();
  auto* tseed = t->add_option("--seed", tf.seed, "RNG seed");
  t->add_option("--materialize", materialize_dir, "write synthetic data to disk and train from it");
  t->add_option("--resume", resume_dir, "checkpoint directory to resume from");

  CLI::App* e = app.add_subcommand("eval", "evaluate a checkpoint");
  e->add_option("--ckpt", eval_ckpt, "checkpoint directory")->required();
  e->add_option("--data", ef.data, "evaluation data: dir or synth:N[:HxW]")->required();
  e->add_option("--list", ef.list, "split list file");
  e->add_option("--scale", ef.scale, "expected scale (checked against the checkpoint)");
  e->add_option("--report", eval_report, "csv or table");
  e->add_option("--out", eval_out, "write the report to a file");
  e->add_flag("--strict-data", ef.strict_data, "abort on unreadable dataset items");

  CLI::App* i = app.add_subcommand("infer", "run two frames through a checkpoint");
  i->add_option("--ckpt", infer_ckpt, "checkpoint directory")->required();
  i->add_option("--frame0", infer_f0, "first LR frame (png)")->required();
  i->add_option("--frame1", infer_f1, "second LR frame (png)")->required();
  i->add_option("--out", infer_out, "output directory")->required();
  i->add_option("--dump-trace", infer_trace, "write projection feature maps here");

  CLI::App* a = app.add_subcommand("ablate", "variant comparison / unit-count sweep");
  add_model_flags(a, af);
  add_train_flags(a, af);
  a->add_option("--data", af.data, "training data spec");
  a->add_option("--list", af.list, "split list file");
  a->add_option("--out", af.out, "output directory")->required();
  auto* aseed = a->add_option("--seed", af.seed, "RNG seed");
  a->add_option("--variants", ab_variants, "comma-separated subset of a,b,c,d");
  a->add_option("--sweep-m", ab_sweep, "comma-separated unit counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    if (err.get_exit_code() == 0) return app.exit(err);  // --help and friends
    std::cerr << "error: " << err.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  tf.seed_set = tseed->count() > 0;
  af.seed_set = aseed->count() > 0;

  try {
    if (t->parsed()) return cmd_train(tf, materialize_dir, resume_dir);
    if (e->parsed()) return cmd_eval(eval_ckpt, ef, eval_report, eval_out);
    if (i->parsed()) return cmd_infer(infer_ckpt, infer_f0, infer_f1, infer_out, infer_trace);
    if (a->parsed()) return cmd_ablate(af, ab_variants, ab_sweep);
  } catch (const TrainAbort& err) {
    std::cerr << "abort: " << err.what() << "\n";
    return 3;
  } catch (const ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const data::ItemError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
