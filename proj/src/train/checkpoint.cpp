#include "train/checkpoint.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace stvsr {
namespace train {

namespace {

void write_blob(const fs::path& path, const Tensor<float>& t) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("checkpoint: cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(t.data()),
            std::streamsize(t.numel() * sizeof(float)));
}

Tensor<float> read_blob(const fs::path& path, Shape shape) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot read '" + path.string() + "'");
  Tensor<float> t(shape);
  in.read(reinterpret_cast<char*>(t.data()), std::streamsize(t.numel() * sizeof(float)));
  if (in.gcount() != std::streamsize(t.numel() * sizeof(float)))
    throw ConfigError("checkpoint: short read from '" + path.string() + "'");
  return t;
}

json shape_json(const Shape& s) { return json::array({s.n, s.c, s.h, s.w}); }

Shape shape_from_json(const json& j) {
  return Shape(j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(),
               j.at(3).get<int>());
}

json config_json(const model::RunConfig& rc) {
  json j;
  j["channels"] = rc.model.channels;
  j["units"] = rc.model.units;
  j["scale"] = rc.model.scale;
  j["pyramid_levels"] = rc.model.pyramid_levels;
  j["deform_groups"] = rc.model.deform_groups;
  j["kernel"] = rc.model.kernel;
  j["fusion_resblocks"] = rc.model.fusion_resblocks;
  j["fe_resblocks"] = rc.model.fe_resblocks;
  j["use_modulation"] = rc.model.use_modulation;
  j["variant"] = std::string(1, rc.model.variant);
  j["plain_blocks"] = rc.model.plain_blocks;
  j["base_lr"] = rc.schedule.base_lr;
  j["decay_factor"] = rc.schedule.decay_factor;
  j["decay_every"] = rc.schedule.decay_every;
  j["total_epochs"] = rc.schedule.total_epochs;
  j["batch"] = rc.train.batch;
  j["patch"] = rc.train.patch;
  j["seed"] = rc.train.seed;
  j["max_steps"] = rc.train.max_steps;
  j["val_triplets"] = rc.train.val_triplets;
  return j;
}

model::RunConfig config_from_json(const json& j) {
  model::RunConfig rc;
  rc.model.channels = j.at("channels").get<int>();
  rc.model.units = j.at("units").get<int>();
  rc.model.scale = j.at("scale").get<int>();
  rc.model.pyramid_levels = j.at("pyramid_levels").get<int>();
  rc.model.deform_groups = j.at("deform_groups").get<int>();
  rc.model.kernel = j.at("kernel").get<int>();
  rc.model.fusion_resblocks = j.at("fusion_resblocks").get<int>();
  rc.model.fe_resblocks = j.at("fe_resblocks").get<int>();
  rc.model.use_modulation = j.at("use_modulation").get<bool>();
  rc.model.variant = j.at("variant").get<std::string>().at(0);
  rc.model.plain_blocks = j.at("plain_blocks").get<int>();
  rc.schedule.base_lr = j.at("base_lr").get<double>();
  rc.schedule.decay_factor = j.at("decay_factor").get<double>();
  rc.schedule.decay_every = j.at("decay_every").get<int>();
  rc.schedule.total_epochs = j.at("total_epochs").get<int>();
  rc.train.batch = j.at("batch").get<int>();
  rc.train.patch = j.at("patch").get<int>();
  rc.train.seed = j.at("seed").get<uint64_t>();
  rc.train.max_steps = j.at("max_steps").get<int>();
  rc.train.val_triplets = j.at("val_triplets").get<int>();
  return rc;
}

}  // namespace

void save_checkpoint(const std::string& dir, const model::Network<float>& net,
                     const Adamax<float>& opt, const CheckpointMeta& meta) {
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = 1;
  manifest["epoch"] = meta.epoch;
  manifest["step"] = meta.step;
  manifest["opt_step"] = opt.step_count();
  double best = meta.best_val_psnr;
  if (std::isinf(best)) best = 1e300;  // JSON has no inf
  manifest["best_val_psnr"] = best;
  manifest["config"] = config_json(meta.config);

  json tensors = json::object();
  for (const auto& [name, p] : net.params().all()) {
    json t;
    t["shape"] = shape_json(p->value.shape);
    t["dtype"] = "f32";
    t["file"] = "params/" + name + ".bin";
    tensors[name] = t;
    write_blob(fs::path(dir) / "params" / (name + ".bin"), p->value);
  }
  manifest["tensors"] = tensors;

  const auto& mm = opt.moment_m();
  const auto& uu = opt.moment_u();
  json moments = json::object();
  for (const auto& [name, p] : net.params().all()) {
    auto im = mm.find(name);
    auto iu = uu.find(name);
    if (im == mm.end() || iu == uu.end()) continue;
    moments[name] = true;
    write_blob(fs::path(dir) / "m" / (name + ".bin"), im->second);
    write_blob(fs::path(dir) / "u" / (name + ".bin"), iu->second);
  }
  manifest["moments"] = moments;

  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw ConfigError("checkpoint: cannot write manifest in '" + dir + "'");
  out << manifest.dump(2) << "\n";
}

LoadedCheckpoint load_checkpoint(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw ConfigError("checkpoint: cannot open '" + dir + "/manifest.json'");
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint: bad manifest: " + std::string(e.what()));
  }
  LoadedCheckpoint ck;
  ck.meta.epoch = manifest.at("epoch").get<int>();
  ck.meta.step = manifest.at("step").get<int64_t>();
  ck.opt_step = manifest.at("opt_step").get<int64_t>();
  ck.meta.best_val_psnr = manifest.at("best_val_psnr").get<double>();
  if (ck.meta.best_val_psnr >= 1e300)
    ck.meta.best_val_psnr = std::numeric_limits<double>::infinity();
  ck.meta.config = config_from_json(manifest.at("config"));
  for (auto& [name, t] : manifest.at("tensors").items()) {
    Shape s = shape_from_json(t.at("shape"));
    ck.params[name] = read_blob(fs::path(dir) / t.at("file").get<std::string>(), s);
    fs::path mp = fs::path(dir) / "m" / (name + ".bin");
    if (manifest.at("moments").contains(name)) {
      ck.m[name] = read_blob(mp, s);
      ck.u[name] = read_blob(fs::path(dir) / "u" / (name + ".bin"), s);
    }
  }
  return ck;
}

void restore(const LoadedCheckpoint& ck, model::Network<float>& net, Adamax<float>& opt) {
  for (const auto& [name, p] : net.params().all()) {
    auto it = ck.params.find(name);
    if (it == ck.params.end())
      throw ConfigError("checkpoint: missing tensor '" + name + "'");
    if (it->second.shape != p->value.shape)
      throw ConfigError("checkpoint: shape mismatch for '" + name + "'");
    p->value = it->second;
    auto im = ck.m.find(name);
    if (im != ck.m.end()) {
      opt.moment_m()[name] = im->second;
      opt.moment_u()[name] = ck.u.at(name);
    }
  }
  if (ck.params.size() != net.params().all().size())
    throw ConfigError("checkpoint: tensor count mismatch");
  opt.set_step_count(ck.opt_step);
}

}  // namespace train
}  // namespace stvsr
