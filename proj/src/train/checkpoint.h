#pragma once

#include <map>
#include <string>

#include "model/network.h"
#include "train/adamax.h"

namespace stvsr {
namespace train {

struct CheckpointMeta {
  model::RunConfig config;
  int epoch = 0;
  int64_t step = 0;
  double best_val_psnr = -1.0;
};

// Directory layout: manifest.json (shapes, dtypes, config, counters) plus one
// little-endian float32 blob per tensor under params/, m/ and u/. Writing the
// same state twice produces byte-identical files.
void save_checkpoint(const std::string& dir, const model::Network<float>& net,
                     const Adamax<float>& opt, const CheckpointMeta& meta);

struct LoadedCheckpoint {
  CheckpointMeta meta;
  int64_t opt_step = 0;
  std::map<std::string, Tensor<float>> params, m, u;
};

LoadedCheckpoint load_checkpoint(const std::string& dir);

// Validates names/shapes against the freshly built network, then installs
// parameters and optimizer state.
void restore(const LoadedCheckpoint& ck, model::Network<float>& net, Adamax<float>& opt);

}  // namespace train
}  // namespace stvsr
