#pragma once

#include <cstdint>
#include <string>

namespace stvsr {
namespace model {

// Architecture hyperparameters. Defaults are the full configuration; the
// ablation variants reuse the same struct ('a'..'d', 'd' = full network).
struct ModelConfig {
  int channels = 64;          // feature width C
  int units = 6;              // M up-projection units (M-1 down units)
  int scale = 4;              // {2, 4, 8}
  int pyramid_levels = 3;     // offset-estimation pyramid depth P
  int deform_groups = 8;      // G, divides channels
  int kernel = 3;             // deformable kernel edge (taps = kernel^2)
  int fusion_resblocks = 2;   // N per scale-up/scale-down module
  int fe_resblocks = 5;       // residual blocks in the feature extractor
  bool use_modulation = true;
  char variant = 'd';
  int plain_blocks = 0;       // variant c resblocks per unit; 0 = budget-matched

  int taps() const { return kernel * kernel; }
  void validate() const;
};

struct Schedule {
  double base_lr = 4e-4;
  double decay_factor = 0.1;
  int decay_every = 20;  // epochs
  int total_epochs = 70;

  void validate() const;
};

double lr_at(const Schedule& s, int epoch);

struct TrainOptions {
  int batch = 10;
  int patch = 64;      // LR patch; 0 = full frame
  uint64_t seed = 1;
  int max_steps = 0;   // 0 = run total_epochs
  int val_triplets = 32;
  bool keep_epoch_checkpoints = false;
  bool data_abort_on_error = false;
  std::string out_dir;
};

// Flat key=value config file mirroring the field names above ('#' comments).
// Unknown keys are rejected.
struct RunConfig {
  ModelConfig model;
  Schedule schedule;
  TrainOptions train;
};

RunConfig load_run_config(const std::string& path);
void apply_config_line(RunConfig& rc, const std::string& key, const std::string& value);
std::string run_config_to_text(const RunConfig& rc);

}  // namespace model
}  // namespace stvsr
